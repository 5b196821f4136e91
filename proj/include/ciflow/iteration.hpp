#pragma once
// Multi-step driving of the perturbation step with norm bookkeeping, plus
// the per-term stress diagnostics table: measured L^inf_t L^1_x size of each
// assembled contribution next to the symbolic bound evaluated at the step's
// parameters.

#include "ciflow/step.hpp"

namespace ciflow {

struct IterationStepRecord {
    ParamSet params;
    double delta_target = 0.0;       // delta_{q+1} used by the cutoffs
    double R_in_l1 = 0.0;            // ||R_q|| before the step
    double R_out_l1 = 0.0;           // ||R_{q+1}|| after
    double dv_l2 = 0.0;              // ||v_{q+1} - v_q||_{L^inf L^2}
    double weighted_dv_l1 = 0.0;     // |grad|^{3/2} T_M difference norm
    double max_residual_l2 = 0.0;
    bool support_contained = true;
    bool exact_time_derivatives = true;
    StepReport step;
};

struct IterationReport {
    double epsilon = 0.0;
    double delta1 = 0.0;
    std::vector<IterationStepRecord> steps;
};

struct IterationConfig {
    StepConfig step;
    NormConfig norms{1.25, 343, 1.3};
    bool keep_states = true;   // materialize every intermediate state
    int epsilon_samples = 2000;
    uint64_t epsilon_seed = 2024;
};

// delta schedule: delta_1 = ||R_0||, delta_q = epsilon 2^{-q} afterwards.
inline double delta_schedule(double delta1, double epsilon, int q) {
    if (q <= 1) return delta1;
    return epsilon * std::pow(2.0, -double(q));
}

// Runs n steps from the initial triple; params_per_step[q] drives step q.
// Norms are measured and reported, never asserted (desk-scale runs do not
// reach the asymptotic smallness regime).
inline IterationReport run_iteration(const TripleState& initial, double epsilon,
                                     const std::vector<ParamSet>& params_per_step,
                                     const IterationConfig& cfg,
                                     std::vector<TripleState>* states_out = nullptr) {
    IterationReport rep;
    rep.epsilon = epsilon;
    rep.delta1 = linf_l1(initial.R, cfg.norms);
    GammaSolver solver;
    double eps_lambda = estimate_epsilon_lambda(solver, cfg.epsilon_samples, cfg.epsilon_seed).value;

    TripleState current = initial;
    if (states_out) states_out->push_back(current);
    for (size_t q = 0; q < params_per_step.size(); ++q) {
        const ParamSet& prm = params_per_step[q];
        IterationStepRecord rec;
        rec.params = prm;
        rec.delta_target = delta_schedule(rep.delta1, epsilon, int(q) + 1);
        rec.R_in_l1 = linf_l1(current.R, cfg.norms);
        rec.exact_time_derivatives = current.R.has_ddt();

        auto blocks = build_block_family(prm, current.v.times());
        MemorySink sink;
        StepConfig scfg = cfg.step;
        StepReport srep = assemble_step(current, prm, rec.delta_target, blocks, solver,
                                        eps_lambda, scfg, &sink);
        TripleState next = sink.to_state(prm);

        rec.R_out_l1 = srep.R1_linf_l1;
        rec.dv_l2 = srep.dv_linf_l2;
        rec.weighted_dv_l1 = srep.weighted_dv_linf_l1;
        rec.max_residual_l2 = srep.max_residual_l2;
        rec.support_contained = srep.support_contained;
        rec.step = std::move(srep);
        rep.steps.push_back(std::move(rec));

        current = std::move(next);
        if (states_out) states_out->push_back(current);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Per-term stress diagnostics (the eight assembled contributions).

struct DiagnosticsRow {
    std::string name;
    double measured_l1 = 0.0;   // sup over the sampled times of the L1 norm
    double symbolic_bound = 0.0;
    std::string bound_formula;
};

struct DiagnosticsTable {
    std::vector<DiagnosticsRow> rows;
    double corrector_cauchy_schwarz = 0.0;  // product of measured L2 norms
    double sum_of_rows = 0.0;
    double combined_l1 = 0.0;               // || sum of contributions ||_L1
    std::array<double, 6> c_a{};            // C_a(0..5) = sup_{n<=N} ||a||_{C^n}
};

namespace detail {

// B . grad(s) as a complex scalar field.
inline SpectralField b_dot_gradient(const SpectralField& s, const Vec3c& B) {
    std::vector<ModeKey> keys = s.keys();
    std::vector<cplx> coef(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        IVec3 k = unpack_key(keys[i]);
        cplx ik0(0.0, double(k[0])), ik1(0.0, double(k[1])), ik2(0.0, double(k[2]));
        coef[i] = (ik0 * B(0) + ik1 * B(1) + ik2 * B(2)) * s.coeffs()[i];
    }
    return SpectralField::from_rows(Rank::scalar, std::move(keys), std::move(coef));
}

inline SpectralField scalar_times_const_vec(const SpectralField& s, const Vec3c& B) {
    std::vector<ModeKey> keys = s.keys();
    std::vector<cplx> coef(keys.size() * 3);
    for (size_t i = 0; i < keys.size(); ++i)
        for (int c = 0; c < 3; ++c) coef[i * 3 + size_t(c)] = s.coeffs()[i] * B(c);
    return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
}

}  // namespace detail

// Evaluates the eight-term table at the given sample indices (empty = all).
inline DiagnosticsTable diagnostics_rq1(const TripleState& state, const ParamSet& prm,
                                        double delta_next, const std::vector<BuildingBlock>& blocks,
                                        const GammaSolver& solver, double eps_lambda,
                                        const StepConfig& cfg, std::vector<size_t> sample_idx = {}) {
    DiagnosticsTable table;
    const DirectionSet& ds = direction_set();
    const double lam = double(prm.lam);
    const double ls = prm.lam_sigma();
    const double L = std::log(lam);
    const double sr = prm.sigma.value() * double(prm.r);
    const double r32 = std::pow(double(prm.r), 1.5);

    CutoffPair cut = build_cutoffs(state.R, delta_next, cfg.support_tol);
    AmplitudeSet amps = build_amplitudes(state.R, cut, delta_next, eps_lambda, solver, cfg.amp);

    // C_a(N): sup over directions of the C^N seminorm of the amplitudes
    HolderConfig hcfg;
    for (int N = 0; N <= 5; ++N) {
        double worst = 0.0;
        for (int j = 0; j < 6; ++j) worst = std::max(worst, holder_seminorm(amps.a[size_t(j)], N, hcfg));
        table.c_a[size_t(N)] = worst;
    }

    if (sample_idx.empty())
        for (size_t i = 0; i < state.v.nsamples(); ++i) sample_idx.push_back(i);

    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    std::array<double, 8> measured{};
    double cauchy = 0.0, combined = 0.0;
    NormConfig rn = cfg.report_norms;

    for (size_t i : sample_idx) {
        SampleParts parts = build_sample_parts(amps, blocks, prm, i, cfg.mult);
        if (parts.wp.empty()) continue;
        SpectralField u = parts.wc.plus(parts.wt);
        SpectralField w = parts.wp.plus(u);

        // 1) corrector tensor
        SpectralField Tc = outer_self(w, cfg.mult).minus(outer_self(parts.wp, cfg.mult));
        double m1 = lp_norm(Tc, 1.0, rn);
        // 2) linear transport tensor
        SpectralField Tl(Rank::tensor3x3_symmetric);
        if (!state.v.at(i).empty()) {
            MultiplyOptions sp = cfg.mult;
            sp.force_sparse = true;
            Tl = sym_outer(state.v.at(i), w, sp).scaled(2.0);
        }
        double m2n = Tl.empty() ? 0.0 : lp_norm(Tl, 1.0, rn);
        // 3) time derivative of wc + wp
        double m3 = lp_norm(anti_divergence(parts.dwp.plus(parts.dwc)), 1.0, rn);
        // 4) dissipation of wp + wc
        double m4 = lp_norm(anti_divergence(apply(D, parts.wp.plus(parts.wc)).scaled(prm.nu)), 1.0, rn);
        // 5) dissipation of wt
        double m5 = parts.wt.empty() ? 0.0
                    : lp_norm(anti_divergence(apply(D, parts.wt).scaled(prm.nu)), 1.0, rn);

        // 6/7/8) pairwise oscillation remainders
        SpectralField b6(Rank::vector3), b7(Rank::vector3), b8(Rank::vector3);
        for (size_t a = 0; a < 12; ++a)
            for (size_t b = a; b < 12; ++b) {
                const Direction& da = ds.at(a);
                const Direction& db = ds.at(b);
                size_t ja = size_t(da.positive_index), jb = size_t(db.positive_index);
                if (parts.a[ja].empty() || parts.a[jb].empty()) continue;
                SpectralField q = mult_scalar(parts.a[ja], parts.a[jb], cfg.mult);
                SpectralField gq = gradient(q);
                SpectralField m2 = mult_scalar(blocks[a].eta.at(i), blocks[b].eta.at(i), cfg.mult);
                IVec3 shift = int32_t(prm.lam / 5) * (da.xi5 + db.xi5);
                bool second_case = shift == IVec3{0, 0, 0};
                Vec3c B1 = da.polarization(), B2 = db.polarization();
                // fluctuation envelope with the shifted shell filter
                SpectralField Mf = m2.filtered([&](const IVec3& k) { return !((k + shift) == IVec3{0, 0, 0}); });
                SpectralField Mhi = Mf.filtered(
                    [&](const IVec3& k) { return double(l1_norm(k + shift)) >= ls / 2.0; });
                // E1-type: grad(q) . Y_fluct
                SpectralField e1 = multiply(detail::b_dot_gradient(q, B1), Mhi,
                                            ProductKind::scalar_scalar, cfg.mult);
                SpectralField t1 = detail::scalar_times_const_vec(e1.shifted(shift), B2);
                b6 = b6.plus(t1);
                if (a != b) {
                    SpectralField e2 = multiply(detail::b_dot_gradient(q, B2), Mhi,
                                                ProductKind::scalar_scalar, cfg.mult);
                    b6 = b6.plus(detail::scalar_times_const_vec(e2.shifted(shift), B1));
                }
                if (second_case) {
                    // -s2 grad(a^2) and the (xi/mu) dt(a^2) eta^2 remainder
                    SpectralField s2 = project_shell(remove_mean(parts.eta2[ja]),
                                                     ShellInterval::at_least(ls / 2.0));
                    b6 = b6.plus(multiply(s2, gq, ProductKind::scale, cfg.mult), cplx(-1.0, 0.0));
                    SpectralField d2 = mult_scalar(parts.da2[ja], parts.eta2[ja], cfg.mult);
                    Vec3d xi = ds.positive(ja).xi();
                    b8 = b8.plus(remove_mean(vec_times(d2, xi)), cplx(1.0 / prm.mu, 0.0));
                } else {
                    cplx dotc = B1(0) * B2(0) + B1(1) * B2(1) + B1(2) * B2(2);
                    if (std::abs(dotc) > 1e-15) {
                        SpectralField M = m2.shifted(shift);
                        b6 = b6.plus(multiply(M, gq, ProductKind::scale, cfg.mult), -dotc);
                        SpectralField vc = multiply(q, gradient(m2), ProductKind::scale, cfg.mult);
                        b7 = b7.plus(vc.shifted(shift), -dotc);
                    }
                    SpectralField va1 = multiply(q, detail::b_dot_gradient(m2, B1),
                                                 ProductKind::scalar_scalar, cfg.mult);
                    b7 = b7.plus(detail::scalar_times_const_vec(va1.shifted(shift), B2));
                    SpectralField va2 = multiply(q, detail::b_dot_gradient(m2, B2),
                                                 ProductKind::scalar_scalar, cfg.mult);
                    b7 = b7.plus(detail::scalar_times_const_vec(va2.shifted(shift), B1));
                }
            }
        double m6 = b6.empty() ? 0.0 : lp_norm(anti_divergence(b6), 1.0, rn);
        double m7 = b7.empty() ? 0.0 : lp_norm(anti_divergence(b7), 1.0, rn);
        double m8 = b8.empty() ? 0.0 : lp_norm(anti_divergence(b8), 1.0, rn);

        measured[0] = std::max(measured[0], m1);
        measured[1] = std::max(measured[1], m2n);
        measured[2] = std::max(measured[2], m3);
        measured[3] = std::max(measured[3], m4);
        measured[4] = std::max(measured[4], m5);
        measured[5] = std::max(measured[5], m6);
        measured[6] = std::max(measured[6], m7);
        measured[7] = std::max(measured[7], m8);

        // Cauchy-Schwarz check data for the corrector row
        double wpn = l2_norm_parseval(parts.wp), un = l2_norm_parseval(u), wn = l2_norm_parseval(w);
        cauchy = std::max(cauchy, wpn * un + un * wn);
        // triangle inequality: sum of rows vs the norm of the summed tensors
        SpectralField total = Tc.plus(Tl)
                                  .plus(anti_divergence(parts.dwp.plus(parts.dwc)))
                                  .plus(anti_divergence(apply(D, w).scaled(prm.nu)))
                                  .plus(anti_divergence(b6.plus(b7).plus(b8)));
        combined = std::max(combined, lp_norm(total, 1.0, rn));
    }

    double delta_half = std::sqrt(delta_next);
    double va = 1.0 / lam + sr + r32 / prm.mu;
    double vinf = 0.0;
    for (size_t i = 0; i < state.v.nsamples(); ++i)
        if (!state.v.at(i).empty()) vinf = std::max(vinf, grid_max_abs(state.v.at(i), norm_grid(state.v.at(i), rn, 2.0)));

    const char* names[8] = {
        "corrector w_p(x)(w_c+w_t)+(w_c+w_t)(x)w",
        "linear transport v_q(x)w + w(x)v_q",
        "R dt(w_c + w_p)",
        "R dissipation(w_p + w_c)",
        "R dissipation(w_t)",
        "oscillation gradient terms",
        "oscillation carrier terms",
        "(xi/mu) dt(a^2) eta^2",
    };
    double bounds[8] = {
        table.c_a[1] * va * (va + delta_half + 1.0 / std::sqrt(ls)),
        table.c_a[0] * vinf * std::pow(double(prm.r), 1.5 - 3.0 / prm.s),
        table.c_a[1] * prm.sigma.value() * prm.mu / std::sqrt(double(prm.r)) * L,
        table.c_a[2] * std::pow(lam / double(prm.r), 1.5) * std::pow(L, 4.0 - prm.beta),
        table.c_a[2] * std::pow(ls * double(prm.r), 1.5) / prm.mu * L,
        table.c_a[5] * std::pow(std::log(ls), 3.0) / ls * L * L,
        table.c_a[5] * std::pow(L, 5.0) * sr,
        table.c_a[5] * L * L / prm.mu,
    };
    const char* formulas[8] = {
        "C_a(1)(1/lam+sig r+r^{3/2}/mu)(...+delta^{1/2}+(lam sig)^{-1/2})",
        "C_a(0)||v||_inf r^{3/2-3/s}",
        "C_a(1) sig mu r^{-1/2} log(lam)",
        "C_a(2)(lam/r)^{3/2} log^{4-beta}(lam)",
        "C_a(2)(lam sig r)^{3/2}/mu log(lam)",
        "C_a(5) log^3(lam sig)/(lam sig) log^2(lam)",
        "C_a(5) log^5(lam) sig r",
        "C_a(5) log^2(lam)/mu",
    };
    for (int row = 0; row < 8; ++row)
        table.rows.push_back({names[row], measured[size_t(row)], bounds[size_t(row)], formulas[row]});
    table.corrector_cauchy_schwarz = cauchy;
    table.combined_l1 = combined;
    for (auto& r : table.rows) table.sum_of_rows += r.measured_l1;
    return table;
}

}  // namespace ciflow
