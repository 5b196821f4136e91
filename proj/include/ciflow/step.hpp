#pragma once
// One full perturbation step: v_{q+1} = v_q + w with the stress and pressure
// reassembled so that the approximate system holds to rounding at every
// sample.  The large oscillation terms are cancelled against the pressure
// exactly (the computed fields, not their idealizations, are moved around),
// so no term of the decomposition is dropped.

#include "ciflow/anti_divergence.hpp"
#include "ciflow/multiplier.hpp"
#include "ciflow/norms.hpp"
#include "ciflow/perturbation.hpp"

namespace ciflow {

struct TripleState {
    TimeField v;  // vector, divergence-free, zero mean
    TimeField p;  // scalar, zero mean
    TimeField R;  // symmetric trace-free tensor
    ParamSet params;
};

struct TripleCheck {
    double div_residual = 0.0;
    double trace_residual = 0.0;
    double reality_defect = 0.0;
    double mean_v = 0.0;
};

inline TripleCheck check_triple(const TripleState& st) {
    TripleCheck out;
    for (size_t i = 0; i < st.v.nsamples(); ++i) {
        const SpectralField& v = st.v.at(i);
        if (!v.empty()) out.div_residual = std::max(out.div_residual, divergence(v).max_abs());
        for (cplx m : v.mean()) out.mean_v = std::max(out.mean_v, std::abs(m));
        out.reality_defect = std::max(out.reality_defect, v.reality_defect());
        const SpectralField& R = st.R.at(i);
        if (!R.empty()) out.trace_residual = std::max(out.trace_residual, tensor_trace(R).max_abs());
    }
    return out;
}

// rho I as a symmetric tensor field.
inline SpectralField diag_tensor(const SpectralField& rho) {
    SpectralField out(Rank::tensor3x3_symmetric);
    for (size_t i = 0; i < rho.nmodes(); ++i) {
        IVec3 k = rho.mode(i);
        cplx v = rho.coeffs()[i];
        out.add(k, 0, v);
        out.add(k, 3, v);
        out.add(k, 5, v);
    }
    out.normalize();
    return out;
}

inline SpectralField vec_times(const SpectralField& s, const Vec3d& xi) {
    std::vector<ModeKey> keys = s.keys();
    std::vector<cplx> coef(keys.size() * 3);
    for (size_t q = 0; q < keys.size(); ++q)
        for (int c = 0; c < 3; ++c) coef[q * 3 + size_t(c)] = s.coeffs()[q] * xi(c);
    return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
}

// ---------------------------------------------------------------------------
// verify_approx: strong residual of the approximate system at every sample.

struct ResidualReport {
    std::vector<double> l2;          // per-sample L2 norm of the residual
    std::vector<double> l1;          // per-sample L1 norm
    double max_l2 = 0.0;
    double max_l1 = 0.0;
};

inline SpectralField residual_at(const TimeField& v, const TimeField& p, const TimeField& R,
                                 const ParamSet& prm, size_t i, const MultiplyOptions& mult = {},
                                 const SpectralField* v_ddt_override = nullptr) {
    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    SpectralField dv = v_ddt_override ? *v_ddt_override : time_derivative_at(v, i);
    SpectralField res = dv;
    const SpectralField& vi = v.at(i);
    if (!vi.empty()) {
        res = res.plus(divergence(outer_self(vi, mult)));
        res = res.plus(apply(D, vi), cplx(prm.nu, 0.0));
    }
    if (!p.at(i).empty()) res = res.plus(gradient(p.at(i)));
    if (!R.at(i).empty()) res = res.minus(divergence(R.at(i)));
    return res;
}

inline ResidualReport verify_approx(const TripleState& st, const MultiplyOptions& mult = {},
                                    const NormConfig& ncfg = {}) {
    ResidualReport rep;
    for (size_t i = 0; i < st.v.nsamples(); ++i) {
        SpectralField res = residual_at(st.v, st.p, st.R, st.params, i, mult);
        double l2 = l2_norm_parseval(res);
        double l1 = res.empty() ? 0.0 : lp_norm(res, 1.0, ncfg);
        rep.l2.push_back(l2);
        rep.l1.push_back(l1);
        rep.max_l2 = std::max(rep.max_l2, l2);
        rep.max_l1 = std::max(rep.max_l1, l1);
    }
    return rep;
}

// Weak-form residual against a divergence-free test field (pairings are
// Parseval sums in space, trapezoid in time).
inline double weak_residual(const TripleState& st, const TimeField& phi, const ParamSet& prm,
                            const MultiplyOptions& mult = {}) {
    st.v.check_same_grid(phi);
    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    auto pair_fields = [](const SpectralField& a, const SpectralField& b) {
        // mean of a.b (componentwise contraction; full tensor assumed)
        if (a.empty() || b.empty()) return 0.0;
        double s = 0.0;
        const int nc = a.ncomp();
        for (size_t i = 0; i < a.nmodes(); ++i) {
            IVec3 k = a.mode(i);
            for (int c = 0; c < nc; ++c) {
                cplx bc = b.coeff(k, c);
                s += (a.row(i)[c] * std::conj(bc)).real();
            }
        }
        return s;
    };
    // grad of a vector field as a full tensor: (i,j) -> d_i phi_j
    auto grad_vec = [](const SpectralField& u) {
        std::vector<ModeKey> keys = u.keys();
        std::vector<cplx> coef(keys.size() * 9);
        for (size_t q = 0; q < keys.size(); ++q) {
            IVec3 k = unpack_key(keys[q]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    coef[q * 9 + size_t(full_index(i, j))] =
                        cplx(0.0, double(k[size_t(i)])) * u.row(q)[j];
        }
        return SpectralField::from_rows(Rank::tensor3x3, std::move(keys), std::move(coef));
    };
    auto sym_to_full = [](const SpectralField& S) {
        std::vector<ModeKey> keys = S.keys();
        std::vector<cplx> coef(keys.size() * 9);
        for (size_t q = 0; q < keys.size(); ++q)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    coef[q * 9 + size_t(full_index(i, j))] = S.row(q)[sym_index(i, j)];
        return SpectralField::from_rows(Rank::tensor3x3, std::move(keys), std::move(coef));
    };
    std::vector<double> integrand(st.v.nsamples(), 0.0);
    for (size_t i = 0; i < st.v.nsamples(); ++i) {
        const SpectralField& v = st.v.at(i);
        SpectralField dphi = time_derivative_at(phi, i);
        double val = 0.0;
        val -= pair_fields(v, dphi);
        if (!v.empty()) {
            SpectralField vv = outer_self(v, mult);
            val -= pair_fields(sym_to_full(vv), grad_vec(phi.at(i)));
            val += prm.nu * pair_fields(v, apply(D, phi.at(i)));
        }
        if (!st.R.at(i).empty()) val += pair_fields(sym_to_full(st.R.at(i)), grad_vec(phi.at(i)));
        integrand[i] = val;
    }
    double total = 0.0;
    for (size_t i = 1; i < integrand.size(); ++i)
        total += 0.5 * (integrand[i] + integrand[i - 1]) * (st.v.time(i) - st.v.time(i - 1));
    return total;
}

// ---------------------------------------------------------------------------
// Bootstrap: (v0, p0, R0) from a smooth divergence-free zero-mean field.

struct TimeProfile {
    std::function<double(double)> f, df, d2f;
};

// C^3 polynomial bump supported on [t0, t1], peak value 1.
inline TimeProfile poly_bump(double t0, double t1) {
    double T = t1 - t0;
    auto u = [t0, T](double t) { return (t - t0) / T; };
    TimeProfile out;
    out.f = [u](double t) {
        double s = u(t);
        if (s <= 0.0 || s >= 1.0) return 0.0;
        double q = s * (1.0 - s);
        return 256.0 * q * q * q * q;
    };
    out.df = [u, T](double t) {
        double s = u(t);
        if (s <= 0.0 || s >= 1.0) return 0.0;
        double q = s * (1.0 - s);
        return 256.0 * 4.0 * q * q * q * (1.0 - 2.0 * s) / T;
    };
    out.d2f = [u, T](double t) {
        double s = u(t);
        if (s <= 0.0 || s >= 1.0) return 0.0;
        double q = s * (1.0 - s);
        return 256.0 * (12.0 * q * q * (1.0 - 2.0 * s) * (1.0 - 2.0 * s) - 8.0 * q * q * q) / (T * T);
    };
    return out;
}

// Bootstrap from the separable field u(t,x) = phi(t) V(x).
inline TripleState bootstrap_separable(const SpectralField& V, const TimeProfile& phi,
                                       const std::vector<double>& times, const ParamSet& prm,
                                       const MultiplyOptions& mult = {}) {
    if (V.rank() != Rank::vector3) fail(Errc::rank_mismatch, "bootstrap expects a vector field");
    if (divergence(V).max_abs() > 1e-11 * std::max(V.max_abs(), 1e-300))
        fail(Errc::not_divergence_free, "bootstrap profile must be divergence-free");
    for (cplx m : V.mean())
        if (std::abs(m) > 1e-13) fail(Errc::nonzero_mean, "bootstrap profile must have zero mean");

    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    SpectralField DV = apply(D, V).scaled(prm.nu);
    SpectralField VV = outer_self(V, mult);              // V (x) V
    SpectralField dotVV = tensor_trace(VV);              // |V|^2 as computed from the product
    SpectralField p_base = remove_mean(dotVV).scaled(-1.0 / 3.0);
    // trace-free stress piece: V (x) V - (|V|^2/3) I  (full trace, so the
    // pointwise trace cancels exactly)
    SpectralField VVtf = VV.minus(diag_tensor(dotVV.scaled(1.0 / 3.0)));
    SpectralField RV = anti_divergence(V);               // R(V), reused for d/dt terms
    SpectralField RDV = anti_divergence(DV);

    std::vector<SpectralField> vs, dvs, ps, Rs, dRs;
    for (double t : times) {
        double f = phi.f(t), df = phi.df(t), d2f = phi.d2f(t);
        vs.push_back(V.scaled(f));
        dvs.push_back(V.scaled(df));
        ps.push_back(p_base.scaled(f * f));
        // R0 = R(dt v0 + nu D v0) + v0 (x) v0 + p0 I (trace-free form)
        SpectralField R = RV.scaled(df).plus(RDV.scaled(f)).plus(VVtf, cplx(f * f, 0.0));
        Rs.push_back(R);
        SpectralField dR = RV.scaled(d2f).plus(RDV.scaled(df)).plus(VVtf, cplx(2.0 * f * df, 0.0));
        dRs.push_back(dR);
    }
    TripleState st;
    st.params = prm;
    st.v = TimeField(times, std::move(vs));
    st.v.set_ddt(std::move(dvs));
    st.p = TimeField(times, std::move(ps));
    st.R = TimeField(times, std::move(Rs));
    st.R.set_ddt(std::move(dRs));
    return st;
}

// Generic bootstrap from a sampled field with exact first (and optionally
// second) time derivatives.
inline TripleState bootstrap(const TimeField& u, const ParamSet& prm,
                             const TimeField* u_ddt2 = nullptr, const MultiplyOptions& mult = {}) {
    if (!u.has_ddt()) fail(Errc::param_violation, "bootstrap needs exact time derivatives on u");
    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    std::vector<SpectralField> vs, dvs, ps, Rs, dRs;
    for (size_t i = 0; i < u.nsamples(); ++i) {
        const SpectralField& V = u.at(i);
        if (!V.empty() && divergence(V).max_abs() > 1e-11 * V.max_abs())
            fail(Errc::not_divergence_free, "bootstrap field must be divergence-free");
        for (cplx m : V.mean())
            if (std::abs(m) > 1e-13) fail(Errc::nonzero_mean, "bootstrap field must have zero mean");
        const SpectralField& dV = u.ddt_at(i);
        SpectralField VV = outer_self(V, mult);
        SpectralField dotVV = tensor_trace(VV);
        vs.push_back(V);
        dvs.push_back(dV);
        ps.push_back(remove_mean(dotVV).scaled(-1.0 / 3.0));
        SpectralField R = anti_divergence(dV.plus(apply(D, V), cplx(prm.nu, 0.0)))
                              .plus(VV.minus(diag_tensor(dotVV.scaled(1.0 / 3.0))));
        Rs.push_back(R);
        if (u_ddt2) {
            const SpectralField& d2V = u_ddt2->at(i);
            SpectralField dVV = sym_outer(V, dV, mult).scaled(2.0);
            SpectralField ddot = tensor_trace(dVV);
            dRs.push_back(anti_divergence(d2V.plus(apply(D, dV), cplx(prm.nu, 0.0)))
                              .plus(dVV.minus(diag_tensor(ddot.scaled(1.0 / 3.0)))));
        }
    }
    TripleState st;
    st.params = prm;
    st.v = TimeField(u.times(), std::move(vs));
    st.v.set_ddt(std::move(dvs));
    st.p = TimeField(u.times(), std::move(ps));
    st.R = TimeField(u.times(), std::move(Rs));
    if (!dRs.empty()) st.R.set_ddt(std::move(dRs));
    return st;
}

// ---------------------------------------------------------------------------
// assemble_step

struct StepConfig {
    AmplitudeConfig amp;
    MultiplyOptions mult;
    NormConfig report_norms{1.25, 343, 1.3};  // L1 quadrature for the reports
    double support_tol = 1e-13;
    bool verify = true;
    bool cross_check = true;
    bool compute_l1_norms = true;
    uint64_t epsilon_seed = 2024;
    int epsilon_samples = 2000;
};

struct StepSampleRecord {
    double t = 0.0;
    double residual_l2 = 0.0;
    double residual_l1 = 0.0;
    double cross_check_l2 = 0.0;   // Div R1 vs anti-divergence of the full residual
    double mean_defect = 0.0;      // |mean of the pre-antidivergence vector|
    double R1_l1 = 0.0;
    double w_l2 = 0.0;
    double weighted_w_l1 = 0.0;    // |grad|^{3/2} T_M w in L1
    bool v_active = false, R_active = false;
};

struct StepReport {
    std::vector<StepSampleRecord> samples;
    double delta_next = 0.0;
    double eps_lambda = 0.0;
    double R1_linf_l1 = 0.0;
    double dv_linf_l2 = 0.0;
    double weighted_dv_linf_l1 = 0.0;
    double max_residual_l2 = 0.0;
    double max_cross_check = 0.0;
    double curl_identity_residual = 0.0;
    double support_lo = 0.0, support_hi = 0.0;       // output support hull
    double allowed_lo = 0.0, allowed_hi = 0.0;       // N_delta of the input support
    bool support_contained = true;
    AmplitudeSet amplitudes_summary_only;            // summary fields are read; time fields empty
    double amp_projection_error = 0.0;
    double amp_recover_residual = 0.0;
    bool ratio_within_half_eps = true;
};

// Streaming sink for the assembled samples; implementations may discard.
struct StepSink {
    virtual ~StepSink() = default;
    virtual void emit(size_t i, double t, SpectralField v1, SpectralField v1_ddt, SpectralField p1,
                      SpectralField R1) = 0;
};

struct MemorySink : StepSink {
    std::vector<double> times;
    std::vector<SpectralField> v, dv, p, R;
    void emit(size_t, double t, SpectralField v1, SpectralField v1_ddt, SpectralField p1,
              SpectralField R1) override {
        times.push_back(t);
        v.push_back(std::move(v1));
        dv.push_back(std::move(v1_ddt));
        p.push_back(std::move(p1));
        R.push_back(std::move(R1));
    }
    TripleState to_state(const ParamSet& prm) {
        TripleState st;
        st.params = prm;
        st.v = TimeField(times, std::move(v));
        st.v.set_ddt(std::move(dv));
        st.p = TimeField(times, std::move(p));
        st.R = TimeField(times, std::move(R));
        return st;
    }
};

struct NullSink : StepSink {
    void emit(size_t, double, SpectralField, SpectralField, SpectralField, SpectralField) override {}
};

inline StepReport assemble_step(const TripleState& state, const ParamSet& prm, double delta_next,
                                const std::vector<BuildingBlock>& blocks, const GammaSolver& solver,
                                double eps_lambda, const StepConfig& cfg, StepSink* sink) {
    require_params(prm);
    const std::vector<double>& times = state.v.times();
    StepReport rep;
    rep.delta_next = delta_next;
    rep.eps_lambda = eps_lambda;

    CutoffPair cut = build_cutoffs(state.R, delta_next, cfg.support_tol);
    AmplitudeSet amps = build_amplitudes(state.R, cut, delta_next, eps_lambda, solver, cfg.amp);
    rep.amp_projection_error = amps.projection_error;
    rep.amp_recover_residual = amps.recover_residual;
    rep.ratio_within_half_eps = amps.ratio_within_half_eps;

    MultiplierSymbol D = symbol_hyperdissipation(prm.theta, prm.beta);
    MultiplierSymbol weight = symbol_product(symbol_grad_power(1.5), symbol_log(prm.beta));
    const DirectionSet& ds = direction_set();
    const double lam_sigma = prm.lam_sigma();

    // input support hull for the containment check
    auto [in_lo, in_hi] = [&] {
        auto sv = state.v.support(cfg.support_tol);
        auto sR = state.R.support(cfg.support_tol);
        double lo = std::min(sv.second >= sv.first ? sv.first : 1e300,
                             sR.second >= sR.first ? sR.first : 1e300);
        double hi = std::max(sv.second >= sv.first ? sv.second : -1e300,
                             sR.second >= sR.first ? sR.second : -1e300);
        return std::pair<double, double>(lo, hi);
    }();
    rep.allowed_lo = in_lo - delta_next;
    rep.allowed_hi = in_hi + delta_next;

    double out_lo = 1e300, out_hi = -1e300;

    for (size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        StepSampleRecord rec;
        rec.t = t;
        SampleParts parts = build_sample_parts(amps, blocks, prm, i, cfg.mult);

        SpectralField w = parts.wp.plus(parts.wc).plus(parts.wt);
        SpectralField dw = parts.dwp.plus(parts.dwc).plus(parts.dwt);
        SpectralField v1 = state.v.at(i).plus(w);
        SpectralField v1_ddt = state.v.ddt_at(i).plus(dw);

        SpectralField Dw = w.empty() ? SpectralField(Rank::vector3) : apply(D, w).scaled(prm.nu);

        // the two expensive products; the corrector tensor is their difference
        SpectralField P = w.empty() ? SpectralField(Rank::tensor3x3_symmetric)
                                    : outer_self(w, cfg.mult);  // w (x) w
        SpectralField WW = parts.wp.empty() ? SpectralField(Rank::tensor3x3_symmetric)
                                            : outer_self(parts.wp, cfg.mult);
        SpectralField T = P.minus(WW);  // wp (x) (wc+wt) + (wc+wt) (x) w
        if (!w.empty() && !state.v.at(i).empty())
            T = T.plus(sym_outer(state.v.at(i), w, cfg.mult).scaled(2.0));

        // oscillation: envelope means, pressures and the fluctuation vector
        SpectralField V(Rank::vector3);
        SpectralField dp(Rank::scalar);
        SpectralField G(Rank::tensor3x3_symmetric);
        if (!parts.wp.empty()) {
            // G = sum over unordered signed pairs of q * mean(envelope) *
            // (B1 B2^T + B2 B1^T); only +-xi pairs contribute structurally
            for (size_t a = 0; a < 12; ++a)
                for (size_t b = a; b < 12; ++b) {
                    const Direction& da = ds.at(a);
                    const Direction& db = ds.at(b);
                    size_t ja = size_t(da.positive_index), jb = size_t(db.positive_index);
                    if (parts.a[ja].empty() || parts.a[jb].empty()) continue;
                    // envelope mean: coefficient of eta_a eta_b at -lam(xi_a+xi_b)
                    SpectralField m2 = mult_scalar(blocks[a].eta.at(i), blocks[b].eta.at(i), cfg.mult);
                    IVec3 shift = int32_t(prm.lam / 5) * (da.xi5 + db.xi5);
                    cplx mean_c = m2.coeff(-shift);
                    if (std::abs(mean_c) == 0.0) continue;
                    SpectralField q = mult_scalar(parts.a[ja], parts.a[jb], cfg.mult);
                    Vec3c B1 = da.polarization(), B2 = db.polarization();
                    for (size_t qq = 0; qq < q.nmodes(); ++qq) {
                        IVec3 k = q.mode(qq);
                        cplx qv = q.coeffs()[qq] * mean_c;
                        for (int r = 0; r < 3; ++r)
                            for (int cc = r; cc < 3; ++cc) {
                                cplx m = a == b ? B1(r) * B1(cc)
                                                : B1(r) * B2(cc) + B2(r) * B1(cc);
                                G.add(k, sym_index(r, cc), qv * m);
                            }
                    }
                }
            G.normalize();

            // pressures: the first-case dot products (each unordered pair
            // once, diagonal pairs drop since B.B = 0; wp.wp is the trace of
            // the already-computed product), the projected eta^2 terms, and
            // the (I - P_H) part of dt w^t
            SpectralField p_osc1 = tensor_trace(WW).scaled(0.5);
            for (int j = 0; j < 6; ++j)
                if (!parts.a2[size_t(j)].empty())
                    p_osc1 = p_osc1.plus(mult_scalar(parts.a2[size_t(j)], parts.eta2[size_t(j)], cfg.mult),
                                         cplx(-1.0, 0.0));
            SpectralField p_osc2(Rank::scalar);
            SpectralField p_t(Rank::scalar);
            for (int j = 0; j < 6; ++j) {
                if (parts.a2[size_t(j)].empty()) continue;
                SpectralField s2 =
                    project_shell(remove_mean(parts.eta2[size_t(j)]), ShellInterval::at_least(lam_sigma / 2.0));
                p_osc2 = p_osc2.plus(mult_scalar(parts.a2[size_t(j)], s2, cfg.mult), cplx(-1.0, 0.0));
                Vec3d xi = ds.positive(size_t(j)).xi();
                SpectralField dt2v = remove_mean(vec_times(parts.dt2[size_t(j)], xi));
                p_t = p_t.plus(gradient_potential(dt2v), cplx(1.0 / prm.mu, 0.0));
            }
            dp = parts.rho.scaled(-1.0).plus(p_osc1, cplx(-1.0, 0.0)).plus(p_osc2).plus(p_t);

            // fluctuation vector: Div(wp (x) wp - G) + dt w^t + grad(p-parts)
            V = divergence(WW.minus(G));
            V = V.plus(parts.dwt);
            V = V.plus(gradient(p_osc1.scaled(-1.0).plus(p_osc2).plus(p_t)));
        }
        // the oscillation remainder R_q + G - rho I is carried exactly even
        // where the perturbation vanishes
        SpectralField Erec = state.R.at(i).plus(G).minus(diag_tensor(parts.rho));
        if (!Erec.empty()) T = T.plus(Erec);
        V = V.plus(Dw).plus(parts.dwp).plus(parts.dwc);

        double vmean = 0.0;
        for (cplx m : V.mean()) vmean = std::max(vmean, std::abs(m));
        rec.mean_defect = vmean;

        SpectralField R_raw = T.plus(anti_divergence(V));
        auto [R1, tr3] = remove_trace(R_raw);
        R1 = R1.truncated(cfg.mult.drop_tol);
        SpectralField p1 = remove_mean(state.p.at(i).plus(dp).minus(tr3));

        // verification against the strong form; v1 (x) v1 is reassembled
        // from the computed w (x) w plus sparse cross terms
        if (cfg.verify) {
            SpectralField res = v1_ddt;
            if (!v1.empty()) {
                SpectralField vv = P;
                const SpectralField& vq = state.v.at(i);
                if (!vq.empty()) {
                    MultiplyOptions sp = cfg.mult;
                    sp.force_sparse = true;
                    if (!w.empty()) vv = vv.plus(sym_outer(vq, w, sp).scaled(2.0));
                    vv = vv.plus(outer_self(vq, sp));
                }
                res = res.plus(divergence(vv));
                res = res.plus(apply(D, v1), cplx(prm.nu, 0.0));
            }
            if (!p1.empty()) res = res.plus(gradient(p1));
            SpectralField divR1 = divergence(R1);
            SpectralField full = res;  // dt v + div(v v) + nu D v + grad p
            res = res.minus(divR1);
            rec.residual_l2 = l2_norm_parseval(res);
            if (cfg.compute_l1_norms && !res.empty()) rec.residual_l1 = lp_norm(res, 1.0, cfg.report_norms);
            if (cfg.cross_check) {
                SpectralField R1b = anti_divergence(remove_mean(full));
                rec.cross_check_l2 = l2_norm_parseval(divR1.minus(divergence(R1b)));
            }
        }

        rec.w_l2 = l2_norm_parseval(w);
        if (cfg.compute_l1_norms) {
            if (!R1.empty()) rec.R1_l1 = lp_norm(R1, 1.0, cfg.report_norms);
            if (!w.empty()) rec.weighted_w_l1 = lp_norm(apply(weight, w), 1.0, cfg.report_norms);
        }
        rec.v_active = v1.max_abs() > cfg.support_tol;
        rec.R_active = R1.max_abs() > cfg.support_tol;
        if (rec.v_active || rec.R_active) {
            out_lo = std::min(out_lo, t);
            out_hi = std::max(out_hi, t);
        }

        rep.R1_linf_l1 = std::max(rep.R1_linf_l1, rec.R1_l1);
        rep.dv_linf_l2 = std::max(rep.dv_linf_l2, rec.w_l2);
        rep.weighted_dv_linf_l1 = std::max(rep.weighted_dv_linf_l1, rec.weighted_w_l1);
        rep.max_residual_l2 = std::max(rep.max_residual_l2, rec.residual_l2);
        rep.max_cross_check = std::max(rep.max_cross_check, rec.cross_check_l2);

        // curl identity of the perturbation
        if (!parts.wp.empty()) {
            SpectralField lhs = parts.wp.plus(parts.wc);
            SpectralField rhs = curl(parts.wp).scaled(1.0 / double(prm.lam));
            rep.curl_identity_residual = std::max(
                rep.curl_identity_residual, lhs.minus(rhs).max_abs() / std::max(lhs.max_abs(), 1e-300));
        }

        if (sink) sink->emit(i, t, std::move(v1), std::move(v1_ddt), std::move(p1), std::move(R1));
        rep.samples.push_back(rec);
    }

    rep.support_lo = out_lo;
    rep.support_hi = out_hi;
    if (out_hi >= out_lo)
        rep.support_contained = out_lo >= rep.allowed_lo - 1e-12 && out_hi <= rep.allowed_hi + 1e-12;
    return rep;
}

}  // namespace ciflow
