#pragma once
// Impulsed Beltrami flows: classical Beltrami waves W_xi = B_xi e^{i lam x.xi}
// modulated by intermittency envelopes eta_xi built from tensor Fejer
// kernels on the rotated frame (xi, A_xi, xi x A_xi), with an exact
// per-mode phase law in time.

#include "ciflow/geometry.hpp"
#include "ciflow/norms.hpp"
#include "ciflow/params.hpp"
#include "ciflow/time_field.hpp"

namespace ciflow {

// 1-D Fejer coefficient sum S(r) = sum_{|j|<=r} (1-|j|/(r+1))^2
// = (2r^2+4r+3)/(3(r+1)); the eta normalization divides by S^{3/2} so that
// the mean of eta^2 is exactly 1.
inline double fejer_l2_sq_1d(int64_t r) {
    return double(2 * r * r + 4 * r + 3) / (3.0 * double(r + 1));
}

struct BlockValidation {
    double eta_mean_sq = 0.0;          // mean of eta^2 (should be 1)
    double transport_residual = 0.0;   // (1/mu) dt eta - (xi.grad) eta
    double eta_max_l1 = 0.0;           // largest |k|_1 of eta modes
    bool eta_within_2lam = false;      // P_{<=2 lam} eta = eta
    double flow_div_residual = 0.0;    // div(W_flow)
    double curl_residual = 0.0;        // curl(W) - lam W on the carrier wave
    int64_t flow_min_l1 = 0, flow_max_l1 = 0;
    bool flow_support_ok = false;      // |k|_1 in [lam/4, 3 lam)
    std::string support_note;
};

struct BuildingBlock {
    Direction dir;
    ParamSet params;
    TimeField eta;    // scalar envelope eta_xi (real)
    TimeField flow;   // impulsed flow W_xi = eta_xi W_xi (complex, one xi)
    BlockValidation validation;
};

// Beltrami carrier wave W_xi = B_xi e^{i lam x . xi} as a one-mode field.
inline SpectralField beltrami_wave(const Direction& d, int64_t lam) {
    if (lam % 5 != 0) fail(Errc::non_integer_modes, "lambda must make lambda*xi integral");
    IVec3 k = int32_t(lam / 5) * d.xi5;
    Vec3c B = d.polarization();
    SpectralField w(Rank::vector3);
    for (int c = 0; c < 3; ++c) w.add(k, c, B(c));
    w.normalize();
    return w;
}

// Envelope eta_xi sampled at the given times; modes sit at
// m (j1 xi5 + j2 a5 + j3 x5) with m = lam sigma / 5, Fejer weights
// prod (1 - |j_i|/(r+1)) / S^{3/2}, and phase e^{i lam sigma mu t j1}.
// Mirrored directions share the envelope of their positive partner
// (eta_{-xi} = eta_xi), so the transport runs along +xi for both signs.
inline TimeField build_eta(const Direction& dir, const ParamSet& p,
                           const std::vector<double>& times) {
    const Direction& d =
        dir.sign > 0 ? dir : direction_set().positive(size_t(dir.positive_index));
    require_params(p);
    auto lsi = p.lam_sigma_int();
    if (!lsi || *lsi % 5 != 0)
        fail(Errc::non_integer_modes, "lambda*sigma must be a multiple of 5 for integral frames");
    const int64_t m = *lsi / 5;
    const int64_t r = p.r;
    const double ls = double(*lsi);
    const double norm = std::pow(fejer_l2_sq_1d(r), -1.5);

    std::vector<SpectralField> samples;
    samples.reserve(times.size());
    for (double t : times) {
        SpectralField f(Rank::scalar);
        for (int64_t j1 = -r; j1 <= r; ++j1)
            for (int64_t j2 = -r; j2 <= r; ++j2)
                for (int64_t j3 = -r; j3 <= r; ++j3) {
                    IVec3 k = int32_t(m) * (int32_t(j1) * d.xi5 + int32_t(j2) * d.a5 + int32_t(j3) * d.x5);
                    double w = (1.0 - std::abs(double(j1)) / double(r + 1)) *
                               (1.0 - std::abs(double(j2)) / double(r + 1)) *
                               (1.0 - std::abs(double(j3)) / double(r + 1));
                    double phase = ls * p.mu * t * double(j1);
                    f.add(k, 0, norm * w * cplx(std::cos(phase), std::sin(phase)));
                }
        f.normalize();
        samples.push_back(std::move(f));
    }
    TimeField tf(times, std::move(samples));
    PhaseLaw law;
    law.mu = p.mu;
    law.xi5 = d.xi5;
    law.shift = 0.0;
    tf.set_phase(law);
    // materialize exact time derivatives from the phase law
    std::vector<SpectralField> ddt;
    for (size_t i = 0; i < tf.nsamples(); ++i) {
        const SpectralField& f = tf.at(i);
        ddt.push_back(f.mapped([&](const IVec3& k, cplx* row) { row[0] *= cplx(0.0, law.omega(k)); }));
    }
    tf.set_ddt(std::move(ddt));
    return tf;
}

// Full impulsed flow: eta modes shifted by lam*xi and weighted by B_xi.
inline BuildingBlock build_flow(const Direction& d, const ParamSet& p,
                                const std::vector<double>& times) {
    BuildingBlock blk;
    blk.dir = d;
    blk.params = p;
    blk.eta = build_eta(d, p, times);

    const int64_t lam = p.lam;
    IVec3 shift = int32_t(lam / 5) * d.xi5;
    Vec3c B = d.polarization();
    std::vector<SpectralField> samples, ddt;
    // the envelope transports along the positive partner, so the mode
    // frequencies are mu((k - lam xi).xi_+) for both signs of xi
    const Direction& dpos = direction_set().positive(size_t(d.positive_index));
    PhaseLaw law;
    law.mu = p.mu;
    law.xi5 = dpos.xi5;
    law.shift = double(lam) * (d.sign > 0 ? 1.0 : -1.0);
    for (size_t i = 0; i < blk.eta.nsamples(); ++i) {
        const SpectralField& e = blk.eta.at(i);
        SpectralField f(Rank::vector3);
        for (size_t q = 0; q < e.nmodes(); ++q) {
            IVec3 k = e.mode(q) + shift;
            cplx v = e.coeffs()[q];
            for (int c = 0; c < 3; ++c) f.add(k, c, v * B(c));
        }
        f.normalize();
        ddt.push_back(f.mapped([&](const IVec3& k, cplx* row) {
            cplx iw(0.0, law.omega(k));
            for (int c = 0; c < 3; ++c) row[c] *= iw;
        }));
        samples.push_back(std::move(f));
    }
    blk.flow = TimeField(times, std::move(samples));
    blk.flow.set_phase(law);
    blk.flow.set_ddt(std::move(ddt));

    // validation report
    BlockValidation& v = blk.validation;
    const SpectralField& e0 = blk.eta.at(0);
    v.eta_mean_sq = e0.l2_sq();  // Parseval: mean of eta^2
    v.eta_max_l1 = double(e0.max_l1());
    v.eta_within_2lam = e0.max_l1() <= 2 * lam;
    {
        // transport identity (1/mu) dt eta = (xi . grad) eta along the
        // positive partner direction (the shared envelope transports with +xi)
        SpectralField dt = blk.eta.ddt_at(0).scaled(1.0 / p.mu);
        Vec3d xi = direction_set().positive(size_t(d.positive_index)).xi();
        SpectralField xg = derivative(e0, 1).scaled(xi(0))
                               .plus(derivative(e0, 2).scaled(xi(1)))
                               .plus(derivative(e0, 3).scaled(xi(2)));
        v.transport_residual = dt.minus(xg).max_abs();
    }
    {
        const SpectralField& f0 = blk.flow.at(0);
        v.flow_div_residual = divergence(f0).max_abs();
        SpectralField w = beltrami_wave(d, lam);
        v.curl_residual = curl(w).minus(w.scaled(double(lam))).max_abs();
        v.flow_min_l1 = f0.min_l1_nonzero();
        v.flow_max_l1 = f0.max_l1();
        double lo = double(lam) / 4.0, hi = 3.0 * double(lam);
        v.flow_support_ok = double(v.flow_min_l1) >= lo && double(v.flow_max_l1) < hi;
        if (!v.flow_support_ok)
            v.support_note = "flow |k|_1 range [" + std::to_string(v.flow_min_l1) + "," +
                             std::to_string(v.flow_max_l1) + "] leaves [lam/4, 3 lam) = [" +
                             std::to_string(lo) + "," + std::to_string(hi) + ")";
    }
    return blk;
}

// Builds the full family: blocks[i] for Lambda+ (i < 6) share eta with their
// mirrored partners blocks[i+6].
inline std::vector<BuildingBlock> build_block_family(const ParamSet& p,
                                                     const std::vector<double>& times) {
    const DirectionSet& ds = direction_set();
    std::vector<BuildingBlock> blocks(ds.size());
    parallel_for(int(ds.size()), [&](int i) { blocks[size_t(i)] = build_flow(ds.at(size_t(i)), p, times); });
    return blocks;
}

// Scaling report for the norm growth of eta under parameter changes.
struct ScalingReport {
    double norm_a = 0.0, norm_b = 0.0;
    double measured_ratio = 0.0;
    double predicted_ratio = 0.0;
    bool within_factor4 = false;
};

// Measures ||grad^N dt^M eta||_{L^p or LlogL^alpha} for two parameter sets
// and compares the ratio with the scaling (lam sig r)^N (lam sig r mu)^M
// r^{3/2-3/p} (or the log-Orlicz variant).
inline ScalingReport verify_norm_scalings(const Direction& d, const ParamSet& pa, const ParamSet& pb,
                                          int N, int M, double p_or_alpha, bool orlicz,
                                          const NormConfig& ncfg = {}) {
    auto measure = [&](const ParamSet& ps) {
        TimeField eta = build_eta(d, ps, {0.0});
        SpectralField f = eta.at(0);
        for (int q = 0; q < N; ++q) f = derivative(f, 1);  // one representative direction
        std::vector<SpectralField> dm = time_derivative_order(TimeField({0.0}, {f}), 0);
        SpectralField g = f;
        if (M > 0) {
            // phase law: dt^M multiplies modes by (i omega)^M
            PhaseLaw law;
            law.mu = ps.mu;
            law.xi5 = d.xi5;
            law.shift = 0.0;
            g = g.mapped([&](const IVec3& k, cplx* row) {
                cplx iw(0.0, law.omega(k));
                cplx fac = 1.0;
                for (int t = 0; t < M; ++t) fac *= iw;
                row[0] *= fac;
            });
        }
        return orlicz ? luxemburg_norm(g, p_or_alpha, ncfg) : lp_norm(g, p_or_alpha, ncfg);
    };
    auto predict = [&](const ParamSet& ps) {
        double ls = ps.lam_sigma();
        double base = std::pow(ls * double(ps.r), double(N)) * std::pow(ls * double(ps.r) * ps.mu, double(M));
        if (orlicz)
            return base * std::pow(double(ps.r), -1.5) *
                   std::pow(std::log(double(ps.lam)), p_or_alpha);
        return base * std::pow(double(ps.r), 1.5 - 3.0 / p_or_alpha);
    };
    ScalingReport rep;
    rep.norm_a = measure(pa);
    rep.norm_b = measure(pb);
    rep.measured_ratio = rep.norm_b / rep.norm_a;
    rep.predicted_ratio = predict(pb) / predict(pa);
    double q = rep.measured_ratio / rep.predicted_ratio;
    rep.within_factor4 = q < 4.0 && q > 0.25;
    return rep;
}

}  // namespace ciflow
