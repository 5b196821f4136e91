#pragma once
// Measuring instruments: L^p norms, the Orlicz L(logL)^alpha Luxemburg norm,
// and C^N space-time seminorms.  All integrals use the normalized Haar
// measure on the torus (total mass 1).

#include "ciflow/grid.hpp"
#include "ciflow/time_field.hpp"

namespace ciflow {

struct NormConfig {
    double oversample = 4.0;      // quadrature grid factor relative to 2K+1
    int max_grid = 729;           // cap on grid points per dimension
    double refine_factor = 1.5;   // secondary grid for the error estimate
};

inline Grid norm_grid(const SpectralField& f, const NormConfig& cfg, double factor) {
    int64_t K = std::max<int64_t>(f.bandwidth(), 1);
    return grid_for_bandwidth(K, factor, cfg.max_grid);
}

// Parseval L2 norm (exact for spectral data).
inline double l2_norm_parseval(const SpectralField& f) {
    double s = 0.0;
    const int nc = f.ncomp();
    const bool sym = f.rank() == Rank::tensor3x3_symmetric;
    for (size_t i = 0; i < f.nmodes(); ++i)
        for (int c = 0; c < nc; ++c) {
            double w = sym && (c == 1 || c == 2 || c == 4) ? 2.0 : 1.0;
            s += w * std::norm(f.row(i)[c]);
        }
    return std::sqrt(s);
}

// L^p norm by Riemann quadrature on grid g (pointwise Euclidean/Frobenius
// magnitude).  p = infinity returns the grid max (a lower bound for the sup).
inline double lp_norm(const SpectralField& f, double p, const Grid& g) {
    if (p < 1.0) fail(Errc::param_violation, "lp_norm needs p >= 1");
    if (f.empty()) return 0.0;
    if (!g.resolves(f.bandwidth()))
        fail(Errc::grid_too_small, "lp_norm: grid does not resolve the field");
    if (std::isinf(p)) return grid_max_abs(f, g);
    if (p == 1.0) return quadrature_mean(f, g, [](double v) { return v; });
    if (p == 2.0) {
        double m2 = quadrature_mean(f, g, [](double v) { return v * v; });
        return std::sqrt(m2);
    }
    double mp = quadrature_mean(f, g, [p](double v) { return std::pow(v, p); });
    return std::pow(mp, 1.0 / p);
}

// Convenience: build the grid per config.
inline double lp_norm(const SpectralField& f, double p, const NormConfig& cfg = {}) {
    if (f.empty()) return 0.0;
    double factor = (p == 2.0) ? 1.0 : cfg.oversample;
    return lp_norm(f, p, norm_grid(f, cfg, factor));
}

// Quadrature error estimate by grid refinement.
inline QuadratureResult lp_norm_report(const SpectralField& f, double p, const NormConfig& cfg = {}) {
    QuadratureResult r;
    if (f.empty()) return r;
    Grid g = norm_grid(f, cfg, cfg.oversample);
    Grid g2 = norm_grid(f, cfg, cfg.oversample * cfg.refine_factor);
    r.value = lp_norm(f, p, g);
    r.n = g.n;
    if (g2.n > g.n) r.refine_delta = std::abs(lp_norm(f, p, g2) - r.value);
    return r;
}

// Young function A(s) = s log^alpha(2+s).
inline double young_A(double s, double alpha) {
    return alpha == 0.0 ? s : s * std::pow(std::log(2.0 + s), alpha);
}

// Luxemburg norm: inf { lam > 0 : mean A(|f|/lam) <= 1 } by bisection on the
// monotone map lam -> mean A(|f|/lam).
inline double luxemburg_norm(const SpectralField& f, double alpha, const Grid& g) {
    if (alpha < 0.0) fail(Errc::param_violation, "luxemburg_norm needs alpha >= 0");
    if (f.empty()) return 0.0;
    if (!g.resolves(f.bandwidth()))
        fail(Errc::grid_too_small, "luxemburg_norm: grid does not resolve the field");
    std::vector<double> m2 = magnitude_sq_cube(f, g);
    size_t plane = size_t(g.n) * g.n;
    auto phi = [&](double lam) {
        double total = 0.0;
        for (int z = 0; z < g.n; ++z) {
            double partial = 0.0;
            const double* p = m2.data() + size_t(z) * plane;
            for (size_t i = 0; i < plane; ++i) partial += young_A(std::sqrt(p[i]) / lam, alpha);
            total += partial;
        }
        return total / double(g.npoints());
    };
    double l1 = 0.0;
    for (double v : m2) l1 += std::sqrt(v);
    l1 /= double(g.npoints());
    if (l1 == 0.0) return 0.0;
    // bracket: A(s) >= s log^alpha(2) gives a lower bound; expand upward
    double lo = l1 * std::min(1.0, std::pow(std::log(2.0), alpha));
    double hi = std::max(l1, lo * 2.0);
    while (phi(hi) > 1.0) { lo = hi; hi *= 2.0; }
    while (lo > 0.0 && phi(lo) < 1.0) lo *= 0.5;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (phi(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double luxemburg_norm(const SpectralField& f, double alpha, const NormConfig& cfg = {}) {
    if (f.empty()) return 0.0;
    return luxemburg_norm(f, alpha, norm_grid(f, cfg, cfg.oversample));
}

// ---------------------------------------------------------------------------
// C^N space-time seminorm: max over samples, grid nodes and all mixed
// derivatives d_t^m d_x^a with m + |a| <= n.  Spatial derivatives are
// spectral; time derivatives use the field's derivative source.

struct HolderConfig {
    int max_order = 5;
    double oversample = 2.0;
    int max_grid = 243;
    int fd_order = 4;
};

inline double holder_seminorm(const TimeField& tf, int n, const HolderConfig& cfg = {}) {
    if (n > cfg.max_order) fail(Errc::param_violation, "holder_seminorm: order above configured max");
    if (tf.nsamples() == 0) return 0.0;
    double worst = 0.0;
    NormConfig ncfg;
    ncfg.oversample = cfg.oversample;
    ncfg.max_grid = cfg.max_grid;
    for (int m = 0; m <= n; ++m) {
        std::vector<SpectralField> dt = time_derivative_order(tf, m, cfg.fd_order);
        int rem = n - m;
        for (const SpectralField& f : dt) {
            if (f.empty()) continue;
            Grid g = norm_grid(f, ncfg, ncfg.oversample);
            // all spatial multi-indices with |a| <= rem
            for (int a1 = 0; a1 <= rem; ++a1)
                for (int a2 = 0; a2 + a1 <= rem; ++a2)
                    for (int a3 = 0; a3 + a2 + a1 <= rem; ++a3) {
                        SpectralField d = f;
                        if (a1) d = derivative(d, 1, a1);
                        if (a2) d = derivative(d, 2, a2);
                        if (a3) d = derivative(d, 3, a3);
                        if (d.empty()) continue;
                        worst = std::max(worst, grid_max_abs(d, g));
                    }
        }
    }
    return worst;
}

// sup over samples of a per-sample norm.
inline double sup_over_samples(const TimeField& tf, const std::function<double(const SpectralField&)>& norm) {
    double worst = 0.0;
    for (size_t i = 0; i < tf.nsamples(); ++i) worst = std::max(worst, norm(tf.at(i)));
    return worst;
}

inline double linf_l1(const TimeField& tf, const NormConfig& cfg = {}) {
    return sup_over_samples(tf, [&](const SpectralField& f) { return lp_norm(f, 1.0, cfg); });
}
inline double linf_l2(const TimeField& tf) {
    return sup_over_samples(tf, [](const SpectralField& f) { return l2_norm_parseval(f); });
}

}  // namespace ciflow
