#pragma once
// Scheme parameters and their validity clauses, the (y,z) feasibility system
// for the dissipation exponent beta, and the asymptotic parameter planner.

#include <numeric>
#include <optional>
#include <vector>

#include "ciflow/core.hpp"

namespace ciflow {

struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d) : num(n), den(d) {
        if (den == 0) fail(Errc::param_violation, "rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return double(num) / double(den); }
    // exact integer product k * num / den, or nullopt if not integral
    std::optional<int64_t> times_int(int64_t k) const {
        __int128 p = __int128(k) * num;
        if (p % den != 0) return std::nullopt;
        return int64_t(p / den);
    }
    static Rational approx(double x, int64_t max_den = 1'000'000'000) {
        // continued-fraction approximation
        int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
        double v = x;
        for (int it = 0; it < 64; ++it) {
            int64_t a = int64_t(std::floor(v));
            int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
            if (q2 > max_den) break;
            p0 = p1; q0 = q1; p1 = p2; q1 = q2;
            double frac = v - double(a);
            if (frac < 1e-15) break;
            v = 1.0 / frac;
        }
        return Rational(p1, q1);
    }
};

struct ParamSet {
    int64_t lam = 40;            // lambda, in 10 N*
    Rational sigma{1, 8};        // sigma, rational
    int64_t r = 2;               // even positive integer
    double mu = 64.0;
    double beta = 15.0;
    double theta = 1.25;
    double nu = 1.0;
    double delta_q = 0.0;
    double delta_q1 = 0.0;       // delta_{q+1}
    double delta_q2 = 0.0;       // delta_{q+2}
    double y = 0.0;
    double z = 0.0;
    double s = 1.5;              // corrector L^s exponent

    double lam_sigma() const { return double(lam) * sigma.value(); }
    // exact lambda*sigma when integral
    std::optional<int64_t> lam_sigma_int() const { return sigma.times_int(lam); }
};

// Clause-by-clause validity check; empty result means valid.
inline std::vector<std::string> check_params(const ParamSet& p) {
    std::vector<std::string> bad;
    double ls = p.lam_sigma();
    if (!(ls * double(p.r) > 1.0)) bad.push_back("lambda*sigma*r > 1");
    if (!(p.sigma.value() * double(p.r) < 0.5)) bad.push_back("sigma*r < 1/2");
    auto lsi = p.lam_sigma_int();
    if (!lsi || *lsi < 1) bad.push_back("sigma*lambda in N");
    if (!(std::pow(double(p.r), 1.5) < p.mu && p.mu < double(p.lam) * double(p.lam)))
        bad.push_back("r^(3/2) < mu < lambda^2");
    if (!(p.lam >= 10 && p.lam % 10 == 0)) bad.push_back("lambda in 10 N*");
    if (!(p.r >= 2 && p.r % 2 == 0)) bad.push_back("r in 2 N*");
    if (!lsi || *lsi % 5 != 0 || *lsi < 5) bad.push_back("lambda*sigma in 5 N (frame integrality)");
    return bad;
}

inline void require_params(const ParamSet& p) {
    auto bad = check_params(p);
    if (!bad.empty()) {
        std::string msg = "violated:";
        for (auto& b : bad) msg += " [" + b + "]";
        fail(Errc::param_violation, msg);
    }
}

// ---------------------------------------------------------------------------
// Feasibility of the (y,z) exponent system:
//   (1) y > 7            (2) z > -3/2 y          (3) z + y/2 < -3
//   (4) 3/2 y + 4 < beta (5) 3/2 y + z > 4
// Solvable iff beta > 29/2.

struct FeasibilityCertificate {
    double beta = 0.0;
    bool feasible = false;
    double y = 0.0, z = 0.0;                  // interior witness (analytic center)
    std::vector<std::string> violated;        // why infeasible
    std::array<double, 5> slacks{};           // constraint slacks at the witness
};

namespace detail {

// constraints g_i(y,z) > 0
inline std::array<double, 5> feasibility_slacks(double beta, double y, double z) {
    return {y - 7.0, z + 1.5 * y, -3.0 - 0.5 * y - z, beta - 4.0 - 1.5 * y, 1.5 * y + z - 4.0};
}

}  // namespace detail

inline FeasibilityCertificate feasibility(double beta) {
    FeasibilityCertificate cert;
    cert.beta = beta;
    if (!(beta > 0.0)) fail(Errc::param_violation, "feasibility needs beta > 0");
    double y_hi = (2.0 / 3.0) * (beta - 4.0);
    if (!(y_hi > 7.0)) {
        cert.feasible = false;
        cert.violated = {"y > 7 and 3/2 y + 4 - beta < 0 jointly require beta > 29/2"};
        return cert;
    }
    // analytic center of the polygon: maximize sum log g_i by damped Newton
    double y = 0.5 * (7.0 + y_hi);
    double zlo = 4.0 - 1.5 * y, zhi = -3.0 - 0.5 * y;
    double z = 0.5 * (zlo + zhi);
    for (int it = 0; it < 200; ++it) {
        // gradient of -sum log g_i; constraint gradients (dy, dz):
        // g1:(1,0) g2:(1.5,1) g3:(-0.5,-1) g4:(-1.5,0) g5:(1.5,1)
        auto s = detail::feasibility_slacks(beta, y, z);
        double inv[5];
        for (int i = 0; i < 5; ++i) inv[i] = 1.0 / s[size_t(i)];
        const double dy[5] = {1.0, 1.5, -0.5, -1.5, 1.5};
        const double dz[5] = {0.0, 1.0, -1.0, 0.0, 1.0};
        double Gy = 0.0, Gz = 0.0, Hyy = 0.0, Hyz = 0.0, Hzz = 0.0;
        for (int i = 0; i < 5; ++i) {
            Gy -= inv[i] * dy[i];
            Gz -= inv[i] * dz[i];
            Hyy += inv[i] * inv[i] * dy[i] * dy[i];
            Hyz += inv[i] * inv[i] * dy[i] * dz[i];
            Hzz += inv[i] * inv[i] * dz[i] * dz[i];
        }
        double det = Hyy * Hzz - Hyz * Hyz;
        if (det <= 0.0) break;
        double step_y = -(Hzz * Gy - Hyz * Gz) / det;
        double step_z = -(Hyy * Gz - Hyz * Gy) / det;
        // damped step staying strictly feasible
        double t = 1.0;
        for (int back = 0; back < 60; ++back) {
            auto s2 = detail::feasibility_slacks(beta, y + t * step_y, z + t * step_z);
            bool ok = true;
            for (double v : s2)
                if (!(v > 0.0)) ok = false;
            if (ok) break;
            t *= 0.5;
        }
        y += t * step_y;
        z += t * step_z;
        if (std::abs(t * step_y) + std::abs(t * step_z) < 1e-14 * (1.0 + std::abs(y) + std::abs(z))) break;
    }
    cert.feasible = true;
    cert.y = y;
    cert.z = z;
    cert.slacks = detail::feasibility_slacks(beta, y, z);
    for (double v : cert.slacks)
        if (!(v > 0.0)) {
            cert.feasible = false;
            cert.violated.push_back("witness left the strict polygon (numerical)");
        }
    return cert;
}

// ---------------------------------------------------------------------------
// Parameter planner: evaluate the asymptotic formulas then round onto the
// admissible lattice.

struct PlannedParams {
    ParamSet params;
    double sigma_formula = 0.0, r_formula = 0.0, mu_formula = 0.0;
    double sigma_delta = 0.0, r_delta = 0.0, mu_delta = 0.0;
};

inline PlannedParams plan_params(int64_t lam, double beta, double y, double z) {
    if (lam < 10 || lam % 10 != 0) fail(Errc::param_violation, "plan_params: lambda must be in 10 N*");
    PlannedParams out;
    double L = std::log(double(lam));
    double sigma_f = std::log(std::max(L, 1.000001));
    double sigma_formula = (L * L) * std::pow(sigma_f, 4.0) / double(lam);
    double r_formula = double(lam) / std::pow(L, y);
    double mu_formula = std::pow(double(lam), 1.5) * std::pow(L, z);
    out.sigma_formula = sigma_formula;
    out.r_formula = r_formula;
    out.mu_formula = mu_formula;

    ParamSet p;
    p.lam = lam;
    p.beta = beta;
    p.y = y;
    p.z = z;
    // sigma: round lambda*sigma to the nearest positive multiple of 5
    int64_t m5 = int64_t(std::llround(double(lam) * sigma_formula / 5.0));
    if (m5 < 1) m5 = 1;
    p.sigma = Rational(5 * m5, lam);
    // r: nearest even integer >= 2
    int64_t r = int64_t(std::llround(r_formula / 2.0)) * 2;
    if (r < 2) r = 2;
    p.r = r;
    // mu: clamp strictly inside (r^{3/2}, lambda^2)
    double mu_lo = std::pow(double(r), 1.5), mu_hi = double(lam) * double(lam);
    double mu = mu_formula;
    if (mu <= mu_lo) mu = mu_lo * (1.0 + 1e-6) + 1e-12;
    if (mu >= mu_hi) mu = mu_hi * (1.0 - 1e-6);
    p.mu = mu;
    out.params = p;
    out.sigma_delta = p.sigma.value() - sigma_formula;
    out.r_delta = double(p.r) - r_formula;
    out.mu_delta = p.mu - mu_formula;
    auto bad = check_params(p);
    if (!bad.empty()) {
        std::string msg = "rounding cannot satisfy the parameter clauses at this lambda:";
        for (auto& b : bad) msg += " [" + b + "]";
        fail(Errc::infeasible, msg);
    }
    return out;
}

}  // namespace ciflow
