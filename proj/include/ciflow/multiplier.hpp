#pragma once
// Fourier multiplier operators T_m on the torus and the symbol library used
// by the dissipation, anti-divergence and smallness estimates.

#include <functional>
#include <memory>
#include <string>

#include "ciflow/calculus.hpp"

namespace ciflow {

struct MultiplierSymbol {
    std::function<cplx(const IVec3&)> eval;
    std::string name;
    cplx zero_mode_value{0.0, 0.0};  // all symbols here pin m(0) explicitly

    cplx operator()(const IVec3& k) const {
        if (k[0] == 0 && k[1] == 0 && k[2] == 0) return zero_mode_value;
        return eval(k);
    }

    // Hermitian symmetry m(-k) = conj(m(k)): required for real operators.
    double hermitian_defect(int64_t K) const {
        double worst = 0.0;
        for (int32_t a = -int32_t(K); a <= K; ++a)
            for (int32_t b = -int32_t(K); b <= K; ++b)
                for (int32_t c = -int32_t(K); c <= K; ++c) {
                    IVec3 k{a, b, c};
                    worst = std::max(worst, std::abs((*this)(-k) - std::conj((*this)(k))));
                }
        return worst;
    }
};

inline SpectralField apply(const MultiplierSymbol& m, const SpectralField& f) {
    return f.mapped([&](const IVec3& k, cplx* row) {
        cplx v = m(k);
        for (int c = 0; c < f.ncomp(); ++c) row[c] *= v;
    });
}

inline MultiplierSymbol symbol_product(const MultiplierSymbol& a, const MultiplierSymbol& b) {
    MultiplierSymbol m;
    m.name = a.name + "*" + b.name;
    m.zero_mode_value = a.zero_mode_value * b.zero_mode_value;
    m.eval = [a, b](const IVec3& k) { return a(k) * b(k); };
    return m;
}

inline MultiplierSymbol symbol_identity() {
    return {[](const IVec3&) { return cplx(1.0, 0.0); }, "one", cplx(1.0, 0.0)};
}

// |k|^{2 theta} / log^beta(10 + |k|_1), zero at k = 0.
inline MultiplierSymbol symbol_hyperdissipation(double theta, double beta) {
    if (theta < 0.0 || beta < 0.0) fail(Errc::param_violation, "hyperdissipation needs theta, beta >= 0");
    MultiplierSymbol m;
    m.name = "hyperdissipation";
    m.eval = [theta, beta](const IVec3& k) {
        double num = std::pow(double(l2_norm_sq(k)), theta);
        double den = std::pow(std::log(10.0 + double(l1_norm(k))), beta);
        return cplx(num / den, 0.0);
    };
    return m;
}

// log^{-beta}(|k|_1 + 10), zero at k = 0.
inline MultiplierSymbol symbol_log(double beta) {
    MultiplierSymbol m;
    m.name = "log_damp";
    m.eval = [beta](const IVec3& k) {
        return cplx(std::pow(std::log(double(l1_norm(k)) + 10.0), -beta), 0.0);
    };
    return m;
}

// 1/|k|_1, zero at k = 0.
inline MultiplierSymbol symbol_inv_l1() {
    MultiplierSymbol m;
    m.name = "inv_l1";
    m.eval = [](const IVec3& k) { return cplx(1.0 / double(l1_norm(k)), 0.0); };
    return m;
}

// |grad|^s: |k|^s, zero at k = 0.
inline MultiplierSymbol symbol_grad_power(double s) {
    MultiplierSymbol m;
    m.name = "grad_power";
    m.eval = [s](const IVec3& k) { return cplx(std::pow(double(l2_norm_sq(k)), 0.5 * s), 0.0); };
    return m;
}

// Iterated Riesz multiplier k1^a1 k2^a2 k3^a3 / |k|^(a1+a2+a3).
inline MultiplierSymbol symbol_riesz(int a1, int a2, int a3) {
    if (a1 < 0 || a2 < 0 || a3 < 0 || a1 + a2 + a3 < 1)
        fail(Errc::param_violation, "riesz exponents must be nonnegative with positive sum");
    MultiplierSymbol m;
    m.name = "riesz";
    int alpha = a1 + a2 + a3;
    m.eval = [a1, a2, a3, alpha](const IVec3& k) {
        double num = 1.0;
        for (int p = 0; p < a1; ++p) num *= double(k[0]);
        for (int p = 0; p < a2; ++p) num *= double(k[1]);
        for (int p = 0; p < a3; ++p) num *= double(k[2]);
        return cplx(num / std::pow(double(l2_norm_sq(k)), 0.5 * alpha), 0.0);
    };
    return m;
}

// Directional Hilbert transform i sign(k_j), zero at k = 0.
inline MultiplierSymbol symbol_dir_hilbert(int j) {
    if (j < 1 || j > 3) fail(Errc::param_violation, "dir_hilbert direction must be 1..3");
    MultiplierSymbol m;
    m.name = "dir_hilbert";
    m.eval = [j](const IVec3& k) {
        int32_t v = k[size_t(j - 1)];
        double s = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        return cplx(0.0, s);
    };
    return m;
}

}  // namespace ciflow
