#pragma once
// The anti-divergence R: a right inverse of the divergence producing
// symmetric trace-free tensors, implemented mode-wise:
//   F(R(u))(k)_{jh} = (i/2|k|^2)(F(u).k) delta_{jh}
//                   + (i k_h k_j / 2|k|^4)(F(u).k)
//                   - (i k_h/|k|^2) F(u)_j - (i k_j/|k|^2) F(u)_h,  k != 0.

#include "ciflow/calculus.hpp"

namespace ciflow {

inline SpectralField anti_divergence(const SpectralField& u) {
    if (u.rank() != Rank::vector3) fail(Errc::rank_mismatch, "anti_divergence expects a vector field");
    std::vector<ModeKey> keys;
    std::vector<cplx> coef;
    keys.reserve(u.nmodes());
    coef.reserve(u.nmodes() * 6);
    for (size_t i = 0; i < u.nmodes(); ++i) {
        IVec3 k = u.mode(i);
        int64_t k2i = l2_norm_sq(k);
        if (k2i == 0) continue;  // mean has no anti-divergence; output mean is 0
        double k2 = double(k2i);
        const cplx* uh = u.row(i);
        cplx udotk = double(k[0]) * uh[0] + double(k[1]) * uh[1] + double(k[2]) * uh[2];
        const cplx I(0.0, 1.0);
        keys.push_back(u.keys()[i]);
        for (int j = 0; j < 3; ++j)
            for (int h = j; h < 3; ++h) {
                cplx v = I * double(k[size_t(h)]) * double(k[size_t(j)]) / (2.0 * k2 * k2) * udotk -
                         I * double(k[size_t(h)]) / k2 * uh[j] - I * double(k[size_t(j)]) / k2 * uh[h];
                if (j == h) v += I / (2.0 * k2) * udotk;
                coef.push_back(v);
            }
    }
    return SpectralField::from_rows(Rank::tensor3x3_symmetric, std::move(keys), std::move(coef));
}

}  // namespace ciflow
