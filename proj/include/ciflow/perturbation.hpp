#pragma once
// The three-part perturbation w = w^(p) + w^(c) + w^(t) built from the
// amplitudes and the impulsed flows, together with exact time derivatives
// (product rule over the per-direction structure; block derivatives come
// from the phase law, amplitude derivatives from the chain rule).

#include "ciflow/amplitudes.hpp"
#include "ciflow/building_blocks.hpp"

namespace ciflow {

// Everything the stress assembly needs at one time sample.
struct SampleParts {
    SpectralField wp, wc, wt;     // vector fields
    SpectralField dwp, dwc, dwt;  // their exact time derivatives
    std::array<SpectralField, 6> a, da;        // amplitudes per Lambda+ class
    std::array<SpectralField, 6> a2, da2;      // a^2 and d/dt(a^2)
    std::array<SpectralField, 6> eta2, deta2;  // eta^2 and d/dt(eta^2)
    std::array<SpectralField, 6> t2, dt2;      // a^2 eta^2 and its derivative
    SpectralField rho, drho;
};

namespace detail {

// (grad s) x (B e^{i k0.x}) built exactly from the sparse gradient of s.
inline SpectralField grad_cross_wave(const SpectralField& grad_s, const Vec3c& B,
                                     const IVec3& shift) {
    std::vector<ModeKey> keys;
    std::vector<cplx> coef;
    keys.reserve(grad_s.nmodes());
    coef.reserve(grad_s.nmodes() * 3);
    for (size_t i = 0; i < grad_s.nmodes(); ++i) {
        IVec3 k = grad_s.mode(i) + shift;
        const cplx* g = grad_s.row(i);
        keys.push_back(pack_key(k));
        coef.push_back(g[1] * B(2) - g[2] * B(1));
        coef.push_back(g[2] * B(0) - g[0] * B(2));
        coef.push_back(g[0] * B(1) - g[1] * B(0));
    }
    SpectralField out = SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
    return out;
}

inline SpectralField phase_law_derivative(const SpectralField& f, const PhaseLaw& law) {
    return f.mapped([&](const IVec3& k, cplx* row) {
        cplx iw(0.0, law.omega(k));
        for (int c = 0; c < f.ncomp(); ++c) row[c] *= iw;
    });
}

}  // namespace detail

// Assembles the perturbation fields at sample index i.
inline SampleParts build_sample_parts(const AmplitudeSet& amps,
                                      const std::vector<BuildingBlock>& blocks, const ParamSet& p,
                                      size_t i, const MultiplyOptions& mult = {}) {
    SampleParts out;
    const DirectionSet& ds = direction_set();
    const double lam = double(p.lam);
    out.rho = amps.rho.at(i);
    out.drho = amps.rho.ddt_at(i);

    SpectralField wp(Rank::vector3), dwp(Rank::vector3), wc(Rank::vector3), dwc(Rank::vector3);
    SpectralField wt(Rank::vector3), dwt(Rank::vector3);

    for (size_t j = 0; j < 6; ++j) {
        const SpectralField& aj = amps.a[j].at(i);
        const SpectralField& daj = amps.a[j].ddt_at(i);
        out.a[j] = aj;
        out.da[j] = daj;
        const BuildingBlock& bp = blocks[j];
        const BuildingBlock& bm = blocks[j + 6];
        const SpectralField& eta = bp.eta.at(i);
        const SpectralField deta = bp.eta.ddt_at(i);

        if (!aj.empty()) {
            // w^(p): a_xi (W_xi + W_{-xi})
            SpectralField fsum = bp.flow.at(i).plus(bm.flow.at(i));
            SpectralField dfsum = bp.flow.ddt_at(i).plus(bm.flow.ddt_at(i));
            wp = wp.plus(scale_field(aj, fsum, mult));
            dwp = dwp.plus(scale_field(daj, fsum, mult)).plus(scale_field(aj, dfsum, mult));

            // w^(c): (1/lam) grad(a eta) x W_xi for both signs
            SpectralField m = mult_scalar(aj, eta, mult);
            SpectralField dm = mult_scalar(daj, eta, mult).plus(mult_scalar(aj, deta, mult));
            SpectralField gm = gradient(m);
            SpectralField dgm = gradient(dm);
            IVec3 shift = int32_t(p.lam / 5) * bp.dir.xi5;
            Vec3c B = bp.dir.polarization();
            Vec3c Bc = bm.dir.polarization();
            wc = wc.plus(detail::grad_cross_wave(gm, B, shift), cplx(1.0 / lam, 0.0));
            wc = wc.plus(detail::grad_cross_wave(gm, Bc, -shift), cplx(1.0 / lam, 0.0));
            dwc = dwc.plus(detail::grad_cross_wave(dgm, B, shift), cplx(1.0 / lam, 0.0));
            dwc = dwc.plus(detail::grad_cross_wave(dgm, Bc, -shift), cplx(1.0 / lam, 0.0));
        }

        // eta^2 and its exact derivative (the phase law is additive in k)
        out.eta2[j] = mult_scalar(eta, eta, mult);
        PhaseLaw law;
        law.mu = p.mu;
        law.xi5 = bp.dir.xi5;
        law.shift = 0.0;
        out.deta2[j] = detail::phase_law_derivative(out.eta2[j], law);

        if (!aj.empty()) {
            out.a2[j] = mult_scalar(aj, aj, mult);
            out.da2[j] = mult_scalar(aj, daj, mult).scaled(2.0);
            out.t2[j] = mult_scalar(out.a2[j], out.eta2[j], mult);
            out.dt2[j] = mult_scalar(out.da2[j], out.eta2[j], mult)
                             .plus(mult_scalar(out.a2[j], out.deta2[j], mult));
            // w^(t): (1/mu) P_H P_{!=0} (a^2 eta^2 xi)
            Vec3d xi = bp.dir.xi();
            auto vecify = [&](const SpectralField& s) {
                std::vector<ModeKey> keys = s.keys();
                std::vector<cplx> coef(keys.size() * 3);
                for (size_t q = 0; q < keys.size(); ++q)
                    for (int c = 0; c < 3; ++c) coef[q * 3 + size_t(c)] = s.coeffs()[q] * xi(c);
                return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
            };
            wt = wt.plus(leray_project(remove_mean(vecify(out.t2[j]))), cplx(1.0 / p.mu, 0.0));
            dwt = dwt.plus(leray_project(remove_mean(vecify(out.dt2[j]))), cplx(1.0 / p.mu, 0.0));
        } else {
            out.a2[j] = SpectralField(Rank::scalar);
            out.da2[j] = SpectralField(Rank::scalar);
            out.t2[j] = SpectralField(Rank::scalar);
            out.dt2[j] = SpectralField(Rank::scalar);
        }
    }
    out.wp = wp.truncated(mult.drop_tol);
    out.dwp = dwp.truncated(mult.drop_tol);
    out.wc = wc.truncated(mult.drop_tol);
    out.dwc = dwc.truncated(mult.drop_tol);
    out.wt = wt;
    out.dwt = dwt;
    return out;
}

// Spec-facing materialized form: the three perturbation fields over all
// samples, with exact time derivatives attached.
struct PerturbationParts {
    TimeField wp, wc, wt;
    double curl_identity_residual = 0.0;  // wp + wc - (1/lam) curl wp
    double wt_div_residual = 0.0;
};

inline PerturbationParts build_perturbation(const AmplitudeSet& amps,
                                            const std::vector<BuildingBlock>& blocks,
                                            const ParamSet& p, const MultiplyOptions& mult = {}) {
    const std::vector<double>& times = amps.rho.times();
    std::vector<SpectralField> wp, wc, wt, dwp, dwc, dwt;
    double curl_res = 0.0, div_res = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        SampleParts sp = build_sample_parts(amps, blocks, p, i, mult);
        // invariant: wp + wc = (1/lam) curl wp
        SpectralField lhs = sp.wp.plus(sp.wc);
        SpectralField rhs = curl(sp.wp).scaled(1.0 / double(p.lam));
        double scale = std::max(lhs.max_abs(), 1e-300);
        curl_res = std::max(curl_res, lhs.minus(rhs).max_abs() / scale);
        if (!sp.wt.empty())
            div_res = std::max(div_res, divergence(sp.wt).max_abs() / std::max(sp.wt.max_abs(), 1e-300));
        wp.push_back(std::move(sp.wp));
        wc.push_back(std::move(sp.wc));
        wt.push_back(std::move(sp.wt));
        dwp.push_back(std::move(sp.dwp));
        dwc.push_back(std::move(sp.dwc));
        dwt.push_back(std::move(sp.dwt));
    }
    PerturbationParts out;
    out.wp = TimeField(times, std::move(wp));
    out.wp.set_ddt(std::move(dwp));
    out.wc = TimeField(times, std::move(wc));
    out.wc.set_ddt(std::move(dwc));
    out.wt = TimeField(times, std::move(wt));
    out.wt.set_ddt(std::move(dwt));
    out.curl_identity_residual = curl_res;
    out.wt_div_residual = div_res;
    return out;
}

}  // namespace ciflow
