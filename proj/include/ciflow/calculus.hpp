#pragma once
// Exact spectral calculus: derivatives, curl/div/grad, shell and Leray
// projections, and dealiased products (sparse convolution or padded FFT;
// the two routes agree to rounding).

#include <memory>
#include <unordered_map>

#include "ciflow/grid.hpp"
#include "ciflow/parallel.hpp"

namespace ciflow {

// ---------------------------------------------------------------------------
// Derivatives (coefficient at k scaled by (i k_dir)^order)

inline SpectralField derivative(const SpectralField& f, int direction, int order = 1) {
    if (direction < 1 || direction > 3) fail(Errc::rank_mismatch, "derivative: direction must be 1..3");
    return f.mapped([&](const IVec3& k, cplx* row) {
        cplx ik(0.0, double(k[size_t(direction - 1)]));
        cplx factor = 1.0;
        for (int p = 0; p < order; ++p) factor *= ik;
        for (int c = 0; c < f.ncomp(); ++c) row[c] *= factor;
    });
}

inline SpectralField gradient(const SpectralField& f) {
    if (f.rank() != Rank::scalar) fail(Errc::rank_mismatch, "gradient expects a scalar field");
    SpectralField out(Rank::vector3);
    std::vector<ModeKey> keys = f.keys();
    std::vector<cplx> coef(keys.size() * 3);
    for (size_t i = 0; i < keys.size(); ++i) {
        IVec3 k = unpack_key(keys[i]);
        cplx v = f.coeffs()[i];
        for (int d = 0; d < 3; ++d) coef[i * 3 + size_t(d)] = cplx(0.0, double(k[size_t(d)])) * v;
    }
    return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
}

// Divergence: vector -> scalar, tensor -> vector ((Div S)_i = d_j S_ij).
inline SpectralField divergence(const SpectralField& f) {
    if (f.rank() == Rank::vector3) {
        SpectralField out(Rank::scalar);
        std::vector<ModeKey> keys = f.keys();
        std::vector<cplx> coef(keys.size());
        for (size_t i = 0; i < keys.size(); ++i) {
            IVec3 k = unpack_key(keys[i]);
            const cplx* r = f.row(i);
            coef[i] = cplx(0.0, 1.0) *
                      (double(k[0]) * r[0] + double(k[1]) * r[1] + double(k[2]) * r[2]);
        }
        return SpectralField::from_rows(Rank::scalar, std::move(keys), std::move(coef));
    }
    if (f.rank() == Rank::tensor3x3 || f.rank() == Rank::tensor3x3_symmetric) {
        const bool sym = f.rank() == Rank::tensor3x3_symmetric;
        std::vector<ModeKey> keys = f.keys();
        std::vector<cplx> coef(keys.size() * 3);
        for (size_t i = 0; i < keys.size(); ++i) {
            IVec3 k = unpack_key(keys[i]);
            const cplx* r = f.row(i);
            for (int a = 0; a < 3; ++a) {
                cplx sum(0.0, 0.0);
                for (int b = 0; b < 3; ++b) {
                    cplx s = sym ? r[sym_index(a, b)] : r[full_index(a, b)];
                    sum += double(k[size_t(b)]) * s;
                }
                coef[i * 3 + size_t(a)] = cplx(0.0, 1.0) * sum;
            }
        }
        return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
    }
    fail(Errc::rank_mismatch, "divergence expects vector or tensor rank");
}

inline SpectralField curl(const SpectralField& f) {
    if (f.rank() != Rank::vector3) fail(Errc::rank_mismatch, "curl expects a vector field");
    std::vector<ModeKey> keys = f.keys();
    std::vector<cplx> coef(keys.size() * 3);
    for (size_t i = 0; i < keys.size(); ++i) {
        IVec3 k = unpack_key(keys[i]);
        const cplx* r = f.row(i);
        cplx ik0(0.0, double(k[0])), ik1(0.0, double(k[1])), ik2(0.0, double(k[2]));
        coef[i * 3 + 0] = ik1 * r[2] - ik2 * r[1];
        coef[i * 3 + 1] = ik2 * r[0] - ik0 * r[2];
        coef[i * 3 + 2] = ik0 * r[1] - ik1 * r[0];
    }
    return SpectralField::from_rows(Rank::vector3, std::move(keys), std::move(coef));
}

inline SpectralField laplacian(const SpectralField& f) {
    return f.mapped([&](const IVec3& k, cplx* row) {
        double m = -double(l2_norm_sq(k));
        for (int c = 0; c < f.ncomp(); ++c) row[c] *= m;
    });
}

// ---------------------------------------------------------------------------
// Projections

// P_I : keep modes with |k|_1 in the interval.
inline SpectralField project_shell(const SpectralField& f, const ShellInterval& I) {
    return f.filtered([&](const IVec3& k) { return I.contains(l1_norm(k)); });
}

inline SpectralField remove_mean(const SpectralField& f) {
    return project_shell(f, ShellInterval::nonzero());
}

// Leray-Helmholtz projector: multiplier I - k (x) k / |k|^2, mean preserved.
inline SpectralField leray_project(const SpectralField& f) {
    if (f.rank() != Rank::vector3) fail(Errc::rank_mismatch, "leray_project expects a vector field");
    return f.mapped([&](const IVec3& k, cplx* row) {
        int64_t k2 = l2_norm_sq(k);
        if (k2 == 0) return;
        cplx kd = (double(k[0]) * row[0] + double(k[1]) * row[1] + double(k[2]) * row[2]) / double(k2);
        for (int d = 0; d < 3; ++d) row[d] -= double(k[size_t(d)]) * kd;
    });
}

// (I - P_H) v = grad(Delta^{-1} div v); returns the scalar potential q with
// grad q = (I - P_H) v and zero mean.
inline SpectralField gradient_potential(const SpectralField& f) {
    if (f.rank() != Rank::vector3) fail(Errc::rank_mismatch, "gradient_potential expects a vector field");
    SpectralField out(Rank::scalar);
    std::vector<ModeKey> keys;
    std::vector<cplx> coef;
    for (size_t i = 0; i < f.nmodes(); ++i) {
        IVec3 k = f.mode(i);
        int64_t k2 = l2_norm_sq(k);
        if (k2 == 0) continue;
        const cplx* r = f.row(i);
        cplx kd = double(k[0]) * r[0] + double(k[1]) * r[1] + double(k[2]) * r[2];
        // q_hat = (i k . v_hat) / (-|k|^2) so that (grad q)_hat = k (k.v)/|k|^2
        keys.push_back(f.keys()[i]);
        coef.push_back(cplx(0.0, 1.0) * kd / double(-k2));
    }
    return SpectralField::from_rows(Rank::scalar, std::move(keys), std::move(coef));
}

// ---------------------------------------------------------------------------
// Products

enum class ProductKind {
    scalar_scalar,   // scalar * scalar -> scalar
    scale,           // scalar * any -> same rank
    outer,           // vector (x) vector -> tensor3x3
    sym_outer,       // (u (x) v + v (x) u)/2 -> symmetric tensor
    outer_self,      // u (x) u -> symmetric tensor
    dot,             // vector . vector -> scalar
    tensor_vector,   // S v -> vector
};

struct MultiplyOptions {
    double drop_tol = 1e-14;       // relative coefficient truncation
    int64_t sparse_cost_cap = 64 * 1000 * 1000;  // pair ops before switching to FFT
    bool force_sparse = false;
    bool force_dense = false;
};

namespace detail {

struct ProductTerm {
    int out_comp;
    int f_comp;
    int g_comp;
    double weight;
};

inline void product_plan(ProductKind kind, Rank fr, Rank gr, Rank& out_rank,
                         std::vector<ProductTerm>& terms) {
    terms.clear();
    switch (kind) {
        case ProductKind::scalar_scalar:
            if (fr != Rank::scalar || gr != Rank::scalar) fail(Errc::rank_mismatch, "scalar_scalar");
            out_rank = Rank::scalar;
            terms.push_back({0, 0, 0, 1.0});
            return;
        case ProductKind::scale:
            if (fr != Rank::scalar) fail(Errc::rank_mismatch, "scale: first factor must be scalar");
            out_rank = gr;
            for (int c = 0; c < component_count(gr); ++c) terms.push_back({c, 0, c, 1.0});
            return;
        case ProductKind::outer:
            if (fr != Rank::vector3 || gr != Rank::vector3) fail(Errc::rank_mismatch, "outer");
            out_rank = Rank::tensor3x3;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) terms.push_back({full_index(i, j), i, j, 1.0});
            return;
        case ProductKind::sym_outer:
            if (fr != Rank::vector3 || gr != Rank::vector3) fail(Errc::rank_mismatch, "sym_outer");
            out_rank = Rank::tensor3x3_symmetric;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    if (i == j) terms.push_back({sym_index(i, j), i, j, 1.0});
                    else {
                        terms.push_back({sym_index(i, j), i, j, 0.5});
                        terms.push_back({sym_index(i, j), j, i, 0.5});
                    }
                }
            return;
        case ProductKind::outer_self:
            if (fr != Rank::vector3 || gr != Rank::vector3) fail(Errc::rank_mismatch, "outer_self");
            out_rank = Rank::tensor3x3_symmetric;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) terms.push_back({sym_index(i, j), i, j, 1.0});
            return;
        case ProductKind::dot:
            if (fr != Rank::vector3 || gr != Rank::vector3) fail(Errc::rank_mismatch, "dot");
            out_rank = Rank::scalar;
            for (int i = 0; i < 3; ++i) terms.push_back({0, i, i, 1.0});
            return;
        case ProductKind::tensor_vector:
            if ((fr != Rank::tensor3x3 && fr != Rank::tensor3x3_symmetric) || gr != Rank::vector3)
                fail(Errc::rank_mismatch, "tensor_vector");
            out_rank = Rank::vector3;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    terms.push_back({i, fr == Rank::tensor3x3 ? full_index(i, j) : sym_index(i, j), j, 1.0});
            return;
    }
    fail(Errc::rank_mismatch, "unknown product kind");
}

// Sparse convolution of one output component.  Packed keys are affine in k,
// so key sums are plain integer adds as long as component sums stay within
// the 21-bit lanes; the bandwidth guard in multiply() ensures that.
inline SparseComp convolve_sparse(const SpectralField& f, const SpectralField& g,
                                  const std::vector<ProductTerm>& terms, int out_comp) {
    static const ModeKey kZeroKey = pack_key({0, 0, 0});
    std::unordered_map<ModeKey, cplx> acc;
    acc.reserve(2 * (f.nmodes() + g.nmodes()));
    std::vector<std::pair<ModeKey, cplx>> fs, gs;
    for (const ProductTerm& t : terms) {
        if (t.out_comp != out_comp) continue;
        fs.clear();
        gs.clear();
        for (size_t i = 0; i < f.nmodes(); ++i) {
            cplx v = f.row(i)[t.f_comp];
            if (v != cplx(0.0, 0.0)) fs.emplace_back(f.keys()[i] - kZeroKey, v * t.weight);
        }
        for (size_t j = 0; j < g.nmodes(); ++j) {
            cplx v = g.row(j)[t.g_comp];
            if (v != cplx(0.0, 0.0)) gs.emplace_back(g.keys()[j], v);
        }
        for (const auto& [fk, fv] : fs)
            for (const auto& [gk, gv] : gs) acc[fk + gk] += fv * gv;
    }
    SparseComp out;
    out.keys.reserve(acc.size());
    for (auto& kv : acc) out.keys.push_back(kv.first);
    std::sort(out.keys.begin(), out.keys.end());
    out.vals.reserve(out.keys.size());
    for (ModeKey k : out.keys) out.vals.push_back(acc.find(k)->second);
    return out;
}

// Dense path: synthesize needed components on the padded grid, multiply
// pointwise, transform back and gather the exact product ball.
inline SpectralField multiply_dense(const SpectralField& f, const SpectralField& g,
                                    Rank out_rank, const std::vector<ProductTerm>& terms,
                                    const MultiplyOptions& opt) {
    const int64_t K = f.bandwidth() + g.bandwidth();
    Grid grid(next_odd_smooth(int(2 * K + 1)));

    auto synth_comp = [&](const SpectralField& h, int comp) {
        DenseSynthesizer synth(grid.n);
        for (size_t i = 0; i < h.nmodes(); ++i) synth.scatter(h.mode(i), h.row(i)[comp]);
        std::vector<double> cube(grid.npoints());
        const double* v = synth.synthesize();
        std::copy(v, v + grid.npoints(), cube.begin());
        return cube;
    };

    // synthesize each needed component once (factors may alias)
    const bool same = &f == &g || f == g;
    std::vector<std::vector<double>> fcubes(size_t(f.ncomp())), gcubes(size_t(g.ncomp()));
    std::vector<bool> fneed(size_t(f.ncomp()), false), gneed(size_t(g.ncomp()), false);
    for (const auto& t : terms) {
        fneed[size_t(t.f_comp)] = true;
        (same ? fneed : gneed)[size_t(t.g_comp)] = true;
    }
    for (int c = 0; c < f.ncomp(); ++c)
        if (fneed[size_t(c)]) fcubes[size_t(c)] = synth_comp(f, c);
    if (!same)
        for (int c = 0; c < g.ncomp(); ++c)
            if (gneed[size_t(c)]) gcubes[size_t(c)] = synth_comp(g, c);
    const auto& gref = same ? fcubes : gcubes;

    const int n_out = component_count(out_rank);
    std::vector<SparseComp> comps(static_cast<size_t>(n_out));
    DenseAnalyzer ana(grid.n);
    for (int oc = 0; oc < n_out; ++oc) {
        double* prod = ana.real_data();
        std::fill(prod, prod + grid.npoints(), 0.0);
        for (const auto& t : terms) {
            if (t.out_comp != oc) continue;
            const double* a = fcubes[size_t(t.f_comp)].data();
            const double* b = gref[size_t(t.g_comp)].data();
            const double w = t.weight;
            for (size_t i = 0; i < grid.npoints(); ++i) prod[i] += w * a[i] * b[i];
        }
        ana.analyze();
        comps[size_t(oc)] = gather_ball_relative(ana, int(K), opt.drop_tol);
    }
    SpectralField out = zip_components(out_rank, comps);
    return opt.drop_tol > 0.0 ? out.truncated(opt.drop_tol) : out;
}

inline SpectralField multiply_sparse(const SpectralField& f, const SpectralField& g,
                                     Rank out_rank, const std::vector<ProductTerm>& terms,
                                     const MultiplyOptions& opt) {
    const int n_out = component_count(out_rank);
    std::vector<SparseComp> comps(static_cast<size_t>(n_out));
    parallel_for(n_out, [&](int oc) { comps[size_t(oc)] = convolve_sparse(f, g, terms, oc); });
    SpectralField out = zip_components(out_rank, comps);
    return opt.drop_tol > 0.0 ? out.truncated(opt.drop_tol) : out;
}

// Complex-cube path: exact for factors without conjugate symmetry.
inline SpectralField multiply_dense_c2c(const SpectralField& f, const SpectralField& g,
                                        Rank out_rank, const std::vector<ProductTerm>& terms,
                                        const MultiplyOptions& opt) {
    const int64_t K = f.bandwidth() + g.bandwidth();
    const int n = next_odd_smooth(int(2 * K + 1));
    auto synth = [&](const SpectralField& h, int comp) {
        auto cube = std::make_unique<ComplexCube>(n);
        for (size_t i = 0; i < h.nmodes(); ++i) cube->scatter(h.mode(i), h.row(i)[comp]);
        cube->synthesize();
        return cube;
    };
    std::vector<std::unique_ptr<ComplexCube>> fcubes(size_t(f.ncomp())), gcubes(size_t(g.ncomp()));
    for (const auto& t : terms) {
        if (!fcubes[size_t(t.f_comp)]) fcubes[size_t(t.f_comp)] = synth(f, t.f_comp);
        if (!gcubes[size_t(t.g_comp)]) gcubes[size_t(t.g_comp)] = synth(g, t.g_comp);
    }
    const int n_out = component_count(out_rank);
    std::vector<SparseComp> comps(static_cast<size_t>(n_out));
    ComplexCube prod(n);
    for (int oc = 0; oc < n_out; ++oc) {
        prod.clear();
        fftw_complex* pd = prod.data();
        for (const auto& t : terms) {
            if (t.out_comp != oc) continue;
            const fftw_complex* a = fcubes[size_t(t.f_comp)]->data();
            const fftw_complex* b = gcubes[size_t(t.g_comp)]->data();
            const double w = t.weight;
            for (size_t i = 0; i < prod.npoints(); ++i) {
                double re = a[i][0] * b[i][0] - a[i][1] * b[i][1];
                double im = a[i][0] * b[i][1] + a[i][1] * b[i][0];
                pd[i][0] += w * re;
                pd[i][1] += w * im;
            }
        }
        prod.analyze();
        int Ki = int(K);
        double comp_max = 0.0;
        for (int32_t a = -Ki; a <= Ki; ++a)
            for (int32_t b = -Ki; b <= Ki; ++b)
                for (int32_t d = -Ki; d <= Ki; ++d)
                    comp_max = std::max(comp_max, std::abs(prod.coeff({a, b, d})));
        double cut = opt.drop_tol * comp_max;
        SparseComp& sc = comps[size_t(oc)];
        for (int32_t a = -Ki; a <= Ki; ++a)
            for (int32_t b = -Ki; b <= Ki; ++b)
                for (int32_t d = -Ki; d <= Ki; ++d) {
                    cplx v = prod.coeff({a, b, d});
                    double m = std::abs(v);
                    if (m > cut && m > 0.0) {
                        sc.keys.push_back(pack_key({a, b, d}));
                        sc.vals.push_back(v);
                    }
                }
    }
    SpectralField out = zip_components(out_rank, comps);
    return opt.drop_tol > 0.0 ? out.truncated(opt.drop_tol) : out;
}

}  // namespace detail

inline SpectralField multiply(const SpectralField& f, const SpectralField& g, ProductKind kind,
                              const MultiplyOptions& opt = {}) {
    Rank out_rank;
    std::vector<detail::ProductTerm> terms;
    detail::product_plan(kind, f.rank(), g.rank(), out_rank, terms);
    if (f.empty() || g.empty()) return SpectralField(out_rank);
    if (f.bandwidth() + g.bandwidth() >= (int64_t(1) << 19))
        fail(Errc::grid_too_small, "multiply: combined bandwidth too large");

    int64_t cost = int64_t(f.nmodes()) * int64_t(g.nmodes()) * int64_t(terms.size());
    bool use_sparse = opt.force_sparse || (!opt.force_dense && cost <= opt.sparse_cost_cap);
    if (use_sparse) return detail::multiply_sparse(f, g, out_rank, terms, opt);
    // the half-spectrum FFT path assumes conjugate symmetry; complex factors
    // go through the full complex-cube transform instead
    double fd = f.reality_defect(), gd = g.reality_defect();
    double fm = f.max_abs(), gm = g.max_abs();
    bool real_ok = fd <= 1e-9 * (fm > 0 ? fm : 1.0) && gd <= 1e-9 * (gm > 0 ? gm : 1.0);
    return real_ok ? detail::multiply_dense(f, g, out_rank, terms, opt)
                   : detail::multiply_dense_c2c(f, g, out_rank, terms, opt);
}

// Convenience wrappers
inline SpectralField mult_scalar(const SpectralField& f, const SpectralField& g,
                                 const MultiplyOptions& opt = {}) {
    return multiply(f, g, ProductKind::scalar_scalar, opt);
}
inline SpectralField scale_field(const SpectralField& s, const SpectralField& f,
                                 const MultiplyOptions& opt = {}) {
    return multiply(s, f, ProductKind::scale, opt);
}
inline SpectralField outer(const SpectralField& u, const SpectralField& v,
                           const MultiplyOptions& opt = {}) {
    return multiply(u, v, ProductKind::outer, opt);
}
inline SpectralField sym_outer(const SpectralField& u, const SpectralField& v,
                               const MultiplyOptions& opt = {}) {
    return multiply(u, v, ProductKind::sym_outer, opt);
}
inline SpectralField outer_self(const SpectralField& u, const MultiplyOptions& opt = {}) {
    return multiply(u, u, ProductKind::outer_self, opt);
}
inline SpectralField dot_product(const SpectralField& u, const SpectralField& v,
                                 const MultiplyOptions& opt = {}) {
    return multiply(u, v, ProductKind::dot, opt);
}

// Trace of a tensor field as a scalar field.
inline SpectralField tensor_trace(const SpectralField& S) {
    if (S.rank() == Rank::tensor3x3_symmetric) {
        SpectralField out(Rank::scalar);
        std::vector<ModeKey> keys = S.keys();
        std::vector<cplx> coef(keys.size());
        for (size_t i = 0; i < keys.size(); ++i)
            coef[i] = S.row(i)[0] + S.row(i)[3] + S.row(i)[5];
        return SpectralField::from_rows(Rank::scalar, std::move(keys), std::move(coef));
    }
    if (S.rank() == Rank::tensor3x3) {
        SpectralField out(Rank::scalar);
        std::vector<ModeKey> keys = S.keys();
        std::vector<cplx> coef(keys.size());
        for (size_t i = 0; i < keys.size(); ++i)
            coef[i] = S.row(i)[0] + S.row(i)[4] + S.row(i)[8];
        return SpectralField::from_rows(Rank::scalar, std::move(keys), std::move(coef));
    }
    fail(Errc::rank_mismatch, "tensor_trace expects tensor rank");
}

// S - (tr S / 3) I as a symmetric tensor plus the removed trace/3 scalar.
// Row-wise: the trace only touches diagonal components of existing modes.
inline std::pair<SpectralField, SpectralField> remove_trace(const SpectralField& S) {
    if (S.rank() != Rank::tensor3x3_symmetric) fail(Errc::rank_mismatch, "remove_trace expects symmetric tensor");
    std::vector<ModeKey> keys = S.keys();
    std::vector<cplx> coef(S.coeffs());
    std::vector<ModeKey> tkeys;
    std::vector<cplx> tvals;
    tkeys.reserve(keys.size());
    tvals.reserve(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        cplx* row = coef.data() + i * 6;
        cplx t3 = (row[0] + row[3] + row[5]) / 3.0;
        row[0] -= t3;
        row[3] -= t3;
        row[5] -= t3;
        if (t3 != cplx(0.0, 0.0)) {
            tkeys.push_back(keys[i]);
            tvals.push_back(t3);
        }
    }
    SpectralField out = SpectralField::from_rows(Rank::tensor3x3_symmetric, std::move(keys), std::move(coef));
    SpectralField tr3 = SpectralField::from_rows(Rank::scalar, std::move(tkeys), std::move(tvals));
    return {std::move(out), std::move(tr3)};
}

}  // namespace ciflow
