#pragma once
// Uniform quadrature grids on the torus, exact synthesis/analysis of sparse
// fields through dense FFTs, and Riemann-sum quadrature under the normalized
// Haar measure (total mass 1).

#include <functional>
#include <memory>

#include "ciflow/fft.hpp"
#include "ciflow/field.hpp"

namespace ciflow {

struct Grid {
    int n = 1;  // odd number of points per dimension; x_j = -pi + 2*pi*j/n

    explicit Grid(int n_points) : n(n_points) {
        if (n < 1 || n % 2 == 0) fail(Errc::grid_too_small, "grid size must be odd");
    }
    size_t npoints() const { return size_t(n) * n * n; }
    double node(int j) const { return -3.141592653589793238462643383279 + 2.0 * 3.141592653589793238462643383279 * j / n; }

    // Exact for bandwidth K when n >= 2K+1.
    bool resolves(int64_t K) const { return int64_t(n) >= 2 * K + 1; }
};

inline Grid grid_for_bandwidth(int64_t K, double oversample = 1.0, int max_n = 1 << 14) {
    int64_t want = int64_t(double(2 * K + 1) * (oversample < 1.0 ? 1.0 : oversample));
    if (want < 2 * K + 1) want = 2 * K + 1;
    if (want > max_n) want = std::max<int64_t>(2 * K + 1, max_n);
    return Grid(next_odd_smooth(int(want)));
}

// Real sample cube(s) of a field: component-major storage.
struct GridData {
    int n = 0;
    int ncomp = 0;
    std::vector<double> values;  // ncomp * n^3, component-major

    const double* comp(int c) const { return values.data() + size_t(c) * size_t(n) * n * n; }
    double* comp(int c) { return values.data() + size_t(c) * size_t(n) * n * n; }
};

// Pointwise samples of the trigonometric polynomial at the grid nodes.
inline GridData synthesize(const SpectralField& f, const Grid& g) {
    if (!g.resolves(f.bandwidth()))
        fail(Errc::grid_too_small, "synthesize: grid does not resolve field bandwidth");
    GridData out;
    out.n = g.n;
    out.ncomp = f.ncomp();
    out.values.resize(size_t(out.ncomp) * g.npoints());
    DenseSynthesizer synth(g.n);
    for (int c = 0; c < out.ncomp; ++c) {
        synth.clear();
        for (size_t i = 0; i < f.nmodes(); ++i) synth.scatter(f.mode(i), f.row(i)[c]);
        const double* v = synth.synthesize();
        std::copy(v, v + g.npoints(), out.comp(c));
    }
    return out;
}

namespace detail {

struct SparseComp {
    std::vector<ModeKey> keys;  // sorted by construction (lexicographic ball walk)
    std::vector<cplx> vals;
};

// Gather ball coefficients of the analyzed cube; drops entries at or below
// abs_cut (exact zeros are always dropped).
inline SparseComp gather_ball(const DenseAnalyzer& ana, int K, double abs_cut) {
    SparseComp out;
    for (int32_t a = -K; a <= K; ++a)
        for (int32_t b = -K; b <= K; ++b)
            for (int32_t d = -K; d <= K; ++d) {
                cplx v = ana.coeff({a, b, d});
                double m = std::abs(v);
                if (m > abs_cut && m > 0.0) {
                    out.keys.push_back(pack_key({a, b, d}));
                    out.vals.push_back(v);
                }
            }
    return out;
}

// Relative-threshold gather: the component max comes from a linear scan of
// the raw spectrum, then one ball pass collects the surviving modes.
inline SparseComp gather_ball_relative(const DenseAnalyzer& ana, int K, double rel_cut) {
    double cut = rel_cut > 0.0 ? rel_cut * ana.max_abs_coeff() : 0.0;
    return gather_ball(ana, K, cut);
}

// Merge per-component sorted lists into one multi-component field.
inline SpectralField zip_components(Rank rank, std::vector<SparseComp>& comps) {
    const int nc = component_count(rank);
    std::vector<size_t> pos(comps.size(), 0);
    std::vector<ModeKey> keys;
    std::vector<cplx> coef;
    size_t cap = 0;
    for (auto& c : comps) cap = std::max(cap, c.keys.size());
    keys.reserve(cap);
    coef.reserve(cap * size_t(nc));
    for (;;) {
        ModeKey next = std::numeric_limits<ModeKey>::max();
        for (size_t c = 0; c < comps.size(); ++c)
            if (pos[c] < comps[c].keys.size()) next = std::min(next, comps[c].keys[pos[c]]);
        if (next == std::numeric_limits<ModeKey>::max()) break;
        keys.push_back(next);
        for (int c = 0; c < nc; ++c) {
            auto& sc = comps[size_t(c)];
            if (pos[size_t(c)] < sc.keys.size() && sc.keys[pos[size_t(c)]] == next)
                coef.push_back(sc.vals[pos[size_t(c)]++]);
            else
                coef.push_back(cplx(0.0, 0.0));
        }
    }
    return SpectralField::from_rows(rank, std::move(keys), std::move(coef));
}

}  // namespace detail

// Fourier coefficients with |k|_inf <= K; exact for inputs band-limited to K
// when the grid resolves them.  Modes below drop_tol * (global max) are
// discarded.
inline SpectralField analyze(const GridData& data, const Grid& g, int64_t K, Rank rank,
                             double drop_tol = 1e-14) {
    if (data.n != g.n) fail(Errc::grid_too_small, "analyze: sample/grid size mismatch");
    if (!g.resolves(K)) fail(Errc::grid_too_small, "analyze: grid does not resolve requested bandwidth");
    if (component_count(rank) != data.ncomp) fail(Errc::rank_mismatch, "analyze: rank mismatch");
    int Ki = int(K);
    std::vector<detail::SparseComp> comps(static_cast<size_t>(data.ncomp));
    DenseAnalyzer ana(g.n);
    for (int c = 0; c < data.ncomp; ++c) {
        std::copy(data.comp(c), data.comp(c) + g.npoints(), ana.real_data());
        ana.analyze();
        // per-component provisional cut; the global relative cut is applied
        // after components are merged
        comps[size_t(c)] = detail::gather_ball_relative(ana, Ki, drop_tol);
    }
    SpectralField out = detail::zip_components(rank, comps);
    return drop_tol > 0.0 ? out.truncated(drop_tol) : out;
}

// ---------------------------------------------------------------------------
// Quadrature: integrals of pointwise functions of |f| under the normalized
// measure.  The pointwise magnitude is the Euclidean/Frobenius norm across
// components.  Accumulation runs plane-by-plane in a fixed order.

struct QuadratureResult {
    double value = 0.0;
    double refine_delta = 0.0;  // |value - coarse_value|, 0 if not estimated
    int n = 0;
};

// Magnitude-squared cube of a field on grid g.
inline std::vector<double> magnitude_sq_cube(const SpectralField& f, const Grid& g) {
    std::vector<double> acc(g.npoints(), 0.0);
    DenseSynthesizer synth(g.n);
    for (int c = 0; c < f.ncomp(); ++c) {
        synth.clear();
        for (size_t i = 0; i < f.nmodes(); ++i) synth.scatter(f.mode(i), f.row(i)[c]);
        const double* v = synth.synthesize();
        // symmetric tensors: off-diagonal components count twice in the
        // Frobenius norm
        double w = 1.0;
        if (f.rank() == Rank::tensor3x3_symmetric && (c == 1 || c == 2 || c == 4)) w = 2.0;
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i] * v[i];
    }
    return acc;
}

// Mean of fn(|f|(x)) over the torus by Riemann sum on grid g.
inline double quadrature_mean(const SpectralField& f, const Grid& g,
                              const std::function<double(double)>& fn) {
    std::vector<double> m2 = magnitude_sq_cube(f, g);
    size_t plane = size_t(g.n) * g.n;
    double total = 0.0;
    for (int z = 0; z < g.n; ++z) {
        double partial = 0.0;
        const double* p = m2.data() + size_t(z) * plane;
        for (size_t i = 0; i < plane; ++i) partial += fn(std::sqrt(p[i]));
        total += partial;
    }
    return total / double(g.npoints());
}

// Max of |f| over grid nodes (a lower bound for the sup norm).
inline double grid_max_abs(const SpectralField& f, const Grid& g) {
    std::vector<double> m2 = magnitude_sq_cube(f, g);
    double m = 0.0;
    for (double v : m2) m = std::max(m, v);
    return std::sqrt(m);
}

}  // namespace ciflow
