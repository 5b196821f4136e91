#include <catch2/catch_amalgamated.hpp>

#include "ciflow/calculus.hpp"
#include "ciflow/field.hpp"
#include "ciflow/grid.hpp"
#include "ciflow/rng.hpp"

using namespace ciflow;

namespace {

// Independent brute-force convolution over mode pairs (test-only oracle).
SpectralField brute_convolution(const SpectralField& f, const SpectralField& g) {
    REQUIRE(f.rank() == Rank::scalar);
    REQUIRE(g.rank() == Rank::scalar);
    SpectralField out(Rank::scalar);
    for (size_t i = 0; i < f.nmodes(); ++i)
        for (size_t j = 0; j < g.nmodes(); ++j)
            out.add(f.mode(i) + g.mode(j), 0, f.coeffs()[i] * g.coeffs()[j]);
    out.normalize();
    return out;
}

}  // namespace

TEST_CASE("packed keys round-trip and order") {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        IVec3 k{int32_t(rng.below(2001) - 1000), int32_t(rng.below(2001) - 1000),
                int32_t(rng.below(2001) - 1000)};
        REQUIRE(unpack_key(pack_key(k)) == k);
    }
    REQUIRE(pack_key({0, 0, 0}) < pack_key({0, 0, 1}));
    REQUIRE(pack_key({-1, 5, 5}) < pack_key({0, -5, -5}));
}

TEST_CASE("constant field synthesizes to a constant grid") {
    SpectralField f = constant_scalar(3.0);
    Grid g(5);
    GridData data = synthesize(f, g);
    for (double v : data.values) REQUIRE(v == Catch::Approx(3.0).margin(1e-14));
}

TEST_CASE("sine synthesis matches sin(x1)") {
    SpectralField f = sine_field({1, 0, 0});
    Grid g(9);
    GridData data = synthesize(f, g);
    for (int j0 = 0; j0 < g.n; ++j0) {
        double x = g.node(j0);
        // all points with this x0 share the value sin(x0)
        size_t base = size_t(j0) * g.n * g.n;
        REQUIRE(data.values[base] == Catch::Approx(std::sin(x)).margin(1e-13));
    }
}

TEST_CASE("analyze constant and cosine") {
    Grid g(7);
    GridData ones;
    ones.n = g.n;
    ones.ncomp = 1;
    ones.values.assign(g.npoints(), 1.0);
    SpectralField f = analyze(ones, g, 3, Rank::scalar);
    REQUIRE(f.nmodes() == 1);
    REQUIRE(f.coeff({0, 0, 0}).real() == Catch::Approx(1.0).margin(1e-14));

    SpectralField c = cosine_field({0, 1, 0});
    GridData data = synthesize(c, g);
    SpectralField back = analyze(data, g, 1, Rank::scalar);
    REQUIRE(back.coeff({0, 1, 0}).real() == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(back.coeff({0, -1, 0}).real() == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(std::abs(back.coeff({0, 0, 0})) < 1e-14);
}

TEST_CASE("round-trip exactness for random reality-symmetric fields") {
    Rng rng(42);
    SpectralField f = random_real_field(Rank::scalar, 5, rng);
    Grid g(11);
    GridData data = synthesize(f, g);
    SpectralField back = analyze(data, g, 5, Rank::scalar, 0.0);
    double scale = f.max_abs();
    REQUIRE(back.minus(f).max_abs() < 1e-12 * scale);

    // vector fields too
    SpectralField v = random_real_field(Rank::vector3, 3, rng);
    Grid gv(9);
    SpectralField vb = analyze(synthesize(v, gv), gv, 3, Rank::vector3, 0.0);
    REQUIRE(vb.minus(v).max_abs() < 1e-12 * v.max_abs());
}

TEST_CASE("grid too small is rejected") {
    SpectralField f = cosine_field({3, 0, 0});
    Grid g(5);
    REQUIRE_THROWS_AS(synthesize(f, g), Error);
}

TEST_CASE("product of synthesized fields analyzes to the sparse convolution") {
    Rng rng(3);
    SpectralField f = random_real_field(Rank::scalar, 2, rng);
    SpectralField g = random_real_field(Rank::scalar, 3, rng);
    Grid grid(next_odd_smooth(int(2 * (2 + 3) + 1)));
    GridData fd = synthesize(f, grid), gd = synthesize(g, grid);
    GridData prod;
    prod.n = grid.n;
    prod.ncomp = 1;
    prod.values.resize(grid.npoints());
    for (size_t i = 0; i < grid.npoints(); ++i) prod.values[i] = fd.values[i] * gd.values[i];
    SpectralField analyzed = analyze(prod, grid, 5, Rank::scalar, 0.0);
    SpectralField oracle = brute_convolution(f, g);
    REQUIRE(analyzed.minus(oracle).max_abs() < 1e-12 * oracle.max_abs());
}

TEST_CASE("multiply: identity, double angle, and convolution oracle") {
    SpectralField one = constant_scalar(1.0);
    SpectralField s = sine_field({1, 0, 0});
    SpectralField idp = mult_scalar(one, s);
    REQUIRE(idp.minus(s).max_abs() < 1e-15);

    // sin(x1)^2 = 1/2 - cos(2 x1)/2
    SpectralField s2 = mult_scalar(s, s);
    REQUIRE(s2.coeff({0, 0, 0}).real() == Catch::Approx(0.5).margin(1e-14));
    REQUIRE(s2.coeff({2, 0, 0}).real() == Catch::Approx(-0.25).margin(1e-14));
    REQUIRE(s2.coeff({-2, 0, 0}).real() == Catch::Approx(-0.25).margin(1e-14));
    REQUIRE(s2.nmodes() == 3);

    Rng rng(11);
    SpectralField f = random_real_field(Rank::scalar, 4, rng);
    SpectralField g = random_real_field(Rank::scalar, 4, rng);
    SpectralField oracle = brute_convolution(f, g);
    MultiplyOptions sparse_opt;
    sparse_opt.force_sparse = true;
    sparse_opt.drop_tol = 0.0;
    MultiplyOptions dense_opt;
    dense_opt.force_dense = true;
    dense_opt.drop_tol = 0.0;
    SpectralField ps = mult_scalar(f, g, sparse_opt);
    SpectralField pd = mult_scalar(f, g, dense_opt);
    double scale = oracle.max_abs();
    REQUIRE(ps.minus(oracle).max_abs() < 1e-12 * scale);
    REQUIRE(pd.minus(oracle).max_abs() < 1e-12 * scale);
    REQUIRE(ps.minus(pd).max_abs() < 1e-12 * scale);
}

TEST_CASE("multiply is bilinear and commutative for scalars") {
    Rng rng(5);
    SpectralField f = random_real_field(Rank::scalar, 2, rng);
    SpectralField g = random_real_field(Rank::scalar, 2, rng);
    SpectralField h = random_real_field(Rank::scalar, 2, rng);
    MultiplyOptions opt;
    opt.drop_tol = 0.0;
    SpectralField lhs = mult_scalar(f.plus(g, cplx(2.0, 0.0)), h, opt);
    SpectralField rhs = mult_scalar(f, h, opt).plus(mult_scalar(g, h, opt), cplx(2.0, 0.0));
    REQUIRE(lhs.minus(rhs).max_abs() < 1e-12 * lhs.max_abs());
    SpectralField fg = mult_scalar(f, g, opt);
    SpectralField gf = mult_scalar(g, f, opt);
    REQUIRE(fg.minus(gf).max_abs() < 1e-12 * fg.max_abs());
}

TEST_CASE("reality invariant is preserved by operations") {
    Rng rng(9);
    SpectralField f = random_real_field(Rank::scalar, 3, rng);
    SpectralField g = random_real_field(Rank::vector3, 2, rng);
    REQUIRE(f.is_real());
    REQUIRE(g.is_real());
    REQUIRE(mult_scalar(f, f).is_real());
    REQUIRE(scale_field(f, g).is_real());
    REQUIRE(derivative(f, 1).is_real());
    REQUIRE(curl(g).is_real());
    REQUIRE(leray_project(g).is_real());
    REQUIRE(project_shell(f, ShellInterval::nonzero()).is_real());
}

TEST_CASE("truncation drops only negligible modes") {
    SpectralField f(Rank::scalar);
    f.add({0, 0, 0}, 0, cplx(1.0, 0.0));
    f.add({1, 0, 0}, 0, cplx(1e-20, 0.0));
    f.add({-1, 0, 0}, 0, cplx(1e-20, 0.0));
    f.normalize();
    SpectralField t = f.truncated(1e-14);
    REQUIRE(t.nmodes() == 1);
    REQUIRE(t.coeff({0, 0, 0}).real() == 1.0);
}

TEST_CASE("zero-mode presence is not observable") {
    // a field with an explicitly stored zero coefficient behaves like one
    // without it
    SpectralField a = cosine_field({1, 1, 0});
    SpectralField b = a;
    SpectralField zero(Rank::scalar);
    zero.add({2, 0, 0}, 0, cplx(0.0, 0.0));
    zero.add({-2, 0, 0}, 0, cplx(0.0, 0.0));
    zero.normalize();
    b = b.plus(zero);
    Grid g(7);
    GridData da = synthesize(a, g), db = synthesize(b, g);
    for (size_t i = 0; i < da.values.size(); ++i)
        REQUIRE(da.values[i] == Catch::Approx(db.values[i]).margin(1e-15));
    REQUIRE(mult_scalar(a, a).minus(mult_scalar(b, b)).max_abs() < 1e-15);
}
