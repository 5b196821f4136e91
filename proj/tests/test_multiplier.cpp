#include <catch2/catch_amalgamated.hpp>

#include "ciflow/multiplier.hpp"
#include "ciflow/rng.hpp"

using namespace ciflow;

TEST_CASE("identity symbol and Laplacian eigenfunction") {
    SpectralField s = sine_field({1, 0, 0});
    REQUIRE(apply(symbol_identity(), s).minus(s).max_abs() == 0.0);
    // |k|^2 on sin(x1): eigenvalue 1
    MultiplierSymbol lap{[](const IVec3& k) { return cplx(double(l2_norm_sq(k)), 0.0); }, "k2", {0.0, 0.0}};
    // sin has no zero mode, so the zero-mode rule is irrelevant here
    REQUIRE(apply(lap, s).minus(s).max_abs() < 1e-15);
}

TEST_CASE("hyperdissipation symbol values") {
    // beta = 0, theta = 1: the (negative) Laplacian symbol |k|^2
    MultiplierSymbol m0 = symbol_hyperdissipation(1.0, 0.0);
    REQUIRE(m0(IVec3{2, 1, 0}).real() == Catch::Approx(5.0).margin(1e-14));
    REQUIRE(m0(IVec3{0, 0, 0}) == cplx(0.0, 0.0));

    // k=(3,4,0), theta=5/4, beta=0: |k|^{5/2} = 5^{5/2}
    MultiplierSymbol m1 = symbol_hyperdissipation(1.25, 0.0);
    REQUIRE(m1(IVec3{3, 4, 0}).real() == Catch::Approx(std::pow(5.0, 2.5)).epsilon(1e-14));

    // k=(1,1,1), theta=5/4, beta=15: 3^{5/4}/log^15(13)
    MultiplierSymbol m2 = symbol_hyperdissipation(1.25, 15.0);
    double expect = std::pow(3.0, 1.25) / std::pow(std::log(13.0), 15.0);
    REQUIRE(m2(IVec3{1, 1, 1}).real() == Catch::Approx(expect).epsilon(1e-13));

    // single mode k=(1,0,0), beta=15, theta=5/4: scale factor 1/log^15(11)
    SpectralField f(Rank::scalar);
    f.add({1, 0, 0}, 0, cplx(1.0, 0.0));
    f.normalize();
    SpectralField g = apply(m2, f);
    REQUIRE(g.coeff({1, 0, 0}).real() ==
            Catch::Approx(1.0 / std::pow(std::log(11.0), 15.0)).epsilon(1e-13));
}

TEST_CASE("log-damping symbol") {
    double beta = 7.5;
    MultiplierSymbol m = symbol_log(beta);
    REQUIRE(m(IVec3{0, 0, 0}) == cplx(0.0, 0.0));
    auto expect = [beta](int64_t l1) { return std::pow(std::log(double(l1) + 10.0), -beta); };
    REQUIRE(m(IVec3{1, 0, 0}).real() == Catch::Approx(expect(1)).epsilon(1e-14));
    REQUIRE(m(IVec3{1, 1, 0}).real() == Catch::Approx(expect(2)).epsilon(1e-14));
    REQUIRE(m(IVec3{5, 5, 5}).real() == Catch::Approx(expect(15)).epsilon(1e-14));
    REQUIRE(m(IVec3{-5, 5, -5}).real() == m(IVec3{5, -5, 5}).real());  // m(-k) = m(k)
}

TEST_CASE("riesz, directional Hilbert and inverse-l1 symbols") {
    REQUIRE(symbol_riesz(2, 0, 0)(IVec3{1, 0, 0}).real() == Catch::Approx(1.0));
    REQUIRE(symbol_dir_hilbert(1)(IVec3{-2, 5, 0}) == cplx(0.0, -1.0));
    REQUIRE(symbol_inv_l1()(IVec3{3, 4, 0}).real() == Catch::Approx(1.0 / 7.0));
    REQUIRE(symbol_grad_power(1.5)(IVec3{0, 2, 0}).real() == Catch::Approx(std::pow(2.0, 1.5)));
}

TEST_CASE("composition: apply(m1, apply(m2, f)) = apply(m1*m2, f)") {
    Rng rng(12);
    SpectralField f = random_real_field(Rank::scalar, 4, rng);
    MultiplierSymbol m1 = symbol_log(3.0);
    MultiplierSymbol m2 = symbol_grad_power(1.5);
    SpectralField a = apply(m1, apply(m2, f));
    SpectralField b = apply(symbol_product(m1, m2), f);
    REQUIRE(a.minus(b).max_abs() < 1e-15 * a.max_abs());
}

TEST_CASE("multipliers commute with shell projection and derivatives") {
    Rng rng(13);
    SpectralField f = random_real_field(Rank::scalar, 4, rng);
    MultiplierSymbol m = symbol_hyperdissipation(1.25, 15.0);
    ShellInterval I = ShellInterval::half_open(2, 7);
    SpectralField a = apply(m, project_shell(f, I));
    SpectralField b = project_shell(apply(m, f), I);
    REQUIRE(a.minus(b).max_abs() < 1e-13 * (a.max_abs() + 1e-300));
    SpectralField c = apply(m, derivative(f, 2));
    SpectralField d = derivative(apply(m, f), 2);
    REQUIRE(c.minus(d).max_abs() < 1e-13 * (c.max_abs() + 1e-300));
}

TEST_CASE("real-operator symbols preserve the reality invariant") {
    Rng rng(14);
    SpectralField f = random_real_field(Rank::vector3, 3, rng);
    for (const MultiplierSymbol& m :
         {symbol_hyperdissipation(1.25, 15.0), symbol_log(4.0), symbol_inv_l1(),
          symbol_grad_power(1.5), symbol_riesz(1, 1, 0), symbol_dir_hilbert(2)}) {
        REQUIRE(m.hermitian_defect(3) < 1e-14);
        REQUIRE(apply(m, f).is_real(1e-12));
    }
}
