#include <catch2/catch_amalgamated.hpp>

#include "ciflow/norms.hpp"
#include "ciflow/rng.hpp"

using namespace ciflow;

TEST_CASE("constant fields have |c| as every Lp norm") {
    SpectralField f = constant_scalar(-2.5);
    for (double p : {1.0, 2.0, 3.0, 7.0}) REQUIRE(lp_norm(f, p) == Catch::Approx(2.5).margin(1e-12));
    REQUIRE(lp_norm(f, std::numeric_limits<double>::infinity()) == Catch::Approx(2.5).margin(1e-12));
}

TEST_CASE("L2 of sin is sqrt(1/2) and quadrature matches Parseval") {
    SpectralField s = sine_field({1, 0, 0});
    REQUIRE(lp_norm(s, 2.0) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
    REQUIRE(l2_norm_parseval(s) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
    Rng rng(21);
    SpectralField f = random_real_field(Rank::vector3, 4, rng);
    Grid g = grid_for_bandwidth(f.bandwidth(), 1.0);
    REQUIRE(lp_norm(f, 2.0, g) == Catch::Approx(l2_norm_parseval(f)).epsilon(1e-10));
}

TEST_CASE("1-D Fejer kernel as a field: L2 matches the coefficient formula") {
    // r = 2 weights 1, 2/3, 1/3: sum of squares = (2 r^2 + 4 r + 3)/(3(r+1)) = 19/9
    int64_t r = 2;
    SpectralField F(Rank::scalar);
    for (int64_t j = -r; j <= r; ++j)
        F.add({int32_t(j), 0, 0}, 0, cplx(1.0 - std::abs(double(j)) / double(r + 1), 0.0));
    F.normalize();
    REQUIRE(lp_norm(F, 2.0) == Catch::Approx(std::sqrt(19.0 / 9.0)).epsilon(1e-10));
}

TEST_CASE("luxemburg at alpha = 0 reduces to L1") {
    SpectralField c = constant_scalar(3.0);
    REQUIRE(luxemburg_norm(c, 0.0) == Catch::Approx(3.0).epsilon(1e-9));
    Rng rng(22);
    SpectralField f = random_real_field(Rank::scalar, 3, rng);
    NormConfig cfg;
    REQUIRE(luxemburg_norm(f, 0.0, cfg) == Catch::Approx(lp_norm(f, 1.0, cfg)).epsilon(1e-9));
}

TEST_CASE("luxemburg of a constant solves the scalar Young equation") {
    // constant c, alpha = 1: the norm solves (c/lam) log(2 + c/lam) = 1
    double c = 2.0;
    SpectralField f = constant_scalar(c);
    double lam = luxemburg_norm(f, 1.0);
    double s = c / lam;
    REQUIRE(s * std::log(2.0 + s) == Catch::Approx(1.0).margin(1e-8));
    // independent 1-D Newton solve
    double x = 1.0;
    for (int it = 0; it < 80; ++it) {
        double g = x * std::log(2.0 + x) - 1.0;
        double dg = std::log(2.0 + x) + x / (2.0 + x);
        x -= g / dg;
    }
    REQUIRE(lam == Catch::Approx(c / x).epsilon(1e-8));
}

TEST_CASE("luxemburg scaling: value of 2f is between value and twice value") {
    Rng rng(23);
    SpectralField f = random_real_field(Rank::scalar, 2, rng);
    double v1 = luxemburg_norm(f, 1.0);
    double v2 = luxemburg_norm(f.scaled(2.0), 1.0);
    REQUIRE(v2 >= v1 * (1.0 - 1e-9));
    REQUIRE(v2 <= 2.0 * v1 * (1.0 + 1e-9));
}

TEST_CASE("luxemburg is monotone in alpha") {
    Rng rng(24);
    SpectralField f = random_real_field(Rank::scalar, 2, rng);
    double v0 = luxemburg_norm(f, 0.0);
    double v1 = luxemburg_norm(f, 1.0);
    double v2 = luxemburg_norm(f, 2.0);
    REQUIRE(v0 <= v1 * (1.0 + 1e-9));
    REQUIRE(v1 <= v2 * (1.0 + 1e-9));
}

TEST_CASE("product inequality ||f g|| <= ||f||_inf ||g|| for scalar f") {
    Rng rng(25);
    NormConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        SpectralField f = random_real_field(Rank::scalar, 2, rng, 0.7);
        SpectralField g = random_real_field(Rank::scalar, 2, rng);
        double alpha = (trial % 3) * 0.5;
        SpectralField fg = mult_scalar(f, g);
        double lhs = luxemburg_norm(fg, alpha, cfg);
        double rhs = lp_norm(f, std::numeric_limits<double>::infinity(), cfg) *
                     luxemburg_norm(g, alpha, cfg);
        REQUIRE(lhs <= rhs * (1.0 + 1e-8) + 1e-12);
    }
}

TEST_CASE("holder seminorm basics") {
    // constant field: all derivatives vanish, value |c| at n = 0
    TimeField cf({0.0, 0.1, 0.2, 0.3, 0.4, 0.5}, std::vector<SpectralField>(6, constant_scalar(1.5)));
    REQUIRE(holder_seminorm(cf, 0) == Catch::Approx(1.5).margin(1e-12));
    REQUIRE(holder_seminorm(cf, 1) == Catch::Approx(1.5).margin(1e-12));

    // sin(x1): max(|sin|, |cos|) = 1 at order 1
    TimeField sf({0.0, 0.1, 0.2, 0.3, 0.4, 0.5},
                 std::vector<SpectralField>(6, sine_field({1, 0, 0})));
    double h1 = holder_seminorm(sf, 1);
    REQUIRE(h1 == Catch::Approx(1.0).epsilon(2e-3));  // grid max is a lower bound
    REQUIRE(h1 <= 1.0 + 1e-9);
}

TEST_CASE("time derivative by finite differences is exact on cubics") {
    // f(t) = t^3 at fixed space: FD4 differentiates cubics exactly
    std::vector<double> times;
    std::vector<SpectralField> fields;
    for (int i = 0; i <= 8; ++i) {
        double t = 0.1 * i;
        times.push_back(t);
        fields.push_back(constant_scalar(t * t * t));
    }
    TimeField tf(times, fields);
    for (size_t i = 0; i < times.size(); ++i) {
        SpectralField d = time_derivative_at(tf, i);
        double expect = 3.0 * times[i] * times[i];
        REQUIRE(d.coeff({0, 0, 0}).real() == Catch::Approx(expect).margin(1e-12));
    }
    REQUIRE_THROWS_AS(time_derivative(tf, 99.0), Error);
}
