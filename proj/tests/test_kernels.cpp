#include <catch2/catch_amalgamated.hpp>

#include "ciflow/building_blocks.hpp"
#include "ciflow/kernels.hpp"

using namespace ciflow;

TEST_CASE("Dirichlet kernel at N = 0 is the constant 1") {
    KernelReport rep = dirichlet_l1_kernel(0);
    REQUIRE(rep.l1_norm == Catch::Approx(1.0));
}

TEST_CASE("Fejer kernels: nonnegative, unit L1, L2 from the coefficient sum") {
    for (int64_t r : {2, 4, 8, 16}) {
        FejerReport rep = fejer_kernel_1d(r);
        REQUIRE(rep.min_value > -1e-12);
        REQUIRE(rep.l1_norm == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(rep.l2_norm * rep.l2_norm ==
                Catch::Approx(fejer_l2_sq_1d(r)).margin(1e-10));
    }
}

TEST_CASE("Dirichlet L1 norms: monotone growth and the measured fit exponent") {
    std::vector<int64_t> Ns{4, 8, 16, 32, 64};
    auto rows = dirichlet_l1_series(Ns, {}, 0.0);
    REQUIRE(rows.size() == 5);
    for (size_t i = 1; i < rows.size(); ++i) REQUIRE(rows[i].l1_norm > rows[i - 1].l1_norm);
    // at this range the effective log-exponent sits near 1.5: the log^3
    // asymptotics carries a tiny leading coefficient, so lower-order terms
    // dominate any feasible N (see the acceptance report for the bound as
    // stated); pin the measured behavior against regressions
    REQUIRE(rows[0].fitted_b > 1.2);
    REQUIRE(rows[0].fitted_b < 2.0);
    // quadrature error under control
    for (auto& r : rows) REQUIRE(r.quad_error < 0.02 * r.l1_norm);
    // spot values from refined-grid runs
    REQUIRE(rows[0].l1_norm == Catch::Approx(5.625).epsilon(0.01));
    REQUIRE(rows[4].l1_norm == Catch::Approx(29.94).epsilon(0.01));
}

TEST_CASE("tail bound for the inverse-l1 multiplier") {
    DirichletNormTable table(48);
    TailConfig cfg;
    std::vector<int64_t> Ns{8, 16, 32, 64, 128};
    std::vector<double> vals;
    for (int64_t N : Ns) {
        TailEstimate e = tail_multiplier_norm(symbol_inv_l1(), N, table, cfg);
        REQUIRE(e.converged);
        vals.push_back(e.value);
    }
    // decreasing in N
    for (size_t i = 1; i < vals.size(); ++i) REQUIRE(vals[i] < vals[i - 1]);
    // consistent with (1/N) log^3 N within a factor 4
    for (size_t i = 0; i < Ns.size(); ++i) {
        double model = std::pow(std::log(double(Ns[i])), 3.0) / double(Ns[i]);
        double ratio = vals[i] / model;
        REQUIRE(ratio < 4.0 * (vals[0] / (std::pow(std::log(8.0), 3.0) / 8.0)));
        REQUIRE(ratio > 0.25 * (vals[0] / (std::pow(std::log(8.0), 3.0) / 8.0)));
    }
    // fitted exponents: the decay exponent a is identifiable and sits near
    // -1; the log-exponent b inherits the same small-N suppression as the
    // Dirichlet norms themselves (measured ~1.2-1.7 here)
    std::vector<double> xs(Ns.begin(), Ns.end());
    PowerLogFit fit = fit_power_log(xs, vals);
    REQUIRE(fit.a > -1.4);
    REQUIRE(fit.a < -0.6);
    REQUIRE(fit.b > 1.0);
    REQUIRE(fit.b < 2.2);
}

TEST_CASE("tail bound for the log multiplier decreases like log^{3-beta}") {
    DirichletNormTable table(32);
    std::vector<int64_t> Ns{8, 16, 32, 64};
    std::vector<double> vals;
    for (int64_t N : Ns) {
        TailEstimate e = tail_multiplier_norm(symbol_log(4.0), N, table);
        REQUIRE(e.converged);
        vals.push_back(e.value);
    }
    for (size_t i = 1; i < vals.size(); ++i) REQUIRE(vals[i] < vals[i - 1]);
    // ratio against log^{-1}(N) stays within a modest band
    double r0 = vals[0] * std::log(double(Ns[0]) + 10.0);
    for (size_t i = 1; i < Ns.size(); ++i) {
        double ri = vals[i] * std::log(double(Ns[i]) + 10.0);
        REQUIRE(ri < 4.0 * r0);
        REQUIRE(ri > 0.25 * r0);
    }
}

TEST_CASE("tail of a finitely supported symbol is zero beyond its bandwidth") {
    MultiplierSymbol m;
    m.name = "truncated";
    m.eval = [](const IVec3& k) { return l1_norm(k) <= 10 ? cplx(1.0 / double(l1_norm(k)), 0.0) : cplx(0.0, 0.0); };
    DirichletNormTable table(16);
    TailEstimate e = tail_multiplier_norm(m, 12, table);
    REQUIRE(e.value == 0.0);
    REQUIRE(e.converged);
}
