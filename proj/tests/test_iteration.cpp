#include <catch2/catch_amalgamated.hpp>

#include "ciflow/iteration.hpp"

using namespace ciflow;

namespace {
ParamSet desk_params(int64_t lam = 40) {
    ParamSet p;
    p.lam = lam;
    p.sigma = Rational(5, lam);  // lam sigma = 5
    p.r = 2;
    p.mu = 64.0;
    p.beta = 15.0;
    return p;
}

TripleState small_bootstrap(const ParamSet& prm) {
    SpectralField V(Rank::vector3);
    V.add({0, 0, 1}, 0, cplx(0.02, 0.0));
    V.add({0, 0, -1}, 0, cplx(0.02, 0.0));
    V.normalize();
    std::vector<double> times;
    for (int i = 0; i <= 8; ++i) times.push_back(i / 8.0);
    return bootstrap_separable(V, poly_bump(0.2, 0.8), times, prm);
}
}  // namespace

TEST_CASE("zero steps returns the initial state and its norms") {
    ParamSet prm = desk_params();
    TripleState st = small_bootstrap(prm);
    IterationConfig cfg;
    std::vector<TripleState> states;
    IterationReport rep = run_iteration(st, 0.5, {}, cfg, &states);
    REQUIRE(rep.steps.empty());
    REQUIRE(rep.delta1 > 0.0);
    REQUIRE(states.size() == 1);
}

TEST_CASE("one step preserves the triple invariants and reports norms") {
    ParamSet prm = desk_params();
    TripleState st = small_bootstrap(prm);
    IterationConfig cfg;
    std::vector<TripleState> states;
    IterationReport rep = run_iteration(st, 0.5, {prm}, cfg, &states);
    REQUIRE(rep.steps.size() == 1);
    const IterationStepRecord& rec = rep.steps[0];
    REQUIRE(rec.exact_time_derivatives);
    REQUIRE(rec.max_residual_l2 < 1e-7);
    REQUIRE(rec.support_contained);
    REQUIRE(rec.R_out_l1 > 0.0);
    REQUIRE(rec.dv_l2 > 0.0);
    REQUIRE(states.size() == 2);
    TripleCheck chk = check_triple(states[1]);
    REQUIRE(chk.div_residual < 1e-11 * (1.0 + states[1].v.at(4).max_abs()));
    REQUIRE(chk.trace_residual < 1e-11);
    REQUIRE(chk.mean_v < 1e-12);
}

TEST_CASE("stress diagnostics table: eight rows with sanity inequalities") {
    ParamSet prm = desk_params();
    TripleState st = small_bootstrap(prm);
    NormConfig nc;
    nc.oversample = 2.0;
    double delta1 = linf_l1(st.R, nc);
    GammaSolver solver;
    double eps = estimate_epsilon_lambda(solver, 500, 2024).value;
    auto blocks = build_block_family(prm, st.v.times());
    StepConfig cfg;
    DiagnosticsTable table = diagnostics_rq1(st, prm, delta1, blocks, solver, eps, cfg, {4});
    REQUIRE(table.rows.size() == 8);
    for (const auto& row : table.rows) {
        REQUIRE(row.measured_l1 >= 0.0);
        REQUIRE(row.symbolic_bound > 0.0);
    }
    // Cauchy-Schwarz: the corrector L1 norm is below the product of L2 norms
    REQUIRE(table.rows[0].measured_l1 <= table.corrector_cauchy_schwarz * (1.0 + 1e-9));
    // triangle inequality: sum of row norms dominates the norm of the sum
    REQUIRE(table.sum_of_rows >= table.combined_l1 * (1.0 - 1e-9));
    // C_a(N) is nondecreasing in N
    for (int n = 1; n <= 5; ++n) REQUIRE(table.c_a[size_t(n)] >= table.c_a[size_t(n - 1)] - 1e-12);
}
