#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "altphillips/operators.hpp"
#include "altphillips/parallel.hpp"
#include "altphillips/solver.hpp"

using namespace ap;

namespace {

ProblemSpec oracle_1d(OperatorKind kind, double lambda, double gamma, int n) {
    const Params params(gamma, lambda);
    const OperatorSpec op = kind == OperatorKind::Trace ? OperatorSpec::trace(1, lambda)
                                                        : OperatorSpec::pucci_plus(1, lambda);
    return ProblemSpec{params, op, Grid::line(-1.0, 1.0, n), BoundaryData::halfspace({1.0, 0.0}),
                       SolverKnobs{}};
}

double linf_vs_profile(const SolveResult& r, const ProblemSpec& p) {
    const ScalarField ustar = halfspace_profile(p.op, p.params.gamma, {1.0, 0.0}, p.grid);
    double err = 0.0;
    for (int idx = 0; idx < p.grid.count(); ++idx)
        err = std::max(err, std::abs(r.u[idx] - ustar[idx]));
    return err;
}

}  // namespace

TEST_CASE("1D trace oracle: solve recovers (1/144) x_+^4") {
    const ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 257);
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    CHECK(r.u.all_finite());
    CHECK(r.u.min() >= 0.0);
    CHECK(r.u[0] == 0.0);
    CHECK(r.u[p.grid.count() - 1] == Catch::Approx(1.0 / 144.0));
    // O(h^2) with a modest constant; h = 2/256.
    CHECK(linf_vs_profile(r, p) <= 5.0 * p.grid.h[0] * p.grid.h[0] / 72.0);
    CHECK(r.min_unclamped >= -p.knobs.tol_residual);
}

TEST_CASE("1D pucci oracle: solve recovers (1/576) x_+^4") {
    const ProblemSpec p = oracle_1d(OperatorKind::PucciPlus, 2.0, 1.5, 257);
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    CHECK(linf_vs_profile(r, p) <= 5.0 * p.grid.h[0] * p.grid.h[0] / 288.0);
}

TEST_CASE("zero boundary data gives the zero solution") {
    ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 101);
    p.boundary = BoundaryData::constant(0.0);
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    CHECK(r.u.max() == Catch::Approx(0.0).margin(1e-14));
    CHECK(subharmonic_margin(r.u, p.params) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("2D trace halfspace recovery") {
    const Params params(1.5);
    const ProblemSpec p{params, OperatorSpec::trace(2), Grid::square(-1.0, 1.0, 65),
                        BoundaryData::halfspace({1.0, 0.0}), SolverKnobs{}};
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    const ScalarField ustar = halfspace_profile(p.op, 1.5, {1.0, 0.0}, p.grid);
    double err = 0.0;
    for (int idx = 0; idx < p.grid.count(); ++idx)
        err = std::max(err, std::abs(r.u[idx] - ustar[idx]));
    CHECK(err <= 20.0 * p.grid.h[0] * p.grid.h[0] / 72.0);
}

TEST_CASE("residual history decays and stays within the damping band") {
    const ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 257);
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    REQUIRE(r.residual_history.size() >= 6);
    for (std::size_t k = 5; k + 1 < r.residual_history.size(); ++k)
        CHECK(r.residual_history[k + 1] <= 1.5 * r.residual_history[k]);
    CHECK(r.residual_history.back() < r.residual_history.front());
}

TEST_CASE("determinism: identical ProblemSpec gives bitwise-identical results") {
    const ProblemSpec p = oracle_1d(OperatorKind::PucciPlus, 2.0, 1.5, 129);
    const SolveResult a = solve(p);
    const SolveResult b = solve(p);
    REQUIRE(a.u.values.size() == b.u.values.size());
    CHECK(a.u.values == b.u.values);  // bitwise
    CHECK(a.residual_history == b.residual_history);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("worker threads change speed only, never results") {
    const Params params(1.5);
    const ProblemSpec p{params, OperatorSpec::trace(2), Grid::square(-1.0, 1.0, 97),
                        BoundaryData::halfspace({1.0, 0.0}), SolverKnobs{}};
    set_thread_count(1);
    const SolveResult a = solve(p);
    set_thread_count(4);
    const SolveResult b = solve(p);
    set_thread_count(1);
    CHECK(a.u.values == b.u.values);  // bitwise
    CHECK(a.residual_history == b.residual_history);
}

TEST_CASE("2D solve with clamped polynomial boundary data") {
    const Params params(1.5);
    const ProblemSpec p{params, OperatorSpec::trace(2), Grid::square(-1.0, 1.0, 33),
                        BoundaryData::polynomial({-0.002, 0.0, 0.0, 0.01, 0.0, 0.005}),
                        SolverKnobs{}};
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    CHECK(r.u.min() >= 0.0);
    CHECK(r.u.max() > 0.0);
    CHECK(r.u.all_finite());
}

TEST_CASE("non-convergence is reported, not thrown") {
    ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 257);
    p.knobs.max_outer = 2;
    const SolveResult r = solve(p);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
    CHECK(r.residual_history.size() == 2);
    CHECK(r.u.all_finite());
}

TEST_CASE("comparison principle on ordered boundary data") {
    const ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 201);
    SECTION("identical data gives fields equal to tolerance") {
        const auto out = comparison_test(p, p.boundary, p.boundary);
        CHECK(out.pass);
        CHECK(out.worst_gap <= 1e-12);
    }
    SECTION("zero below the halfspace trace") {
        CHECK(comparison_test(p, BoundaryData::constant(0.0), p.boundary).pass);
    }
    SECTION("halfspace below twice the halfspace") {
        CHECK(comparison_test(p, BoundaryData::halfspace({1.0, 0.0}),
                              BoundaryData::halfspace({1.0, 0.0}, 2.0))
                  .pass);
    }
    SECTION("misordered data is rejected") {
        CHECK_THROWS_AS(comparison_test(p, BoundaryData::constant(0.1),
                                        BoundaryData::constant(0.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("subharmonic margin") {
    SECTION("trace solutions sit at the Laplacian equality") {
        const ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 257);
        const SolveResult r = solve(p);
        REQUIRE(r.converged);
        CHECK(std::abs(subharmonic_margin(r.u, p.params)) <= 1e-8);
    }
    SECTION("pucci solutions have strictly negative margin in the bulk") {
        const ProblemSpec p = oracle_1d(OperatorKind::PucciPlus, 2.0, 1.5, 257);
        const SolveResult r = solve(p);
        REQUIRE(r.converged);
        // Delta u = u^{gamma-1} / lambda < u^{gamma-1} where u > 0.
        CHECK(subharmonic_margin(r.u, p.params) <= 1e-8);
    }
}

TEST_CASE("negative boundary data is rejected") {
    ProblemSpec p = oracle_1d(OperatorKind::Trace, 1.0, 1.5, 101);
    p.boundary = BoundaryData::polynomial({-1.0, 0.0, 0.0});
    // Clamped polynomial is admissible (it evaluates to 0).
    CHECK_NOTHROW(boundary_field(p));
    CHECK_THROWS_AS(BoundaryData::constant(-0.5), std::invalid_argument);
}

TEST_CASE("bellman solve with anisotropic family") {
    const Params params(1.5, 2.0);
    const auto op = OperatorSpec::bellman(
        2, 2.0, {SymMatrix::identity(2), SymMatrix(2.0, 0.0, 0.5), SymMatrix(1.0, 0.4, 1.0)});
    const ProblemSpec p{params, op, Grid::square(-1.0, 1.0, 33),
                        BoundaryData::halfspace({1.0, 0.0}), SolverKnobs{}};
    const SolveResult r = solve(p);
    REQUIRE(r.converged);
    CHECK(r.u.min() >= 0.0);
    CHECK(r.u.all_finite());
    // The solved field obeys the residual contract.
    const DiscreteOperator opd = build(op, p.grid);
    const ScalarField av = apply(opd, r.u);
    double resid = 0.0, scale = 0.0;
    for (int idx = 0; idx < p.grid.count(); ++idx) {
        if (!p.grid.is_interior(idx)) continue;
        const double rhs = std::pow(std::max(r.u[idx], 0.0), 0.5);
        resid = std::max(resid, std::abs(av[idx] - rhs));
        scale = std::max(scale, rhs);
    }
    CHECK(resid <= p.knobs.tol_residual * (1.0 + scale));
}
