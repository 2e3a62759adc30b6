#include <doctest.h>

#include <cmath>

#include "slag/graph_geometry.hpp"
#include "slag/scenarios.hpp"
#include "slag/solvers.hpp"

using namespace slag;

namespace {

constexpr double kPi = 3.14159265358979323846;

double sup_diff(const ScalarFieldGrid& a, const std::function<double(double, double)>& f) {
    const GridDomain& d = a.domain();
    double m = 0.0;
    for (int i = 0; i < d.res(0); ++i) {
        for (int j = 0; j < d.res(1); ++j) {
            m = std::max(m, std::abs(a.at(i, j) - f(d.coord(0, i), d.coord(1, j))));
        }
    }
    return m;
}

} // namespace

TEST_CASE("poisson solve reproduces harmonic quadratics exactly") {
    const GridDomain d = GridDomain::square(-1.0, 1.0, 33);
    auto g = [](double x, double y) { return x * x - y * y; };
    const SolveResult r = solve_poisson(d, 0.0, BoundaryData::from_function(d, g));
    CHECK(r.report.final_residual <= 1e-10);
    CHECK(sup_diff(r.u, g) <= 1e-10);
}

TEST_CASE("poisson solve matches the exp-cos potential at order 2") {
    const double a = 2.0;
    const double k = 3.0;
    auto g = [&](double x, double y) { return exp_cos_potential(x, y, a, k); };
    double prev = 0.0;
    for (int lvl = 0; lvl < 2; ++lvl) {
        const int res = lvl == 0 ? 33 : 65;
        const GridDomain d = GridDomain::rect2(0.1, 1.0, 0.0, 1.0, res, res);
        const SolveResult r = solve_poisson(d, a, BoundaryData::from_function(d, g));
        CHECK(r.report.final_residual <= 1e-10);
        const double err = sup_diff(r.u, g);
        if (lvl == 1) {
            CHECK(std::log2(prev / err) >= 1.9);
        }
        prev = err;
    }
}

TEST_CASE("poisson solve with zero boundary sits above zero for a > 0") {
    // Lap u = -2 < 0 makes u superharmonic: the minimum is on the boundary,
    // so the interior is strictly positive.
    const GridDomain d = GridDomain::square(0.0, 1.0, 17);
    const SolveResult r = solve_poisson(
        d, 1.0, BoundaryData::from_function(d, [](double, double) { return 0.0; }));
    for (int i = 1; i < 16; ++i) {
        for (int j = 1; j < 16; ++j) {
            CHECK(r.u.at(i, j) > 0.0);
        }
    }
}

TEST_CASE("determinant solve recovers quadratics from their trace") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    SUBCASE("half square norm at c = 1") {
        auto g = [](double x, double y) { return 0.5 * (x * x + y * y); };
        const SolveResult r =
            solve_monge_ampere(d, 1.0, BoundaryData::from_function(d, g));
        CHECK(sup_diff(r.u, g) <= 1e-9);
        CHECK(r.report.final_residual <= 1e-10);
        CHECK(r.report.concave_nodes == r.report.interior_nodes);
    }
    SUBCASE("anisotropic quadratic with unit determinant") {
        auto g = [](double x, double y) { return x * x + 0.25 * y * y; };
        const SolveResult r =
            solve_monge_ampere(d, 1.0, BoundaryData::from_function(d, g));
        CHECK(sup_diff(r.u, g) <= 1e-9);
    }
}

TEST_CASE("determinant solve handles a non-quadratic trace") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 65);
    auto g = [](double x, double y) {
        return 0.5 * (x * x + y * y) + 0.05 * std::cos(kPi * x) * std::cos(kPi * y);
    };
    SolverConfig cfg;
    cfg.tolerance = 1e-9;
    const SolveResult r = solve_monge_ampere(d, 1.0, BoundaryData::from_function(d, g), cfg);
    CHECK(r.report.final_residual <= 1e-9);
    CHECK(r.report.iterations <= 25);
    // Non-quadratic: the interior departs from the quadratic fit.
    const ScalarFieldGrid fit = quadratic_fit(BoundaryData::from_function(d, g));
    double depart = 0.0;
    for (int i = 1; i < 64; ++i) {
        for (int j = 1; j < 64; ++j) {
            depart = std::max(depart, std::abs(r.u.at(i, j) - fit.at(i, j)));
        }
    }
    CHECK(depart > 1e-4);
    // The output graph is discretely extremal for the pseudo metric, at the
    // O(h^2) certificate level on both grids.
    CHECK(mean_curvature_residual(r.u, 0.0).max_residual <= 5e-7);
    const GridDomain d2 = GridDomain::square(0.0, 1.0, 33);
    const SolveResult r2 =
        solve_monge_ampere(d2, 1.0, BoundaryData::from_function(d2, g), cfg);
    const double h65 = d.max_spacing();
    const double h33 = d2.max_spacing();
    CHECK(mean_curvature_residual(r.u, 0.0).max_residual <= 100.0 * h65 * h65);
    CHECK(mean_curvature_residual(r2.u, 0.0).max_residual <= 100.0 * h33 * h33);
}

TEST_CASE("determinant solve error paths") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 17);
    // Saddle trace: no convex solution, the initial fit is inadmissible.
    auto saddle = [](double x, double y) { return x * x - 2.0 * y * y; };
    CHECK_THROWS_AS(solve_monge_ampere(d, 1.0, BoundaryData::from_function(d, saddle)),
                    DomainError);
    CHECK_THROWS_AS(solve_monge_ampere(d, 0.0, BoundaryData::from_function(
                                                   d, saddle)),
                    DomainError);
}

TEST_CASE("family solve recovers admissible quadratics in every regime") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    const std::vector<double> ts = {0.0, kPi / 8.0, kPi / 4.0, 3.0 * kPi / 8.0,
                                    kPi / 2.0};
    for (double t : ts) {
        // Eigenvalues 1 and 0.5 sit on the admissible branch for every t.
        auto g = [](double x, double y) { return 0.5 * x * x + 0.25 * y * y; };
        const double level = family::raw_value({1.0, 0.5}, t);
        const SolveResult r =
            solve_family(d, t, level, BoundaryData::from_function(d, g));
        CHECK(sup_diff(r.u, g) <= 1e-9);
        CHECK(r.report.final_residual <= 1e-10);
        CHECK(r.report.spacelike_nodes == r.report.interior_nodes);
        CHECK(std::abs(r.report.final_raw_residual - 0.0) <= 1e-9);
    }
}

TEST_CASE("family solve rejects data inside the forbidden band") {
    // Hessian eigenvalues pinned at -a sit strictly between the admissible
    // branches, so the fitted initial guess cannot be space-like.
    const double t = kPi / 8.0;
    const double a = metric_constants(t).a;
    const GridDomain d = GridDomain::square(0.0, 1.0, 17);
    auto g = [&](double x, double y) { return -0.5 * a * (x * x + y * y); };
    CHECK_THROWS_AS(solve_family(d, t, 0.0, BoundaryData::from_function(d, g)),
                    DomainError);
}

TEST_CASE("family solve at the degenerate parameter hits the rational level") {
    // Trace of a small quadratic with both eigenvalues zero-compatible:
    // level sum 1/(1+lambda) = 2 at lambda = (0, 0).
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    auto g = [](double x, double y) { return 0.01 * (x - y); };
    const SolveResult r = solve_family(d, kPi / 4.0, 2.0,
                                       BoundaryData::from_function(d, g));
    CHECK(r.report.final_residual <= 1e-10);
    // Verify the textbook form of the level on the converged hessians.
    const HessianField h = hessian_field(r.u);
    double worst = 0.0;
    for (int i = 1; i < 32; ++i) {
        for (int j = 1; j < 32; ++j) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h.at(i, j));
            const double s = 1.0 / (1.0 + es.eigenvalues()(0)) +
                             1.0 / (1.0 + es.eigenvalues()(1));
            worst = std::max(worst, std::abs(s - 2.0));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("family solve agrees with the poisson formulation on the exp-cos data") {
    // In the pseudo regime at level zero the two discretizations share the
    // same solution set (the trace equation), so the solutions coincide.
    const double t = std::atan(0.5);
    const double a = metric_constants(t).a;
    const double k = 3.0;
    const GridDomain d = GridDomain::rect2(0.1, 1.0, 0.0, 1.0, 49, 49);
    auto g = [&](double x, double y) { return exp_cos_potential(x, y, a, k); };
    const BoundaryData bc = BoundaryData::from_function(d, g);

    const SolveResult poisson = solve_poisson(d, a, bc);
    const SolveResult fam = solve_family(d, t, 0.0, bc);
    double diff = 0.0;
    for (int i = 0; i < 49; ++i) {
        for (int j = 0; j < 49; ++j) {
            diff = std::max(diff, std::abs(poisson.u.at(i, j) - fam.u.at(i, j)));
        }
    }
    CHECK(diff <= 1e-8);
    CHECK(fam.report.spacelike_nodes == fam.report.interior_nodes);
    CHECK(fam.report.convex_nodes == 0);
    CHECK(fam.report.concave_nodes == 0);
}

TEST_CASE("newton with a perturbed initial guess is locally stable") {
    // Halving an initial-guess perturbation never costs more than one extra
    // iteration on the quadratic tests.
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    auto g = [](double x, double y) { return 0.5 * (x * x + y * y); };
    const BoundaryData bc = BoundaryData::from_function(d, g);
    int prev_iters = -1;
    for (double amp : {0.2, 0.1, 0.05, 0.025}) {
        SolverConfig cfg;
        cfg.guess = InitialGuessPolicy::from_grid;
        cfg.initial_guess = ScalarFieldGrid::sample2(d, [&](double x, double y) {
            const double b1 = x * (1.0 - x);
            const double b2 = y * (1.0 - y);
            return g(x, y) + amp * b1 * b1 * b2 * b2 * 16.0;
        });
        const SolveResult r = solve_monge_ampere(d, 1.0, bc, cfg);
        if (prev_iters >= 0) {
            CHECK(r.report.iterations <= prev_iters + 1);
        }
        prev_iters = r.report.iterations;
    }
}

TEST_CASE("boundary data round trip and config validation") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 9);
    auto g = [](double x, double y) { return x + 2.0 * y; };
    const BoundaryData bc = BoundaryData::from_function(d, g);
    bc.write_csv("/tmp/slag_test_bc.csv");
    const BoundaryData back = BoundaryData::read_csv("/tmp/slag_test_bc.csv");
    CHECK(back.domain() == d);
    CHECK(back.at(0, 3) == doctest::Approx(bc.at(0, 3)));
    CHECK(back.at(8, 8) == doctest::Approx(bc.at(8, 8)));
    CHECK_THROWS_AS(back.at(4, 4), DomainError);

    SolverConfig cfg;
    cfg.tolerance = -1.0;
    CHECK_THROWS_AS(solve_monge_ampere(d, 1.0, bc, cfg), DomainError);
}
