#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "slag/lewy_transforms.hpp"
#include "slag/scenarios.hpp"
#include "slag/solvers.hpp"
#include "slag/sweeps.hpp"

using namespace slag;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Largest |D^2 u_hat - expected| over an interior window of valid nodes.
double window_hessian_error(const HatPotential& hat,
                            const std::function<Eigen::Matrix2d(double, double)>& expected) {
    const GridDomain& d = hat.target_domain;
    const HessianField h = hessian_field(hat.u_hat);
    double err = 0.0;
    int counted = 0;
    const int lo0 = d.res(0) / 4;
    const int hi0 = 3 * d.res(0) / 4;
    const int lo1 = d.res(1) / 4;
    const int hi1 = 3 * d.res(1) / 4;
    for (int i = lo0; i <= hi0; ++i) {
        for (int j = lo1; j <= hi1; ++j) {
            bool ok = true;
            for (int di = -1; di <= 1 && ok; ++di) {
                for (int dj = -1; dj <= 1 && ok; ++dj) {
                    ok = hat.valid[static_cast<size_t>(d.index(i + di, j + dj))];
                }
            }
            if (!ok) {
                continue;
            }
            ++counted;
            const Eigen::Matrix2d want = expected(d.coord(0, i), d.coord(1, j));
            err = std::max(err, (h.at(i, j) - want).cwiseAbs().maxCoeff());
        }
    }
    REQUIRE(counted > 0);
    return err;
}

} // namespace

TEST_CASE("pullback of the target metric is the family metric") {
    // Gram(phi xi, target) = kappa Gram(xi, g_t) with kappa = 1, checked
    // here directly against hand-assembled Grams on random graph planes.
    Rng rng(67);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const bool pseudo = trial % 2 == 0;
        const double t = pseudo ? 0.05 + (kPi / 4.0 - 0.1) * unit(rng)
                                : kPi / 4.0 + 0.05 + (kPi / 4.0 - 0.1) * unit(rng);
        const MetricConstants mc = metric_constants(t);
        const Eigen::MatrixXd s = random_spd(rng, 2) - 0.4 * Eigen::MatrixXd::Identity(2, 2);

        Eigen::MatrixXd basis(4, 2);
        basis.topRows(2) = Eigen::Matrix2d::Identity();
        basis.bottomRows(2) = s;
        Eigen::MatrixXd phi(4, 4);
        phi << mc.sigma * Eigen::Matrix2d::Identity(), mc.tau * Eigen::Matrix2d::Identity(),
            mc.tau * Eigen::Matrix2d::Identity(), mc.sigma * Eigen::Matrix2d::Identity();
        const Eigen::MatrixXd image = phi * basis;

        const MetricSpec source = MetricSpec::family(t);
        const MetricSpec target = pseudo ? MetricSpec::family(0.0) : MetricSpec::euclidean();
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double gs = source.bilinear(basis.col(a), basis.col(b));
                const double gt = target.bilinear(image.col(a), image.col(b));
                CHECK(gt == doctest::Approx(gs).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("apply_phi_t on quadratics") {
    const GridDomain d = GridDomain::square(-0.5, 0.5, 33);
    const ScalarFieldGrid u = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.5 * (x * x + y * y); });

    // t = 0 is the identity map.
    const TransformedGraph id = apply_phi_t(u, 0.0);
    CHECK(id.kappa == doctest::Approx(1.0));
    for (size_t s = 0; s < id.samples.size(); ++s) {
        const auto [i, j] = id.source_nodes[s];
        CHECK(id.samples[s](0) == doctest::Approx(d.coord(0, i)).epsilon(1e-12));
        CHECK(id.samples[s](1) == doctest::Approx(d.coord(1, j)).epsilon(1e-12));
        CHECK(id.samples[s](2) == doctest::Approx(d.coord(0, i)).epsilon(1e-10));
        CHECK(id.samples[s](3) == doctest::Approx(d.coord(1, j)).epsilon(1e-10));
    }

    // Generic t in both regimes: the image of this graph is itself (the unit
    // eigenvalue is the fixed point of the Moebius action).
    for (double t : {kPi / 6.0, kPi / 3.0}) {
        const TransformedGraph tg = apply_phi_t(u, t);
        CHECK(tg.kappa == doctest::Approx(1.0).epsilon(1e-12));
        for (size_t s = 0; s < tg.samples.size(); ++s) {
            CHECK(tg.samples[s](2) == doctest::Approx(tg.samples[s](0)).epsilon(1e-9));
            CHECK(tg.samples[s](3) == doctest::Approx(tg.samples[s](1)).epsilon(1e-9));
        }
    }

    CHECK_THROWS_AS(apply_phi_t(u, kPi / 4.0), DomainError);
}

TEST_CASE("projection record on quadratics") {
    const double t = kPi / 6.0;
    const MetricConstants mc = metric_constants(t);
    const GridDomain d = GridDomain::square(-0.5, 0.5, 33);

    const ScalarFieldGrid u = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.5 * (x * x + y * y); });
    const ProjectionRecord pr = projection_p(u, t);
    CHECK(pr.uniformly_positive);
    CHECK(pr.min_sym_eigenvalue == doctest::Approx(mc.sigma + mc.tau).epsilon(1e-10));

    // D^2 u >= -a keeps Dp >= sigma - tau a > 0.
    const double q = -0.9 * mc.a;
    const ScalarFieldGrid flat = ScalarFieldGrid::sample2(
        d, [&](double x, double y) { return 0.5 * q * (x * x + y * y); });
    const ProjectionRecord pr2 = projection_p(flat, t);
    CHECK(pr2.uniformly_positive);
    CHECK(pr2.min_sym_eigenvalue ==
          doctest::Approx(mc.sigma + mc.tau * q).epsilon(1e-9));
    CHECK(pr2.min_sym_eigenvalue >= mc.sigma - mc.tau * mc.a - 1e-12);

    const InjectivityVerdict v = injectivity_check(pr.p, &pr.dp);
    CHECK(v.injective);
    CHECK(v.certificate == "monotone map");
}

TEST_CASE("projection of the exp-cos graph: large k collides, small k does not") {
    const double t = std::atan(0.5);
    const MetricConstants mc = metric_constants(t);

    SUBCASE("large k interferes across one period plus a margin") {
        // The two sheets over x2 and x2 + 2 pi land 2 pi (sigma - tau a)
        // apart plus an exponentially controlled shift of order
        // 2 pi (sigma - tau a) / (tau k e^{x1}), so a window slightly taller
        // than one period contains genuine crossings.
        const double k = 50.0;
        const GridDomain d =
            GridDomain::rect2(0.1, 3.0, 0.0, 2.0 * kPi + 0.25, 129, 129);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return exp_cos_potential(x, y, mc.a, k); });
        const ProjectionRecord pr = projection_p(u, t);
        CHECK_FALSE(pr.uniformly_positive);
        const InjectivityVerdict v = injectivity_check(pr.p, &pr.dp);
        REQUIRE_FALSE(v.injective);
        REQUIRE(v.collision.has_value());
        CHECK(v.collision->image_distance < v.collision_tolerance);
        CHECK(v.collision->source_distance > v.separation_floor);
        // The collision pairs points across the periodic direction.
        CHECK(std::abs(v.collision->x1[1] - v.collision->x2[1]) > 3.0);
    }

    SUBCASE("the exact single-period window separates the sheets") {
        // On [0, 2 pi] the interfering pair sits just past the rim: the
        // in-window image gaps stay at 2 pi (sigma - tau a), so the search
        // correctly reports no collision.
        const double k = 50.0;
        const GridDomain d = GridDomain::rect2(0.1, 3.0, 0.0, 2.0 * kPi, 129, 129);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return exp_cos_potential(x, y, mc.a, k); });
        const ProjectionRecord pr = projection_p(u, t);
        const InjectivityVerdict v = injectivity_check(pr.p, &pr.dp);
        CHECK(v.injective);
        // Separation law of the analytic map on the paired boundary rows:
        // p(x, 0) - p(x, 2 pi) = (0, -2 pi (sigma - tau a)) exactly.
        auto analytic_p = [&](double x, double y) {
            const double gx = -mc.a * x + k * std::exp(x) * std::cos(y);
            const double gy = -mc.a * y - k * std::exp(x) * std::sin(y);
            return std::array<double, 2>{mc.sigma * x + mc.tau * gx,
                                         mc.sigma * y + mc.tau * gy};
        };
        for (double x : {0.3, 1.0, 2.5}) {
            const auto lo = analytic_p(x, 0.0);
            const auto hi = analytic_p(x, 2.0 * kPi);
            CHECK(lo[0] == doctest::Approx(hi[0]).epsilon(1e-12));
            CHECK(hi[1] - lo[1] ==
                  doctest::Approx(2.0 * kPi * (mc.sigma - mc.tau * mc.a))
                      .epsilon(1e-12));
        }
    }

    SUBCASE("small k on a small patch stays injective") {
        const double k = 1.2 * mc.b;
        const GridDomain d = GridDomain::rect2(0.1, 0.5, 0.1, 0.5, 65, 65);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return exp_cos_potential(x, y, mc.a, k); });
        const ProjectionRecord pr = projection_p(u, t);
        // The lower branch rules out the monotonicity certificate here.
        CHECK_FALSE(pr.uniformly_positive);
        const InjectivityVerdict v = injectivity_check(pr.p, &pr.dp);
        CHECK(v.injective);
        CHECK(v.certificate == "no collision found");
    }
}

TEST_CASE("hat potential of quadratics") {
    SUBCASE("identity transform reproduces the potential") {
        const GridDomain d = GridDomain::square(-0.5, 0.5, 33);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [](double x, double y) { return 0.5 * (x * x + y * y); });
        const HatPotential hat = reconstruct_hat_potential(u, 0.0);
        CHECK(hat.path_residual <= 1e-10);
        const double err = window_hessian_error(hat, [](double, double) {
            return Eigen::Matrix2d(Eigen::Matrix2d::Identity());
        });
        CHECK(err <= 1e-7);
    }

    SUBCASE("unit quadratic is a fixed point at every t") {
        for (double t : {kPi / 6.0, kPi / 3.0}) {
            const GridDomain d = GridDomain::square(-0.5, 0.5, 33);
            const ScalarFieldGrid u = ScalarFieldGrid::sample2(
                d, [](double x, double y) { return 0.5 * (x * x + y * y); });
            const HatPotential hat = reconstruct_hat_potential(u, t);
            const double err = window_hessian_error(hat, [](double, double) {
                return Eigen::Matrix2d(Eigen::Matrix2d::Identity());
            });
            CHECK(err <= 1e-6);
            CHECK(hat.max_dr_asymmetry <= 1e-8);
        }
    }

    SUBCASE("general quadratic follows the eigenvalue action") {
        const double t = kPi / 6.0;
        const MetricConstants mc = metric_constants(t);
        const double q = 0.8;
        const GridDomain d = GridDomain::square(-0.5, 0.5, 33);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return 0.5 * q * (x * x + y * y); });
        const HatPotential hat = reconstruct_hat_potential(u, t);
        const double lhat = eigenvalue_transform(q, mc);
        const double err = window_hessian_error(hat, [&](double, double) {
            return Eigen::Matrix2d(lhat * Eigen::Matrix2d::Identity());
        });
        CHECK(err <= 1e-6);
    }

    SUBCASE("refuses a non-monotone projection") {
        const double t = std::atan(0.5);
        const MetricConstants mc = metric_constants(t);
        const GridDomain d = GridDomain::rect2(0.1, 0.5, 0.1, 0.5, 33, 33);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(d, [&](double x, double y) {
            return exp_cos_potential(x, y, mc.a, 1.5 * mc.b);
        });
        CHECK_THROWS_AS(reconstruct_hat_potential(u, t), DomainError);
    }
}

TEST_CASE("hat potential of a solved pseudo instance satisfies the determinant law") {
    const double t = kPi / 6.0;
    const MetricConstants mc = metric_constants(t);
    const double level = family::raw_value({1.0, 1.0}, t);
    const double target_det = std::pow(mc.sigma / mc.tau, 2) * std::exp(level);

    const GridDomain d = GridDomain::square(0.0, 1.0, 49);
    auto g = [&](double x, double y) {
        return 0.5 * (x * x + y * y) + 0.03 * std::cos(kPi * x) * std::cos(kPi * y);
    };
    const SolveResult sol = solve_family(d, t, level, BoundaryData::from_function(d, g));
    CHECK(sol.report.final_residual <= 1e-10);

    const HatPotential hat = reconstruct_hat_potential(sol.u, t);
    double err = 0.0;
    const HessianField h = hessian_field(hat.u_hat);
    const GridDomain& td = hat.target_domain;
    int counted = 0;
    for (int i = td.res(0) / 4; i <= 3 * td.res(0) / 4; ++i) {
        for (int j = td.res(1) / 4; j <= 3 * td.res(1) / 4; ++j) {
            bool ok = true;
            for (int di = -1; di <= 1 && ok; ++di) {
                for (int dj = -1; dj <= 1 && ok; ++dj) {
                    ok = hat.valid[static_cast<size_t>(td.index(i + di, j + dj))];
                }
            }
            if (!ok) {
                continue;
            }
            ++counted;
            err = std::max(err, std::abs(h.at(i, j).determinant() - target_det));
        }
    }
    REQUIRE(counted > 100);
    // O(h^2)-scale agreement at this resolution.
    CHECK(err <= 0.02);
}

TEST_CASE("degenerate projection volume") {
    SUBCASE("identity gradient graph on the unit square") {
        const GridDomain d = GridDomain::square(0.0, 1.0, 33);
        const VectorFieldGrid f = VectorFieldGrid::sample2(
            d, [](double x, double y) { return std::array<double, 2>{x, y}; });
        const DegenerateVolumes v = degenerate_projection_volume(f);
        CHECK(v.kappa == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
        CHECK(v.direct == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(v.boundary_integral == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(v.direct - v.boundary_integral) <= v.tolerance);
    }

    SUBCASE("interior perturbations cannot move either volume") {
        const GridDomain d = GridDomain::square(0.0, 1.0, 33);
        const VectorFieldGrid base = VectorFieldGrid::sample2(
            d, [](double x, double y) { return std::array<double, 2>{x, y}; });
        auto bump = [](double x, double y) {
            const double b1 = x * (1.0 - x);
            const double b2 = y * (1.0 - y);
            return 0.4 * b1 * b1 * b2 * b2 * std::sin(4.0 * x + 2.0 * y) * 16.0;
        };
        const VectorFieldGrid pert = VectorFieldGrid::sample2(d, [&](double x, double y) {
            return std::array<double, 2>{x + bump(x, y), y + 0.5 * bump(y, x)};
        });
        const DegenerateVolumes v0 = degenerate_projection_volume(base);
        const DegenerateVolumes v1 = degenerate_projection_volume(pert);
        CHECK(v1.boundary_integral == doctest::Approx(v0.boundary_integral).epsilon(1e-12));
        CHECK(std::abs(v1.direct - v0.direct) <= 1e-10);
        CHECK(std::abs(v1.direct - v1.boundary_integral) <= v1.tolerance);
    }

    SUBCASE("eigenvalue -1 is rejected") {
        const GridDomain d = GridDomain::square(0.0, 1.0, 17);
        const VectorFieldGrid f = VectorFieldGrid::sample2(
            d, [](double x, double y) { return std::array<double, 2>{-x, -y}; });
        CHECK_THROWS_AS(degenerate_projection_volume(f), DomainError);
    }

    SUBCASE("three dimensional graph") {
        const GridDomain d = GridDomain::cube(0.0, 1.0, 9);
        const VectorFieldGrid f = VectorFieldGrid::sample3(
            d, [](double x, double y, double z) {
                return std::array<double, 3>{x, y, z};
            });
        const DegenerateVolumes v = degenerate_projection_volume(f);
        CHECK(v.direct == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(v.boundary_integral == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("transformed graph artifacts") {
    const GridDomain d = GridDomain::square(-0.5, 0.5, 17);
    const ScalarFieldGrid u = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.5 * (x * x + y * y); });
    const TransformedGraph tg = apply_phi_t(u, kPi / 6.0);
    tg.write_csv("/tmp/slag_tg.csv", "/tmp/slag_tg.json");
    std::ifstream csv("/tmp/slag_tg.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "x_1,x_2,y_1,y_2");
    long rows = 0;
    std::string line;
    while (std::getline(csv, line)) {
        ++rows;
    }
    CHECK(rows == static_cast<long>(tg.samples.size()));
}
