#include <doctest.h>

#include <cmath>
#include <random>

#include "slag/graph_geometry.hpp"
#include "slag/scenarios.hpp"
#include "slag/sweeps.hpp"

using namespace slag;

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

TEST_CASE("hessian is exact on quadratics") {
    const GridDomain d = GridDomain::square(-1.0, 1.0, 17);
    const ScalarFieldGrid half_sq = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.5 * (x * x + y * y); });
    const HessianField h1 = hessian_field(half_sq);
    const ScalarFieldGrid cross =
        ScalarFieldGrid::sample2(d, [](double x, double y) { return x * y; });
    const HessianField h2 = hessian_field(cross);
    for (int i = 1; i < 16; ++i) {
        for (int j = 1; j < 16; ++j) {
            CHECK((h1.at(i, j) - Eigen::Matrix2d::Identity()).norm() <= 1e-12);
            Eigen::Matrix2d expect;
            expect << 0, 1, 1, 0;
            CHECK((h2.at(i, j) - expect).norm() <= 1e-12);
        }
    }
    CHECK_FALSE(h1.valid(0, 3));
    CHECK(h1.valid(1, 3));
}

TEST_CASE("hessian eigenvalues of the exp-cos potential") {
    const double t = std::atan(0.5); // a = 2
    const double a = metric_constants(t).a;
    const double k = 3.0;
    double prev_err = 0.0;
    for (int lvl = 0; lvl < 2; ++lvl) {
        const int res = lvl == 0 ? 33 : 65;
        const GridDomain d = GridDomain::rect2(0.1, 1.0, 0.0, 1.0, res, res);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return exp_cos_potential(x, y, a, k); });
        const HessianField h = hessian_field(u);
        double err = 0.0;
        for (int i = 1; i < res - 1; ++i) {
            for (int j = 1; j < res - 1; ++j) {
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h.at(i, j));
                const double ke = k * std::exp(d.coord(0, i));
                err = std::max(err, std::abs(es.eigenvalues()(0) - (-a - ke)));
                err = std::max(err, std::abs(es.eigenvalues()(1) - (-a + ke)));
            }
        }
        if (lvl == 1) {
            CHECK(std::log2(prev_err / err) >= 1.9);
        }
        prev_err = err;
    }
}

TEST_CASE("graph volume on gradient graphs of quadratics") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    const VectorFieldGrid f = VectorFieldGrid::sample2(
        d, [](double x, double y) { return std::array<double, 2>{x, y}; });
    CHECK(graph_volume(f, MetricSpec::dxdy()) == doctest::Approx(1.0).epsilon(1e-12));

    const double c = 1.7;
    const VectorFieldGrid fc = VectorFieldGrid::sample2(
        d, [&](double x, double y) { return std::array<double, 2>{c * x, c * y}; });
    CHECK(graph_volume(fc, MetricSpec::dxdy()) == doctest::Approx(c).epsilon(1e-12));

    // Conformal factor between the two pseudo normalizations.
    CHECK(graph_volume(fc, MetricSpec::family(0.0)) ==
          doctest::Approx(2.0 * c).epsilon(1e-12));

    // Euclidean metric on the flat graph of zero.
    const VectorFieldGrid zero = VectorFieldGrid::sample2(
        d, [](double, double) { return std::array<double, 2>{0.0, 0.0}; });
    CHECK(graph_volume(zero, MetricSpec::euclidean()) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(graph_volume(VectorFieldGrid::sample2(
                                     d,
                                     [](double x, double y) {
                                         return std::array<double, 2>{-x, -y};
                                     }),
                                 MetricSpec::dxdy()),
                    NotSpacelikeError);
}

TEST_CASE("hessian and curvature residual in three dimensions") {
    const GridDomain d = GridDomain::cube(0.1, 1.1, 9);
    const ScalarFieldGrid u = ScalarFieldGrid::sample3(d, [](double x, double y, double z) {
        return 0.5 * (x * x + y * y) + 0.3 * z * z + 0.2 * x * z;
    });
    const HessianField h = hessian_field(u);
    Eigen::Matrix3d expect;
    expect << 1.0, 0.0, 0.2, 0.0, 1.0, 0.0, 0.2, 0.0, 0.6;
    for (int i = 1; i < 8; ++i) {
        CHECK((h.at(i, i, i) - expect).norm() <= 1e-11);
    }
    CHECK(mean_curvature_residual(u, kPi / 2.0).max_residual <= 1e-10);
}

TEST_CASE("graph volume in three dimensions") {
    const GridDomain d = GridDomain::cube(0.0, 1.0, 9);
    const VectorFieldGrid f = VectorFieldGrid::sample3(
        d, [](double x, double y, double z) { return std::array<double, 3>{x, y, z}; });
    CHECK(graph_volume(f, MetricSpec::dxdy()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(graph_volume(f, MetricSpec::family(0.0)) ==
          doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-12));
}

TEST_CASE("masked volume recovers the thin annulus area") {
    GridDomain d = GridDomain::square(-1.1, 1.1, 257);
    const double eps = 0.01;
    d.set_mask(AnnulusMask{1.0, 1.0 + eps});
    const VectorFieldGrid f = VectorFieldGrid::sample2(
        d, [](double x, double y) { return std::array<double, 2>{x, y}; });
    CHECK(graph_volume(f, MetricSpec::dxdy()) ==
          doctest::Approx(kPi * eps).epsilon(0.02));
    CHECK(domain_measure(d) == doctest::Approx(kPi * eps).epsilon(0.02));

    GridDomain disk = GridDomain::square(-1.1, 1.1, 257);
    disk.set_mask(AnnulusMask{0.0, 1.0});
    CHECK(domain_measure(disk) == doctest::Approx(kPi).epsilon(1e-3));
}

TEST_CASE("mean curvature residual vanishes on quadratics") {
    const GridDomain d = GridDomain::square(0.2, 1.2, 21);
    const ScalarFieldGrid u = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.7 * x * x + 0.4 * y * y + 0.1 * x * y; });
    for (double t : {0.0, 0.3, kPi / 4.0, 1.1, kPi / 2.0}) {
        const MeanCurvatureResidual r = mean_curvature_residual(u, t);
        CHECK(r.max_residual <= 1e-10);
    }
    CHECK(mean_curvature_residual(u, 0.4).excluded_band_measure > 0.0);
}

TEST_CASE("mean curvature residual of the exp-cos potential converges at order 2") {
    const double t = std::atan(0.5);
    const double a = metric_constants(t).a;
    const double k = 3.0;
    double prev = 0.0;
    for (int lvl = 0; lvl < 2; ++lvl) {
        const int res = (lvl == 0) ? 65 : 129;
        const GridDomain d = GridDomain::rect2(0.1, 1.0, 0.0, 1.0, res, res);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [&](double x, double y) { return exp_cos_potential(x, y, a, k); });
        const double err = mean_curvature_residual(u, t).max_residual;
        if (lvl == 1) {
            CHECK(std::log2(prev / err) >= 1.9);
        }
        prev = err;
    }
}

TEST_CASE("mean curvature residual detects a non-extremal graph") {
    // Quartic potential under the euclidean-endpoint equation: the analytic
    // residual |grad sum arctan(lambda)| stays bounded away from zero.
    auto analytic = [](double x, double y) {
        const double l1 = 12.0 * x * x;
        const double l2 = 12.0 * y * y;
        const double gx = 24.0 * x / (1.0 + l1 * l1);
        const double gy = 24.0 * y / (1.0 + l2 * l2);
        return std::hypot(gx, gy);
    };
    double floor_estimate = 0.0;
    for (double x = 0.3; x <= 0.7; x += 0.1) {
        floor_estimate = std::max(floor_estimate, analytic(x, x));
    }
    for (int res : {33, 65}) {
        const GridDomain d = GridDomain::square(0.0, 1.0, res);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(
            d, [](double x, double y) { return x * x * x * x + y * y * y * y; });
        const double r = mean_curvature_residual(u, kPi / 2.0).max_residual;
        CHECK(r >= 0.5 * floor_estimate);
    }
}

TEST_CASE("discrete determinant integral is a null lagrangian") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 33);
    const VectorFieldGrid base = VectorFieldGrid::sample2(
        d, [](double x, double y) { return std::array<double, 2>{x, y}; });
    CHECK(null_lagrangian_integral(base) == doctest::Approx(1.0).epsilon(1e-12));

    // Interior bump leaves the integral exactly unchanged (boundary nodes fix it).
    auto bump = [&](double x, double y) {
        const double s1 = x * (1.0 - x);
        const double s2 = y * (1.0 - y);
        return 0.1 * s1 * s1 * s2 * s2 * std::sin(5.0 * x + 3.0 * y);
    };
    const VectorFieldGrid pert = VectorFieldGrid::sample2(d, [&](double x, double y) {
        return std::array<double, 2>{x + bump(x, y), y - 0.7 * bump(y, x)};
    });
    CHECK(null_lagrangian_integral(pert) ==
          doctest::Approx(null_lagrangian_integral(base)).epsilon(1e-13));

    // Negative control: a perturbation alive on the boundary shifts it
    // (det DF = 1 + 0.1 y, integral 1.05).
    const VectorFieldGrid bad = VectorFieldGrid::sample2(d, [&](double x, double y) {
        return std::array<double, 2>{x + 0.1 * x * y, y};
    });
    CHECK(null_lagrangian_integral(bad) == doctest::Approx(1.05).epsilon(1e-10));
}

TEST_CASE("null lagrangian integral matches the hessian determinant") {
    // For F = grad u the integral equals int det D^2 u dx up to quadrature
    // error; compare against a fine independent quadrature at two levels.
    auto potential = [](double x, double y) {
        return 0.5 * (x * x + y * y) + 0.05 * std::sin(kPi * x) * std::sin(kPi * y);
    };
    auto det_hess = [&](double x, double y) {
        const double s = 0.05 * kPi * kPi;
        const double uxx = 1.0 - s * std::sin(kPi * x) * std::sin(kPi * y);
        const double uyy = uxx;
        const double uxy = s * std::cos(kPi * x) * std::cos(kPi * y);
        return uxx * uyy - uxy * uxy;
    };
    double exact = 0.0;
    const int q = 600;
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            exact += det_hess((i + 0.5) / q, (j + 0.5) / q);
        }
    }
    exact /= static_cast<double>(q) * q;

    double errs[2] = {0.0, 0.0};
    for (int lvl = 0; lvl < 2; ++lvl) {
        const int res = lvl == 0 ? 33 : 65;
        const GridDomain d = GridDomain::square(0.0, 1.0, res);
        const ScalarFieldGrid u = ScalarFieldGrid::sample2(d, potential);
        const VectorFieldGrid f = VectorFieldGrid::gradient_of(u);
        errs[lvl] = std::abs(null_lagrangian_integral(f) - exact);
    }
    CHECK(errs[1] <= 0.35 * errs[0] + 1e-12);
}

TEST_CASE("calibration integral bounds the graph volume") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 65);
    const ScalarFieldGrid u = ScalarFieldGrid::sample2(
        d, [](double x, double y) { return 0.5 * (x * x + y * y); });
    const VectorFieldGrid base = VectorFieldGrid::gradient_of(u);

    // Calibrated at the right phase: equality with the volume.
    CHECK(calibration_integral(base, 1.0) ==
          doctest::Approx(graph_volume(base, MetricSpec::dxdy())).epsilon(1e-12));
    // Wrong phase is still an upper bound: (1/2)(2 + 1/2) per unit area.
    CHECK(calibration_integral(base, 2.0) == doctest::Approx(1.25).epsilon(1e-12));

    // Boundary-vanishing gradient bump: calibration integral unchanged,
    // volume strictly smaller.
    const VectorFieldGrid pert = VectorFieldGrid::sample2(d, [&](double x, double y) {
        const double b1 = x * (1.0 - x);
        const double b2 = y * (1.0 - y);
        // gradient of 0.1 (b1 b2)^2; both components vanish on the boundary
        const double g1 = 0.1 * 2.0 * b1 * (1.0 - 2.0 * x) * b2 * b2;
        const double g2 = 0.1 * b1 * b1 * 2.0 * b2 * (1.0 - 2.0 * y);
        return std::array<double, 2>{x + g1, y + g2};
    });
    CHECK(calibration_integral(pert, 1.0) ==
          doctest::Approx(calibration_integral(base, 1.0)).epsilon(1e-13));
    const double gap =
        graph_volume(base, MetricSpec::dxdy()) - graph_volume(pert, MetricSpec::dxdy());
    CHECK(gap > 1e-7);
    CHECK(graph_volume(pert, MetricSpec::dxdy()) <=
          calibration_integral(pert, 1.0) + 1e-12);
}

TEST_CASE("family(0) volume is the dxdy volume times 2^{n/2}") {
    const GridDomain d = GridDomain::square(0.0, 1.0, 17);
    const VectorFieldGrid f = VectorFieldGrid::sample2(d, [&](double x, double y) {
        return std::array<double, 2>{1.3 * x + 0.2 * std::sin(y),
                                     0.8 * y + 0.2 * std::sin(x)};
    });
    CHECK(graph_volume(f, MetricSpec::family(0.0)) ==
          doctest::Approx(2.0 * graph_volume(f, MetricSpec::dxdy())).epsilon(1e-12));
}
