#include "slag/graph_geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "slag/equation_family.hpp"

namespace slag {

namespace {

// Subsample density for cells straddling the mask rim; 16x16 keeps the
// area of a curved rim accurate to ~0.1% at the resolutions in use.
constexpr int kCoverageSubsamples = 16;

/// Fraction of the cell with lower corner (x0, y0) covered by the mask.
double cell_coverage(const GridDomain& d, int i, int j) {
    if (!d.mask()) {
        return 1.0;
    }
    const AnnulusMask& m = *d.mask();
    const double x0 = d.coord(0, i);
    const double y0 = d.coord(1, j);
    const double hx = d.spacing(0);
    const double hy = d.spacing(1);

    // Cheap classification by the corner radii: cells entirely inside or
    // outside the radial band skip the subsampling.
    double r2lo = std::numeric_limits<double>::infinity();
    double r2hi = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double x = x0 + a * hx;
            const double y = y0 + b * hy;
            const double r2 = x * x + y * y;
            r2lo = std::min(r2lo, r2);
            r2hi = std::max(r2hi, r2);
        }
    }
    // Nearest point of the cell to the origin may be interior to an edge.
    const double cx = std::clamp(0.0, x0, x0 + hx);
    const double cy = std::clamp(0.0, y0, y0 + hy);
    r2lo = std::min(r2lo, cx * cx + cy * cy);

    if (r2lo >= m.r2min && r2hi <= m.r2max) {
        return 1.0;
    }
    if (r2hi < m.r2min || r2lo > m.r2max) {
        return 0.0;
    }
    const int s = kCoverageSubsamples;
    int inside = 0;
    for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) {
            const double x = x0 + (a + 0.5) * hx / s;
            const double y = y0 + (b + 0.5) * hy / s;
            if (m.contains(x, y)) {
                ++inside;
            }
        }
    }
    return static_cast<double>(inside) / (s * s);
}

Eigen::MatrixXd staggered_jacobian2(const VectorFieldGrid& f, int i, int j) {
    const GridDomain& d = f.domain();
    const double hx = d.spacing(0);
    const double hy = d.spacing(1);
    Eigen::MatrixXd df(2, 2);
    for (int c = 0; c < 2; ++c) {
        df(c, 0) = 0.5 *
                   ((f.at(i + 1, j, c) - f.at(i, j, c)) +
                    (f.at(i + 1, j + 1, c) - f.at(i, j + 1, c))) /
                   hx;
        df(c, 1) = 0.5 *
                   ((f.at(i, j + 1, c) - f.at(i, j, c)) +
                    (f.at(i + 1, j + 1, c) - f.at(i + 1, j, c))) /
                   hy;
    }
    return df;
}

Eigen::MatrixXd staggered_jacobian3(const VectorFieldGrid& f, int i, int j, int k) {
    const GridDomain& d = f.domain();
    Eigen::MatrixXd df(3, 3);
    for (int c = 0; c < 3; ++c) {
        double sx = 0.0, sy = 0.0, sz = 0.0;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                sx += f.at3(i + 1, j + a, k + b, c) - f.at3(i, j + a, k + b, c);
                sy += f.at3(i + a, j + 1, k + b, c) - f.at3(i + a, j, k + b, c);
                sz += f.at3(i + a, j + b, k + 1, c) - f.at3(i + a, j + b, k, c);
            }
        }
        df(c, 0) = 0.25 * sx / d.spacing(0);
        df(c, 1) = 0.25 * sy / d.spacing(1);
        df(c, 2) = 0.25 * sz / d.spacing(2);
    }
    return df;
}

double cell_area(const GridDomain& d) {
    double a = d.spacing(0) * d.spacing(1);
    if (d.dim() == 3) {
        a *= d.spacing(2);
    }
    return a;
}

/// Gram matrix of the tangent plane [I; DF^T] under the metric, closed form.
Eigen::MatrixXd tangent_gram(const Eigen::MatrixXd& df, const MetricSpec& metric) {
    const int n = static_cast<int>(df.rows());
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    switch (metric.kind()) {
    case MetricSpec::Kind::dxdy:
        return 0.5 * (df + df.transpose());
    case MetricSpec::Kind::euclidean:
        return eye + df.transpose() * df;
    case MetricSpec::Kind::family: {
        const double c = std::cos(metric.t());
        const double s = std::sin(metric.t());
        return c * (df + df.transpose()) + s * (eye + df.transpose() * df);
    }
    }
    return eye;
}

} // namespace

HessianField::HessianField(GridDomain domain, int margin)
    : domain_(std::move(domain)), margin_(margin) {
    data_.assign(static_cast<size_t>(domain_.node_count()),
                 Eigen::MatrixXd::Zero(domain_.dim(), domain_.dim()));
}

HessianField hessian_field(const ScalarFieldGrid& u) {
    const GridDomain& d = u.domain();
    HessianField h(d, 1);
    const int n = d.dim();
    if (n == 2) {
        const double hx = d.spacing(0);
        const double hy = d.spacing(1);
        for (int i = 1; i < d.res(0) - 1; ++i) {
            for (int j = 1; j < d.res(1) - 1; ++j) {
                Eigen::MatrixXd& m = h.at(i, j);
                m(0, 0) = (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (hx * hx);
                m(1, 1) = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (hy * hy);
                m(0, 1) = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) +
                           u.at(i - 1, j - 1)) /
                          (4.0 * hx * hy);
                m(1, 0) = m(0, 1);
            }
        }
        return h;
    }
    const double hx = d.spacing(0);
    const double hy = d.spacing(1);
    const double hz = d.spacing(2);
    for (int i = 1; i < d.res(0) - 1; ++i) {
        for (int j = 1; j < d.res(1) - 1; ++j) {
            for (int k = 1; k < d.res(2) - 1; ++k) {
                Eigen::MatrixXd& m = h.at(i, j, k);
                m(0, 0) = (u.at(i + 1, j, k) - 2.0 * u.at(i, j, k) + u.at(i - 1, j, k)) /
                          (hx * hx);
                m(1, 1) = (u.at(i, j + 1, k) - 2.0 * u.at(i, j, k) + u.at(i, j - 1, k)) /
                          (hy * hy);
                m(2, 2) = (u.at(i, j, k + 1) - 2.0 * u.at(i, j, k) + u.at(i, j, k - 1)) /
                          (hz * hz);
                m(0, 1) = (u.at(i + 1, j + 1, k) - u.at(i + 1, j - 1, k) -
                           u.at(i - 1, j + 1, k) + u.at(i - 1, j - 1, k)) /
                          (4.0 * hx * hy);
                m(0, 2) = (u.at(i + 1, j, k + 1) - u.at(i + 1, j, k - 1) -
                           u.at(i - 1, j, k + 1) + u.at(i - 1, j, k - 1)) /
                          (4.0 * hx * hz);
                m(1, 2) = (u.at(i, j + 1, k + 1) - u.at(i, j + 1, k - 1) -
                           u.at(i, j - 1, k + 1) + u.at(i, j - 1, k - 1)) /
                          (4.0 * hy * hz);
                m(1, 0) = m(0, 1);
                m(2, 0) = m(0, 2);
                m(2, 1) = m(1, 2);
            }
        }
    }
    return h;
}

Eigen::MatrixXd staggered_jacobian(const VectorFieldGrid& f, int i, int j, int k) {
    return f.domain().dim() == 2 ? staggered_jacobian2(f, i, j)
                                 : staggered_jacobian3(f, i, j, k);
}

double graph_volume(const VectorFieldGrid& f, const MetricSpec& metric) {
    const GridDomain& d = f.domain();
    const double cell = cell_area(d);
    double vol = 0.0;
    if (d.dim() == 2) {
        for (int i = 0; i < d.res(0) - 1; ++i) {
            for (int j = 0; j < d.res(1) - 1; ++j) {
                const double w = cell_coverage(d, i, j);
                if (w == 0.0) {
                    continue;
                }
                const Eigen::MatrixXd gram =
                    tangent_gram(staggered_jacobian2(f, i, j), metric);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
                const double min_eig = es.eigenvalues().minCoeff();
                if (!(min_eig > 0.0)) {
                    throw NotSpacelikeError(
                        "graph not space-like at cell (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")",
                        min_eig);
                }
                vol += w * cell * std::sqrt(es.eigenvalues().prod());
            }
        }
        return vol;
    }
    for (int i = 0; i < d.res(0) - 1; ++i) {
        for (int j = 0; j < d.res(1) - 1; ++j) {
            for (int k = 0; k < d.res(2) - 1; ++k) {
                const Eigen::MatrixXd gram =
                    tangent_gram(staggered_jacobian3(f, i, j, k), metric);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
                const double min_eig = es.eigenvalues().minCoeff();
                if (!(min_eig > 0.0)) {
                    throw NotSpacelikeError("graph not space-like at cell (" +
                                                std::to_string(i) + ", " +
                                                std::to_string(j) + ", " +
                                                std::to_string(k) + ")",
                                            min_eig);
                }
                vol += cell * std::sqrt(es.eigenvalues().prod());
            }
        }
    }
    return vol;
}

double domain_measure(const GridDomain& domain) {
    const double cell = cell_area(domain);
    double measure = 0.0;
    if (domain.dim() == 2) {
        for (int i = 0; i < domain.res(0) - 1; ++i) {
            for (int j = 0; j < domain.res(1) - 1; ++j) {
                measure += cell * cell_coverage(domain, i, j);
            }
        }
        return measure;
    }
    return cell * (domain.res(0) - 1) * (domain.res(1) - 1) * (domain.res(2) - 1);
}

MeanCurvatureResidual mean_curvature_residual(const ScalarFieldGrid& u, double t) {
    const GridDomain& d = u.domain();
    const HessianField hess = hessian_field(u);
    const int n = d.dim();

    // Composed scalar F^t(D^2 u) at margin-1 nodes.
    ScalarFieldGrid composed(d);
    auto eval_node = [&](int i, int j, int k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess.at(i, j, k));
        EigenList lam(es.eigenvalues().data(), es.eigenvalues().data() + n);
        for (double l : lam) {
            if (!(family::gram_weight(l, t) > 0.0)) {
                throw NotSpacelikeError("graph not space-like at node (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ")",
                                        family::gram_weight(l, t));
            }
        }
        composed.at(i, j, k) = family::value(lam, t);
    };
    if (n == 2) {
        for (int i = 1; i < d.res(0) - 1; ++i) {
            for (int j = 1; j < d.res(1) - 1; ++j) {
                eval_node(i, j, 0);
            }
        }
    } else {
        for (int i = 1; i < d.res(0) - 1; ++i) {
            for (int j = 1; j < d.res(1) - 1; ++j) {
                for (int k = 1; k < d.res(2) - 1; ++k) {
                    eval_node(i, j, k);
                }
            }
        }
    }

    MeanCurvatureResidual out{ScalarFieldGrid(d), 0.0, 0.0};
    auto grad_node = [&](int i, int j, int k) {
        double g2 = 0.0;
        const double gx =
            (composed.at(i + 1, j, k) - composed.at(i - 1, j, k)) / (2.0 * d.spacing(0));
        const double gy =
            (composed.at(i, j + 1, k) - composed.at(i, j - 1, k)) / (2.0 * d.spacing(1));
        g2 = gx * gx + gy * gy;
        if (n == 3) {
            const double gz = (composed.at(i, j, k + 1) - composed.at(i, j, k - 1)) /
                              (2.0 * d.spacing(2));
            g2 += gz * gz;
        }
        const double r = std::sqrt(g2);
        out.field.at(i, j, k) = r;
        out.max_residual = std::max(out.max_residual, r);
    };
    if (n == 2) {
        for (int i = 2; i < d.res(0) - 2; ++i) {
            for (int j = 2; j < d.res(1) - 2; ++j) {
                grad_node(i, j, 0);
            }
        }
    } else {
        for (int i = 2; i < d.res(0) - 2; ++i) {
            for (int j = 2; j < d.res(1) - 2; ++j) {
                for (int k = 2; k < d.res(2) - 2; ++k) {
                    grad_node(i, j, k);
                }
            }
        }
    }

    double interior = 1.0;
    double full = 1.0;
    for (int a = 0; a < n; ++a) {
        full *= d.hi(a) - d.lo(a);
        interior *= std::max(0.0, d.hi(a) - d.lo(a) - 4.0 * d.spacing(a));
    }
    out.excluded_band_measure = full - interior;
    return out;
}

double null_lagrangian_integral(const VectorFieldGrid& f) {
    const GridDomain& d = f.domain();
    const double cell = cell_area(d);
    double total = 0.0;
    if (d.dim() == 2) {
        for (int i = 0; i < d.res(0) - 1; ++i) {
            for (int j = 0; j < d.res(1) - 1; ++j) {
                const double w = cell_coverage(d, i, j);
                if (w == 0.0) {
                    continue;
                }
                total += w * cell * staggered_jacobian2(f, i, j).determinant();
            }
        }
        return total;
    }
    for (int i = 0; i < d.res(0) - 1; ++i) {
        for (int j = 0; j < d.res(1) - 1; ++j) {
            for (int k = 0; k < d.res(2) - 1; ++k) {
                total += cell * staggered_jacobian3(f, i, j, k).determinant();
            }
        }
    }
    return total;
}

double calibration_integral(const VectorFieldGrid& f, double c) {
    if (!(c > 0.0)) {
        throw DomainError("calibration_integral requires c > 0");
    }
    return 0.5 * (c * domain_measure(f.domain()) + null_lagrangian_integral(f) / c);
}

} // namespace slag
