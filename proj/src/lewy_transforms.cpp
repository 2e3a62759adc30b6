#include "slag/lewy_transforms.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <json.hpp>

namespace slag {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;

struct PQFields {
    VectorFieldGrid p;
    VectorFieldGrid q;
};

PQFields pq_fields(const ScalarFieldGrid& u, const MetricConstants& mc) {
    const GridDomain& d = u.domain();
    const VectorFieldGrid grad = VectorFieldGrid::gradient_of(u);
    PQFields out{VectorFieldGrid(d), VectorFieldGrid(d)};
    for (int i = 0; i < d.res(0); ++i) {
        for (int j = 0; j < d.res(1); ++j) {
            const double x = d.coord(0, i);
            const double y = d.coord(1, j);
            const double gx = grad.at(i, j, 0);
            const double gy = grad.at(i, j, 1);
            out.p.at(i, j, 0) = mc.sigma * x + mc.tau * gx;
            out.p.at(i, j, 1) = mc.sigma * y + mc.tau * gy;
            out.q.at(i, j, 0) = mc.tau * x + mc.sigma * gx;
            out.q.at(i, j, 1) = mc.tau * y + mc.sigma * gy;
        }
    }
    return out;
}

/// kappa and worst relative deviation of Gram_target(phi xi) = kappa * Gram_src(xi)
/// over the supplied source graph matrices.
std::pair<double, double> measure_kappa(const std::vector<Eigen::Matrix2d>& hessians,
                                        const MetricConstants& mc,
                                        const MetricSpec& source_metric,
                                        const MetricSpec& target_metric) {
    double kappa = 0.0;
    double worst = 0.0;
    bool first = true;
    for (const auto& m : hessians) {
        Eigen::MatrixXd basis(4, 2);
        basis.topRows(2) = Eigen::Matrix2d::Identity();
        basis.bottomRows(2) = m; // symmetric Hessian: rows = columns
        Eigen::MatrixXd phi(4, 4);
        phi << mc.sigma * Eigen::Matrix2d::Identity(), mc.tau * Eigen::Matrix2d::Identity(),
            mc.tau * Eigen::Matrix2d::Identity(), mc.sigma * Eigen::Matrix2d::Identity();
        const Eigen::MatrixXd image = phi * basis;

        Eigen::Matrix2d gs;
        Eigen::Matrix2d gt;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                gs(a, b) = source_metric.bilinear(basis.col(a), basis.col(b));
                gt(a, b) = target_metric.bilinear(image.col(a), image.col(b));
            }
        }
        const double denom = gs.squaredNorm();
        if (denom < 1e-300) {
            continue;
        }
        const double k = (gs.array() * gt.array()).sum() / denom;
        worst = std::max(worst, (gt - k * gs).norm() / gs.norm());
        if (first) {
            kappa = k;
            first = false;
        } else {
            worst = std::max(worst, std::abs(k - kappa) /
                                        std::max(std::abs(kappa), 1e-300));
        }
    }
    if (first) {
        throw InternalError("kappa measurement had no usable samples");
    }
    return {kappa, worst};
}

std::vector<Eigen::Matrix2d> interior_hessians(const ScalarFieldGrid& u, int stride) {
    const HessianField h = hessian_field(u);
    const GridDomain& d = u.domain();
    std::vector<Eigen::Matrix2d> out;
    for (int i = 1; i < d.res(0) - 1; i += stride) {
        for (int j = 1; j < d.res(1) - 1; j += stride) {
            out.push_back(h.at(i, j));
        }
    }
    return out;
}

void require_2d(const GridDomain& d, const char* who) {
    if (d.dim() != 2) {
        throw DomainError(std::string(who) + " is implemented for 2D grids");
    }
}

/// Catmull-Rom weight row for local coordinate s in [0,1] over 4 samples.
std::array<double, 4> catmull_rom_weights(double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return {-0.5 * s3 + s2 - 0.5 * s, 1.5 * s3 - 2.5 * s2 + 1.0,
            -1.5 * s3 + 2.0 * s2 + 0.5 * s, 0.5 * s3 - 0.5 * s2};
}

/// C^1 interpolation of one component of a vector field; falls back to
/// bilinear where the 4x4 stencil does not fit.
double interp_component(const VectorFieldGrid& f, int comp, double x, double y) {
    const GridDomain& d = f.domain();
    const double fx = (x - d.lo(0)) / d.spacing(0);
    const double fy = (y - d.lo(1)) / d.spacing(1);
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, d.res(0) - 2);
    j = std::clamp(j, 0, d.res(1) - 2);
    const double sx = fx - i;
    const double sy = fy - j;
    if (i >= 1 && i <= d.res(0) - 3 && j >= 1 && j <= d.res(1) - 3) {
        const auto wx = catmull_rom_weights(sx);
        const auto wy = catmull_rom_weights(sy);
        double v = 0.0;
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                v += wx[static_cast<size_t>(a)] * wy[static_cast<size_t>(b)] *
                     f.at(i - 1 + a, j - 1 + b, comp);
            }
        }
        return v;
    }
    const double v00 = f.at(i, j, comp);
    const double v10 = f.at(i + 1, j, comp);
    const double v01 = f.at(i, j + 1, comp);
    const double v11 = f.at(i + 1, j + 1, comp);
    return v00 * (1 - sx) * (1 - sy) + v10 * sx * (1 - sy) + v01 * (1 - sx) * sy +
           v11 * sx * sy;
}

Eigen::Vector2d interp_vec(const VectorFieldGrid& f, double x, double y) {
    return {interp_component(f, 0, x, y), interp_component(f, 1, x, y)};
}

Eigen::Matrix2d cell_jacobian(const VectorFieldGrid& f, double x, double y) {
    const GridDomain& d = f.domain();
    int i = static_cast<int>(std::floor((x - d.lo(0)) / d.spacing(0)));
    int j = static_cast<int>(std::floor((y - d.lo(1)) / d.spacing(1)));
    i = std::clamp(i, 0, d.res(0) - 2);
    j = std::clamp(j, 0, d.res(1) - 2);
    return staggered_jacobian(f, i, j);
}

} // namespace

void TransformedGraph::write_csv(const std::string& csv_path,
                                 const std::string& sidecar_path) const {
    std::ofstream f(csv_path);
    if (!f) {
        throw InternalError("cannot open " + csv_path + " for writing");
    }
    f.precision(17);
    const int n = source_domain.dim();
    for (int c = 0; c < n; ++c) {
        f << (c ? "," : "") << "x_" << (c + 1);
    }
    for (int c = 0; c < n; ++c) {
        f << ",y_" << (c + 1);
    }
    f << "\n";
    for (const auto& s : samples) {
        for (int c = 0; c < 2 * n; ++c) {
            f << (c ? "," : "") << s(c);
        }
        f << "\n";
    }

    nlohmann::json j;
    j["t"] = constants.t;
    j["kappa"] = kappa;
    j["source"] = grid_header_line(source_domain);
    j["samples"] = samples.size();
    std::ofstream sf(sidecar_path);
    if (!sf) {
        throw InternalError("cannot open " + sidecar_path + " for writing");
    }
    sf << j.dump(2) << "\n";
}

TransformedGraph apply_phi_t(const ScalarFieldGrid& u, double t) {
    require_2d(u.domain(), "apply_phi_t");
    if (t == kQuarterPi) {
        throw DomainError("apply_phi_t is undefined at t = pi/4; use "
                          "degenerate_projection_volume");
    }
    TransformedGraph tg;
    tg.source_domain = u.domain();
    tg.constants = metric_constants(t);

    const GridDomain& d = u.domain();
    const PQFields pq = pq_fields(u, tg.constants);
    for (int i = 1; i < d.res(0) - 1; ++i) {
        for (int j = 1; j < d.res(1) - 1; ++j) {
            Eigen::VectorXd s(4);
            s << pq.p.at(i, j, 0), pq.p.at(i, j, 1), pq.q.at(i, j, 0), pq.q.at(i, j, 1);
            tg.samples.push_back(std::move(s));
            tg.source_nodes.push_back({i, j});
        }
    }

    const MetricSpec source = MetricSpec::family(t);
    const MetricSpec target =
        t < kQuarterPi ? MetricSpec::family(0.0) : MetricSpec::euclidean();
    const int stride = std::max(1, d.res(0) / 16);
    const auto [kappa, worst] = measure_kappa(interior_hessians(u, stride),
                                              tg.constants, source, target);
    if (worst > 1e-8) {
        throw InternalError("pullback factor varies across samples (deviation " +
                            std::to_string(worst) + ")");
    }
    tg.kappa = kappa;
    return tg;
}

ProjectionRecord projection_p(const ScalarFieldGrid& u, double t) {
    require_2d(u.domain(), "projection_p");
    if (t == kQuarterPi) {
        throw DomainError("projection_p is undefined at t = pi/4");
    }
    const MetricConstants mc = metric_constants(t);
    const GridDomain& d = u.domain();
    ProjectionRecord rec{pq_fields(u, mc).p, HessianField(d, 1), 0.0, false};
    const HessianField hess = hessian_field(u);
    double min_eig = std::numeric_limits<double>::infinity();
    for (int i = 1; i < d.res(0) - 1; ++i) {
        for (int j = 1; j < d.res(1) - 1; ++j) {
            Eigen::Matrix2d dp =
                mc.sigma * Eigen::Matrix2d::Identity() + mc.tau * hess.at(i, j);
            rec.dp.at(i, j) = dp;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(
                0.5 * (dp + dp.transpose()));
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
    }
    rec.min_sym_eigenvalue = min_eig;
    rec.uniformly_positive = min_eig > 0.0;
    return rec;
}

InjectivityVerdict injectivity_check(const VectorFieldGrid& p,
                                     const HessianField* dp) {
    require_2d(p.domain(), "injectivity_check");
    const GridDomain& d = p.domain();
    const double h = d.max_spacing();

    InjectivityVerdict verdict;
    verdict.collision_tolerance = h / 4.0;
    verdict.separation_floor = 2.0 * h;

    if (dp) {
        double min_eig = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int i = 1; i < d.res(0) - 1; ++i) {
            for (int j = 1; j < d.res(1) - 1; ++j) {
                if (!dp->valid(i, j)) {
                    continue;
                }
                const Eigen::MatrixXd& m = dp->at(i, j);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                    0.5 * (m + m.transpose()));
                min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
                any = true;
            }
        }
        if (any && min_eig > 0.0) {
            verdict.injective = true;
            verdict.certificate = "monotone map";
            return verdict;
        }
    }

    // Local image Lipschitz scale of every node, from neighbor differences.
    const int nx = d.res(0);
    const int ny = d.res(1);
    std::vector<double> lip(static_cast<size_t>(d.node_count()), 0.0);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double l = 0.0;
            const Eigen::Vector2d here(p.at(i, j, 0), p.at(i, j, 1));
            auto probe = [&](int ii, int jj, double dist) {
                const Eigen::Vector2d there(p.at(ii, jj, 0), p.at(ii, jj, 1));
                l = std::max(l, (there - here).norm() / dist);
            };
            if (i > 0) probe(i - 1, j, d.spacing(0));
            if (i + 1 < nx) probe(i + 1, j, d.spacing(0));
            if (j > 0) probe(i, j - 1, d.spacing(1));
            if (j + 1 < ny) probe(i, j + 1, d.spacing(1));
            lip[static_cast<size_t>(d.index(i, j))] = l;
        }
    }

    // Spatial hash of image points.
    std::vector<double> sorted_lip = lip;
    std::nth_element(sorted_lip.begin(), sorted_lip.begin() + sorted_lip.size() / 2,
                     sorted_lip.end());
    const double lip_med = std::max(sorted_lip[sorted_lip.size() / 2], 1e-12);
    const double bucket = std::max(4.0 * verdict.collision_tolerance, 2.0 * h * lip_med);
    std::unordered_map<long long, std::vector<long>> hash;
    auto key_of = [&](double x, double y) {
        const long long kx = static_cast<long long>(std::floor(x / bucket));
        const long long ky = static_cast<long long>(std::floor(y / bucket));
        return kx * 2000003LL + ky;
    };
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            hash[key_of(p.at(i, j, 0), p.at(i, j, 1))].push_back(d.index(i, j));
        }
    }

    struct Candidate {
        long a;
        long b;
        double gap;
    };
    double lip_max = 0.0;
    for (double l : lip) {
        lip_max = std::max(lip_max, l);
    }
    const double r_partner_max =
        2.5 * h * lip_max + 4.0 * verdict.collision_tolerance;
    std::vector<Candidate> candidates;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const long a = d.index(i, j);
            const Eigen::Vector2d pa(p.at(i, j, 0), p.at(i, j, 1));
            const double ra =
                2.5 * h * lip[static_cast<size_t>(a)] + 4.0 * verdict.collision_tolerance;
            const int reach = 1 + static_cast<int>(std::ceil((ra + r_partner_max) / bucket));
            const long long kx0 = static_cast<long long>(std::floor(pa.x() / bucket));
            const long long ky0 = static_cast<long long>(std::floor(pa.y() / bucket));
            for (long long kx = kx0 - reach; kx <= kx0 + reach; ++kx) {
                for (long long ky = ky0 - reach; ky <= ky0 + reach; ++ky) {
                    const auto it = hash.find(kx * 2000003LL + ky);
                    if (it == hash.end()) {
                        continue;
                    }
                    for (long b : it->second) {
                        if (b <= a) {
                            continue;
                        }
                        const int bi = static_cast<int>(b / ny);
                        const int bj = static_cast<int>(b % ny);
                        const double sx = d.coord(0, i) - d.coord(0, bi);
                        const double sy = d.coord(1, j) - d.coord(1, bj);
                        if (std::hypot(sx, sy) <= verdict.separation_floor) {
                            continue;
                        }
                        const Eigen::Vector2d pb(p.at(bi, bj, 0), p.at(bi, bj, 1));
                        const double gap = (pa - pb).norm();
                        const double rb = 2.5 * h * lip[static_cast<size_t>(b)] +
                                          4.0 * verdict.collision_tolerance;
                        if (gap <= ra + rb) {
                            const double scale = lip[static_cast<size_t>(a)] +
                                                 lip[static_cast<size_t>(b)] + 1e-300;
                            candidates.push_back({a, b, gap / scale});
                        }
                    }
                }
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
        if (l.gap != r.gap) return l.gap < r.gap;
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });
    if (candidates.size() > 50000) {
        candidates.resize(50000);
    }

    // Refinement: pin one end of the candidate pair at its node and solve
    // p(xi) = p(anchor) for the partner with a damped square Newton.  A
    // least-norm search in the joint variables stalls on the domain clamp,
    // so the anchored form is used in both orientations.
    auto partner_solve = [&](const Eigen::Vector2d& anchor, Eigen::Vector2d xi,
                             Eigen::Vector2d* out) {
        const Eigen::Vector2d target = interp_vec(p, anchor.x(), anchor.y());
        for (int iter = 0; iter < 50; ++iter) {
            const Eigen::Vector2d g = interp_vec(p, xi.x(), xi.y()) - target;
            if (g.norm() < 0.05 * verdict.collision_tolerance) {
                *out = xi;
                return true;
            }
            // Coincident solutions are handled by the separation filter later;
            // bail early when the iterate falls toward the anchor.
            if ((xi - anchor).norm() < 0.5 * verdict.separation_floor) {
                return false;
            }
            const Eigen::Matrix2d jac = cell_jacobian(p, xi.x(), xi.y());
            if (std::abs(jac.determinant()) < 1e-300) {
                return false;
            }
            const Eigen::Vector2d step = jac.inverse() * g;
            Eigen::Vector2d next = xi - step;
            next.x() = std::clamp(next.x(), d.lo(0), d.hi(0));
            next.y() = std::clamp(next.y(), d.lo(1), d.hi(1));
            if ((next - xi).norm() < 1e-15) {
                return false; // pinned on the boundary away from a solution
            }
            xi = next;
        }
        return false;
    };
    for (const auto& cand : candidates) {
        const Eigen::Vector2d node_a(d.coord(0, static_cast<int>(cand.a / ny)),
                                     d.coord(1, static_cast<int>(cand.a % ny)));
        const Eigen::Vector2d node_b(d.coord(0, static_cast<int>(cand.b / ny)),
                                     d.coord(1, static_cast<int>(cand.b % ny)));
        for (int orient = 0; orient < 2; ++orient) {
            const Eigen::Vector2d& anchor = orient == 0 ? node_a : node_b;
            const Eigen::Vector2d& start = orient == 0 ? node_b : node_a;
            Eigen::Vector2d partner;
            if (!partner_solve(anchor, start, &partner)) {
                continue;
            }
            const double source_dist = (anchor - partner).norm();
            const double image_dist =
                (interp_vec(p, anchor.x(), anchor.y()) -
                 interp_vec(p, partner.x(), partner.y()))
                    .norm();
            if (image_dist < verdict.collision_tolerance &&
                source_dist > verdict.separation_floor) {
                verdict.injective = false;
                verdict.certificate = "collision witness";
                verdict.collision = CollisionWitness{{anchor.x(), anchor.y()},
                                                     {partner.x(), partner.y()},
                                                     image_dist,
                                                     source_dist};
                return verdict;
            }
        }
    }

    verdict.injective = true;
    verdict.certificate = "no collision found";
    return verdict;
}

HatPotential reconstruct_hat_potential(const ScalarFieldGrid& u, double t,
                                       int target_res) {
    require_2d(u.domain(), "reconstruct_hat_potential");
    if (t == kQuarterPi) {
        throw DomainError("reconstruct_hat_potential is undefined at t = pi/4");
    }
    const ProjectionRecord proj = projection_p(u, t);
    if (!proj.uniformly_positive) {
        throw DomainError("reconstruct_hat_potential requires Dp > 0 uniformly "
                          "(min symmetric eigenvalue " +
                          std::to_string(proj.min_sym_eigenvalue) + ")");
    }
    const MetricConstants mc = metric_constants(t);
    const GridDomain& d = u.domain();
    const PQFields pq = pq_fields(u, mc);

    // Target box: bounding box of the image samples.
    double lox = std::numeric_limits<double>::infinity();
    double loy = lox;
    double hix = -lox;
    double hiy = -lox;
    for (int i = 0; i < d.res(0); ++i) {
        for (int j = 0; j < d.res(1); ++j) {
            lox = std::min(lox, pq.p.at(i, j, 0));
            hix = std::max(hix, pq.p.at(i, j, 0));
            loy = std::min(loy, pq.p.at(i, j, 1));
            hiy = std::max(hiy, pq.p.at(i, j, 1));
        }
    }
    const int res = target_res > 0 ? target_res : d.res(0);
    const GridDomain target = GridDomain::rect2(lox, hix, loy, hiy, res, res);

    HatPotential hat{ScalarFieldGrid(target), target,
                     std::vector<bool>(static_cast<size_t>(target.node_count()), false),
                     0.0, 0.0};
    VectorFieldGrid r(target);

    // Invert p at every target node by damped Newton on the interpolant.
    const double locate_tol = 1e-11 * (1.0 + std::max(hix - lox, hiy - loy));
    std::vector<Eigen::Vector2d> preimage(static_cast<size_t>(target.node_count()));
    const double cx = 0.5 * (d.lo(0) + d.hi(0));
    const double cy = 0.5 * (d.lo(1) + d.hi(1));
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            const Eigen::Vector2d want(target.coord(0, i), target.coord(1, j));
            Eigen::Vector2d x(cx, cy);
            // Warm start from the previous column neighbor when available.
            if (j > 0 && hat.valid[static_cast<size_t>(target.index(i, j - 1))]) {
                x = preimage[static_cast<size_t>(target.index(i, j - 1))];
            } else if (i > 0 && hat.valid[static_cast<size_t>(target.index(i - 1, j))]) {
                x = preimage[static_cast<size_t>(target.index(i - 1, j))];
            }
            bool ok = false;
            for (int iter = 0; iter < 60; ++iter) {
                const Eigen::Vector2d g = interp_vec(pq.p, x.x(), x.y()) - want;
                if (g.norm() < locate_tol) {
                    ok = true;
                    break;
                }
                Eigen::Matrix2d jac = cell_jacobian(pq.p, x.x(), x.y());
                if (std::abs(jac.determinant()) < 1e-300) {
                    break;
                }
                Eigen::Vector2d step = jac.inverse() * g;
                // Keep the walk inside the source box.
                Eigen::Vector2d nx = x - step;
                nx.x() = std::clamp(nx.x(), d.lo(0), d.hi(0));
                nx.y() = std::clamp(nx.y(), d.lo(1), d.hi(1));
                if ((nx - x).norm() < 1e-16) {
                    break; // pinned to the boundary: target outside the image
                }
                x = nx;
            }
            if (!ok) {
                continue;
            }
            // Reject boundary-pinned solutions that did not actually match.
            if ((interp_vec(pq.p, x.x(), x.y()) - want).norm() > locate_tol) {
                continue;
            }
            const long idx = target.index(i, j);
            preimage[static_cast<size_t>(idx)] = x;
            hat.valid[static_cast<size_t>(idx)] = true;
            const Eigen::Vector2d rv = interp_vec(pq.q, x.x(), x.y());
            r.at(i, j, 0) = rv.x();
            r.at(i, j, 1) = rv.y();
        }
    }

    // Antisymmetry of the resampled Jacobian (valid full-stencil nodes only).
    for (int i = 1; i < res - 1; ++i) {
        for (int j = 1; j < res - 1; ++j) {
            auto v = [&](int ii, int jj) {
                return hat.valid[static_cast<size_t>(target.index(ii, jj))];
            };
            if (!(v(i, j) && v(i + 1, j) && v(i - 1, j) && v(i, j + 1) && v(i, j - 1))) {
                continue;
            }
            const double dr1dy =
                (r.at(i, j + 1, 0) - r.at(i, j - 1, 0)) / (2.0 * target.spacing(1));
            const double dr2dx =
                (r.at(i + 1, j, 1) - r.at(i - 1, j, 1)) / (2.0 * target.spacing(0));
            hat.max_dr_asymmetry = std::max(hat.max_dr_asymmetry,
                                            std::abs(dr1dy - dr2dx));
        }
    }

    // Potential by axis-path integration from the center node, both orders.
    const int ic = res / 2;
    const int jc = res / 2;
    if (!hat.valid[static_cast<size_t>(target.index(ic, jc))]) {
        throw DomainError("reconstruct_hat_potential: image of the domain center "
                          "not invertible");
    }
    const double hx = target.spacing(0);
    const double hy = target.spacing(1);
    auto valid_at = [&](int i, int j) {
        return hat.valid[static_cast<size_t>(target.index(i, j))];
    };
    auto integrate = [&](int i, int j, bool x_first, bool* ok) {
        double s = 0.0;
        *ok = true;
        auto step_x = [&](int from, int to, int row) {
            const int dir = to > from ? 1 : -1;
            for (int k = from; k != to; k += dir) {
                if (!valid_at(k, row) || !valid_at(k + dir, row)) {
                    *ok = false;
                    return;
                }
                s += dir * 0.5 * hx * (r.at(k, row, 0) + r.at(k + dir, row, 0));
            }
        };
        auto step_y = [&](int from, int to, int col) {
            const int dir = to > from ? 1 : -1;
            for (int k = from; k != to; k += dir) {
                if (!valid_at(col, k) || !valid_at(col, k + dir)) {
                    *ok = false;
                    return;
                }
                s += dir * 0.5 * hy * (r.at(col, k, 1) + r.at(col, k + dir, 1));
            }
        };
        if (x_first) {
            step_x(ic, i, jc);
            if (*ok) step_y(jc, j, i);
        } else {
            step_y(jc, j, ic);
            if (*ok) step_x(ic, i, j);
        }
        return s;
    };
    for (int i = 0; i < res; ++i) {
        for (int j = 0; j < res; ++j) {
            const long idx = target.index(i, j);
            if (!hat.valid[static_cast<size_t>(idx)]) {
                continue;
            }
            bool ok_a = false;
            bool ok_b = false;
            const double a = integrate(i, j, true, &ok_a);
            const double b = integrate(i, j, false, &ok_b);
            if (ok_a && ok_b) {
                hat.u_hat.at(i, j) = 0.5 * (a + b);
                hat.path_residual = std::max(hat.path_residual, std::abs(a - b));
            } else if (ok_a) {
                hat.u_hat.at(i, j) = a;
            } else if (ok_b) {
                hat.u_hat.at(i, j) = b;
            } else {
                hat.valid[static_cast<size_t>(idx)] = false;
            }
        }
    }
    return hat;
}

DegenerateVolumes degenerate_projection_volume(const VectorFieldGrid& f) {
    const GridDomain& d = f.domain();
    const int n = d.dim();

    // Eigenvalue -1 guard: det(I + DF) must stay away from zero.
    {
        const double h0 = d.spacing(0);
        const double h1 = d.spacing(1);
        auto check = [&](const Eigen::MatrixXd& df, int i, int j, int k) {
            const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + df;
            if (std::abs(m.determinant()) < 1e-10) {
                throw DomainError("DF has eigenvalue -1 (within tolerance) at node (" +
                                  std::to_string(i) + ", " + std::to_string(j) +
                                  (n == 3 ? ", " + std::to_string(k) : std::string()) +
                                  ")");
            }
        };
        if (n == 2) {
            for (int i = 1; i < d.res(0) - 1; ++i) {
                for (int j = 1; j < d.res(1) - 1; ++j) {
                    Eigen::MatrixXd df(2, 2);
                    for (int c = 0; c < 2; ++c) {
                        df(c, 0) = (f.at(i + 1, j, c) - f.at(i - 1, j, c)) / (2.0 * h0);
                        df(c, 1) = (f.at(i, j + 1, c) - f.at(i, j - 1, c)) / (2.0 * h1);
                    }
                    check(df, i, j, 0);
                }
            }
        } else {
            for (int i = 1; i < d.res(0) - 1; ++i) {
                for (int j = 1; j < d.res(1) - 1; ++j) {
                    for (int k = 1; k < d.res(2) - 1; ++k) {
                        Eigen::MatrixXd df(3, 3);
                        for (int c = 0; c < 3; ++c) {
                            df(c, 0) = (f.at3(i + 1, j, k, c) - f.at3(i - 1, j, k, c)) /
                                       (2.0 * d.spacing(0));
                            df(c, 1) = (f.at3(i, j + 1, k, c) - f.at3(i, j - 1, k, c)) /
                                       (2.0 * d.spacing(1));
                            df(c, 2) = (f.at3(i, j, k + 1, c) - f.at3(i, j, k - 1, c)) /
                                       (2.0 * d.spacing(2));
                        }
                        check(df, i, j, k);
                    }
                }
            }
        }
    }

    DegenerateVolumes out;

    // kappa of the projection metric, measured on a few tangent planes.
    {
        const MetricSpec gq = MetricSpec::family(kQuarterPi);
        double kappa = 0.0;
        bool first = true;
        for (int trial = 0; trial < 3; ++trial) {
            Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
            q.diagonal().setConstant(0.25 * (trial + 1));
            Eigen::MatrixXd basis(2 * n, n);
            basis.topRows(n) = Eigen::MatrixXd::Identity(n, n);
            basis.bottomRows(n) = q.transpose();
            Eigen::MatrixXd gs(n, n);
            Eigen::MatrixXd gt(n, n);
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    gs(a, b) = gq.bilinear(basis.col(a), basis.col(b));
                    // Projection (x + y)/2 of the basis vectors, euclidean Gram.
                    Eigen::VectorXd pa =
                        0.5 * (basis.col(a).head(n) + basis.col(a).tail(n));
                    Eigen::VectorXd pb =
                        0.5 * (basis.col(b).head(n) + basis.col(b).tail(n));
                    gt(a, b) = pa.dot(pb);
                }
            }
            const double k = (gs.array() * gt.array()).sum() / gt.squaredNorm();
            if (first) {
                kappa = k;
                first = false;
            } else if (std::abs(k - kappa) > 1e-10 * std::abs(kappa)) {
                throw InternalError("projection metric factor is not constant");
            }
        }
        out.kappa = kappa; // g_{pi/4} = kappa * (pullback of euclidean)
    }

    out.direct = graph_volume(f, MetricSpec::family(kQuarterPi)) /
                 std::pow(out.kappa, 0.5 * n);

    // Boundary integral of the flux form over the projected boundary.
    if (n == 2) {
        std::vector<Eigen::Vector2d> loop;
        auto push = [&](int i, int j) {
            loop.emplace_back(0.5 * (d.coord(0, i) + f.at(i, j, 0)),
                              0.5 * (d.coord(1, j) + f.at(i, j, 1)));
        };
        for (int i = 0; i < d.res(0) - 1; ++i) push(i, 0);
        for (int j = 0; j < d.res(1) - 1; ++j) push(d.res(0) - 1, j);
        for (int i = d.res(0) - 1; i > 0; --i) push(i, d.res(1) - 1);
        for (int j = d.res(1) - 1; j > 0; --j) push(0, j);
        double area2 = 0.0;
        double perimeter = 0.0;
        double max_last = 0.0;
        for (size_t k = 0; k < loop.size(); ++k) {
            const Eigen::Vector2d& a = loop[k];
            const Eigen::Vector2d& b = loop[(k + 1) % loop.size()];
            area2 += a.x() * b.y() - b.x() * a.y();
            perimeter += (b - a).norm();
            max_last = std::max(max_last, std::abs(a.y()));
        }
        out.boundary_integral = 0.5 * std::abs(area2);
        out.tolerance = 5.0 * d.max_spacing() * perimeter * std::max(max_last, 1.0);
        return out;
    }

    // n = 3: flux form (last coordinate) d(x1)^d(x2) over the six faces.
    auto zeta = [&](int i, int j, int k) {
        return Eigen::Vector3d(0.5 * (d.coord(0, i) + f.at3(i, j, k, 0)),
                               0.5 * (d.coord(1, j) + f.at3(i, j, k, 1)),
                               0.5 * (d.coord(2, k) + f.at3(i, j, k, 2)));
    };
    double total = 0.0;
    double perimeter = 0.0; // face area of the image, used for the tolerance
    double max_last = 0.0;
    auto face_quad = [&](const Eigen::Vector3d& p00, const Eigen::Vector3d& p10,
                         const Eigen::Vector3d& p11, const Eigen::Vector3d& p01,
                         double orient) {
        // Shoelace of the (x1, x2) projection of the quad, times mean x3.
        auto cross2 = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
            return a.x() * b.y() - b.x() * a.y();
        };
        const double proj2 = 0.5 * (cross2(p00, p10) + cross2(p10, p11) +
                                    cross2(p11, p01) + cross2(p01, p00));
        const double mean3 = 0.25 * (p00.z() + p10.z() + p11.z() + p01.z());
        total += orient * mean3 * proj2;
        perimeter += 0.5 * ((p10 - p00).cross(p01 - p00).norm() +
                            (p11 - p10).cross(p11 - p01).norm());
        max_last = std::max({max_last, std::abs(p00.z()), std::abs(p11.z())});
    };
    const int rx = d.res(0), ry = d.res(1), rz = d.res(2);
    for (int j = 0; j + 1 < ry; ++j) {
        for (int k = 0; k + 1 < rz; ++k) {
            face_quad(zeta(0, j, k), zeta(0, j + 1, k), zeta(0, j + 1, k + 1),
                      zeta(0, j, k + 1), -1.0);
            face_quad(zeta(rx - 1, j, k), zeta(rx - 1, j + 1, k),
                      zeta(rx - 1, j + 1, k + 1), zeta(rx - 1, j, k + 1), 1.0);
        }
    }
    for (int i = 0; i + 1 < rx; ++i) {
        for (int k = 0; k + 1 < rz; ++k) {
            face_quad(zeta(i, 0, k), zeta(i + 1, 0, k), zeta(i + 1, 0, k + 1),
                      zeta(i, 0, k + 1), 1.0);
            face_quad(zeta(i, ry - 1, k), zeta(i + 1, ry - 1, k),
                      zeta(i + 1, ry - 1, k + 1), zeta(i, ry - 1, k + 1), -1.0);
        }
    }
    for (int i = 0; i + 1 < rx; ++i) {
        for (int j = 0; j + 1 < ry; ++j) {
            face_quad(zeta(i, j, 0), zeta(i + 1, j, 0), zeta(i + 1, j + 1, 0),
                      zeta(i, j + 1, 0), -1.0);
            face_quad(zeta(i, j, rz - 1), zeta(i + 1, j, rz - 1),
                      zeta(i + 1, j + 1, rz - 1), zeta(i, j + 1, rz - 1), 1.0);
        }
    }
    out.boundary_integral = std::abs(total);
    out.tolerance = 5.0 * d.max_spacing() * perimeter * std::max(max_last, 1.0);
    return out;
}

} // namespace slag
