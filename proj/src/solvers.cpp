#include "slag/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <fstream>
#include <limits>

namespace slag {

namespace {

void require_solver_domain(const GridDomain& d) {
    if (d.dim() != 2) {
        throw DomainError("solvers support 2D rectangular domains");
    }
    if (d.mask()) {
        throw DomainError("solvers do not support masked domains");
    }
}

struct Sym2 {
    double xx = 0.0, yy = 0.0, xy = 0.0;

    void eigenvalues(double& l1, double& l2) const {
        const double mean = 0.5 * (xx + yy);
        const double disc = std::hypot(0.5 * (xx - yy), xy);
        l1 = mean - disc;
        l2 = mean + disc;
    }
};

Sym2 hessian_at(const ScalarFieldGrid& u, int i, int j) {
    const GridDomain& d = u.domain();
    const double hx = d.spacing(0);
    const double hy = d.spacing(1);
    Sym2 m;
    m.xx = (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (hx * hx);
    m.yy = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (hy * hy);
    m.xy = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) +
            u.at(i - 1, j - 1)) /
           (4.0 * hx * hy);
    return m;
}

/// Spectral gradient matrix W of a symmetric function with per-eigenvalue
/// derivative g(lambda): W = g(l1) v1 v1^T + g(l2) v2 v2^T.
Sym2 spectral_gradient(const Sym2& m, const std::function<double(double)>& g) {
    double l1, l2;
    m.eigenvalues(l1, l2);
    if (std::abs(l2 - l1) < 1e-13 * (1.0 + std::abs(l1) + std::abs(l2))) {
        const double gv = g(0.5 * (l1 + l2));
        return Sym2{gv, gv, 0.0};
    }
    // Eigenvector for l1: rotate so that (xx - l1, xy) is normal to it.
    double vx, vy;
    if (std::abs(m.xy) > 1e-300) {
        vx = l1 - m.yy;
        vy = m.xy;
    } else if (m.xx <= m.yy) {
        vx = 1.0;
        vy = 0.0;
    } else {
        vx = 0.0;
        vy = 1.0;
    }
    const double norm = std::hypot(vx, vy);
    vx /= norm;
    vy /= norm;
    const double g1 = g(l1);
    const double g2 = g(l2);
    // v2 is the 90-degree rotation of v1.
    Sym2 w;
    w.xx = g1 * vx * vx + g2 * vy * vy;
    w.yy = g1 * vy * vy + g2 * vx * vx;
    w.xy = (g1 - g2) * vx * vy;
    return w;
}

struct NewtonProblem {
    // Residual of the scalar operator at one interior node.
    std::function<double(const Sym2&)> residual;
    // Linearization weights w such that d residual = w : d Hessian.
    std::function<Sym2(const Sym2&)> weights;
    // Admissibility of the nodal Hessian (elliptic branch membership).
    std::function<bool(const Sym2&)> admissible;
    std::string branch_error;
};

/// Add the transfinite (Coons) interpolation of bc - u|boundary, so that u
/// matches the boundary data exactly while staying smooth inside.
void blend_boundary_mismatch(ScalarFieldGrid& u, const BoundaryData& bc) {
    const GridDomain& d = u.domain();
    const int nx = d.res(0);
    const int ny = d.res(1);
    std::vector<double> west(ny), east(ny), south(nx), north(nx);
    for (int j = 0; j < ny; ++j) {
        west[static_cast<size_t>(j)] = bc.at(0, j) - u.at(0, j);
        east[static_cast<size_t>(j)] = bc.at(nx - 1, j) - u.at(nx - 1, j);
    }
    for (int i = 0; i < nx; ++i) {
        south[static_cast<size_t>(i)] = bc.at(i, 0) - u.at(i, 0);
        north[static_cast<size_t>(i)] = bc.at(i, ny - 1) - u.at(i, ny - 1);
    }
    for (int i = 0; i < nx; ++i) {
        const double xi = static_cast<double>(i) / (nx - 1);
        for (int j = 0; j < ny; ++j) {
            const double eta = static_cast<double>(j) / (ny - 1);
            const double lift =
                (1.0 - xi) * west[static_cast<size_t>(j)] +
                xi * east[static_cast<size_t>(j)] +
                (1.0 - eta) * south[static_cast<size_t>(i)] +
                eta * north[static_cast<size_t>(i)] -
                ((1.0 - xi) * (1.0 - eta) * west[0] + xi * (1.0 - eta) * east[0] +
                 (1.0 - xi) * eta * west[static_cast<size_t>(ny - 1)] +
                 xi * eta * east[static_cast<size_t>(ny - 1)]);
            u.at(i, j) += lift;
        }
    }
}

struct ResidualNorms {
    double sup = std::numeric_limits<double>::infinity();
    double l2 = std::numeric_limits<double>::infinity();
    bool admissible = false;
};

ResidualNorms residual_norms(const ScalarFieldGrid& u, const NewtonProblem& prob) {
    const GridDomain& d = u.domain();
    ResidualNorms out;
    double sup = 0.0;
    double sumsq = 0.0;
    bool ok = true;
    for (int i = 1; i < d.res(0) - 1; ++i) {
        for (int j = 1; j < d.res(1) - 1; ++j) {
            const Sym2 m = hessian_at(u, i, j);
            if (!prob.admissible(m)) {
                ok = false;
            } else {
                const double r = prob.residual(m);
                sup = std::max(sup, std::abs(r));
                sumsq += r * r;
            }
        }
    }
    out.admissible = ok;
    if (ok) {
        out.sup = sup;
        out.l2 = std::sqrt(sumsq);
    }
    return out;
}

SolveResult newton_solve(const GridDomain& domain, const BoundaryData& bc,
                         const SolverConfig& cfg, const NewtonProblem& prob) {
    require_solver_domain(domain);
    if (!(bc.domain() == domain)) {
        throw DomainError("boundary data does not match the solve domain");
    }
    if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1) {
        throw DomainError("solver config: tolerance > 0 and iterations >= 1 required");
    }

    ScalarFieldGrid u(domain);
    if (cfg.guess == InitialGuessPolicy::from_grid) {
        if (!cfg.initial_guess || !(cfg.initial_guess->domain() == domain)) {
            throw DomainError("from_grid initial guess missing or on wrong domain");
        }
        u = *cfg.initial_guess;
    } else {
        u = quadratic_fit(bc);
        // Blend the fit's boundary mismatch into the interior smoothly;
        // overwriting only the boundary rows would put a 1/h^2 kink into the
        // near-boundary Hessians.
        blend_boundary_mismatch(u, bc);
    }
    // Boundary rows always carry the data exactly.
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            if (domain.is_boundary(i, j)) {
                u.at(i, j) = bc.at(i, j);
            }
        }
    }

    const int nx = domain.res(0);
    const int ny = domain.res(1);
    const double hx = domain.spacing(0);
    const double hy = domain.spacing(1);
    const int inx = nx - 2;
    const int iny = ny - 2;
    const long unknowns = static_cast<long>(inx) * iny;
    auto uidx = [&](int i, int j) { return static_cast<long>(i - 1) * iny + (j - 1); };

    SolveResult out{u, {}};
    ResidualNorms res = residual_norms(out.u, prob);
    if (!res.admissible) {
        throw DomainError("initial guess is not admissible (" + prob.branch_error + ")");
    }
    out.report.residual_history.push_back(res.sup);

    for (int iter = 0; iter < cfg.max_iterations && res.sup > cfg.tolerance; ++iter) {
        // Assemble the 9-point linearization.
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(unknowns) * 9);
        Eigen::VectorXd rhs(unknowns);
        for (int i = 1; i < nx - 1; ++i) {
            for (int j = 1; j < ny - 1; ++j) {
                const Sym2 m = hessian_at(out.u, i, j);
                const Sym2 w = prob.weights(m);
                rhs(uidx(i, j)) = -prob.residual(m);

                const double cxx = w.xx / (hx * hx);
                const double cyy = w.yy / (hy * hy);
                const double cxy = 2.0 * w.xy / (4.0 * hx * hy);
                auto add = [&](int ii, int jj, double v) {
                    if (domain.is_boundary(ii, jj)) {
                        return; // boundary increments vanish
                    }
                    trips.emplace_back(uidx(i, j), uidx(ii, jj), v);
                };
                add(i, j, -2.0 * cxx - 2.0 * cyy);
                add(i + 1, j, cxx);
                add(i - 1, j, cxx);
                add(i, j + 1, cyy);
                add(i, j - 1, cyy);
                add(i + 1, j + 1, cxy);
                add(i - 1, j - 1, cxy);
                add(i + 1, j - 1, -cxy);
                add(i - 1, j + 1, -cxy);
            }
        }
        Eigen::SparseMatrix<double> jac(unknowns, unknowns);
        jac.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) {
            throw InternalError("Newton linearization is singular");
        }
        const Eigen::VectorXd step = lu.solve(rhs);

        // Backtracking: admissibility first, then decrease of the l2 merit.
        double s = 1.0;
        bool accepted = false;
        bool ever_admissible = false;
        for (int halving = 0; halving <= cfg.max_halvings; ++halving, s *= 0.5) {
            ScalarFieldGrid trial = out.u;
            for (int i = 1; i < nx - 1; ++i) {
                for (int j = 1; j < ny - 1; ++j) {
                    trial.at(i, j) += s * step(uidx(i, j));
                }
            }
            const ResidualNorms trial_res = residual_norms(trial, prob);
            if (!trial_res.admissible) {
                continue;
            }
            ever_admissible = true;
            if (trial_res.l2 < (1.0 - 1e-4 * s) * res.l2) {
                out.u = trial;
                res = trial_res;
                accepted = true;
                break;
            }
        }
        out.report.iterations = iter + 1;
        out.report.residual_history.push_back(res.sup);
        if (!accepted) {
            if (!ever_admissible) {
                throw DomainError(prob.branch_error +
                                  " (no damped step stays admissible; residual " +
                                  std::to_string(res.sup) + ")");
            }
            throw DomainError("Newton stalled at residual " + std::to_string(res.sup));
        }
    }
    if (res.sup > cfg.tolerance) {
        throw DomainError("Newton did not converge in " +
                          std::to_string(cfg.max_iterations) +
                          " iterations; last residual " + std::to_string(res.sup));
    }
    out.report.final_residual = res.sup;
    return out;
}

} // namespace

BoundaryData BoundaryData::from_function(const GridDomain& domain,
                                         const std::function<double(double, double)>& g) {
    require_solver_domain(domain);
    BoundaryData bd;
    bd.domain_ = domain;
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            if (domain.is_boundary(i, j)) {
                const double v = g(domain.coord(0, i), domain.coord(1, j));
                if (!std::isfinite(v)) {
                    throw DomainError("boundary data must be finite");
                }
                bd.values_.push_back(v);
            }
        }
    }
    bd.build_index();
    return bd;
}

BoundaryData BoundaryData::trace_of(const ScalarFieldGrid& u) {
    const GridDomain& domain = u.domain();
    require_solver_domain(domain);
    BoundaryData bd;
    bd.domain_ = domain;
    for (int i = 0; i < domain.res(0); ++i) {
        for (int j = 0; j < domain.res(1); ++j) {
            if (domain.is_boundary(i, j)) {
                bd.values_.push_back(u.at(i, j));
            }
        }
    }
    bd.build_index();
    return bd;
}

void BoundaryData::build_index() {
    offsets_.assign(static_cast<size_t>(domain_.node_count()), -1);
    long pos = 0;
    for (int i = 0; i < domain_.res(0); ++i) {
        for (int j = 0; j < domain_.res(1); ++j) {
            if (domain_.is_boundary(i, j)) {
                offsets_[static_cast<size_t>(domain_.index(i, j))] = pos++;
            }
        }
    }
}

double BoundaryData::at(int i, int j) const {
    const long off = offsets_[static_cast<size_t>(domain_.index(i, j))];
    if (off < 0) {
        throw DomainError("boundary data queried at an interior node");
    }
    return values_[static_cast<size_t>(off)];
}

void BoundaryData::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) {
        throw InternalError("cannot open " + path + " for writing");
    }
    f.precision(17);
    f << grid_header_line(domain_) << "\n";
    for (double v : values_) {
        f << v << "\n";
    }
}

BoundaryData BoundaryData::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw DomainError("cannot open boundary file " + path);
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw DomainError("empty boundary file " + path);
    }
    BoundaryData bd;
    bd.domain_ = parse_grid_header(line);
    require_solver_domain(bd.domain_);
    double v = 0.0;
    while (f >> v) {
        bd.values_.push_back(v);
    }
    const long expected = 2L * bd.domain_.res(0) + 2L * bd.domain_.res(1) - 4;
    if (static_cast<long>(bd.values_.size()) != expected) {
        throw DomainError("boundary file " + path + ": expected " +
                          std::to_string(expected) + " values, got " +
                          std::to_string(bd.values_.size()));
    }
    bd.build_index();
    return bd;
}

ScalarFieldGrid quadratic_fit(const BoundaryData& bc) {
    const GridDomain& d = bc.domain();
    std::vector<std::array<double, 2>> pts;
    std::vector<double> vals;
    for (int i = 0; i < d.res(0); ++i) {
        for (int j = 0; j < d.res(1); ++j) {
            if (d.is_boundary(i, j)) {
                pts.push_back({d.coord(0, i), d.coord(1, j)});
                vals.push_back(bc.at(i, j));
            }
        }
    }
    Eigen::MatrixXd a(pts.size(), 6);
    Eigen::VectorXd b(pts.size());
    for (size_t r = 0; r < pts.size(); ++r) {
        const double x = pts[r][0];
        const double y = pts[r][1];
        a(static_cast<long>(r), 0) = 1.0;
        a(static_cast<long>(r), 1) = x;
        a(static_cast<long>(r), 2) = y;
        a(static_cast<long>(r), 3) = x * x;
        a(static_cast<long>(r), 4) = x * y;
        a(static_cast<long>(r), 5) = y * y;
        b(static_cast<long>(r)) = vals[r];
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    return ScalarFieldGrid::sample2(d, [&](double x, double y) {
        return coef(0) + coef(1) * x + coef(2) * y + coef(3) * x * x + coef(4) * x * y +
               coef(5) * y * y;
    });
}

SolveResult solve_poisson(const GridDomain& domain, double a_coeff,
                          const BoundaryData& bc) {
    require_solver_domain(domain);
    if (!(bc.domain() == domain)) {
        throw DomainError("boundary data does not match the solve domain");
    }
    const int nx = domain.res(0);
    const int ny = domain.res(1);
    const double hx = domain.spacing(0);
    const double hy = domain.spacing(1);
    const int iny = ny - 2;
    const long unknowns = static_cast<long>(nx - 2) * iny;
    auto uidx = [&](int i, int j) { return static_cast<long>(i - 1) * iny + (j - 1); };

    const double cx = 1.0 / (hx * hx);
    const double cy = 1.0 / (hy * hy);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(unknowns) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(unknowns, 2.0 * a_coeff);
    for (int i = 1; i < nx - 1; ++i) {
        for (int j = 1; j < ny - 1; ++j) {
            const long row = uidx(i, j);
            trips.emplace_back(row, row, 2.0 * cx + 2.0 * cy);
            auto couple = [&](int ii, int jj, double w) {
                if (domain.is_boundary(ii, jj)) {
                    rhs(row) += w * bc.at(ii, jj);
                } else {
                    trips.emplace_back(row, uidx(ii, jj), -w);
                }
            };
            couple(i + 1, j, cx);
            couple(i - 1, j, cx);
            couple(i, j + 1, cy);
            couple(i, j - 1, cy);
        }
    }
    Eigen::SparseMatrix<double> lap(unknowns, unknowns);
    lap.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(lap);
    if (ldlt.info() != Eigen::Success) {
        throw InternalError("Poisson system factorization failed");
    }
    Eigen::VectorXd sol = ldlt.solve(rhs);
    // One pass of iterative refinement keeps the discrete residual at the
    // 1e-10 certificate even on fine grids.
    sol += ldlt.solve(rhs - lap * sol);

    SolveResult out{ScalarFieldGrid(domain), {}};
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            out.u.at(i, j) = domain.is_boundary(i, j) ? bc.at(i, j) : sol(uidx(i, j));
        }
    }
    double res = 0.0;
    for (int i = 1; i < nx - 1; ++i) {
        for (int j = 1; j < ny - 1; ++j) {
            const Sym2 m = hessian_at(out.u, i, j);
            res = std::max(res, std::abs(m.xx + m.yy + 2.0 * a_coeff));
        }
    }
    out.report.iterations = 1;
    out.report.final_residual = res;
    out.report.residual_history = {res};
    out.report.interior_nodes = static_cast<int>(unknowns);
    return out;
}

SolveResult solve_monge_ampere(const GridDomain& domain, double c,
                               const BoundaryData& bc, const SolverConfig& cfg) {
    if (!(c > 0.0)) {
        throw DomainError("solve_monge_ampere requires c > 0");
    }
    NewtonProblem prob;
    const double c2 = c * c;
    prob.residual = [c2](const Sym2& m) {
        return m.xx * m.yy - m.xy * m.xy - c2;
    };
    // Adjugate gradient of the determinant in the W : dM convention used by
    // the assembly (the off-diagonal is counted twice there).
    prob.weights = [](const Sym2& m) {
        return Sym2{m.yy, m.xx, -m.xy};
    };
    prob.admissible = [](const Sym2& m) {
        return m.xx > 0.0 && m.xx * m.yy - m.xy * m.xy > 0.0;
    };
    prob.branch_error = "left elliptic branch";
    SolveResult out = newton_solve(domain, bc, cfg, prob);

    FamilyPoint p0 = make_family_point(0.0, 2.0 * std::log(c));
    out.report.interior_nodes = 0;
    for (int i = 1; i < domain.res(0) - 1; ++i) {
        for (int j = 1; j < domain.res(1) - 1; ++j) {
            const Sym2 m = hessian_at(out.u, i, j);
            double l1, l2;
            m.eigenvalues(l1, l2);
            const auto rc = classify_regime({l1, l2}, p0);
            out.report.interior_nodes++;
            out.report.spacelike_nodes += rc.spacelike;
            out.report.convex_nodes += rc.convex;
            out.report.concave_nodes += rc.concave;
        }
    }
    out.report.final_raw_residual = out.report.final_residual;
    return out;
}

SolveResult solve_family(const GridDomain& domain, double t, double c,
                         const BoundaryData& bc, const SolverConfig& cfg) {
    const FamilyPoint point = make_family_point(t, c);
    const double nu = family::normalizer(t);
    const int n = 2;
    const double c_norm = (c - family::principal_offset(t, n)) / nu;

    NewtonProblem prob;
    prob.residual = [t, c_norm](const Sym2& m) {
        double l1, l2;
        m.eigenvalues(l1, l2);
        return family::value({l1, l2}, t) - c_norm;
    };
    prob.weights = [t](const Sym2& m) {
        return spectral_gradient(m, [t](double l) {
            return 1.0 / family::gram_weight(l, t);
        });
    };
    prob.admissible = [t](const Sym2& m) {
        double l1, l2;
        m.eigenvalues(l1, l2);
        return family::admissible(l1, t) && family::admissible(l2, t) &&
               family::gram_weight(l1, t) > 0.0 && family::gram_weight(l2, t) > 0.0;
    };
    prob.branch_error = "left space-like region";
    SolveResult out = newton_solve(domain, bc, cfg, prob);

    double raw_res = 0.0;
    out.report.interior_nodes = 0;
    for (int i = 1; i < domain.res(0) - 1; ++i) {
        for (int j = 1; j < domain.res(1) - 1; ++j) {
            const Sym2 m = hessian_at(out.u, i, j);
            double l1, l2;
            m.eigenvalues(l1, l2);
            raw_res = std::max(raw_res,
                               std::abs(family::raw_value({l1, l2}, t) - c));
            const auto rc = classify_regime({l1, l2}, point);
            out.report.interior_nodes++;
            out.report.spacelike_nodes += rc.spacelike;
            out.report.convex_nodes += rc.convex;
            out.report.concave_nodes += rc.concave;
        }
    }
    out.report.final_raw_residual = raw_res;
    return out;
}

} // namespace slag
