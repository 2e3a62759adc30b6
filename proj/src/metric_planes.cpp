#include "slag/metric_planes.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>

#include <json.hpp>

namespace slag {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_range_t(double t) {
    if (!(t >= 0.0 && t <= kPi / 2.0)) {
        throw DomainError("family parameter t must lie in [0, pi/2], got " +
                          std::to_string(t));
    }
}

} // namespace

std::string to_string(Regime r) {
    switch (r) {
    case Regime::pseudo: return "pseudo";
    case Regime::degenerate: return "degenerate";
    case Regime::euclidean: return "euclidean";
    }
    return "?";
}

MetricConstants metric_constants(double t) {
    require_range_t(t);
    MetricConstants mc;
    mc.t = t;

    const double ct = std::cos(t);
    const double st = std::sin(t);

    if (t == 0.0) {
        mc.a = std::numeric_limits<double>::infinity();
        mc.b = std::numeric_limits<double>::infinity();
    } else if (t == kPi / 4.0) {
        mc.a = 1.0;
        mc.b = 0.0;
    } else if (t == kPi / 2.0) {
        mc.a = 0.0;
        mc.b = 1.0;
    } else {
        mc.a = ct / st;
        mc.b = std::sqrt(std::abs(mc.a * mc.a - 1.0));
    }

    // sigma/tau from the half-angle-style displays; sigma >= tau >= 0.
    const double sum = std::sqrt(std::max(0.0, ct + st));
    const double dif = std::sqrt(std::abs(ct - st));
    mc.sigma = 0.5 * (sum + dif);
    mc.tau = 0.5 * (sum - dif);

    if (t < kPi / 4.0) {
        mc.regime = Regime::pseudo;
    } else if (t > kPi / 4.0) {
        mc.regime = Regime::euclidean;
    } else {
        mc.regime = Regime::degenerate;
    }

    // atan2 handles the b = 0 and a = inf endpoints.
    mc.c_t = std::atan2(mc.tau, mc.sigma) - std::atan2(mc.a, mc.b);
    return mc;
}

MetricSpec MetricSpec::family(double t) {
    require_range_t(t);
    return MetricSpec(Kind::family, t);
}

Eigen::MatrixXd MetricSpec::matrix(int n) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    switch (kind_) {
    case Kind::dxdy:
        g.block(0, n, n, n) = 0.5 * Eigen::MatrixXd::Identity(n, n);
        g.block(n, 0, n, n) = 0.5 * Eigen::MatrixXd::Identity(n, n);
        break;
    case Kind::euclidean:
        g.setIdentity();
        break;
    case Kind::family: {
        const double c = std::cos(t_);
        const double s = std::sin(t_);
        g.setIdentity();
        g *= s;
        g.block(0, n, n, n) += c * Eigen::MatrixXd::Identity(n, n);
        g.block(n, 0, n, n) += c * Eigen::MatrixXd::Identity(n, n);
        break;
    }
    }
    return g;
}

double MetricSpec::bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    const int n2 = static_cast<int>(u.size());
    if (v.size() != n2 || n2 % 2 != 0) {
        throw DomainError("bilinear: vectors must share an even dimension");
    }
    const int n = n2 / 2;
    const auto ux = u.head(n);
    const auto uy = u.tail(n);
    const auto vx = v.head(n);
    const auto vy = v.tail(n);
    switch (kind_) {
    case Kind::dxdy:
        return 0.5 * (ux.dot(vy) + uy.dot(vx));
    case Kind::euclidean:
        return u.dot(v);
    case Kind::family:
        return std::cos(t_) * (ux.dot(vy) + uy.dot(vx)) + std::sin(t_) * u.dot(v);
    }
    return 0.0;
}

TangentPlane TangentPlane::graph(Eigen::MatrixXd q) {
    if (q.rows() != q.cols() || q.rows() < 1) {
        throw DomainError("graph plane needs a square matrix");
    }
    if (!q.allFinite()) {
        throw DomainError("graph plane matrix has non-finite entries");
    }
    const int n = static_cast<int>(q.rows());
    return TangentPlane(n, true, std::move(q));
}

TangentPlane TangentPlane::basis(Eigen::MatrixXd b) {
    const int n = static_cast<int>(b.cols());
    if (n < 1 || b.rows() != 2 * n) {
        throw DomainError("basis plane needs a 2n x n matrix of column vectors");
    }
    if (!b.allFinite()) {
        throw DomainError("basis plane has non-finite entries");
    }
    // Independence under the auxiliary Euclidean metric.
    Eigen::MatrixXd gram = b.transpose() * b;
    double scale = gram.diagonal().maxCoeff();
    if (!(scale > 0.0) || std::abs(gram.determinant()) < 1e-12 * std::pow(scale, n)) {
        throw DomainError("basis vectors are linearly dependent");
    }
    return TangentPlane(n, false, std::move(b));
}

const Eigen::MatrixXd& TangentPlane::graph_matrix() const {
    if (!is_graph_) {
        throw DomainError("plane is not in graph representation");
    }
    return data_;
}

Eigen::MatrixXd TangentPlane::basis_matrix() const {
    if (!is_graph_) {
        return data_;
    }
    Eigen::MatrixXd b(2 * n_, n_);
    b.topRows(n_) = Eigen::MatrixXd::Identity(n_, n_);
    b.bottomRows(n_) = data_.transpose(); // column i carries row i of Q
    return b;
}

std::string TangentPlane::to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["rep"] = is_graph_ ? "graph" : "basis";
    std::vector<double> data;
    data.reserve(static_cast<size_t>(data_.size()));
    for (int r = 0; r < data_.rows(); ++r) {
        for (int c = 0; c < data_.cols(); ++c) {
            data.push_back(data_(r, c));
        }
    }
    j["data"] = data;
    return j.dump();
}

TangentPlane TangentPlane::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const std::string rep = j.at("rep").get<std::string>();
    const std::vector<double> data = j.at("data").get<std::vector<double>>();
    const int rows = rep == "graph" ? n : 2 * n;
    if (static_cast<int>(data.size()) != rows * n) {
        throw DomainError("plane json: data length mismatch");
    }
    Eigen::MatrixXd m(rows, n);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < n; ++c) {
            m(r, c) = data[static_cast<size_t>(r * n + c)];
        }
    }
    return rep == "graph" ? graph(std::move(m)) : basis(std::move(m));
}

Eigen::MatrixXd induced_gram(const TangentPlane& plane, const MetricSpec& metric) {
    const Eigen::MatrixXd b = plane.basis_matrix();
    const int n = plane.dim();
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            g(i, j) = metric.bilinear(b.col(i), b.col(j));
            g(j, i) = g(i, j);
        }
    }
    return g;
}

double plane_volume(const TangentPlane& plane, const MetricSpec& metric) {
    const Eigen::MatrixXd g = induced_gram(plane, metric);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const double min_eig = es.eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) {
        throw NotSpacelikeError("plane is not space-like (Gram min eigenvalue " +
                                    std::to_string(min_eig) + ")",
                                min_eig);
    }
    return std::sqrt(es.eigenvalues().prod());
}

bool is_lagrangian(const TangentPlane& plane, double tol) {
    if (plane.is_graph()) {
        const Eigen::MatrixXd& q = plane.graph_matrix();
        return (q - q.transpose()).cwiseAbs().maxCoeff() <= tol;
    }
    // Standard symplectic form on unit-scaled basis vectors.
    const int n = plane.dim();
    Eigen::MatrixXd b = plane.basis_matrix();
    for (int j = 0; j < n; ++j) {
        b.col(j).normalize();
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double omega = b.col(i).head(n).dot(b.col(j).tail(n)) -
                                 b.col(i).tail(n).dot(b.col(j).head(n));
            if (std::abs(omega) > tol) {
                return false;
            }
        }
    }
    return true;
}

bool is_spacelike(const TangentPlane& plane, const MetricSpec& metric, double tol) {
    const Eigen::MatrixXd g = induced_gram(plane, metric);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    return es.eigenvalues().minCoeff() > tol;
}

double phi_c(const TangentPlane& plane, double c) {
    if (!(c > 0.0)) {
        throw DomainError("phi_c requires c > 0");
    }
    if (plane.is_graph()) {
        return 0.5 * (c + plane.graph_matrix().determinant() / c);
    }
    const int n = plane.dim();
    const Eigen::MatrixXd b = plane.basis_matrix();
    const double dx = b.topRows(n).determinant();
    const double dy = b.bottomRows(n).determinant();
    return 0.5 * (c * dx + dy / c);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& basis, const MetricSpec& metric) {
    const int n = static_cast<int>(basis.cols());
    Eigen::MatrixXd v = basis;
    std::vector<int> order(static_cast<size_t>(n));
    int sign = 1;

    for (int k = 0; k < n; ++k) {
        // Pivot on the vector with largest remaining induced norm.
        int best = k;
        double best_norm2 = -std::numeric_limits<double>::infinity();
        for (int j = k; j < n; ++j) {
            const double norm2 = metric.bilinear(v.col(j), v.col(j));
            if (norm2 > best_norm2) {
                best_norm2 = norm2;
                best = j;
            }
        }
        if (best != k) {
            v.col(k).swap(v.col(best));
            sign = -sign;
        }
        if (!(best_norm2 > 0.0)) {
            throw NotSpacelikeError(
                "orthonormalize: induced metric not positive on plane", best_norm2);
        }
        v.col(k) /= std::sqrt(best_norm2);
        for (int j = k + 1; j < n; ++j) {
            v.col(j) -= metric.bilinear(v.col(k), v.col(j)) * v.col(k);
        }
    }
    if (sign < 0) {
        v.col(n - 1) *= -1.0; // restore the input orientation
    }
    return v;
}

namespace {

std::complex<double> complex_det_of_basis(const Eigen::MatrixXd& onb) {
    const int n = static_cast<int>(onb.cols());
    Eigen::MatrixXcd a(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            a(i, j) = std::complex<double>(onb(i, j), onb(n + i, j));
        }
    }
    return a.determinant();
}

} // namespace

double alpha_theta(const TangentPlane& plane, double theta) {
    const Eigen::MatrixXd onb = orthonormalize(plane.basis_matrix(), MetricSpec::euclidean());
    const std::complex<double> dz = complex_det_of_basis(onb);
    return (std::exp(std::complex<double>(0.0, -theta)) * dz).real();
}

double beta_theta(const TangentPlane& plane, double theta) {
    const Eigen::MatrixXd onb = orthonormalize(plane.basis_matrix(), MetricSpec::euclidean());
    const std::complex<double> dz = complex_det_of_basis(onb);
    return (std::exp(std::complex<double>(0.0, -theta)) * dz).imag();
}

namespace {

void require_positive_sym_part(const Eigen::MatrixXd& q) {
    const Eigen::MatrixXd s = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
        throw DomainError("matrix does not satisfy x^T Q x > 0 (symmetric part "
                          "min eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
}

} // namespace

SymDetBound sym_det_bound(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) {
        throw DomainError("sym_det_bound needs a square matrix");
    }
    require_positive_sym_part(q);
    SymDetBound out;
    out.det_q = q.determinant();
    out.det_sym = (0.5 * (q + q.transpose())).determinant();
    out.gap = out.det_q - out.det_sym;
    return out;
}

std::vector<double> pk_decomposition(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) {
        throw DomainError("pk_decomposition needs a square matrix");
    }
    const int n = static_cast<int>(q.rows());
    if (n > 6) {
        throw DomainError("pk_decomposition supports n <= 6");
    }
    require_positive_sym_part(q);

    const Eigen::MatrixXd s = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd r = es.eigenvectors();
    const Eigen::MatrixXd a = r.transpose() * (0.5 * (q - q.transpose())) * r;

    // det(diag(lam) + a) = sum over index subsets T of
    //   prod_{i in T} lam_i * det(a restricted to the complement of T).
    std::vector<double> pk(static_cast<size_t>(n) + 1, 0.0);
    const unsigned full = 1u << n;
    for (unsigned mask = 0; mask < full; ++mask) {
        int k = 0;
        double lam_prod = 1.0;
        std::vector<int> rest;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                ++k;
                lam_prod *= lam(i);
            } else {
                rest.push_back(i);
            }
        }
        double minor_det = 1.0;
        if (!rest.empty()) {
            Eigen::MatrixXd sub(rest.size(), rest.size());
            for (size_t i = 0; i < rest.size(); ++i) {
                for (size_t j = 0; j < rest.size(); ++j) {
                    sub(static_cast<int>(i), static_cast<int>(j)) = a(rest[i], rest[j]);
                }
            }
            minor_det = sub.determinant();
        }
        pk[static_cast<size_t>(k)] += lam_prod * minor_det;
    }
    return pk;
}

PseudoPhase pseudo_phase(const TangentPlane& plane, double tol) {
    if (!is_lagrangian(plane, tol)) {
        throw DomainError("pseudo_phase requires a Lagrangian plane");
    }
    const MetricSpec m = MetricSpec::dxdy();
    if (!is_spacelike(plane, m, tol)) {
        throw NotSpacelikeError("pseudo_phase requires a space-like plane",
                                induced_gram(plane, m).eigenvalues().real().minCoeff());
    }
    Eigen::MatrixXd onb = orthonormalize(plane.basis_matrix(), m);
    const int n = plane.dim();
    double det_a = onb.topRows(n).determinant();
    double det_b = onb.bottomRows(n).determinant();
    if (det_b < 0.0) {
        // Reversed orientation; flip one basis vector onto the t > 0 component.
        det_a = -det_a;
        det_b = -det_b;
    }
    return PseudoPhase{det_a, det_b};
}

} // namespace slag
