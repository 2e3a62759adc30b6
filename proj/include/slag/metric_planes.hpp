#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "slag/errors.hpp"

namespace slag {

constexpr double kDefaultTol = 1e-9;

enum class Regime { pseudo, degenerate, euclidean };

std::string to_string(Regime r);

/// Scalar constants derived from the family parameter t in [0, pi/2]:
/// a = cot t, b = sqrt(|cot^2 t - 1|), the sigma/tau pair entering the
/// mixing isometry, and the arctan offset c_t = atan(tau/sigma) - atan(a/b).
/// At t = 0 the cotangent diverges; a and b are stored as +inf and only the
/// regime tag and sigma/tau are meaningful.
struct MetricConstants {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    double c_t = 0.0;
    Regime regime = Regime::pseudo;

    bool finite_ab() const { return std::isfinite(a) && std::isfinite(b); }
};

/// Throws DomainError for t outside [0, pi/2].
MetricConstants metric_constants(double t);

/// Ambient bilinear form on R^n x R^n.
///   dxdy:      (1/2) sum_i (dx_i (x) dy_i + dy_i (x) dx_i), signature (n, n)
///   family(t): cos t * (2 dxdy) + sin t * euclidean
///   euclidean: the flat metric on R^{2n}
class MetricSpec {
public:
    enum class Kind { dxdy, family, euclidean };

    static MetricSpec dxdy() { return MetricSpec(Kind::dxdy, 0.0); }
    static MetricSpec family(double t);
    static MetricSpec euclidean() { return MetricSpec(Kind::euclidean, 0.0); }

    Kind kind() const { return kind_; }
    double t() const { return t_; }

    /// The 2n x 2n symmetric matrix of the form.
    Eigen::MatrixXd matrix(int n) const;

    double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

private:
    MetricSpec(Kind kind, double t) : kind_(kind), t_(t) {}
    Kind kind_;
    double t_;
};

/// An oriented n-plane in R^n x R^n.  Graph representation stores the n x n
/// matrix Q of a plane spanned by xi_i = dx_i + Q_ij dy_j (always projecting
/// with full rank onto the x factor).  Basis representation stores n ordered
/// vectors of R^{2n} as columns.
class TangentPlane {
public:
    static TangentPlane graph(Eigen::MatrixXd q);
    /// `b` is 2n x n, column j = j-th basis vector. Throws on dependent columns.
    static TangentPlane basis(Eigen::MatrixXd b);

    int dim() const { return n_; }
    bool is_graph() const { return is_graph_; }

    /// Graph matrix Q; only valid for graph representation.
    const Eigen::MatrixXd& graph_matrix() const;

    /// 2n x n matrix whose columns span the plane (for graph rep: [I; Q^T]).
    Eigen::MatrixXd basis_matrix() const;

    std::string to_json() const;
    static TangentPlane from_json(const std::string& text);

private:
    TangentPlane(int n, bool graph_rep, Eigen::MatrixXd data)
        : n_(n), is_graph_(graph_rep), data_(std::move(data)) {}
    int n_;
    bool is_graph_;
    Eigen::MatrixXd data_; // Q (n x n) for graph rep, 2n x n basis otherwise
};

/// Gram matrix g(xi_i, xi_j) of the plane's basis under the given metric,
/// always by direct bilinear evaluation.
Eigen::MatrixXd induced_gram(const TangentPlane& plane, const MetricSpec& metric);

/// sqrt(det Gram).  Throws NotSpacelikeError when the Gram matrix is not
/// positive definite (carries its smallest eigenvalue).
double plane_volume(const TangentPlane& plane, const MetricSpec& metric);

bool is_lagrangian(const TangentPlane& plane, double tol = kDefaultTol);

bool is_spacelike(const TangentPlane& plane, const MetricSpec& metric,
                  double tol = kDefaultTol);

/// Value of the n-form (1/2)[c dx_1^...^dx_n + (1/c) dy_1^...^dy_n] on the
/// plane's oriented basis.  For graph planes this is (1/2)(c + det Q / c).
/// The sign is reported as-is; callers interpret non-positive values.
double phi_c(const TangentPlane& plane, double c);

/// Re(e^{-i theta} dz) evaluated on the Euclidean-orthonormalized basis of
/// the plane under R^{2n} ~ C^n.
double alpha_theta(const TangentPlane& plane, double theta);

/// Im(e^{-i theta} dz) on the same orthonormalized basis.
double beta_theta(const TangentPlane& plane, double theta);

struct SymDetBound {
    double det_q = 0.0;
    double det_sym = 0.0;
    double gap = 0.0; // det_q - det_sym, nonnegative for positive Q
};

/// det(Q) vs det((Q+Q^T)/2) for a matrix with positive definite symmetric
/// part (throws DomainError otherwise).
SymDetBound sym_det_bound(const Eigen::MatrixXd& q);

/// Expansion of det Q grouped by the number of symmetric-part eigenvalues in
/// each term, computed in the eigenbasis of (Q+Q^T)/2.  Returns [P_0..P_n]
/// with sum = det Q, P_{n-1} = 0 and P_k >= 0 for k < n.  Supports n <= 6.
std::vector<double> pk_decomposition(const Eigen::MatrixXd& q);

struct PseudoPhase {
    double det_a = 0.0; // x-factor determinant of the orthonormalized basis
    double det_b = 0.0; // y-factor determinant; det_a * det_b = 1
};

/// The point on the pseudo-circle {(s, t) : st = 1, t > 0} classifying a
/// space-like Lagrangian plane under dxdy.  Orientation-reversed input bases
/// are canonicalized onto the t > 0 component.
PseudoPhase pseudo_phase(const TangentPlane& plane, double tol = kDefaultTol);

/// Basis orthonormalization under a metric that is positive definite on the
/// plane (modified Gram-Schmidt, pivoting on the largest remaining norm).
/// Returns a 2n x n matrix of orthonormal columns spanning the same plane,
/// with the orientation of the input basis.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& basis, const MetricSpec& metric);

} // namespace slag
