#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "slag/graph_geometry.hpp"
#include "slag/grid.hpp"
#include "slag/metric_planes.hpp"

namespace slag {

/// Image of a gradient graph under the coordinate-mixing isometry
/// (x, y) -> (sigma x + tau y, tau x + sigma y).  Samples live at the
/// margin-1 interior nodes of the source grid.
struct TransformedGraph {
    GridDomain source_domain;
    MetricConstants constants;
    double kappa = 1.0; // measured conformal factor of the pullback
    std::vector<Eigen::VectorXd> samples; // points of R^{2n}
    std::vector<std::array<int, 2>> source_nodes;

    /// CSV columns x_1..x_n,y_1..y_n plus a JSON sidecar carrying t, kappa
    /// and the source grid header.
    void write_csv(const std::string& csv_path, const std::string& sidecar_path) const;
};

/// Push the gradient graph of u through the mixing isometry.  The target
/// metric is the pseudo one for t < pi/4 and the euclidean one for t > pi/4;
/// kappa is measured from induced Grams on sampled tangent planes and must
/// be constant across samples to 1e-8 relative.
TransformedGraph apply_phi_t(const ScalarFieldGrid& u, double t);

struct ProjectionRecord {
    VectorFieldGrid p;            // sigma x + tau grad u at every node
    HessianField dp;              // sigma I + tau D^2 u on the margin-1 interior
    double min_sym_eigenvalue = 0.0;
    bool uniformly_positive = false;
};

ProjectionRecord projection_p(const ScalarFieldGrid& u, double t);

struct CollisionWitness {
    std::array<double, 2> x1{};
    std::array<double, 2> x2{};
    double image_distance = 0.0;
    double source_distance = 0.0;
};

struct InjectivityVerdict {
    bool injective = false;
    std::string certificate; // "monotone map" or "no collision found"
    std::optional<CollisionWitness> collision;
    double collision_tolerance = 0.0;
    double separation_floor = 0.0;
};

/// Search the image field for two far-apart source points with nearly equal
/// images.  A uniformly positive Dp (when supplied) short-circuits to a
/// monotonicity certificate.  Candidate node pairs from a spatial hash are
/// refined by Gauss-Newton on the bilinear interpolant of p, so genuine
/// crossings are resolved well below node spacing.
InjectivityVerdict injectivity_check(const VectorFieldGrid& p,
                                     const HessianField* dp = nullptr);

struct HatPotential {
    ScalarFieldGrid u_hat;         // reconstructed potential on the image grid
    GridDomain target_domain;
    std::vector<bool> valid;       // target nodes with a located preimage
    double path_residual = 0.0;    // max |x-then-y minus y-then-x| integral gap
    double max_dr_asymmetry = 0.0; // antisymmetry of the resampled Jacobian
};

/// Invert x_hat = sigma x + tau grad u(x) on a rectangular grid covering the
/// image and integrate r = q o p^{-1} to the transformed potential, fixed to
/// zero at the target grid's center node.  Requires Dp uniformly positive
/// definite.  target_res = 0 keeps the source resolution.
HatPotential reconstruct_hat_potential(const ScalarFieldGrid& u, double t,
                                       int target_res = 0);

struct DegenerateVolumes {
    double direct = 0.0;          // metric volume over the graph, kappa-normalized
    double boundary_integral = 0.0; // flux form over the image of the boundary
    double kappa = 1.0;           // measured proportionality of the projection metric
    double tolerance = 0.0;       // 5 h perimeter max|last coordinate|
};

/// Volume of the graph of F in the degenerate middle metric, computed both
/// directly and as a boundary integral of the projected flux form.  Requires
/// det(I + DF) bounded away from zero at every interior node.
DegenerateVolumes degenerate_projection_volume(const VectorFieldGrid& f);

} // namespace slag
