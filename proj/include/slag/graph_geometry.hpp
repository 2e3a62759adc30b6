#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "slag/grid.hpp"
#include "slag/metric_planes.hpp"

namespace slag {

/// Symmetric n x n matrices at every node of the interior (margin 1);
/// boundary entries are zero-filled and flagged invalid.
class HessianField {
public:
    HessianField(GridDomain domain, int margin);

    const GridDomain& domain() const { return domain_; }
    int margin() const { return margin_; }
    bool valid(int i, int j, int k = 0) const {
        return domain_.is_interior(i, j, k, margin_);
    }
    Eigen::MatrixXd& at(int i, int j, int k = 0) {
        return data_[static_cast<size_t>(domain_.index(i, j, k))];
    }
    const Eigen::MatrixXd& at(int i, int j, int k = 0) const {
        return data_[static_cast<size_t>(domain_.index(i, j, k))];
    }

private:
    GridDomain domain_;
    int margin_;
    std::vector<Eigen::MatrixXd> data_;
};

/// Second-order central-difference Hessian of a potential, exact on
/// quadratics.  Valid on the margin-1 interior.
HessianField hessian_field(const ScalarFieldGrid& u);

/// Volume of the graph (x, F(x)) over the (optionally masked) domain under
/// the given ambient metric.  Midpoint quadrature at cell centers with the
/// staggered cell derivative of F; masked cells weighted by coverage.
/// Throws NotSpacelikeError (with the cell location) when the induced Gram
/// is not positive definite at a contributing cell.
double graph_volume(const VectorFieldGrid& f, const MetricSpec& metric);

/// Measure of the (masked) domain by the same cell-coverage quadrature.
double domain_measure(const GridDomain& domain);

/// |grad_h F^t(D^2 u)| per node: the composed scalar is differentiated, so
/// eigenvalue crossings never enter.  Values live on the margin-2 interior;
/// everything else is zero.  The record also reports the measure of the
/// excluded boundary band.
struct MeanCurvatureResidual {
    ScalarFieldGrid field;
    double max_residual = 0.0;
    double excluded_band_measure = 0.0;
};

MeanCurvatureResidual mean_curvature_residual(const ScalarFieldGrid& u, double t);

/// Integral of det(DF) over the domain with the staggered cell-center
/// derivative.  In 2D each cell contributes exactly the signed area of the
/// image of its corners, so the sum depends only on boundary node values.
double null_lagrangian_integral(const VectorFieldGrid& f);

/// (1/2) (c |Omega| + (1/c) integral det DF); an upper bound for
/// graph_volume under dxdy on space-like graphs with positive orientation.
double calibration_integral(const VectorFieldGrid& f, double c);

/// Tangent plane of the graph of F with the staggered derivative at the
/// center of cell (i, j[, k]); for tests and diagnostics.
Eigen::MatrixXd staggered_jacobian(const VectorFieldGrid& f, int i, int j, int k = 0);

} // namespace slag
