#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slag/errors.hpp"

namespace slag {

/// Circular/annular integration mask: keep points with |x|^2 in [r2min, r2max].
/// A disk is r2min = 0.  Only meaningful for n = 2 domains.
struct AnnulusMask {
    double r2min = 0.0;
    double r2max = 1.0;

    bool contains(double x, double y) const {
        const double r2 = x * x + y * y;
        return r2 >= r2min && r2 <= r2max;
    }
};

/// Uniform node-centered rectangular grid over a box in R^n, n = 2 or 3.
/// Nodes include the boundary; spacing is (hi - lo)/(res - 1) per axis.
class GridDomain {
public:
    GridDomain() = default;
    GridDomain(int n, std::array<double, 3> lo, std::array<double, 3> hi,
               std::array<int, 3> resolution);

    static GridDomain square(double lo, double hi, int res);
    static GridDomain rect2(double lox, double hix, double loy, double hiy,
                            int resx, int resy);
    static GridDomain cube(double lo, double hi, int res);

    int dim() const { return n_; }
    int res(int axis) const { return res_[static_cast<size_t>(axis)]; }
    double lo(int axis) const { return lo_[static_cast<size_t>(axis)]; }
    double hi(int axis) const { return hi_[static_cast<size_t>(axis)]; }
    double spacing(int axis) const { return h_[static_cast<size_t>(axis)]; }
    double max_spacing() const;

    long node_count() const;
    double coord(int axis, int index) const {
        return lo_[static_cast<size_t>(axis)] + h_[static_cast<size_t>(axis)] * index;
    }

    /// Row-major flattening; last axis fastest.
    long index(int i, int j, int k = 0) const;
    bool is_boundary(int i, int j, int k = 0) const;

    /// True when the node is at least `margin` nodes away from every face.
    bool is_interior(int i, int j, int k, int margin) const;

    const std::optional<AnnulusMask>& mask() const { return mask_; }
    void set_mask(AnnulusMask m) { mask_ = m; }
    void clear_mask() { mask_.reset(); }

    bool operator==(const GridDomain& other) const;

private:
    int n_ = 2;
    std::array<double, 3> lo_{};
    std::array<double, 3> hi_{};
    std::array<int, 3> res_{};
    std::array<double, 3> h_{};
    std::optional<AnnulusMask> mask_;
};

/// Scalar samples u(x) at every grid node.
class ScalarFieldGrid {
public:
    ScalarFieldGrid() = default;
    explicit ScalarFieldGrid(GridDomain domain);

    const GridDomain& domain() const { return domain_; }
    double& at(int i, int j, int k = 0) { return values_[static_cast<size_t>(domain_.index(i, j, k))]; }
    double at(int i, int j, int k = 0) const { return values_[static_cast<size_t>(domain_.index(i, j, k))]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Sample an analytic function over every node (2D callable).
    static ScalarFieldGrid sample2(const GridDomain& domain,
                                   const std::function<double(double, double)>& f);
    static ScalarFieldGrid sample3(
        const GridDomain& domain,
        const std::function<double(double, double, double)>& f);

    double max_abs() const;

    void write_csv(const std::string& path) const;
    static ScalarFieldGrid read_csv(const std::string& path);
    void write_json(const std::string& path) const;
    static ScalarFieldGrid read_json(const std::string& path);
    /// Dispatch on extension (.csv / .json).
    static ScalarFieldGrid read(const std::string& path);

private:
    GridDomain domain_;
    std::vector<double> values_;
};

/// Shared header line of the grid file formats:
/// `# n=<n> res=<r1,r2> bounds=<lo1:hi1,lo2:hi2> mask=<none|annulus:a,b>`
std::string grid_header_line(const GridDomain& d);
GridDomain parse_grid_header(const std::string& line);

/// R^n-valued samples F(x) at every grid node (n components per node).
class VectorFieldGrid {
public:
    VectorFieldGrid() = default;
    explicit VectorFieldGrid(GridDomain domain);

    const GridDomain& domain() const { return domain_; }
    double& at(int i, int j, int comp) {
        return values_[static_cast<size_t>(domain_.index(i, j) * domain_.dim() + comp)];
    }
    double at(int i, int j, int comp) const {
        return values_[static_cast<size_t>(domain_.index(i, j) * domain_.dim() + comp)];
    }
    double& at3(int i, int j, int k, int comp) {
        return values_[static_cast<size_t>(domain_.index(i, j, k) * domain_.dim() + comp)];
    }
    double at3(int i, int j, int k, int comp) const {
        return values_[static_cast<size_t>(domain_.index(i, j, k) * domain_.dim() + comp)];
    }
    const std::vector<double>& values() const { return values_; }

    static VectorFieldGrid sample2(
        const GridDomain& domain,
        const std::function<std::array<double, 2>(double, double)>& f);
    static VectorFieldGrid sample3(
        const GridDomain& domain,
        const std::function<std::array<double, 3>(double, double, double)>& f);

    /// Nodewise gradient graph of a potential (central differences in the
    /// interior, second-order one-sided stencils on the faces).
    static VectorFieldGrid gradient_of(const ScalarFieldGrid& u);

    void write_csv(const std::string& path) const;
    static VectorFieldGrid read_csv(const std::string& path);

private:
    GridDomain domain_;
    std::vector<double> values_;
};

} // namespace slag
