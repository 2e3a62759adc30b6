#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slag/equation_family.hpp"
#include "slag/grid.hpp"

namespace slag {

/// Dirichlet trace on the boundary nodes of a rectangular 2D grid.
class BoundaryData {
public:
    BoundaryData() = default;
    static BoundaryData from_function(const GridDomain& domain,
                                      const std::function<double(double, double)>& g);
    /// Restriction of an existing field to its boundary nodes.
    static BoundaryData trace_of(const ScalarFieldGrid& u);

    const GridDomain& domain() const { return domain_; }
    double at(int i, int j) const;

    /// CSV: grid header line, then one value per boundary node, row-major.
    void write_csv(const std::string& path) const;
    static BoundaryData read_csv(const std::string& path);

private:
    GridDomain domain_;
    std::vector<double> values_; // boundary nodes in row-major node order
    std::vector<long> offsets_;  // node index -> position in values_, else -1
    void build_index();
};

enum class InitialGuessPolicy { quadratic_fit, from_grid };

struct SolverConfig {
    int max_iterations = 50;
    double tolerance = 1e-10;   // sup norm of the operator residual
    int max_halvings = 30;      // backtracking depth, factor 1/2
    InitialGuessPolicy guess = InitialGuessPolicy::quadratic_fit;
    std::optional<ScalarFieldGrid> initial_guess;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history; // sup norms, includes initial
    double final_residual = 0.0;
    double final_raw_residual = 0.0; // textbook-form residual for family solves
    int spacelike_nodes = 0;
    int convex_nodes = 0;
    int concave_nodes = 0;
    int interior_nodes = 0;
};

struct SolveResult {
    ScalarFieldGrid u;
    SolveReport report;
};

/// 5-point Dirichlet solve of Lap u = -2 a_coeff on a rectangle.
SolveResult solve_poisson(const GridDomain& domain, double a_coeff,
                          const BoundaryData& bc);

/// Damped Newton for det(D^2 u) = c^2 with a convexity-preserving line
/// search.  Throws DomainError("left elliptic branch ...") when no step
/// keeps every nodal Hessian positive definite, and a non-convergence
/// error carrying the last residual otherwise.
SolveResult solve_monge_ampere(const GridDomain& domain, double c,
                               const BoundaryData& bc, const SolverConfig& cfg = {});

/// Damped Newton for the family equation at parameter t and textbook level c,
/// with a space-like-preserving line search.  For t in (pi/4, pi/2) the level
/// refers to the principal branch of the arctan sum.
SolveResult solve_family(const GridDomain& domain, double t, double c,
                         const BoundaryData& bc, const SolverConfig& cfg = {});

/// Least-squares quadratic fit to boundary values (the default initial guess).
ScalarFieldGrid quadratic_fit(const BoundaryData& bc);

} // namespace slag
