#pragma once

#include <string>

#include "slag/config.hpp"
#include "slag/grid.hpp"
#include "slag/report.hpp"
#include "slag/sweeps.hpp"

namespace slag {

/// u(x1, x2) = -(a/2)|x|^2 + k e^{x1} cos x2 with a = cot t; harmonic up to
/// the quadratic part, so the pseudo-regime equation holds at level zero.
double exp_cos_potential(double x1, double x2, double a, double k);

/// Disconnected-competitor experiment over the thin annulus |x|^2 in
/// [1, 1+eps]: the graph volume collapses to ~ pi eps while the competing
/// pair of disk graphs carries ~ 2 pi + pi eps.
ExperimentReport run_counterexample_annulus(double eps, double eta_amplitude,
                                            int resolution);

/// The explicit pseudo-regime example: Laplacian level, space-likeness,
/// Hessian eigenvalues, transform and injectivity behavior of the projection.
ExperimentReport run_example_sec6(double t, double k, const GridDomain& domain,
                                  int refinements = 3);

/// Volume-maximality harness around a potential solving det D^2 u = c^2:
/// boundary-vanishing competitors never gain volume and the calibration
/// integral stays constant across them.
ExperimentReport run_maximality_test(const ScalarFieldGrid& u, double c,
                                     int num_perturbations, unsigned long long seed,
                                     double gap_tolerance = 1e-3);

/// Scenario drivers keyed by the CLI names; each reads its parameters from
/// the flat config and writes artifacts next to the report.
ExperimentReport run_scenario(const std::string& name, const ScenarioConfig& cfg,
                              const std::string& out_dir);

} // namespace slag
