#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "slag/report.hpp"

namespace slag {

using Rng = std::mt19937_64;

/// Random matrix with symmetric-part eigenvalues in [0.3, 3] and an
/// antisymmetric part of the requested Frobenius scale.
Eigen::MatrixXd random_positive_q(Rng& rng, int n, double antisym_scale);

/// Random symmetric positive definite matrix, eigenvalues in [0.3, 3].
Eigen::MatrixXd random_spd(Rng& rng, int n);

/// Named property suites: lemma31, calibration, transform, ct-identity,
/// limit-quarter-pi.  Throws DomainError on an unknown suite id.
ExperimentReport run_property_sweeps(const std::string& suite, long trials,
                                     unsigned long long seed);

} // namespace slag
