#pragma once

#include <vector>

#include "slag/errors.hpp"
#include "slag/metric_planes.hpp"

namespace slag {

/// Hessian eigenvalues; every operation below is symmetric in the entries.
using EigenList = std::vector<double>;

/// One member of the operator family: parameter t, right-hand-side level c
/// (in the textbook normalization of raw_value below), derived constants.
struct FamilyPoint {
    double t = 0.0;
    double c = 0.0;
    MetricConstants constants;
};

FamilyPoint make_family_point(double t, double c);

/// Admissibility margin: log arguments and denominators under this absolute
/// size are treated as domain errors rather than evaluated.
constexpr double kAdmissibilityMargin = 1e-14;

namespace family {

/// Induced-metric weight sin t (1 + lambda^2) + 2 cos t lambda.  Positive on
/// space-like directions; this is the reciprocal of the operator gradient.
double gram_weight(double lambda, double t);

bool admissible(double lambda, double t);
void require_admissible(const EigenList& lambdas, double t);

/// Textbook left-hand side of the equation for the given regime:
///   t = 0:            sum ln(lambda_i)
///   t in (0, pi/4):   sum ln((lambda_i + a - b)/(lambda_i + a + b))
///   t = pi/4:         sum 1/(1 + lambda_i)
///   t in (pi/4,pi/2): sum arctan((lambda_i + a - b)/(lambda_i + a + b))
///   t = pi/2:         sum arctan(lambda_i)
double raw_value(const EigenList& lambdas, double t);

/// Rescaled operator with the same level sets whose gradient is exactly
/// 1/gram_weight in every regime (and which is therefore monotone and
/// elliptic on the space-like cone, including at t = pi/4 where the
/// textbook form decreases).  raw_value = normalizer * value up to the
/// branch offsets of the euclidean arctan regime.
double value(const EigenList& lambdas, double t);

/// Scale factor between raw_value and value: 2 at t = 0, 2 b sin t on the
/// pseudo range, -sqrt(2)/2 at t = pi/4, b sin t on the euclidean range.
double normalizer(double t);

/// Offset such that raw_value = normalizer * value + offset on the principal
/// branch (all eigenvalues above -(a+b)); zero outside (pi/4, pi/2).
double principal_offset(double t, int n);

std::vector<double> gradient(const EigenList& lambdas, double t);

} // namespace family

/// The rescaled operator (gradient exactly the inverse gram weights).
double f_t(const EigenList& lambdas, const FamilyPoint& point);

/// Exact gradient entries 1/(sin t (1 + lambda_i^2) + 2 cos t lambda_i).
std::vector<double> f_t_gradient(const EigenList& lambdas, const FamilyPoint& point);

/// Moebius action on a Hessian eigenvalue under the mixing isometry:
/// lambda -> (tau + sigma lambda)/(sigma + tau lambda).  Pole at -sigma/tau.
double eigenvalue_transform(double lambda, const MetricConstants& constants);

/// arctan((lambda+a)/b) + C_t - arctan((tau+sigma lambda)/(sigma+tau lambda)).
/// Zero to ~1e-15 on the principal branch sigma + tau lambda > 0; throws
/// BranchCrossingError (carrying the +-pi correction) past the pole.
double ct_identity_residual(double lambda, const MetricConstants& constants);

/// (lambda + a)/b, the eigenvalue action of passing to v = u/b + (a/2b)|x|^2.
double v_transform(double lambda, const MetricConstants& constants);

struct RegimeClassification {
    bool spacelike = false; // all gram weights positive
    bool convex = false;    // all eigenvalues below -a
    bool concave = false;   // all eigenvalues above -a
};

RegimeClassification classify_regime(const EigenList& lambdas, const FamilyPoint& point);

/// One probe of the t -> pi/4 degeneration: how well the pseudo-regime
/// equation matches its first-order expansion around the rational form.
struct QuarterPiSample {
    double t = 0.0;
    double b = 0.0;
    double scaled_mismatch = 0.0; // |raw - n ln(a-b) - kappa (sum 1/(1+l) - n/2)| / |kappa|
};

struct QuarterPiRecord {
    std::vector<QuarterPiSample> samples;
    bool pole = false;      // an eigenvalue sits at the -1 pole
    bool converged = false; // mismatches decay towards pi/4
};

/// kappa(t) = -2b, fixed by a series-expansion oracle in the tests.
double quarter_pi_kappa(double t);

/// t_sequence must approach pi/4 from below.
QuarterPiRecord limit_quarter_pi_check(const EigenList& lambdas,
                                       const std::vector<double>& t_sequence);

} // namespace slag
