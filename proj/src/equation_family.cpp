#include "slag/equation_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slag {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;

[[noreturn]] void inadmissible(double lambda, const char* why) {
    throw DomainError("inadmissible eigenvalue " + std::to_string(lambda) + ": " + why);
}

} // namespace

FamilyPoint make_family_point(double t, double c) {
    FamilyPoint p;
    p.t = t;
    p.c = c;
    p.constants = metric_constants(t);
    return p;
}

namespace family {

double gram_weight(double lambda, double t) {
    return std::sin(t) * (1.0 + lambda * lambda) + 2.0 * std::cos(t) * lambda;
}

bool admissible(double lambda, double t) {
    if (!std::isfinite(lambda)) {
        return false;
    }
    if (t == 0.0) {
        return lambda >= kAdmissibilityMargin;
    }
    if (t < kQuarterPi) {
        const MetricConstants mc = metric_constants(t);
        const double lo = lambda + mc.a - mc.b;
        const double hi = lambda + mc.a + mc.b;
        return std::abs(lo) >= kAdmissibilityMargin &&
               std::abs(hi) >= kAdmissibilityMargin && lo * hi > 0.0;
    }
    if (t == kQuarterPi) {
        return std::abs(1.0 + lambda) >= kAdmissibilityMargin;
    }
    return true; // euclidean regime: no restriction
}

void require_admissible(const EigenList& lambdas, double t) {
    metric_constants(t); // validates t range
    for (double l : lambdas) {
        if (!admissible(l, t)) {
            if (t == 0.0) {
                inadmissible(l, "log argument not positive");
            } else if (t == kQuarterPi) {
                inadmissible(l, "pole at lambda = -1");
            } else {
                inadmissible(l, "log-ratio argument not positive");
            }
        }
    }
}

double raw_value(const EigenList& lambdas, double t) {
    require_admissible(lambdas, t);
    const MetricConstants mc = metric_constants(t);
    double sum = 0.0;
    if (t == 0.0) {
        for (double l : lambdas) sum += std::log(l);
    } else if (t < kQuarterPi) {
        for (double l : lambdas) sum += std::log((l + mc.a - mc.b) / (l + mc.a + mc.b));
    } else if (t == kQuarterPi) {
        for (double l : lambdas) sum += 1.0 / (1.0 + l);
    } else if (t < kHalfPi) {
        for (double l : lambdas) sum += std::atan((l + mc.a - mc.b) / (l + mc.a + mc.b));
    } else {
        for (double l : lambdas) sum += std::atan(l);
    }
    return sum;
}

double normalizer(double t) {
    metric_constants(t);
    if (t == 0.0) {
        return 2.0;
    }
    const double c2 = std::cos(2.0 * t);
    if (t < kQuarterPi) {
        return 2.0 * std::sqrt(c2); // = 2 b sin t
    }
    if (t == kQuarterPi) {
        return -std::sqrt(0.5);
    }
    return std::sqrt(-c2); // = b sin t
}

double principal_offset(double t, int n) {
    if (t > kQuarterPi && t < kHalfPi) {
        return -n * kQuarterPi;
    }
    return 0.0;
}

double value(const EigenList& lambdas, double t) {
    require_admissible(lambdas, t);
    const MetricConstants mc = metric_constants(t);
    if (t == kQuarterPi) {
        double sum = 0.0;
        for (double l : lambdas) sum += 1.0 / (1.0 + l);
        return -std::sqrt(2.0) * sum;
    }
    if (t > kQuarterPi && t < kHalfPi) {
        // Smooth antiderivative of the gradient across the whole real line;
        // differs from raw_value by the per-eigenvalue branch offsets.
        double sum = 0.0;
        for (double l : lambdas) sum += std::atan((l + mc.a) / mc.b);
        return sum / normalizer(t);
    }
    return raw_value(lambdas, t) / normalizer(t);
}

std::vector<double> gradient(const EigenList& lambdas, double t) {
    require_admissible(lambdas, t);
    std::vector<double> g(lambdas.size());
    for (size_t i = 0; i < lambdas.size(); ++i) {
        const double den = gram_weight(lambdas[i], t);
        if (std::abs(den) < kAdmissibilityMargin) {
            throw NotSpacelikeError("degenerate metric direction at eigenvalue " +
                                        std::to_string(lambdas[i]),
                                    den);
        }
        g[i] = 1.0 / den;
    }
    return g;
}

} // namespace family

double f_t(const EigenList& lambdas, const FamilyPoint& point) {
    return family::value(lambdas, point.t);
}

std::vector<double> f_t_gradient(const EigenList& lambdas, const FamilyPoint& point) {
    return family::gradient(lambdas, point.t);
}

double eigenvalue_transform(double lambda, const MetricConstants& constants) {
    const double den = constants.sigma + constants.tau * lambda;
    if (std::abs(den) < kAdmissibilityMargin * (1.0 + std::abs(lambda))) {
        throw DomainError("eigenvalue_transform: pole at lambda = -sigma/tau");
    }
    return (constants.tau + constants.sigma * lambda) / den;
}

double ct_identity_residual(double lambda, const MetricConstants& constants) {
    if (!(constants.t > kQuarterPi && constants.t <= kHalfPi)) {
        throw DomainError("ct_identity_residual needs t in (pi/4, pi/2]");
    }
    const double den = constants.sigma + constants.tau * lambda;
    if (den < kAdmissibilityMargin * (1.0 + std::abs(lambda))) {
        throw BranchCrossingError(
            "ct identity left the principal branch (sigma + tau lambda <= 0)",
            den < 0.0 ? kPi : -kPi);
    }
    const double lhs = std::atan((lambda + constants.a) / constants.b) + constants.c_t;
    const double rhs = std::atan((constants.tau + constants.sigma * lambda) / den);
    return lhs - rhs;
}

double v_transform(double lambda, const MetricConstants& constants) {
    if (!(std::isfinite(constants.b)) || constants.b == 0.0) {
        throw DomainError("v_transform undefined at b = 0 (t = pi/4)");
    }
    return (lambda + constants.a) / constants.b;
}

RegimeClassification classify_regime(const EigenList& lambdas, const FamilyPoint& point) {
    RegimeClassification rc;
    if (lambdas.empty()) {
        return rc;
    }
    rc.spacelike = true;
    rc.convex = true;
    rc.concave = true;
    for (double l : lambdas) {
        if (!(family::gram_weight(l, point.t) > 0.0)) {
            rc.spacelike = false;
        }
        if (!(l < -point.constants.a)) {
            rc.convex = false;
        }
        if (!(l > -point.constants.a)) {
            rc.concave = false;
        }
    }
    return rc;
}

double quarter_pi_kappa(double t) {
    return -2.0 * metric_constants(t).b;
}

QuarterPiRecord limit_quarter_pi_check(const EigenList& lambdas,
                                       const std::vector<double>& t_sequence) {
    QuarterPiRecord rec;
    for (double l : lambdas) {
        if (std::abs(1.0 + l) < 1e-8) {
            rec.pole = true;
            return rec;
        }
    }
    const int n = static_cast<int>(lambdas.size());
    double rational = 0.0;
    for (double l : lambdas) rational += 1.0 / (1.0 + l);

    for (double t : t_sequence) {
        if (!(t > 0.0 && t < kQuarterPi)) {
            throw DomainError("limit_quarter_pi_check: t sequence must approach "
                              "pi/4 from below");
        }
        family::require_admissible(lambdas, t);
        const MetricConstants mc = metric_constants(t);
        const double kappa = quarter_pi_kappa(t);
        const double raw = family::raw_value(lambdas, t);
        const double model = n * std::log(mc.a - mc.b) + kappa * (rational - 0.5 * n);
        QuarterPiSample s;
        s.t = t;
        s.b = mc.b;
        s.scaled_mismatch = std::abs(raw - model) / std::abs(kappa);
        rec.samples.push_back(s);
    }
    if (rec.samples.size() >= 2) {
        // The remainder coefficient can cross zero at an isolated b, so the
        // finest sample is judged against the peak mismatch, not the first.
        double peak = 0.0;
        double finest_b = std::numeric_limits<double>::infinity();
        double finest = 0.0;
        for (const QuarterPiSample& s : rec.samples) {
            peak = std::max(peak, s.scaled_mismatch);
            if (s.b < finest_b) {
                finest_b = s.b;
                finest = s.scaled_mismatch;
            }
        }
        rec.converged = finest <= 0.25 * peak + 1e-12;
    }
    return rec;
}

} // namespace slag
