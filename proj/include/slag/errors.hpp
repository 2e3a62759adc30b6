#pragma once

#include <stdexcept>
#include <string>

namespace slag {

/// Parameter or precondition violation (bad t, inadmissible eigenvalue, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A plane or graph node failed the space-like test. Carries the smallest
/// eigenvalue of the induced Gram matrix that triggered the rejection.
class NotSpacelikeError : public DomainError {
public:
    NotSpacelikeError(const std::string& what, double min_eigenvalue)
        : DomainError(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

/// Principal-branch arctan identity crossed a pole; the caller has to add
/// the signed pi correction carried here.
class BranchCrossingError : public DomainError {
public:
    BranchCrossingError(const std::string& what, double pi_correction)
        : DomainError(what), pi_correction_(pi_correction) {}
    double pi_correction() const { return pi_correction_; }

private:
    double pi_correction_;
};

/// Internal consistency failure (should not happen on valid inputs).
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace slag
