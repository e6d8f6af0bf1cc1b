#pragma once

#include <stdexcept>
#include <string>

namespace robinshape {

/// Raised when an iterative method hits its iteration cap or a root bracket
/// cannot be established. Carries the last residual for reporting.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A field or mask that breaks its structural invariants.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace robinshape
