#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace uwarrant {

// Base class for every failure the library reports.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// An argument fell outside its documented domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what_arg) : Error(what_arg) {}
};

// A quadrature or ODE evaluation could not produce a finite, converged result
// within its node budget.  For ODE failures failing_time() reports where the
// state stopped being finite.
class IntegrationError : public Error {
public:
    explicit IntegrationError(const std::string& what_arg,
                              double failing_time = std::numeric_limits<double>::quiet_NaN())
        : Error(what_arg), failing_time_(failing_time) {}

    [[nodiscard]] double failing_time() const noexcept { return failing_time_; }

private:
    double failing_time_;
};

// An expectation or price whose quantile integral does not converge.
// tail_exponent() reports c = sigma * t * sqrt(3) / pi; the integral is
// finite only for c < 1.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what_arg, double tail_exponent)
        : Error(what_arg), tail_exponent_(tail_exponent) {}

    [[nodiscard]] double tail_exponent() const noexcept { return tail_exponent_; }

private:
    double tail_exponent_;
};

// An iterative solver ran out of iterations or the target is unreachable.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what_arg) : Error(what_arg) {}
};

}  // namespace uwarrant
