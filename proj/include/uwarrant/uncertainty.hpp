#pragma once

#include <functional>

#include "uwarrant/quadrature.hpp"

namespace uwarrant {

// Normal uncertain variable N(e, sigma) with distribution
//   Phi(x) = (1 + exp(pi (e - x) / (sqrt(3) sigma)))^{-1}.
struct NormalUncertainVariable {
    NormalUncertainVariable(double location, double scale);

    double location;  // e
    double scale;     // sigma > 0
};

// Phi(x) for the given variable; strictly increasing, values in (0, 1).
[[nodiscard]] double normal_distribution(const NormalUncertainVariable& v, double x);

// Inverse of the standard N(0,1) distribution:
//   Phi^{-1}(alpha) = (sqrt(3) / pi) ln(alpha / (1 - alpha)),  alpha in (0, 1).
[[nodiscard]] double inv_std_normal(double alpha);

// Phi^{-1} of N(e, sigma): e + sigma * inv_std_normal(alpha).
[[nodiscard]] double inv_normal(const NormalUncertainVariable& v, double alpha);

// A quantile (inverse distribution) function on (0,1).  eval_logit, when set,
// must equal eval(1/(1+e^{-u})) and is what the integrator uses; it is the
// only way to resolve power-law tails at alpha -> 1 (see quadrature.hpp).
struct QuantileFunction {
    std::function<double(double)> eval;
    std::function<double(double)> eval_logit;
};

// Quantile function of a normal uncertain variable, both representations.
[[nodiscard]] QuantileFunction quantile_of(const NormalUncertainVariable& v);

// E[xi] = integral of the quantile function over (0,1).
[[nodiscard]] double expected_value_from_quantile(const QuantileFunction& q,
                                                  const QuadratureRule& rule = {});

// Tail hints for the distribution-form expectation.
struct DistributionTails {
    double initial_cutoff = 1.0;  // first truncation radius; doubled as needed
};

// E[xi] = int_0^inf (1 - F(x)) dx - int_{-inf}^0 F(x) dx for a distribution
// function F.  Truncation cutoffs double until the added tail contribution
// falls below tolerance; failure to decay raises IntegrationError.
[[nodiscard]] double expected_value_from_distribution(const std::function<double(double)>& dist,
                                                      const DistributionTails& tails = {},
                                                      const QuadratureRule& rule = {});

}  // namespace uwarrant
