#pragma once

#include <cstddef>
#include <functional>

#include "uwarrant/errors.hpp"

namespace uwarrant {

// Accuracy budget shared by all integral evaluations.
struct QuadratureRule {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_nodes = std::size_t{1} << 20;
};

// alpha = 1 / (1 + e^{-u}) and its derivative, overflow-safe.
[[nodiscard]] double logistic(double u) noexcept;
[[nodiscard]] double logistic_weight(double u) noexcept;        // alpha * (1 - alpha)
[[nodiscard]] double log_logistic_weight(double u) noexcept;    // ln(alpha * (1 - alpha))
[[nodiscard]] double logit(double alpha);                       // ln(alpha / (1 - alpha))

// Deterministic pairwise sum in index order; the result is independent of how
// the terms were produced.
[[nodiscard]] double pairwise_sum(const double* v, std::size_t n) noexcept;

// Integrate f over [lo, hi]; either bound may be infinite.  The axis is
// covered with geometric windows ([0,2], [2,4], [4,8], ... and mirrored);
// each window uses composite 16-point Gauss-Legendre panels doubled until the
// window converges, and open-ended tails extend until their contribution
// drops below tolerance.  Node contributions combine via pairwise summation.
// Throws IntegrationError when the node budget is exhausted, the integrand
// turns non-finite, or a tail fails to decay.
[[nodiscard]] double integrate_line(const std::function<double(double)>& f, double lo, double hi,
                                    const QuadratureRule& rule);

// Integral of q over a subinterval of (0,1) via the substitution
// alpha = 1/(1+e^{-u}), which turns endpoint log singularities into smooth
// exponentially weighted tails.  If q_logit is non-null it is used as
// q(alpha(u)) evaluated directly in u; quantile functions with power-law
// behavior at alpha -> 1 need it, because alpha values within one ulp of 1
// cannot represent the upper tail.
[[nodiscard]] double integrate_quantile(const std::function<double(double)>& q,
                                        const QuadratureRule& rule, double alpha_lo = 0.0,
                                        double alpha_hi = 1.0,
                                        const std::function<double(double)>* q_logit = nullptr);

// Cross-check backend: plain composite panels on [eps, 1-eps], no change of
// variables.  Inherits the clipping error of order eps^{1-c} near power-law
// endpoints, so it is only suitable for bounded quantile functions.
[[nodiscard]] double integrate_quantile_clipped(const std::function<double(double)>& q,
                                                double clip_eps, const QuadratureRule& rule);

}  // namespace uwarrant
