#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "uwarrant/quadrature.hpp"

namespace uwarrant {

// Geometric Liu process V_t = v0 * exp(mu t + sigma C_t) driven by a
// canonical Liu process C.
struct GeometricLiuSpec {
    GeometricLiuSpec(double v0, double mu, double sigma);

    double v0;     // > 0
    double mu;     // log drift per year
    double sigma;  // log diffusion per year, >= 0
};

// General uncertain differential equation dX = f(t, X) dt + g(t, X) dC.
struct UdeSpec {
    std::function<double(double, double)> drift;      // f(t, x)
    std::function<double(double, double)> diffusion;  // g(t, x)
};

// c = sigma * t * sqrt(3) / pi.  E[exp(sigma C_t)] is finite iff c < 1.
[[nodiscard]] double tail_exponent(double sigma, double t);

// Closed-form alpha-path of the geometric Liu process:
//   v0 * exp(mu t + sigma t (sqrt(3)/pi) ln(alpha / (1 - alpha))).
[[nodiscard]] double gbm_alpha_path(const GeometricLiuSpec& spec, double t, double alpha);

struct AlphaPath {
    double alpha = 0.0;
    std::vector<double> times;
    std::vector<double> values;
};

// alpha-path of a general UDE: classical fixed-step RK4 applied to
//   x' = f(t, x) + |g(t, x)| * inv_std_normal(alpha).
// Throws IntegrationError (with the failing time) if the state leaves the
// finite range.
[[nodiscard]] AlphaPath solve_alpha_path(const UdeSpec& ude, double x0, double t_end, double alpha,
                                         std::size_t steps = 10000);

// Paths for several alpha levels on a shared time grid; values[i][j] belongs
// to levels[i] at times[j].
struct AlphaPathFamily {
    std::vector<double> levels;  // strictly increasing, inside (0,1)
    std::vector<double> times;   // strictly increasing from 0
    std::vector<std::vector<double>> values;
};

// max_threads = 0 means "use the hardware default"; levels are computed
// independently, so the result is identical for any thread count.
[[nodiscard]] AlphaPathFamily gbm_alpha_path_family(const GeometricLiuSpec& spec,
                                                    std::vector<double> times,
                                                    std::vector<double> levels,
                                                    unsigned max_threads = 0);
[[nodiscard]] AlphaPathFamily solve_alpha_path_family(const UdeSpec& ude, double x0, double t_end,
                                                      std::size_t steps, std::vector<double> levels,
                                                      unsigned max_threads = 0);

// Inverse uncertainty distribution of X_t read from a family: exact at grid
// levels, monotone piecewise-linear between neighbouring levels, DomainError
// outside the level hull.  t must match one of the family's grid times.
[[nodiscard]] double inverse_distribution_at(const AlphaPathFamily& family, double t, double alpha);

// E[I(X_t)] for a monotone functional I, integrated along the alpha-paths.
// Divergent integrals surface as IntegrationError; for the geometric spec the
// message carries c = sigma t sqrt(3)/pi.
[[nodiscard]] double expected_monotone_functional(const GeometricLiuSpec& spec, double t,
                                                  const std::function<double(double)>& functional,
                                                  const QuadratureRule& rule = {});
[[nodiscard]] double expected_monotone_functional(const UdeSpec& ude, double x0, double t,
                                                  const std::function<double(double)>& functional,
                                                  std::size_t steps, const QuadratureRule& rule = {});

// E[V_t] of the geometric Liu process (identity functional), with the
// analytic divergence guard: DivergenceError when c >= 1 - 1e-9.
[[nodiscard]] double expected_terminal_value(const GeometricLiuSpec& spec, double t,
                                             const QuadratureRule& rule = {});

}  // namespace uwarrant
