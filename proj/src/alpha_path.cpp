#include "uwarrant/alpha_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "uwarrant/uncertainty.hpp"

namespace uwarrant {

namespace {

constexpr double kSqrt3OverPi = std::numbers::sqrt3 / std::numbers::pi;

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << name << " must be finite";
        throw DomainError(os.str());
    }
}

// RK4 core with the diffusion term frozen at shift = inv_std_normal(alpha).
// Keeping shift as the parameter lets callers work in logit space directly.
AlphaPath rk4_path(const UdeSpec& ude, double x0, double t_end, double alpha, double shift,
                   std::size_t steps) {
    if (!ude.drift || !ude.diffusion) throw DomainError("solve_alpha_path: drift and diffusion required");
    require_finite(x0, "x0");
    require_finite(t_end, "t_end");
    if (!(t_end > 0.0)) throw DomainError("solve_alpha_path: t_end must be positive");
    if (steps == 0) throw DomainError("solve_alpha_path: steps must be positive");

    const auto rhs = [&](double t, double x) {
        return ude.drift(t, x) + std::abs(ude.diffusion(t, x)) * shift;
    };

    AlphaPath path;
    path.alpha = alpha;
    path.times.resize(steps + 1);
    path.values.resize(steps + 1);
    const double h = t_end / static_cast<double>(steps);
    double x = x0;
    path.times[0] = 0.0;
    path.values[0] = x0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = h * static_cast<double>(i);
        const double k1 = rhs(t, x);
        const double k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        const double k4 = rhs(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(x)) {
            std::ostringstream os;
            os << "alpha-path integration left the finite range at t = " << t + h;
            throw IntegrationError(os.str(), t + h);
        }
        path.times[i + 1] = (i + 1 == steps) ? t_end : h * static_cast<double>(i + 1);
        path.values[i + 1] = x;
    }
    return path;
}

void validate_levels(const std::vector<double>& levels) {
    if (levels.empty()) throw DomainError("alpha levels must not be empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
            throw DomainError("alpha levels must lie in (0, 1)");
        }
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw DomainError("alpha levels must be strictly increasing");
        }
    }
}

// Static index partition; each worker owns a contiguous slice, so the stored
// results never depend on scheduling.
void parallel_over(std::size_t n, unsigned max_threads, const std::function<void(std::size_t)>& work) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned want = max_threads == 0 ? hw : std::min(max_threads, hw);
    want = static_cast<unsigned>(std::min<std::size_t>(want, n));
    if (want <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(want);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < want; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / want, hi = n * (w + 1) / want;
            try {
                for (std::size_t i = lo; i < hi; ++i) work(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

GeometricLiuSpec::GeometricLiuSpec(double v0_, double mu_, double sigma_)
    : v0(v0_), mu(mu_), sigma(sigma_) {
    require_finite(v0, "v0");
    require_finite(mu, "mu");
    require_finite(sigma, "sigma");
    if (!(v0 > 0.0)) throw DomainError("v0 must be positive");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
}

double tail_exponent(double sigma, double t) {
    require_finite(sigma, "sigma");
    require_finite(t, "t");
    return sigma * t * kSqrt3OverPi;
}

double gbm_alpha_path(const GeometricLiuSpec& spec, double t, double alpha) {
    require_finite(t, "t");
    if (!(t >= 0.0)) throw DomainError("gbm_alpha_path: t must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("gbm_alpha_path: alpha must lie in (0, 1)");
    return spec.v0 * std::exp(spec.mu * t + spec.sigma * t * inv_std_normal(alpha));
}

AlphaPath solve_alpha_path(const UdeSpec& ude, double x0, double t_end, double alpha,
                           std::size_t steps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("solve_alpha_path: alpha must lie in (0, 1)");
    return rk4_path(ude, x0, t_end, alpha, inv_std_normal(alpha), steps);
}

AlphaPathFamily gbm_alpha_path_family(const GeometricLiuSpec& spec, std::vector<double> times,
                                      std::vector<double> levels, unsigned max_threads) {
    validate_levels(levels);
    if (times.empty()) throw DomainError("time grid must not be empty");
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!(times[j] >= 0.0) || !std::isfinite(times[j])) {
            throw DomainError("grid times must be nonnegative and finite");
        }
        if (j > 0 && !(times[j] > times[j - 1])) {
            throw DomainError("grid times must be strictly increasing");
        }
    }
    AlphaPathFamily family;
    family.levels = std::move(levels);
    family.times = std::move(times);
    family.values.assign(family.levels.size(), {});
    parallel_over(family.levels.size(), max_threads, [&](std::size_t i) {
        std::vector<double> row(family.times.size());
        for (std::size_t j = 0; j < family.times.size(); ++j) {
            row[j] = gbm_alpha_path(spec, family.times[j], family.levels[i]);
        }
        family.values[i] = std::move(row);
    });
    return family;
}

AlphaPathFamily solve_alpha_path_family(const UdeSpec& ude, double x0, double t_end,
                                        std::size_t steps, std::vector<double> levels,
                                        unsigned max_threads) {
    validate_levels(levels);
    AlphaPathFamily family;
    family.levels = std::move(levels);
    family.values.assign(family.levels.size(), {});
    // Shared grid comes from the first solve; all solves use the same steps.
    AlphaPath first = solve_alpha_path(ude, x0, t_end, family.levels[0], steps);
    family.times = std::move(first.times);
    family.values[0] = std::move(first.values);
    parallel_over(family.levels.size() - 1, max_threads, [&](std::size_t i) {
        family.values[i + 1] = solve_alpha_path(ude, x0, t_end, family.levels[i + 1], steps).values;
    });
    return family;
}

double inverse_distribution_at(const AlphaPathFamily& family, double t, double alpha) {
    if (family.levels.empty() || family.times.empty()) throw DomainError("empty alpha-path family");
    require_finite(t, "t");
    require_finite(alpha, "alpha");

    const auto it = std::lower_bound(family.times.begin(), family.times.end(),
                                     t - 1e-12 * std::max(1.0, std::abs(t)));
    if (it == family.times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "t = " << t << " is not a grid time of the family";
        throw DomainError(os.str());
    }
    const std::size_t j = static_cast<std::size_t>(it - family.times.begin());

    const auto& lv = family.levels;
    if (alpha < lv.front() || alpha > lv.back()) {
        std::ostringstream os;
        os << "alpha = " << alpha << " lies outside the level hull [" << lv.front() << ", "
           << lv.back() << "]";
        throw DomainError(os.str());
    }
    const auto hi = std::lower_bound(lv.begin(), lv.end(), alpha);
    const std::size_t i1 = static_cast<std::size_t>(hi - lv.begin());
    if (lv[i1] == alpha) return family.values[i1][j];
    const std::size_t i0 = i1 - 1;
    const double w = (alpha - lv[i0]) / (lv[i1] - lv[i0]);
    return family.values[i0][j] + w * (family.values[i1][j] - family.values[i0][j]);
}

double expected_monotone_functional(const GeometricLiuSpec& spec, double t,
                                    const std::function<double(double)>& functional,
                                    const QuadratureRule& rule) {
    if (!functional) throw DomainError("expected_monotone_functional: empty functional");
    require_finite(t, "t");
    if (!(t > 0.0)) throw DomainError("expected_monotone_functional: t must be positive");
    const double c = tail_exponent(spec.sigma, t);
    const double base = std::log(spec.v0) + spec.mu * t;
    try {
        // Path value straight from u; alpha never materializes, so the upper
        // tail keeps full precision.
        return integrate_line(
            [&](double u) { return functional(std::exp(base + c * u)) * logistic_weight(u); },
            -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            rule);
    } catch (const IntegrationError& e) {
        std::ostringstream os;
        os << e.what() << " (c = sigma t sqrt(3)/pi = " << c << ")";
        throw IntegrationError(os.str(), e.failing_time());
    }
}

double expected_monotone_functional(const UdeSpec& ude, double x0, double t,
                                    const std::function<double(double)>& functional,
                                    std::size_t steps, const QuadratureRule& rule) {
    if (!functional) throw DomainError("expected_monotone_functional: empty functional");
    return integrate_line(
        [&](double u) {
            const AlphaPath p = rk4_path(ude, x0, t, logistic(u), kSqrt3OverPi * u, steps);
            return functional(p.values.back()) * logistic_weight(u);
        },
        -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), rule);
}

double expected_terminal_value(const GeometricLiuSpec& spec, double t, const QuadratureRule& rule) {
    require_finite(t, "t");
    if (!(t > 0.0)) throw DomainError("expected_terminal_value: t must be positive");
    const double c = tail_exponent(spec.sigma, t);
    if (c >= 1.0 - 1e-9) {
        std::ostringstream os;
        os << "E[V_t] diverges: c = sigma t sqrt(3)/pi = " << c << " >= 1";
        throw DivergenceError(os.str(), c);
    }
    // Identity functional in log space; stable for c arbitrarily close to 1.
    const double base = std::log(spec.v0) + spec.mu * t;
    return integrate_line(
        [&](double u) { return std::exp(base + c * u + log_logistic_weight(u)); },
        -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), rule);
}

}  // namespace uwarrant
