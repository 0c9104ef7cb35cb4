#include "uwarrant/uncertainty.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

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

}  // namespace

NormalUncertainVariable::NormalUncertainVariable(double location_, double scale_)
    : location(location_), scale(scale_) {
    require_finite(location, "location");
    require_finite(scale, "scale");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
}

double normal_distribution(const NormalUncertainVariable& v, double x) {
    require_finite(x, "x");
    // logistic((x - e) * pi / (sqrt(3) sigma)), overflow-safe.
    return logistic((x - v.location) / (kSqrt3OverPi * v.scale));
}

double inv_std_normal(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("inv_std_normal: alpha must lie in (0, 1)");
    }
    return kSqrt3OverPi * std::log(alpha / (1.0 - alpha));
}

double inv_normal(const NormalUncertainVariable& v, double alpha) {
    return v.location + v.scale * inv_std_normal(alpha);
}

QuantileFunction quantile_of(const NormalUncertainVariable& v) {
    const double e = v.location, s = v.scale;
    return QuantileFunction{
        [e, s](double alpha) { return e + s * inv_std_normal(alpha); },
        [e, s](double u) { return e + s * kSqrt3OverPi * u; },
    };
}

double expected_value_from_quantile(const QuantileFunction& q, const QuadratureRule& rule) {
    if (!q.eval && !q.eval_logit) {
        throw DomainError("expected_value_from_quantile: empty quantile function");
    }
    const std::function<double(double)>* ql = q.eval_logit ? &q.eval_logit : nullptr;
    if (!q.eval) {
        // logit-only: synthesize the alpha form for the shared entry point.
        const auto& f = q.eval_logit;
        return integrate_quantile([&f](double a) { return f(logit(a)); }, rule, 0.0, 1.0, ql);
    }
    return integrate_quantile(q.eval, rule, 0.0, 1.0, ql);
}

double expected_value_from_distribution(const std::function<double(double)>& dist,
                                        const DistributionTails& tails,
                                        const QuadratureRule& rule) {
    if (!dist) throw DomainError("expected_value_from_distribution: empty distribution");
    const double s = tails.initial_cutoff;
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError("initial_cutoff must be positive and finite");
    }
    // x = s * y so the geometric windows start at the hinted scale.
    const double upper = integrate_line([&](double y) { return (1.0 - dist(s * y)) * s; }, 0.0,
                                        std::numeric_limits<double>::infinity(), rule);
    const double lower = integrate_line([&](double y) { return dist(s * y) * s; },
                                        -std::numeric_limits<double>::infinity(), 0.0, rule);
    return upper - lower;
}

}  // namespace uwarrant
