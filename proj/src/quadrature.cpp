#include "uwarrant/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace uwarrant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 16-point Gauss-Legendre abscissae/weights on [-1, 1], positive half.
constexpr int kGlHalf = 8;
constexpr double kGlNode[kGlHalf] = {
    0.095012509837637440185, 0.28160355077925891323, 0.45801677765722738634,
    0.61787624440264374845,  0.75540440835500303390, 0.86563120238783174388,
    0.94457502307323257608,  0.98940093499164993260,
};
constexpr double kGlWeight[kGlHalf] = {
    0.18945061045506849629,  0.18260341504492358887,  0.16915651939500253819,
    0.14959598881657673208,  0.12462897125553387205,  0.095158511682492784810,
    0.062253523938647892863, 0.027152459411754094852,
};

struct NodeBudget {
    std::size_t left;

    void spend(std::size_t n, double where) {
        if (n > left) {
            std::ostringstream os;
            os << "quadrature node budget exhausted near u = " << where;
            throw IntegrationError(os.str(), where);
        }
        left -= n;
    }
};

double gl16_panel(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double terms[2 * kGlHalf];
    for (int i = 0; i < kGlHalf; ++i) {
        terms[2 * i] = kGlWeight[i] * f(mid - half * kGlNode[i]);
        terms[2 * i + 1] = kGlWeight[i] * f(mid + half * kGlNode[i]);
    }
    const double s = pairwise_sum(terms, 2 * kGlHalf);
    if (!std::isfinite(s)) {
        std::ostringstream os;
        os << "integrand is not finite on [" << a << ", " << b << "]";
        throw IntegrationError(os.str(), mid);
    }
    return half * s;
}

double composite_gl16(const std::function<double(double)>& f, double a, double b,
                      std::size_t panels, NodeBudget& budget) {
    budget.spend(panels * 2 * kGlHalf, a);
    std::vector<double> parts(panels);
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
        const double pa = a + width * static_cast<double>(i);
        const double pb = (i + 1 == panels) ? b : a + width * static_cast<double>(i + 1);
        parts[i] = gl16_panel(f, pa, pb);
    }
    return pairwise_sum(parts.data(), panels);
}

// One window refined by panel doubling until two successive levels agree.
double integrate_window(const std::function<double(double)>& f, double a, double b,
                        const QuadratureRule& rule, double running_total, NodeBudget& budget) {
    std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / 2.0)));
    double prev = composite_gl16(f, a, b, panels, budget);
    for (;;) {
        panels *= 2;
        const double cur = composite_gl16(f, a, b, panels, budget);
        const double scale = std::max(std::abs(cur), std::abs(running_total));
        if (std::abs(cur - prev) <= std::max(rule.abs_tol, rule.rel_tol * scale) / 8.0) return cur;
        prev = cur;
    }
}

// Geometric breakpoint ladder 0, 2, 4, 8, 16, ...
double ladder(int k) { return k <= 0 ? 0.0 : std::ldexp(1.0, k); }

class Accumulator {
public:
    void add(double x) {
        // Neumaier compensation; deterministic for a fixed add() order.
        const double t = sum_ + x;
        comp_ += (std::abs(sum_) >= std::abs(x)) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

double logistic(double u) noexcept {
    if (u >= 0.0) {
        const double t = std::exp(-u);
        return 1.0 / (1.0 + t);
    }
    const double t = std::exp(u);
    return t / (1.0 + t);
}

double logistic_weight(double u) noexcept {
    const double t = std::exp(-std::abs(u));
    const double d = 1.0 + t;
    return t / (d * d);
}

double log_logistic_weight(double u) noexcept {
    return -std::abs(u) - 2.0 * std::log1p(std::exp(-std::abs(u)));
}

double logit(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("logit: alpha must lie in [0, 1]");
    if (alpha == 0.0) return -kInf;
    if (alpha == 1.0) return kInf;
    return std::log(alpha / (1.0 - alpha));
}

double pairwise_sum(const double* v, std::size_t n) noexcept {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double integrate_line(const std::function<double(double)>& f, double lo, double hi,
                      const QuadratureRule& rule) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw DomainError("integrate_line: invalid interval");
    }
    if (lo == hi) return 0.0;

    NodeBudget budget{rule.max_nodes};
    Accumulator total;
    std::vector<double> window_values;

    const auto stop_tol = [&] {
        return std::max(rule.abs_tol, rule.rel_tol * std::abs(total.value())) / 8.0;
    };

    // Sweep one side of the ladder; dir = +1 covers [max(lo,0), hi),
    // dir = -1 covers (lo, min(hi,0)] mirrored.
    const auto sweep = [&](int dir) {
        double prev_mag = kInf;
        int strikes = 0;
        for (int k = 0;; ++k) {
            double a = dir > 0 ? ladder(k) : -ladder(k + 1);
            double b = dir > 0 ? ladder(k + 1) : -ladder(k);
            a = std::max(a, lo);
            b = std::min(b, hi);
            if (a >= b) {
                if ((dir > 0 && ladder(k) >= hi) || (dir < 0 && -ladder(k) <= lo)) break;
                continue;
            }
            const double w = integrate_window(f, a, b, rule, total.value(), budget);
            if (!std::isfinite(w)) {
                throw IntegrationError(
                    "integrate_line: integrand is not finite; the integral does not converge",
                    dir > 0 ? a : b);
            }
            total.add(w);
            window_values.push_back(w);
            const bool open_ended = dir > 0 ? (b < hi) : (a > lo);
            if (!open_ended) break;
            if (ladder(k + 1) >= 8.0) {
                const double mag = std::abs(w);
                if (mag > prev_mag) {
                    // A slow-decaying tail can outgrow a few doubling windows
                    // before its turnover, so demand sustained growth before
                    // declaring divergence.
                    if (++strikes >= 20) {
                        throw IntegrationError(
                            "integrate_line: tail contributions keep growing; the integral "
                            "does not converge",
                            dir > 0 ? b : a);
                    }
                } else {
                    strikes = 0;
                    if (mag < stop_tol()) break;  // tail decayed below tolerance
                }
                prev_mag = mag;
            }
        }
    };

    if (hi > 0.0) sweep(+1);
    if (lo < 0.0) sweep(-1);

    // Recombine the accepted windows pairwise in a fixed order.
    return pairwise_sum(window_values.data(), window_values.size());
}

double integrate_quantile(const std::function<double(double)>& q, const QuadratureRule& rule,
                          double alpha_lo, double alpha_hi,
                          const std::function<double(double)>* q_logit) {
    if (!(alpha_lo >= 0.0 && alpha_hi <= 1.0 && alpha_lo <= alpha_hi)) {
        throw DomainError("integrate_quantile: need 0 <= alpha_lo <= alpha_hi <= 1");
    }
    const double u_lo = alpha_lo == 0.0 ? -kInf : logit(alpha_lo);
    const double u_hi = alpha_hi == 1.0 ? kInf : logit(alpha_hi);

    if (q_logit != nullptr && *q_logit) {
        const auto& ql = *q_logit;
        return integrate_line([&](double u) { return ql(u) * logistic_weight(u); }, u_lo, u_hi,
                              rule);
    }
    // Keep the argument strictly inside (0,1); beyond |u| ~ 37 the rounding of
    // alpha saturates, which is harmless only for quantile functions that grow
    // at most polynomially in u (see header).
    constexpr double kAlphaMax = 1.0 - 1.1102230246251565e-16;
    constexpr double kAlphaMin = 1.1102230246251565e-16;
    return integrate_line(
        [&](double u) {
            const double a = std::min(kAlphaMax, std::max(kAlphaMin, logistic(u)));
            return q(a) * logistic_weight(u);
        },
        u_lo, u_hi, rule);
}

double integrate_quantile_clipped(const std::function<double(double)>& q, double clip_eps,
                                  const QuadratureRule& rule) {
    if (!(clip_eps > 0.0 && clip_eps < 0.5)) {
        throw DomainError("integrate_quantile_clipped: clip_eps must lie in (0, 0.5)");
    }
    NodeBudget budget{rule.max_nodes};
    const double a = clip_eps, b = 1.0 - clip_eps;
    std::size_t panels = 64;
    double prev = composite_gl16(q, a, b, panels, budget);
    for (;;) {
        panels *= 2;
        const double cur = composite_gl16(q, a, b, panels, budget);
        if (std::abs(cur - prev) <= std::max(rule.abs_tol, rule.rel_tol * std::abs(cur))) {
            return cur;
        }
        prev = cur;
    }
}

}  // namespace uwarrant
