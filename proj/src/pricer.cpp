#include "uwarrant/pricer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace uwarrant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* name) {
    if (!std::isfinite(x)) {
        std::ostringstream os;
        os << name << " must be finite";
        throw DomainError(os.str());
    }
}

void validate_point(double v_t, double sigma) {
    require_finite(v_t, "v_t");
    require_finite(sigma, "sigma");
    if (!(v_t > 0.0)) throw DomainError("v_t must be positive");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
}

// Everything the pricing integrand needs, precomputed.
struct PricingSetup {
    double c;         // sigma tau sqrt(3) / pi
    double log_a;     // ln(k v_t e^{mu tau})
    double strike;    // N J
    double discount;  // e^{-r tau}
    double claims;    // N + M k
    double u0;        // logit of the in-the-money boundary
};

PricingSetup make_setup(double v_t, double sigma, const FirmCapitalStructure& cap,
                        const MarketObservables& mkt) {
    PricingSetup s;
    const double tau = mkt.horizon;
    s.c = tail_exponent(sigma, tau);
    s.log_a = std::log(cap.exercise_ratio * v_t) + mkt.drift * tau;
    s.strike = cap.shares * cap.exercise_payment;
    s.discount = std::exp(-mkt.rate * tau);
    s.claims = cap.shares + cap.warrants * cap.exercise_ratio;
    if (s.strike == 0.0) {
        s.u0 = -kInf;  // always in the money
    } else if (s.c == 0.0) {
        s.u0 = std::log(s.strike) < s.log_a ? -kInf : kInf;
    } else {
        s.u0 = (std::log(s.strike) - s.log_a) / s.c;
    }
    return s;
}

void check_convergent(const PricingSetup& s) {
    if (s.c >= 1.0 - 1e-9) {
        std::ostringstream os;
        os << "warrant price diverges: c = sigma (T-t) sqrt(3)/pi = " << s.c << " >= 1";
        throw DivergenceError(os.str(), s.c);
    }
}

}  // namespace

FirmCapitalStructure::FirmCapitalStructure(double shares_, double warrants_, double exercise_ratio_,
                                           double exercise_payment_)
    : shares(shares_), warrants(warrants_), exercise_ratio(exercise_ratio_),
      exercise_payment(exercise_payment_) {
    require_finite(shares, "shares");
    require_finite(warrants, "warrants");
    require_finite(exercise_ratio, "exercise_ratio");
    require_finite(exercise_payment, "exercise_payment");
    if (!(shares > 0.0)) throw DomainError("shares must be positive");
    if (!(warrants >= 0.0)) throw DomainError("warrants must be nonnegative");
    if (!(exercise_ratio > 0.0)) throw DomainError("exercise_ratio must be positive");
    if (!(exercise_payment >= 0.0)) throw DomainError("exercise_payment must be nonnegative");
}

MarketObservables::MarketObservables(double stock_price_, double stock_vol_, double rate_,
                                     double horizon_, double drift_)
    : stock_price(stock_price_), stock_vol(stock_vol_), rate(rate_), horizon(horizon_),
      drift(drift_) {
    require_finite(stock_price, "stock_price");
    require_finite(stock_vol, "stock_vol");
    require_finite(rate, "rate");
    require_finite(horizon, "horizon");
    require_finite(drift, "drift");
    if (!(stock_price > 0.0)) throw DomainError("stock_price must be positive");
    if (!(stock_vol > 0.0)) throw DomainError("stock_vol must be positive");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
}

double warrant_payoff(double v_terminal, const FirmCapitalStructure& cap) {
    require_finite(v_terminal, "v_terminal");
    if (!(v_terminal >= 0.0)) throw DomainError("v_terminal must be nonnegative");
    const double gain = cap.exercise_ratio * v_terminal - cap.shares * cap.exercise_payment;
    if (gain <= 0.0) return 0.0;
    return gain / (cap.shares + cap.warrants * cap.exercise_ratio);
}

double itm_alpha_boundary(double v_t, double sigma, const FirmCapitalStructure& cap,
                          const MarketObservables& mkt) {
    validate_point(v_t, sigma);
    const PricingSetup s = make_setup(v_t, sigma, cap, mkt);
    if (s.u0 == -kInf) return 0.0;
    if (s.u0 == kInf) return 1.0;
    return logistic(s.u0);
}

double price_warrant(double v_t, double sigma, const FirmCapitalStructure& cap,
                     const MarketObservables& mkt, const QuadratureRule& rule) {
    validate_point(v_t, sigma);
    const PricingSetup s = make_setup(v_t, sigma, cap, mkt);
    check_convergent(s);
    if (s.c == 0.0) {
        // Degenerate path: the terminal value is deterministic.  Form the
        // forward directly instead of exp(log_a) to avoid the log round trip.
        const double forward = cap.exercise_ratio * v_t * std::exp(mkt.drift * mkt.horizon);
        const double gain = forward - s.strike;
        return gain > 0.0 ? s.discount * gain / s.claims : 0.0;
    }
    const double integral = integrate_line(
        [&s](double u) {
            return std::exp(s.log_a + s.c * u + log_logistic_weight(u)) -
                   s.strike * logistic_weight(u);
        },
        s.u0, kInf, rule);
    return s.discount * std::max(integral, 0.0) / s.claims;
}

double dfw_dv(double v_t, double sigma, const FirmCapitalStructure& cap,
              const MarketObservables& mkt, const QuadratureRule& rule) {
    validate_point(v_t, sigma);
    const PricingSetup s = make_setup(v_t, sigma, cap, mkt);
    check_convergent(s);
    const double scale = cap.exercise_ratio * std::exp(mkt.drift * mkt.horizon);
    if (s.c == 0.0) return s.u0 == -kInf ? s.discount * scale / s.claims : 0.0;
    const double log_scale = std::log(scale);
    const double integral = integrate_line(
        [&s, log_scale](double u) {
            return std::exp(log_scale + s.c * u + log_logistic_weight(u));
        },
        s.u0, kInf, rule);
    return s.discount * integral / s.claims;
}

double implied_stock_vol(double v_t, double sigma, const FirmCapitalStructure& cap,
                         const MarketObservables& mkt, const QuadratureRule& rule) {
    validate_point(v_t, sigma);
    if (sigma == 0.0) return 0.0;
    const double d = dfw_dv(v_t, sigma, cap, mkt, rule);
    const double stock_share = 1.0 - cap.warrants * d;
    if (!(stock_share > 0.0)) {
        std::ostringstream os;
        os << "stock share of firm-value risk is not positive: 1 - M dfw_dv = " << stock_share
           << " at (v_t = " << v_t << ", sigma = " << sigma << ")";
        throw ConvergenceError(os.str());
    }
    return sigma * (v_t / mkt.stock_price) * stock_share / cap.shares;
}

double elasticity(double v_t, double sigma, const FirmCapitalStructure& cap,
                  const MarketObservables& mkt, const QuadratureRule& rule) {
    validate_point(v_t, sigma);
    if (sigma == 0.0) throw DomainError("elasticity is undefined for sigma = 0");
    return implied_stock_vol(v_t, sigma, cap, mkt, rule) / sigma;
}

}  // namespace uwarrant
