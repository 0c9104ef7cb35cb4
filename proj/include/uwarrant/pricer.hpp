#pragma once

#include <utility>
#include <vector>

#include "uwarrant/alpha_path.hpp"

namespace uwarrant {

// Issuer capital structure: N shares outstanding and M warrants, each warrant
// converting into k new shares against a payment J at expiry.
struct FirmCapitalStructure {
    FirmCapitalStructure(double shares, double warrants, double exercise_ratio,
                         double exercise_payment);

    double shares;            // N > 0
    double warrants;          // M >= 0
    double exercise_ratio;    // k > 0
    double exercise_payment;  // J >= 0
};

// Observable market state.  Vols and rates are annualized decimals; the
// horizon T - t is in years.
struct MarketObservables {
    MarketObservables(double stock_price, double stock_vol, double rate, double horizon,
                      double drift);

    double stock_price;  // S_t > 0
    double stock_vol;    // sigma_s > 0
    double rate;         // r, continuously compounded
    double horizon;      // T - t > 0
    double drift;        // mu, firm-value log drift
};

// Dilution-adjusted exercise value (k v - N J)^+ / (N + M k).
[[nodiscard]] double warrant_payoff(double v_terminal, const FirmCapitalStructure& cap);

// Distribution level alpha0 at which the terminal firm-value alpha-path
// crosses the exercise threshold N J / k; the payoff is positive exactly on
// (alpha0, 1).  Returns 0 when the warrant always finishes in the money and
// 1 when it never does (possible only for sigma = 0).
[[nodiscard]] double itm_alpha_boundary(double v_t, double sigma, const FirmCapitalStructure& cap,
                                        const MarketObservables& mkt);

// Warrant price: e^{-r(T-t)} times the quantile integral of the exercise
// value along the firm-value alpha-paths, split at alpha0 so the integrand is
// smooth.  Throws DivergenceError when c = sigma (T-t) sqrt(3)/pi >= 1 - 1e-9.
[[nodiscard]] double price_warrant(double v_t, double sigma, const FirmCapitalStructure& cap,
                                   const MarketObservables& mkt, const QuadratureRule& rule = {});

// d(price)/d(firm value) by differentiation under the integral sign; lies in
// [0, e^{-r tau} k e^{mu tau} (pi c / sin(pi c)) / (N + M k)].
[[nodiscard]] double dfw_dv(double v_t, double sigma, const FirmCapitalStructure& cap,
                            const MarketObservables& mkt, const QuadratureRule& rule = {});

// Stock volatility implied by firm volatility under warrant dilution:
//   sigma_s = sigma (V_t / S_t) (1 - M dfw_dv) / N.
// Aborts with ConvergenceError if 1 - M dfw_dv <= 0 (the share of firm-value
// risk carried by the stock must stay positive).
[[nodiscard]] double implied_stock_vol(double v_t, double sigma, const FirmCapitalStructure& cap,
                                       const MarketObservables& mkt,
                                       const QuadratureRule& rule = {});

// beta = implied_stock_vol / sigma.  DomainError for sigma = 0.
[[nodiscard]] double elasticity(double v_t, double sigma, const FirmCapitalStructure& cap,
                                const MarketObservables& mkt, const QuadratureRule& rule = {});

struct SolverSettings {
    double tol = 1e-8;       // relative residual target for both equations
    int max_iterations = 200;
    double damping = 0.5;    // contraction applied to oscillating updates
    int scan_points = 24;    // sign-change scan of the volatility residual
    QuadratureRule quadrature{};
};

struct CalibrationResult {
    double sigma = 0.0;       // calibrated firm volatility
    double firm_value = 0.0;  // calibrated V_t
    double price = 0.0;       // warrant price at the solution
    double beta = 0.0;        // implied_stock_vol / sigma at the solution
    double residual_value = 0.0;  // |V_t - M f_w - N S_t|
    double residual_vol = 0.0;    // |implied sigma_s - observed sigma_s|
    int iterations = 0;
    bool multiple_roots = false;  // volatility residual changed sign more than once
    std::vector<std::pair<double, double>> sigma_brackets;
};

// Calibration failure carrying the last iterate reached.
class CalibrationError : public ConvergenceError {
public:
    CalibrationError(const std::string& what_arg, CalibrationResult last)
        : ConvergenceError(what_arg), last_(std::move(last)) {}

    [[nodiscard]] const CalibrationResult& last_iterate() const noexcept { return last_; }

private:
    CalibrationResult last_;
};

// Solve the joint system
//   N S_t = V_t - M f_w(V_t, sigma)
//   sigma_s = sigma (V_t / S_t) (1 - M dfw_dv(V_t, sigma)) / N
// for (sigma, V_t).  The inner loop solves the value equation by a
// bisection-safeguarded Newton iteration; the outer loop brackets the
// volatility residual and bisects/interpolates with damping on oscillation.
// M = 0 decouples the system and returns (sigma_s, N S_t) exactly.  When the
// residual changes sign more than once, every bracket is reported and the
// smallest-sigma root is returned with multiple_roots set.
[[nodiscard]] CalibrationResult calibrate(const FirmCapitalStructure& cap,
                                          const MarketObservables& mkt,
                                          const SolverSettings& settings = {});

}  // namespace uwarrant
