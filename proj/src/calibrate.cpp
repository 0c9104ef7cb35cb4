#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "uwarrant/pricer.hpp"

namespace uwarrant {

namespace {

// One evaluation of the volatility residual at a fixed sigma: the value
// equation is solved for V_t first, then the implied stock volatility is
// compared with the observed one.
struct Probe {
    double sigma = 0.0;
    double firm_value = 0.0;
    double price = 0.0;
    double implied_vol = 0.0;
    double residual = 0.0;  // implied_vol - target
    bool feasible = false;
    std::string diagnostic;
};

class System {
public:
    System(const FirmCapitalStructure& cap, const MarketObservables& mkt,
           const SolverSettings& settings)
        : cap_(cap), mkt_(mkt), tol_(settings.tol), rule_(settings.quadrature) {
        // The solver needs residuals well below `tol`, so its internal
        // quadrature runs tighter than the caller's rule.
        rule_.rel_tol = std::min(rule_.rel_tol, tol_ * 1e-3);
        rule_.abs_tol = std::min(rule_.abs_tol, 1e-13);
        equity_ = cap.shares * mkt.stock_price;
    }

    [[nodiscard]] double equity() const { return equity_; }

    // Bisection-safeguarded Newton solve of V - M f_w(V, sigma) = N S_t for V.
    // Returns (V, f_w at V).
    [[nodiscard]] std::pair<double, double> solve_value_equation(double sigma) const {
        const double m = cap_.warrants;
        const double fw0 = price_warrant(equity_, sigma, cap_, mkt_, rule_);
        double lo = equity_;  // gap(lo) = -M f_w <= 0
        double hi = 2.0 * (equity_ + m * fw0);
        int doublings = 0;
        while (hi - m * price_warrant(hi, sigma, cap_, mkt_, rule_) - equity_ < 0.0) {
            hi *= 2.0;
            if (++doublings > 200 || !std::isfinite(hi)) {
                std::ostringstream os;
                os << "value equation has no solution at sigma = " << sigma;
                throw ConvergenceError(os.str());
            }
        }
        double v = equity_ + m * fw0;
        for (int i = 0; i < 100; ++i) {
            const double fw = price_warrant(v, sigma, cap_, mkt_, rule_);
            const double gap = v - m * fw - equity_;
            if (std::abs(gap) <= 1e-2 * tol_ * equity_) return {v, fw};
            if (gap > 0.0) hi = v; else lo = v;
            const double slope = 1.0 - m * dfw_dv(v, sigma, cap_, mkt_, rule_);
            if (!(slope > 0.0)) {
                std::ostringstream os;
                os << "stock share of firm-value risk is not positive while solving the value "
                      "equation: 1 - M dfw_dv = "
                   << slope << " at (v_t = " << v << ", sigma = " << sigma << ")";
                throw ConvergenceError(os.str());
            }
            double next = v - gap / slope;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
            v = next;
        }
        std::ostringstream os;
        os << "value equation did not converge at sigma = " << sigma;
        throw ConvergenceError(os.str());
    }

    [[nodiscard]] Probe probe(double sigma) const {
        Probe p;
        p.sigma = sigma;
        try {
            const auto [v, fw] = solve_value_equation(sigma);
            p.firm_value = v;
            p.price = fw;
            p.implied_vol = implied_stock_vol(v, sigma, cap_, mkt_, rule_);
            p.residual = p.implied_vol - mkt_.stock_vol;
            p.feasible = true;
        } catch (const Error& e) {
            p.diagnostic = e.what();
        }
        return p;
    }

    [[nodiscard]] CalibrationResult result_at(const Probe& p, int iterations) const {
        CalibrationResult r;
        r.sigma = p.sigma;
        r.firm_value = p.firm_value;
        r.price = p.price;
        r.beta = p.sigma > 0.0 ? p.implied_vol / p.sigma : 0.0;
        r.residual_value = std::abs(p.firm_value - cap_.warrants * p.price - equity_);
        r.residual_vol = std::abs(p.residual);
        r.iterations = iterations;
        return r;
    }

private:
    const FirmCapitalStructure& cap_;
    const MarketObservables& mkt_;
    double tol_;
    QuadratureRule rule_;
    double equity_;
};

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

CalibrationResult empty_result(int iterations) {
    CalibrationResult r;
    r.iterations = iterations;
    return r;
}

}  // namespace

CalibrationResult calibrate(const FirmCapitalStructure& cap, const MarketObservables& mkt,
                            const SolverSettings& settings) {
    if (!(settings.tol > 0.0)) throw DomainError("tol must be positive");
    if (settings.max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(settings.damping > 0.0 && settings.damping <= 1.0)) {
        throw DomainError("damping must lie in (0, 1]");
    }
    if (settings.scan_points < 2) throw DomainError("scan_points must be at least 2");

    // No warrants: the system decouples and the observables are the answer.
    if (cap.warrants == 0.0) {
        CalibrationResult r;
        r.sigma = mkt.stock_vol;
        r.firm_value = cap.shares * mkt.stock_price;
        r.price = price_warrant(r.firm_value, r.sigma, cap, mkt, settings.quadrature);
        r.beta = implied_stock_vol(r.firm_value, r.sigma, cap, mkt, settings.quadrature) / r.sigma;
        return r;
    }

    const System sys(cap, mkt, settings);
    const double target = mkt.stock_vol;
    const double sigma_cap = (1.0 - 1e-9) * std::numbers::pi / (mkt.horizon * std::numbers::sqrt3);
    int evals = 0;
    std::optional<Probe> best;  // smallest |residual| among feasible probes

    const auto evaluate = [&](double sigma) {
        if (++evals > settings.max_iterations) {
            CalibrationResult last =
                best ? sys.result_at(*best, evals) : empty_result(evals);
            throw CalibrationError("calibration exceeded the iteration budget", last);
        }
        Probe p = sys.probe(sigma);
        if (p.feasible && (!best || std::abs(p.residual) < std::abs(best->residual))) best = p;
        return p;
    };

    // Sign-change scan over the feasible volatility range (log-spaced), with
    // the observed stock volatility inserted as the natural first guess.
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(settings.scan_points) + 1);
    const double lo = sigma_cap * 1e-4, hi = sigma_cap * (1.0 - 1e-6);
    for (int i = 0; i < settings.scan_points; ++i) {
        const double f = static_cast<double>(i) / (settings.scan_points - 1);
        grid.push_back(lo * std::pow(hi / lo, f));
    }
    if (target > lo && target < hi) grid.push_back(target);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<Probe> probes;
    probes.reserve(grid.size());
    for (double s : grid) probes.push_back(evaluate(s));

    // A probe that lands exactly on a root short-circuits the refinement.
    const Probe* exact = nullptr;
    for (const Probe& p : probes) {
        if (p.feasible && p.residual == 0.0) { exact = &p; break; }
    }

    std::vector<std::pair<Probe, Probe>> brackets;
    for (std::size_t i = 1; i < probes.size(); ++i) {
        const Probe& a = probes[i - 1];
        const Probe& b = probes[i];
        if (a.feasible && b.feasible && sign_of(a.residual) * sign_of(b.residual) == -1) {
            brackets.emplace_back(a, b);
        }
    }

    if (exact == nullptr && brackets.empty()) {
        std::ostringstream os;
        os << "volatility equation has no root: observed stock volatility " << target
           << " is unreachable";
        const Probe* edge = nullptr;
        for (auto it = probes.rbegin(); it != probes.rend(); ++it) {
            if (it->feasible) { edge = &*it; break; }
        }
        if (edge != nullptr) {
            os << " (implied value " << edge->implied_vol << " at the largest feasible sigma "
               << edge->sigma << ")";
        } else {
            os << " (no feasible sigma below the divergence boundary " << sigma_cap << ")";
        }
        throw CalibrationError(
            os.str(), best ? sys.result_at(*best, evals) : empty_result(evals));
    }

    const bool multiple = brackets.size() > 1;
    std::vector<std::pair<double, double>> bracket_edges;
    bracket_edges.reserve(brackets.size());
    for (const auto& br : brackets) bracket_edges.emplace_back(br.first.sigma, br.second.sigma);

    Probe current;
    if (exact != nullptr && (brackets.empty() || exact->sigma <= brackets.front().first.sigma)) {
        current = *exact;
    } else {
        // Illinois-damped regula falsi on the smallest-sigma bracket: when the
        // new residual repeats the sign of the previous one, the stale
        // endpoint's weight is scaled by `damping`, which keeps oscillating
        // secant steps contracting.
        Probe pa = brackets.front().first;
        Probe pb = brackets.front().second;
        double fa = pa.residual, fb = pb.residual;
        current = std::abs(fa) <= std::abs(fb) ? pa : pb;
        while (std::abs(current.residual) > settings.tol * target) {
            double next = (pa.sigma * fb - pb.sigma * fa) / (fb - fa);
            const double lo_s = std::min(pa.sigma, pb.sigma);
            const double hi_s = std::max(pa.sigma, pb.sigma);
            if (!(next > lo_s && next < hi_s)) next = 0.5 * (lo_s + hi_s);
            current = evaluate(next);
            if (!current.feasible) {
                throw CalibrationError(
                    "volatility refinement hit an infeasible point: " + current.diagnostic,
                    sys.result_at(*best, evals));
            }
            if (current.residual * fb < 0.0) {
                pa = pb;
                fa = fb;
            } else {
                fa *= settings.damping;
            }
            pb = current;
            fb = current.residual;
        }
    }

    CalibrationResult out = sys.result_at(current, evals);
    out.multiple_roots = multiple;
    out.sigma_brackets = std::move(bracket_edges);
    return out;
}

}  // namespace uwarrant
