#include "runners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "report.hpp"
#include "uwarrant/alpha_path.hpp"
#include "uwarrant/errors.hpp"
#include "uwarrant/pricer.hpp"

namespace uwarrant::cli {

namespace {

const FirmCapitalStructure& capital_of(const RunConfig& cfg) {
    if (!cfg.capital) {
        throw DomainError(
            "missing [capital] section (shares, warrants, exercise_ratio, exercise_payment)");
    }
    return *cfg.capital;
}

const MarketObservables& market_of(const RunConfig& cfg) {
    if (!cfg.market) {
        throw DomainError("missing [market] section (stock_price, stock_vol, rate, horizon, drift)");
    }
    return *cfg.market;
}

double resolve_firm_value(const RunConfig& cfg) {
    if (cfg.model_firm_value) return *cfg.model_firm_value;
    if (cfg.approx_v) return capital_of(cfg).shares * market_of(cfg).stock_price;
    throw DomainError("firm value not given: set model.firm_value or pass --approx-v");
}

double resolve_sigma(const RunConfig& cfg) {
    if (cfg.model_sigma) return *cfg.model_sigma;
    if (cfg.approx_sigma) return market_of(cfg).stock_vol;
    throw DomainError("volatility not given: set model.sigma or pass --approx-sigma");
}

void require_format(const RunConfig& cfg, const char* command, const char* required) {
    if (!cfg.format.empty() && cfg.format != required) {
        throw DomainError(std::string(command) + " emits " + required + " only; requested format '" +
                          cfg.format + "'");
    }
}

void echo_capital(JsonWriter& w, const FirmCapitalStructure& cap) {
    w.field("shares", cap.shares);
    w.field("warrants", cap.warrants);
    w.field("exercise_ratio", cap.exercise_ratio);
    w.field("exercise_payment", cap.exercise_payment);
}

void echo_market(JsonWriter& w, const MarketObservables& mkt) {
    w.field("stock_price", mkt.stock_price);
    w.field("stock_vol", mkt.stock_vol);
    w.field("rate", mkt.rate);
    w.field("horizon", mkt.horizon);
    w.field("drift", mkt.drift);
}

void write_calibration(JsonWriter& w, const CalibrationResult& res) {
    w.open_object("result");
    w.field("sigma", res.sigma);
    w.field("firm_value", res.firm_value);
    w.field("price", res.price);
    w.field("beta", res.beta);
    w.field("residual_value", res.residual_value);
    w.field("residual_vol", res.residual_vol);
    w.field_int("iterations", res.iterations);
    w.field_bool("multiple_roots", res.multiple_roots);
    w.open_array("sigma_brackets");
    for (const auto& [lo, hi] : res.sigma_brackets) w.item_pair(lo, hi);
    w.close();
    w.close();
}

// Sorted with exact duplicates removed.
std::vector<double> canonical(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Runs work(i) for i in [0, n) on up to env_thread_cap() threads and rethrows
// the first failure.  Slices are contiguous, so results land in preallocated
// slots and the output never depends on the thread count.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& work) {
    unsigned cap = env_thread_cap();
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(cap, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::mutex mu;
    std::exception_ptr first;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t lo = n * t / n_threads;
        const std::size_t hi = n * (t + 1) / n_threads;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) work(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace

unsigned env_thread_cap() {
    const char* s = std::getenv("UWARRANT_NUM_THREADS");
    if (s == nullptr || *s == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 1) {
        throw DomainError("UWARRANT_NUM_THREADS must be a positive integer, got '" + std::string(s) +
                          "'");
    }
    return static_cast<unsigned>(v);
}

int run_price(const RunConfig& cfg) {
    require_format(cfg, "price", "json");
    const FirmCapitalStructure& cap = capital_of(cfg);
    const MarketObservables& mkt = market_of(cfg);
    const double v_t = resolve_firm_value(cfg);
    const double sigma = resolve_sigma(cfg);

    const double f_w = price_warrant(v_t, sigma, cap, mkt, cfg.solver.quadrature);

    JsonWriter w;
    w.field("command", "price");
    w.open_object("inputs");
    echo_capital(w, cap);
    echo_market(w, mkt);
    w.field("firm_value", v_t);
    w.field("sigma", sigma);
    w.close();
    w.field("f_w", f_w);
    w.field("c", tail_exponent(sigma, mkt.horizon));
    w.field("alpha0", itm_alpha_boundary(v_t, sigma, cap, mkt));
    w.field("discount", std::exp(-mkt.rate * mkt.horizon));
    write_output(cfg.out_path, w.str());
    return 0;
}

int run_calibrate(const RunConfig& cfg) {
    require_format(cfg, "calibrate", "json");
    const FirmCapitalStructure& cap = capital_of(cfg);
    const MarketObservables& mkt = market_of(cfg);

    JsonWriter w;
    w.field("command", "calibrate");
    w.open_object("inputs");
    echo_capital(w, cap);
    echo_market(w, mkt);
    w.field("tol", cfg.solver.tol);
    w.field_int("max_iter", cfg.solver.max_iterations);
    w.close();

    try {
        const CalibrationResult res = calibrate(cap, mkt, cfg.solver);
        w.field_bool("converged", true);
        write_calibration(w, res);
        write_output(cfg.out_path, w.str());
        return 0;
    } catch (const CalibrationError& e) {
        w.field_bool("converged", false);
        w.field("error", e.what());
        write_calibration(w, e.last_iterate());
        write_output(cfg.out_path, w.str());
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

int run_alpha_paths(const RunConfig& cfg) {
    require_format(cfg, "alpha-paths", "csv");
    const double v0 = resolve_firm_value(cfg);
    const double sigma = resolve_sigma(cfg);
    const double mu = market_of(cfg).drift;

    std::vector<double> alphas = cfg.path_alphas;
    if (alphas.empty() && cfg.alpha_levels > 0) {
        for (int i = 1; i <= cfg.alpha_levels; ++i) {
            alphas.push_back(static_cast<double>(i) / (cfg.alpha_levels + 1));
        }
    }
    if (alphas.empty()) {
        throw DomainError("no quantile levels: set paths.alphas or pass --alpha-levels");
    }
    if (cfg.path_times.empty()) throw DomainError("no time grid: set paths.times");
    alphas = canonical(std::move(alphas));
    const std::vector<double> times = canonical(cfg.path_times);

    // The paths are integrated with the generic RK4 engine rather than the
    // closed form, so the emitted values exercise the same code path as any
    // other uncertain differential equation.
    const UdeSpec ude{[mu](double, double x) { return mu * x; },
                      [sigma](double, double x) { return sigma * x; }};
    std::vector<std::vector<double>> grid(alphas.size(),
                                          std::vector<double>(times.size(), v0));
    for_each_index(alphas.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            if (times[j] > 0.0) {
                grid[i][j] =
                    solve_alpha_path(ude, v0, times[j], alphas[i], cfg.steps).values.back();
            }
        }
    });

    std::vector<CsvRow> rows;
    rows.reserve(alphas.size() * times.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            rows.push_back({alphas[i], times[j], grid[i][j]});
        }
    }
    write_output(cfg.out_path, render_csv(rows));
    return 0;
}

int run_expect(const RunConfig& cfg) {
    require_format(cfg, "expect", "json");
    const MarketObservables& mkt = market_of(cfg);
    const double v0 = resolve_firm_value(cfg);
    const double sigma = resolve_sigma(cfg);
    const GeometricLiuSpec spec(v0, mkt.drift, sigma);

    const double expected = expected_terminal_value(spec, mkt.horizon, cfg.solver.quadrature);

    JsonWriter w;
    w.field("command", "expect");
    w.open_object("inputs");
    w.field("firm_value", v0);
    w.field("drift", mkt.drift);
    w.field("sigma", sigma);
    w.field("horizon", mkt.horizon);
    w.close();
    w.field("expected_value", expected);
    w.field("c", tail_exponent(sigma, mkt.horizon));
    write_output(cfg.out_path, w.str());
    return 0;
}

int dispatch(const RunConfig& cfg) {
    if (cfg.command == "price") return run_price(cfg);
    if (cfg.command == "calibrate") return run_calibrate(cfg);
    if (cfg.command == "alpha-paths") return run_alpha_paths(cfg);
    if (cfg.command == "expect") return run_expect(cfg);
    throw DomainError("unknown command '" + cfg.command + "'");
}

}  // namespace uwarrant::cli
