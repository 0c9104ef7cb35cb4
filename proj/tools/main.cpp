#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "runners.hpp"
#include "uwarrant/errors.hpp"

namespace {

struct Overrides {
    std::string config_path;
    bool approx_v = false;
    bool approx_sigma = false;
    std::string out_path;
    std::string format;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<int> alpha_levels;
    std::optional<long long> steps;
};

void add_common_options(CLI::App* sub, Overrides& ov) {
    sub->add_option("--config", ov.config_path, "config file (TOML-style key/value document)")
        ->required();
    sub->add_flag("--approx-v", ov.approx_v,
                  "approximate the firm value by shares * stock_price when model.firm_value is "
                  "absent");
    sub->add_flag("--approx-sigma", ov.approx_sigma,
                  "approximate the firm volatility by the observed stock_vol when model.sigma is "
                  "absent");
    sub->add_option("--out", ov.out_path, "output file (default: stdout)");
    sub->add_option("--format", ov.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tol", ov.tol, "solver relative-residual tolerance");
    sub->add_option("--max-iter", ov.max_iter, "solver iteration budget");
    sub->add_option("--alpha-levels", ov.alpha_levels,
                    "number of uniform quantile levels i/(n+1) for alpha-paths");
    sub->add_option("--steps", ov.steps, "RK4 steps per path integration");
}

int run(const std::string& command, const Overrides& ov) {
    (void)uwarrant::cli::env_thread_cap();  // reject a malformed thread cap up front
    uwarrant::cli::RunConfig cfg = uwarrant::cli::parse_config_file(ov.config_path);
    if (!cfg.command.empty() && cfg.command != command) {
        throw uwarrant::DomainError("config sets command = " + cfg.command +
                                    " but the invoked subcommand is " + command);
    }
    cfg.command = command;
    if (ov.approx_v) cfg.approx_v = true;
    if (ov.approx_sigma) cfg.approx_sigma = true;
    if (!ov.out_path.empty()) cfg.out_path = ov.out_path;
    if (!ov.format.empty()) cfg.format = ov.format;
    if (ov.tol) {
        if (!(*ov.tol > 0.0)) throw uwarrant::DomainError("--tol must be positive");
        cfg.solver.tol = *ov.tol;
    }
    if (ov.max_iter) {
        if (*ov.max_iter < 1) throw uwarrant::DomainError("--max-iter must be at least 1");
        cfg.solver.max_iterations = *ov.max_iter;
    }
    if (ov.alpha_levels) {
        if (*ov.alpha_levels < 1) throw uwarrant::DomainError("--alpha-levels must be at least 1");
        cfg.alpha_levels = *ov.alpha_levels;
    }
    if (ov.steps) {
        if (*ov.steps < 1) throw uwarrant::DomainError("--steps must be at least 1");
        cfg.steps = static_cast<std::size_t>(*ov.steps);
    }
    return uwarrant::cli::dispatch(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "uwarrant: dilution-adjusted equity warrant pricing under uncertainty theory.\n"
        "Volatilities, rates and drifts are annualized decimals; horizons and time grids are in "
        "years.\n"
        "Exit codes: 0 ok, 2 validation failure, 3 numeric divergence, 4 non-convergence."};
    app.require_subcommand(1);

    Overrides ov;
    add_common_options(
        app.add_subcommand("price",
                           "price a warrant at explicit or approximated (firm value, volatility)"),
        ov);
    add_common_options(
        app.add_subcommand("calibrate",
                           "solve for the firm volatility and firm value that reproduce the "
                           "observed stock price and stock volatility"),
        ov);
    add_common_options(app.add_subcommand("alpha-paths",
                                          "export firm-value quantile paths as CSV (alpha,t,value)"),
                       ov);
    add_common_options(
        app.add_subcommand("expect", "expected terminal firm value under the model"), ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), ov);
    } catch (const uwarrant::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const uwarrant::DivergenceError& e) {
        std::cerr << "error: " << e.what() << " (tail exponent c = " << e.tail_exponent()
                  << "; the price integral requires c < 1)\n";
        return 3;
    } catch (const uwarrant::IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const uwarrant::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const uwarrant::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
