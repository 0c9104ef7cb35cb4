#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "uwarrant/pricer.hpp"

namespace uwarrant::cli {

// Fully parsed run description: the config file plus any command-line
// overrides, with every numeric field already range-checked.
struct RunConfig {
    std::string command;  // price | calibrate | alpha-paths | expect

    std::optional<FirmCapitalStructure> capital;
    std::optional<MarketObservables> market;

    std::optional<double> model_firm_value;
    std::optional<double> model_sigma;
    bool approx_v = false;      // firm value falls back to shares * stock_price
    bool approx_sigma = false;  // volatility falls back to stock_vol

    SolverSettings solver;
    std::size_t steps = 10000;  // RK4 steps per path integration

    std::vector<double> path_alphas;  // explicit quantile levels
    int alpha_levels = 0;             // or a uniform ladder i/(n+1), i = 1..n
    std::vector<double> path_times;

    std::string out_path;  // empty: stdout
    std::string format;    // json | csv; empty: per-command default
};

// Parses the TOML-style key/value config document. Unknown sections or keys,
// malformed numbers, and out-of-range values all raise DomainError naming the
// offending field and line.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

}  // namespace uwarrant::cli
