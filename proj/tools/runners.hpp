#pragma once

#include "config.hpp"

namespace uwarrant::cli {

// Each runner validates the parts of the config it needs, executes, writes
// the report, and returns the process exit code.
int run_price(const RunConfig& cfg);
int run_calibrate(const RunConfig& cfg);
int run_alpha_paths(const RunConfig& cfg);
int run_expect(const RunConfig& cfg);

int dispatch(const RunConfig& cfg);

// Thread cap from UWARRANT_NUM_THREADS; 0 means "hardware default".
// DomainError if the variable is set but not a positive integer.
unsigned env_thread_cap();

}  // namespace uwarrant::cli
