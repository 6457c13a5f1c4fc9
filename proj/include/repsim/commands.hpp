#pragma once

#include <span>
#include <string>

#include "repsim/engine.hpp"

namespace repsim {

// Runs the configured simulation and exports every table into cfg.out_dir.
// Returns a process exit code; failures are reported on stderr.
int cmd_simulate(const SimConfig& cfg);

// One simulate per value of the swept key, each into its own subdirectory
// of cfg.out_dir with a sub-seed derived from cfg.seed, plus an index file
// mapping value to directory.
int cmd_sweep(const SimConfig& cfg, const std::string& axis,
              std::span<const double> values);

// Self-checks of the sampling and probability layer; prints one PASS/FAIL
// line per check. inject_broken_exponent deliberately skews the sampled
// power-law exponent to prove the distribution check can fail.
int cmd_validate(const SimConfig& cfg, bool inject_broken_exponent = false);

}  // namespace repsim
