#pragma once

#include <string>
#include <vector>

#include "repsim/engine.hpp"

namespace repsim {

inline constexpr const char* kToolName = "repsim";
inline constexpr const char* kToolVersion = "0.1.0";

SimConfig default_sim_config();

// Canned configurations named figure2 .. figure13, spanning learning
// on/off, uniform/power-law initial credits, consumer selection on/off and
// the per-agent learning-intensity modes. Throws on an unknown name.
SimConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Applies one key to the config, with type and range checks that name the
// offending key. Unknown keys are rejected.
void set_config_key(SimConfig& cfg, const std::string& key,
                    const std::string& value);

// True for numeric keys a sweep may vary.
bool is_sweepable_key(const std::string& key);

// Parses flat `key = value` text ('#' starts a comment). Keys missing from
// the source keep the values of `base`. With allow_defaults set to false,
// agents, rounds, replications and seed must appear explicitly.
SimConfig parse_config(const std::string& source, const SimConfig& base,
                       bool allow_defaults = true);

// Every key in a fixed order, full float precision, parseable back via
// parse_config. Used verbatim inside run metadata.
std::string serialize_config(const SimConfig& cfg);

// serialize_config plus seed provenance, tool version and RNG identity.
std::string run_meta_text(const SimConfig& cfg);

}  // namespace repsim
