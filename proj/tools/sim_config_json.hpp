#ifndef VIOFLIGHT_TOOLS_SIM_CONFIG_JSON_HPP
#define VIOFLIGHT_TOOLS_SIM_CONFIG_JSON_HPP

#include "vioflight/simulation.hpp"

#include <map>
#include <string>
#include <vector>

namespace vioflight::cli {

/// Scenario sweep description for `simulate --grid`.
struct GridSpec {
  std::vector<double> velocities;
  std::vector<double> pitches;
  std::map<double, double> altitude_for_pitch;
};

struct RunConfig {
  sim::SimConfig sim;
  GridSpec grid;
  bool has_grid = false;
};

/// Parses the declarative JSON config. Every key is optional and falls back
/// to the built-in default; unknown keys are rejected with the offending
/// path in the message.
RunConfig load_run_config(const std::string& path);

}  // namespace vioflight::cli

#endif  // VIOFLIGHT_TOOLS_SIM_CONFIG_JSON_HPP
