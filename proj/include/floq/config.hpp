#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floq/analysis.hpp"
#include "floq/bimodal.hpp"
#include "floq/drive.hpp"
#include "floq/exactsim.hpp"
#include "floq/montecarlo.hpp"
#include "floq/prethermal.hpp"

namespace floq {

// YAML run configuration. Unknown keys are rejected with their line number.
struct RunConfig {
  std::uint64_t seed = 1;
  DriveSequence drive;
  std::vector<double> detunings;  // Hz, empty if the file gives none
  bool has_detunings = false;

  std::vector<int> ks = {2, 3};
  ResonanceScan scan;

  std::optional<std::string> geometry_path;  // resolved against the config directory
  ToyModelSpec toy;                          // geometry filled in by the caller
  AnalyticRateOptions analytic;
  MonteCarloConfig mc;

  PrethermalOptions prethermal;
  bool pauli = false;
  std::size_t cluster_spins = 6;
  double cluster_occupancy = 0.05;

  std::optional<std::string> fit_input;
  std::string fit_model = "decay";
  std::optional<double> fit_center_hz, fit_halfwidth_hz;
  std::optional<std::string> fit_y_column;  // default: second column

  std::string source;  // config text as read
};

RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace floq
