// config.hpp
//
// Tool configuration: one nested JSON document, every scalar overridable
// from the command line. The effective configuration is echoed into each
// run manifest, and the default run id is a stable hash of it so identical
// configurations reproduce identical outputs.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flopscope/backend.hpp"
#include "flopscope/experiments.hpp"
#include "flopscope/synthetic.hpp"

namespace flopscope {

inline constexpr const char* kToolName = "flopscope";
inline constexpr const char* kToolVersion = "0.1.0";

struct Config {
  ExpressionKind expression = ExpressionKind::matrix_chain(4);

  // Size-1 vectors mean "same bound for every dimension".
  std::vector<Dim> space_lower{20};
  std::vector<Dim> space_upper{1200};
  int space_step = 10;

  double search_threshold = 0.10;
  double traversal_threshold = 0.05;

  MeasurementProtocol protocol;
  std::string backend = "synthetic";  // "synthetic" | "real"
  EfficiencyProfile profile;
  MachineConfig machine;

  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  std::string run_id = "auto";

  int target_anomalies = 100;
  int max_samples = 100000;

  // Unset means the default sweep 100..2400 by 100; an explicitly empty
  // list is a usage error at bench time.
  std::optional<std::vector<Dim>> bench_sizes;
  int overshoot = 0;
  std::int64_t hist_bin_width = 50;

  static Config from_json(const nlohmann::json& j);  // defaults for absent keys
  nlohmann::json to_json() const;

  void validate() const;
  SearchSpace search_space() const;  // bounds expanded to the expression's dims
  std::vector<Dim> effective_bench_sizes() const;

  // Configured id, or a hash of the configuration plus the command name
  // (ignoring output_dir and run_id themselves) when set to "auto".
  std::string effective_run_id(const std::string& command) const;

  std::unique_ptr<Backend> make_backend() const;  // BackendError if unavailable
};

Config load_config_file(const std::string& path);  // IoError / invalid_argument

}  // namespace flopscope
