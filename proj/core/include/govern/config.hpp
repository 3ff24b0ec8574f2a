#pragma once

#include "govern/mcg.hpp"
#include "govern/nn.hpp"
#include "govern/plant.hpp"
#include "govern/sim.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace govern {

/// Configuration or usage problem; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlantConfig {
  std::string kind = "pendulum";  // linear | pendulum | dual_pendulum
  // pendulum family
  double Ts = 0.05, a = 4.0, b = 1.5, c = 1.0, x1_max = 0.6, x2_max = 1.0;
  double v_min = -3.0, v_max = 3.0;
  // linear plant
  std::vector<std::vector<double>> A, C;
  std::vector<double> B, D;
};

struct ProfileConfig {
  std::string kind = "steps";
  std::uint64_t seed = 0;
  int total_steps = 0;
  std::vector<double> levels;
  std::vector<std::pair<int, double>> breakpoints;

  ReferenceProfile build() const;
};

struct RunConfig {
  PlantConfig plant;
  GovernorWeights weights;
  TrainOptions nn;

  ProfileConfig collection, calibration, evaluation;

  std::string dataset_path = "out/dataset.csv";
  std::string net_path = "out/net.json";
  std::string mbar_path = "out/mbar.json";
  std::string trace_dir = "out/traces";
  std::string report_dir = "out/reports";

  double viol_tol = 1e-6;
  double increment_factor = 2.0;
  int calibration_max_rounds = 50;
  double nlp_tol = 1e-6;
  double qcqp_tol = 1e-11;
  int benchmark_repeats = 5;

  std::optional<std::vector<double>> x0;
  std::optional<double> x0_command;

  std::string resolved_text;  // canonical config after overrides, for provenance
};

/// Parse a config document; throws ConfigError on malformed input.
RunConfig parse_config_text(const std::string& json_text);

/// Load a config file and apply dotted-path overrides like "plant.a=5" or
/// "profiles.collection.total_steps=400". Values are parsed as JSON when
/// possible, as strings otherwise.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

std::unique_ptr<PlantModel> make_plant(const PlantConfig& pc);

/// Initial state policy: explicit x0 if given, else the equilibrium at
/// x0_command, else the equilibrium at the profile's first level (saturated).
StateVector initial_state(const RunConfig& config, const PlantModel& plant,
                          const ReferenceProfile& profile);

}  // namespace govern
