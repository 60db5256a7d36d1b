// Copyright 2026 The motorgrad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MOTORGRAD_EXPERIMENT_CONFIG_H_
#define MOTORGRAD_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motorgrad/arm.h"
#include "motorgrad/cannon.h"
#include "motorgrad/environment.h"
#include "motorgrad/harness.h"

namespace motorgrad {

enum class EnvironmentKind { kCannon, kDartArm };
enum class OutputFormat { kCsv, kJson };

std::string to_string(EnvironmentKind kind);
std::string to_string(OutputFormat format);

struct ControllerConfig {
  Eigen::MatrixXd knots;  // free knots x joints, evenly spaced on (0, t_max]
  double t_max = 0.25;
  Eigen::Vector3d position_gains{60.0, 25.0, 6.0};
  Eigen::Vector3d velocity_gains{6.0, 1.5, 0.25};
  double policy_bound = 3.141592653589793;

  static ControllerConfig defaults();
  PDController build(const ArmConfig& arm) const;
};

struct DiagnosticsConfig {
  std::optional<Eigen::VectorXd> policy;  // default: initial policy
  int samples = 1000;
};

// Sample sizes for the built-in verification suite.
struct VerificationConfig {
  int score_trials = 20000;
  int score_policies = 3;
  int likelihood_trials = 20;
  int cannon_likelihood_trials = 1000;
  int unbiasedness_samples = 200000;
  int g_trials = 20000;
  double energy_seconds = 1.0;
};

struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::kCannon;
  CannonConfig cannon;
  Eigen::Vector2d cannon_initial{0.6, 22.0};
  ArmConfig arm;
  ControllerConfig controller = ControllerConfig::defaults();

  std::vector<EstimatorConfig> estimators;
  StepSchedule schedule;
  int episodes = 1;
  int steps_per_episode = 1;
  std::uint64_t master_seed = 0;
  // Share episode seeds across estimators so episodes can be compared pairwise.
  bool paired_episodes = false;
  std::string output_path = "results.csv";
  OutputFormat output_format = OutputFormat::kCsv;

  DiagnosticsConfig diagnostics;
  VerificationConfig verification;

  // Source line of each parsed field, for diagnostics only.
  std::map<std::string, int> field_lines;

  // Throws ConfigError naming the offending field and, when the config came
  // from text, its line.
  void validate() const;
  std::unique_ptr<Environment> make_environment() const;

 private:
  void validate_fields() const;
};

// Throws ConfigError with the line of the offending key.
ExperimentConfig parse_experiment_config(const std::string& text);
// Throws IoError when the file cannot be read, ConfigError otherwise.
ExperimentConfig load_experiment_config(const std::string& path);
std::string serialize_experiment_config(const ExperimentConfig& config);

}  // namespace motorgrad

#endif  // MOTORGRAD_EXPERIMENT_CONFIG_H_
