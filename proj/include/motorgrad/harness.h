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

#ifndef MOTORGRAD_HARNESS_H_
#define MOTORGRAD_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motorgrad/environment.h"
#include "motorgrad/estimators.h"
#include "motorgrad/policies.h"

namespace motorgrad {

enum class EstimatorKind {
  kNaive,
  kConstantBaseline,
  kResponseSurface,
  kResponseSurfaceWeighted,
  kPegasusFd,
};

std::string to_string(EstimatorKind kind);
// Accepts the names produced by to_string; throws InvalidArgument otherwise.
EstimatorKind parse_estimator_kind(const std::string& name);
bool is_likelihood_ratio(EstimatorKind kind);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::kNaive;
  std::string feature_map;  // empty: the environment's default
  double k_squared = 10.0;
  int samples_per_step = 100;
  double fd_delta = 1e-2;
  int fd_scenarios = 0;  // 0: same as samples_per_step
  // Fit b on the first half of the batch and estimate on the second half.
  bool holdout_fit = false;
  double ridge_scale = kDefaultRidgeScale;

  int scenario_count() const {
    return fd_scenarios > 0 ? fd_scenarios : samples_per_step;
  }
  void validate() const;
};

// Intermediate quantities of one estimate, for tables and tests.
struct GradientDiagnostics {
  GradientEstimate estimate;
  std::optional<GradientEstimate> unweighted;
  std::optional<double> baseline;
  std::optional<Eigen::VectorXd> model_weights;
  std::optional<Eigen::MatrixXd> g;
  std::optional<Eigen::VectorXd> lambda;
  double mean_response = 0.0;
};

// Applies a likelihood-ratio estimator to an existing batch. Throws
// DegenerateBatch when every eligibility is zero.
GradientEstimate estimate_from_batch(const TrialBatch& batch,
                                     const Environment& env,
                                     const EstimatorConfig& config,
                                     GradientDiagnostics* diagnostics = nullptr);

// Draws samples_per_step trials at pi (seeds from batch_key) and estimates.
// For pegasus-fd the scenario seeds are derived from batch_key instead.
GradientEstimate estimate_gradient(const PolicyVector& pi,
                                   const Environment& env,
                                   const EstimatorConfig& config,
                                   std::uint64_t batch_key,
                                   GradientDiagnostics* diagnostics = nullptr);

// Central differences of the mean response over a fixed scenario list:
// g_i = (F(pi + delta e_i) - F(pi - delta e_i)) / (2 delta), evaluated with
// identical seeds on both sides. Variance is over per-scenario differences.
GradientEstimate pegasus_fd_gradient(
    const PolicyVector& pi, const Environment& env, double fd_delta,
    const std::vector<std::uint64_t>& scenario_seeds);

std::vector<std::uint64_t> scenario_seeds(std::uint64_t key, int count);

enum class StepNormalization {
  kRaw,           // pi += eta * v
  kComponentRms,  // pi_i += eta * v_i / rms_i, running RMS per component
  kGlobalRms,     // pi += eta * v / rms, one running RMS of |v|^2 / d
};

std::string to_string(StepNormalization mode);
StepNormalization parse_step_normalization(const std::string& name);

struct StepSchedule {
  double step_size = 0.01;
  StepNormalization normalization = StepNormalization::kComponentRms;
  double rms_decay = 0.9;
};

struct LearningCurve {
  std::vector<double> per_step_best_response;
  std::vector<double> per_step_mean_response;
  std::vector<PolicyVector> per_step_policy;
  int step_count = 0;
  // Step at which the policy left the allowed region, if it did.
  std::optional<int> frozen_at;
};

// Gradient ascent for num_steps steps. Each step evaluates the current policy
// on samples_per_step fresh trials (seeds from derive_seed(episode_key, {s}))
// and records their mean response and the best mean seen so far. Pegasus
// keeps one scenario list for the whole episode.
LearningCurve hill_climb(const PolicyVector& initial, const Environment& env,
                         const EstimatorConfig& estimator,
                         const StepSchedule& schedule, int num_steps,
                         std::uint64_t episode_key);

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::size_t episodes = 0;
};

// Pointwise mean and standard error of best-so-far responses. Curves shorter
// than the longest are padded with their final value.
AggregateCurve aggregate_curves(const std::vector<LearningCurve>& curves);

}  // namespace motorgrad

#endif  // MOTORGRAD_HARNESS_H_
