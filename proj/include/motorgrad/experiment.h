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

#ifndef MOTORGRAD_EXPERIMENT_H_
#define MOTORGRAD_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "motorgrad/experiment_config.h"
#include "motorgrad/harness.h"

namespace motorgrad {

struct EstimatorRun {
  EstimatorConfig estimator;
  std::vector<LearningCurve> episodes;
  AggregateCurve aggregate;
};

struct ExperimentResult {
  std::vector<EstimatorRun> runs;
};

// derive_seed(master, {estimator_index, episode}); the estimator index is
// dropped when episodes are paired.
std::uint64_t episode_seed(const ExperimentConfig& config,
                           std::size_t estimator_index, int episode);

// Hill-climbs every estimator for config.episodes episodes. Episodes run in
// parallel; the result does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// First line of every data file; the only line that varies between runs.
std::string timestamp_header(OutputFormat format);

// Aggregated curves. CSV columns: estimator, step, mean_best_response,
// stderr, n_episodes.
void write_aggregate(std::ostream& out, const ExperimentResult& result,
                     OutputFormat format, const std::string& header);
// One row per (estimator, episode, step).
void write_per_episode(std::ostream& out, const ExperimentResult& result,
                       OutputFormat format, const std::string& header);

std::string per_episode_path(const std::string& output_path);

// Writes the aggregate file (and the per-episode file when asked). Throws
// IoError on write failure.
void save_experiment(const ExperimentResult& result,
                     const std::string& output_path, OutputFormat format,
                     bool per_episode);

struct DiagnosticRow {
  EstimatorConfig estimator;
  std::optional<GradientDiagnostics> diagnostics;
  std::string status;  // "ok", "degenerate-batch", or an error message
};

struct DiagnosticTable {
  std::string environment;
  Eigen::VectorXd policy;
  std::uint64_t batch_seed = 0;
  int samples = 0;
  // Per-trial responses and squared eligibility norms of the shared batch.
  std::vector<double> responses;
  std::vector<double> eligibility_sq_norms;
  std::vector<DiagnosticRow> rows;
};

// Every configured estimator at one policy, sharing one batch of trials for
// the likelihood-ratio kinds.
DiagnosticTable dump_gradient_diagnostics(const ExperimentConfig& config,
                                          const Eigen::VectorXd& policy);
void write_diagnostics(std::ostream& out, const DiagnosticTable& table,
                       OutputFormat format, const std::string& header);

}  // namespace motorgrad

#endif  // MOTORGRAD_EXPERIMENT_H_
