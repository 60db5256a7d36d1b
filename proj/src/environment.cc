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

#include "motorgrad/environment.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "motorgrad/errors.h"
#include "motorgrad/parallel.h"
#include "motorgrad/random.h"

namespace motorgrad {
namespace {

unsigned g_default_workers = 0;

[[noreturn]] void unknown_feature(const std::string& env,
                                  const std::string& name) {
  throw InvalidArgument("unknown feature map '" + name + "' for " + env);
}

}  // namespace

unsigned default_workers() {
  if (g_default_workers != 0) return g_default_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void set_default_workers(unsigned workers) { g_default_workers = workers; }

CannonEnvironment::CannonEnvironment(CannonConfig config, PolicyVector initial)
    : config_(std::move(config)),
      initial_(std::move(initial)),
      model_(config_.noise_model()) {
  config_.validate();
  cannon_policy(initial_);
}

Rollout CannonEnvironment::rollout(const PolicyVector& pi, std::uint64_t seed,
                                   bool /*keep_steps*/) const {
  RandomStream stream(seed);
  return cannon_rollout(pi, config_, stream);
}

PolicyVector CannonEnvironment::constrain(const PolicyVector& pi) const {
  PolicyVector out = pi;
  out[0] = std::clamp(out[0], 0.0, std::numbers::pi / 2.0);
  out[1] = std::max(out[1], 1e-3);
  return out;
}

bool CannonEnvironment::in_bounds(const PolicyVector& pi) const {
  return pi.size() == 2 && pi.allFinite();
}

std::vector<std::string> CannonEnvironment::feature_names() const {
  return {"constant", "noise-sum", "noise-quadratic"};
}

FeatureMap CannonEnvironment::feature_map(const std::string& name) const {
  if (name == "constant") return constant_feature();
  if (name == "noise-sum") return noise_sum_features(2);
  if (name == "noise-quadratic") return noise_quadratic_features(2);
  unknown_feature("cannon", name);
}

DartEnvironment::DartEnvironment(ArmConfig config, PDController controller,
                                 double policy_bound)
    : config_(std::move(config)),
      controller_(std::move(controller)),
      policy_bound_(policy_bound) {
  config_.validate();
  if (controller_.gain_matrix.rows() != 3 ||
      controller_.gain_matrix.cols() != 6 ||
      controller_.desired_trajectory.num_joints() != 3) {
    throw InvalidArgument("dart arm controller must drive 3 joints");
  }
}

Eigen::Index DartEnvironment::policy_dimension() const {
  return controller_.desired_trajectory.num_parameters();
}

PolicyVector DartEnvironment::initial_policy() const {
  return controller_.desired_trajectory.parameters();
}

Rollout DartEnvironment::rollout(const PolicyVector& pi, std::uint64_t seed,
                                 bool keep_steps) const {
  RandomStream stream(seed);
  return dart_rollout(pi, config_, controller_, stream,
                      keep_steps ? Recording::kSteps : Recording::kSummary);
}

double DartEnvironment::response(const PolicyVector& pi,
                                 std::uint64_t seed) const {
  RandomStream stream(seed);
  return dart_rollout(pi, config_, controller_, stream,
                      Recording::kResponseOnly)
      .trial.response;
}

bool DartEnvironment::in_bounds(const PolicyVector& pi) const {
  return pi.allFinite() && pi.cwiseAbs().maxCoeff() <= policy_bound_;
}

std::vector<std::string> DartEnvironment::feature_names() const {
  return {"constant", "release-time", "noise-sum"};
}

FeatureMap DartEnvironment::feature_map(const std::string& name) const {
  if (name == "constant") return constant_feature();
  if (name == "release-time") return release_time_features();
  if (name == "noise-sum") return noise_sum_features(3);
  unknown_feature("dart-arm", name);
}

TrialBatch sample_batch(const Environment& env, const PolicyVector& pi,
                        std::uint64_t batch_key, std::size_t n,
                        bool keep_steps) {
  std::vector<Rollout> rollouts(n);
  parallel_for(n, [&](std::size_t i) {
    rollouts[i] = env.rollout(pi, derive_seed(batch_key, {i}), keep_steps);
  });
  TrialBatch batch;
  batch.trials.reserve(n);
  batch.eligibilities.reserve(n);
  for (auto& r : rollouts) {
    batch.trials.push_back(std::move(r.trial));
    batch.eligibilities.push_back(std::move(r.eligibility));
  }
  return batch;
}

double mean_response(const Environment& env, const PolicyVector& pi,
                     const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw InvalidArgument("mean response needs seeds");
  std::vector<double> values(seeds.size());
  parallel_for(seeds.size(),
               [&](std::size_t i) { values[i] = env.response(pi, seeds[i]); });
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace motorgrad
