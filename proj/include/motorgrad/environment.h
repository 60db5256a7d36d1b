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

#ifndef MOTORGRAD_ENVIRONMENT_H_
#define MOTORGRAD_ENVIRONMENT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "motorgrad/arm.h"
#include "motorgrad/cannon.h"
#include "motorgrad/estimators.h"
#include "motorgrad/policies.h"

namespace motorgrad {

// A testbed that turns (policy, seed) into a scored trial. Rollouts are pure
// functions of their arguments and may run concurrently.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual Eigen::Index policy_dimension() const = 0;
  virtual PolicyVector initial_policy() const = 0;
  virtual const NoiseModel& noise_model() const = 0;
  virtual bool noise_enabled() const = 0;

  virtual Rollout rollout(const PolicyVector& pi, std::uint64_t seed,
                          bool keep_steps) const = 0;
  // Response alone; may skip eligibility work.
  virtual double response(const PolicyVector& pi, std::uint64_t seed) const {
    return rollout(pi, seed, false).trial.response;
  }

  // Maps a hill-climbing iterate back into the policy domain.
  virtual PolicyVector constrain(const PolicyVector& pi) const { return pi; }
  // False once the policy has left the region where episodes continue.
  virtual bool in_bounds(const PolicyVector& pi) const = 0;

  virtual std::vector<std::string> feature_names() const = 0;
  // Throws InvalidArgument for unknown names.
  virtual FeatureMap feature_map(const std::string& name) const = 0;
  virtual std::string default_feature_map() const = 0;
};

class CannonEnvironment : public Environment {
 public:
  CannonEnvironment(CannonConfig config, PolicyVector initial);

  const CannonConfig& config() const { return config_; }

  std::string name() const override { return "cannon"; }
  Eigen::Index policy_dimension() const override { return 2; }
  PolicyVector initial_policy() const override { return initial_; }
  const NoiseModel& noise_model() const override { return model_; }
  bool noise_enabled() const override { return config_.noise_enabled; }
  Rollout rollout(const PolicyVector& pi, std::uint64_t seed,
                  bool keep_steps) const override;
  PolicyVector constrain(const PolicyVector& pi) const override;
  bool in_bounds(const PolicyVector& pi) const override;
  std::vector<std::string> feature_names() const override;
  FeatureMap feature_map(const std::string& name) const override;
  std::string default_feature_map() const override {
    return "noise-quadratic";
  }

 private:
  CannonConfig config_;
  PolicyVector initial_;
  NoiseModel model_;
};

class DartEnvironment : public Environment {
 public:
  // `policy_bound` is the knot-angle box (radians) outside of which an
  // episode is frozen.
  DartEnvironment(ArmConfig config, PDController controller,
                  double policy_bound = 3.141592653589793);

  const ArmConfig& config() const { return config_; }
  const PDController& controller() const { return controller_; }

  std::string name() const override { return "dart-arm"; }
  Eigen::Index policy_dimension() const override;
  PolicyVector initial_policy() const override;
  const NoiseModel& noise_model() const override {
    return config_.noise_model;
  }
  bool noise_enabled() const override { return config_.noise_enabled; }
  Rollout rollout(const PolicyVector& pi, std::uint64_t seed,
                  bool keep_steps) const override;
  double response(const PolicyVector& pi, std::uint64_t seed) const override;
  bool in_bounds(const PolicyVector& pi) const override;
  std::vector<std::string> feature_names() const override;
  FeatureMap feature_map(const std::string& name) const override;
  std::string default_feature_map() const override { return "release-time"; }

 private:
  ArmConfig config_;
  PDController controller_;
  double policy_bound_;
};

// N rollouts at pi with per-trial seeds derive_seed(batch_key, {i}), run in
// parallel and assembled in index order.
TrialBatch sample_batch(const Environment& env, const PolicyVector& pi,
                        std::uint64_t batch_key, std::size_t n,
                        bool keep_steps = false);

// Mean response over rollouts with the given seeds.
double mean_response(const Environment& env, const PolicyVector& pi,
                     const std::vector<std::uint64_t>& seeds);

}  // namespace motorgrad

#endif  // MOTORGRAD_ENVIRONMENT_H_
