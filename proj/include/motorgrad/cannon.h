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

#ifndef MOTORGRAD_CANNON_H_
#define MOTORGRAD_CANNON_H_

#include <Eigen/Core>

#include "motorgrad/estimators.h"
#include "motorgrad/noise.h"
#include "motorgrad/policies.h"
#include "motorgrad/random.h"

namespace motorgrad {

// A ball fired at a target on flat ground. The policy (angle, speed) is
// perturbed by Gaussian noise before launch; the response is -(miss)^2.
struct CannonConfig {
  double gravity = 9.81;
  double target_range = 60.0;
  Eigen::Matrix2d noise_covariance =
      Eigen::Vector2d(0.035 * 0.035, 1.5 * 1.5).asDiagonal();
  bool noise_enabled = true;

  void validate() const;
  NoiseModel noise_model() const;
};

// Flat-ground range v^2 sin(2 theta) / g.
double cannon_range(double angle, double speed, double gravity);

// Response for an actual launch. The angle is clamped to [0, pi/2] and the
// speed to at least 1e-6 before the range is computed.
double cannon_response(double angle, double speed, const CannonConfig& config);

Rollout cannon_rollout(const PolicyVector& pi, const CannonConfig& config,
                       RandomStream& stream);

// Sigma^{-1} n_0 with the unclamped noise.
EligibilityVector cannon_eligibility(const Trial& trial,
                                     const CannonConfig& config);

// (1, n, n_i n_j for i <= j) on the summed noise. Its analytic G is
// [0, mean(sum_t du/dpi)^T, 0], exact for additive Gaussian noise where the
// third noise moments vanish.
FeatureMap noise_quadratic_features(Eigen::Index control_dim);

}  // namespace motorgrad

#endif  // MOTORGRAD_CANNON_H_
