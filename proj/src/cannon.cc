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

#include "motorgrad/cannon.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "motorgrad/errors.h"

namespace motorgrad {

void CannonConfig::validate() const {
  if (!(gravity > 0.0)) throw InvalidArgument("cannon: gravity must be > 0");
  if (!(target_range > 0.0)) {
    throw InvalidArgument("cannon: target range must be > 0");
  }
  noise_model().validate();
}

NoiseModel CannonConfig::noise_model() const {
  return NoiseModel::additive(noise_covariance);
}

double cannon_range(double angle, double speed, double gravity) {
  return speed * speed * std::sin(2.0 * angle) / gravity;
}

double cannon_response(double angle, double speed,
                       const CannonConfig& config) {
  const double theta = std::clamp(angle, 0.0, std::numbers::pi / 2.0);
  const double v = std::max(speed, 1e-6);
  const double miss = cannon_range(theta, v, config.gravity) -
                      config.target_range;
  return -miss * miss;
}

Rollout cannon_rollout(const PolicyVector& pi, const CannonConfig& config,
                       RandomStream& stream) {
  const ControlSample command = cannon_policy(pi);
  const NoiseModel model = config.noise_model();

  StepRecord step;
  step.time = 0.0;
  step.control = command.control;
  step.sensitivity = command.sensitivity;
  if (config.noise_enabled) {
    const ControlCovariance covariance(step.control, model);
    step.noise = sample_noise(covariance, stream);
  } else {
    step.noise = Eigen::VectorXd::Zero(2);
  }
  const Eigen::VectorXd actual = step.control + step.noise;
  step.state = Eigen::Vector2d(
      std::clamp(actual[0], 0.0, std::numbers::pi / 2.0),
      std::max(actual[1], 1e-6));

  Rollout out;
  out.trial.seed = stream.seed();
  out.trial.response = cannon_response(actual[0], actual[1], config);
  out.trial.summary.noise_sum = step.noise;
  out.trial.summary.sensitivity_sum = step.sensitivity;
  out.trial.summary.step_count = 1;
  out.trial.steps.push_back(std::move(step));
  out.eligibility = cannon_eligibility(out.trial, config);
  return out;
}

EligibilityVector cannon_eligibility(const Trial& trial,
                                     const CannonConfig& config) {
  if (trial.steps.size() != 1) {
    throw InvalidArgument("cannon eligibility expects a one-step trial");
  }
  if (!config.noise_enabled) return EligibilityVector::Zero(2);
  Eigen::LLT<Eigen::Matrix2d> llt(config.noise_covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("cannon noise covariance is not positive definite");
  }
  return llt.solve(Eigen::Vector2d(trial.steps.front().noise));
}

FeatureMap noise_quadratic_features(Eigen::Index control_dim) {
  const Eigen::Index k = control_dim;
  FeatureMap map;
  map.name = "noise-quadratic";
  map.dimension = 1 + k + k * (k + 1) / 2;
  map.evaluate = [k, dim = map.dimension](const Trial& trial) {
    const Eigen::VectorXd& n = trial.summary.noise_sum;
    if (n.size() != k) {
      throw InvalidArgument("noise-quadratic: trial noise dimension mismatch");
    }
    Eigen::VectorXd phi(dim);
    phi[0] = 1.0;
    phi.segment(1, k) = n;
    Eigen::Index at = 1 + k;
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = i; j < k; ++j) phi[at++] = n[i] * n[j];
    }
    return phi;
  };
  map.analytic_g = [k, dim = map.dimension](const TrialBatch& batch) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(batch.policy_dimension(), dim);
    for (const auto& trial : batch.trials) {
      g.middleCols(1, k) += trial.summary.sensitivity_sum.transpose();
    }
    g /= static_cast<double>(batch.size());
    return g;
  };
  return map;
}

}  // namespace motorgrad
