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

#ifndef MOTORGRAD_NOISE_H_
#define MOTORGRAD_NOISE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "motorgrad/random.h"

namespace motorgrad {

using EligibilityVector = Eigen::VectorXd;

// Signal-dependent Gaussian control noise:
//
//   Sigma(u) = sum_j C_j u u^T C_j^T + Sigma_0
//
// Sigma_0 must be strictly positive definite so that Sigma(u) is invertible
// for every command u.
struct NoiseModel {
  std::vector<Eigen::MatrixXd> scaling_matrices;
  Eigen::MatrixXd base_covariance;

  Eigen::Index dimension() const { return base_covariance.rows(); }
  bool additive_only() const { return scaling_matrices.empty(); }

  // Throws InvalidArgument on shape problems and NumericalError when
  // Sigma_0 is asymmetric or fails Cholesky.
  void validate() const;

  static NoiseModel additive(const Eigen::MatrixXd& covariance);
};

// One simulated time step. The noise is recorded when it is sampled, so the
// realized control is always control + noise.
struct StepRecord {
  double time = 0.0;
  Eigen::VectorXd state;
  Eigen::VectorXd control;
  Eigen::VectorXd noise;
  Eigen::MatrixXd sensitivity;  // d control / d policy, control-dim x d
};

// Per-trial aggregates that survive when step records are not retained.
struct TrialSummary {
  Eigen::VectorXd noise_sum;
  Eigen::MatrixXd sensitivity_sum;
  std::size_t step_count = 0;
};

struct Trial {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::optional<double> release_time;
  double response = 0.0;
  bool diverged = false;
  TrialSummary summary;
};

// A trial with the score of its history, computed while the trial ran.
struct Rollout {
  Trial trial;
  EligibilityVector eligibility;
};

// Sigma(u) together with its Cholesky factor.
class ControlCovariance {
 public:
  ControlCovariance(const Eigen::VectorXd& u, const NoiseModel& model);

  const Eigen::MatrixXd& matrix() const { return sigma_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const { return llt_; }
  double log_determinant() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::MatrixXd sigma_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

Eigen::MatrixXd control_covariance(const Eigen::VectorXd& u,
                                   const NoiseModel& model);

// d Sigma(u) / d pi_i for a control that moves by du_dpi_i per unit pi_i.
Eigen::MatrixXd covariance_gradient(const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& du_dpi_i,
                                    const NoiseModel& model);

Eigen::VectorXd sample_noise(const Eigen::VectorXd& u, const NoiseModel& model,
                             RandomStream& stream);
Eigen::VectorXd sample_noise(const ControlCovariance& covariance,
                             RandomStream& stream);

// Log Gaussian density of the step's noise, normalization constant included.
double step_log_likelihood(const StepRecord& step, const NoiseModel& model);

// Sum of step log-likelihoods over the recorded steps.
double trial_log_likelihood(const Trial& trial, const NoiseModel& model);

// Score of one step with respect to the policy: the trace term, the mean-shift
// term and the covariance-shape term. The first and last vanish for purely
// additive noise.
EligibilityVector step_eligibility(const StepRecord& step,
                                   const NoiseModel& model);
EligibilityVector step_eligibility(const StepRecord& step,
                                   const NoiseModel& model,
                                   const ControlCovariance& covariance);

EligibilityVector history_eligibility(const Trial& trial,
                                      const NoiseModel& model);

}  // namespace motorgrad

#endif  // MOTORGRAD_NOISE_H_
