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

#include "motorgrad/noise.h"

#include <cmath>
#include <numbers>
#include <string>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

void check_control(const Eigen::VectorXd& u, const NoiseModel& model,
                   const char* what) {
  if (u.size() != model.dimension()) {
    throw InvalidArgument(std::string(what) + ": control has dimension " +
                          std::to_string(u.size()) + ", noise model has " +
                          std::to_string(model.dimension()));
  }
}

void check_step(const StepRecord& step, const NoiseModel& model) {
  check_control(step.control, model, "step");
  if (step.noise.size() != step.control.size()) {
    throw InvalidArgument("step: noise and control dimensions differ");
  }
}

}  // namespace

void NoiseModel::validate() const {
  const Eigen::Index k = base_covariance.rows();
  if (k == 0 || base_covariance.cols() != k) {
    throw InvalidArgument("noise model: base covariance must be square and "
                          "nonempty");
  }
  for (const auto& c : scaling_matrices) {
    if (c.rows() != k || c.cols() != k) {
      throw InvalidArgument("noise model: scaling matrix shape does not match "
                            "base covariance");
    }
  }
  const double scale = base_covariance.cwiseAbs().maxCoeff();
  if ((base_covariance - base_covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * scale) {
    throw NumericalError("noise model: base covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(base_covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "noise model: base covariance is not positive definite");
  }
}

NoiseModel NoiseModel::additive(const Eigen::MatrixXd& covariance) {
  NoiseModel model;
  model.base_covariance = covariance;
  return model;
}

ControlCovariance::ControlCovariance(const Eigen::VectorXd& u,
                                     const NoiseModel& model)
    : sigma_(model.base_covariance) {
  check_control(u, model, "control covariance");
  for (const auto& c : model.scaling_matrices) {
    const Eigen::VectorXd cu = c * u;
    sigma_.noalias() += cu * cu.transpose();
  }
  llt_.compute(sigma_);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("control covariance is not positive definite");
  }
}

double ControlCovariance::log_determinant() const {
  const Eigen::MatrixXd& l = llt_.matrixLLT();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) sum += std::log(l(i, i));
  return 2.0 * sum;
}

Eigen::VectorXd ControlCovariance::solve(const Eigen::VectorXd& rhs) const {
  return llt_.solve(rhs);
}

Eigen::MatrixXd ControlCovariance::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(sigma_.rows(), sigma_.cols()));
}

Eigen::MatrixXd control_covariance(const Eigen::VectorXd& u,
                                   const NoiseModel& model) {
  return ControlCovariance(u, model).matrix();
}

Eigen::MatrixXd covariance_gradient(const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& du_dpi_i,
                                    const NoiseModel& model) {
  check_control(u, model, "covariance gradient");
  check_control(du_dpi_i, model, "covariance gradient");
  const Eigen::Index k = model.dimension();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(k, k);
  for (const auto& c : model.scaling_matrices) {
    const Eigen::VectorXd cu = c * u;
    const Eigen::VectorXd cdu = c * du_dpi_i;
    grad.noalias() += cu * cdu.transpose();
    grad.noalias() += cdu * cu.transpose();
  }
  return grad;
}

Eigen::VectorXd sample_noise(const Eigen::VectorXd& u, const NoiseModel& model,
                             RandomStream& stream) {
  return sample_noise(ControlCovariance(u, model), stream);
}

Eigen::VectorXd sample_noise(const ControlCovariance& covariance,
                             RandomStream& stream) {
  const Eigen::VectorXd z = stream.standard_normal(covariance.matrix().rows());
  return covariance.cholesky().matrixL() * z;
}

double step_log_likelihood(const StepRecord& step, const NoiseModel& model) {
  check_step(step, model);
  const ControlCovariance cov(step.control, model);
  const double k = static_cast<double>(step.noise.size());
  const double quad = step.noise.dot(cov.solve(step.noise));
  return -0.5 * k * std::log(2.0 * std::numbers::pi) -
         0.5 * cov.log_determinant() - 0.5 * quad;
}

double trial_log_likelihood(const Trial& trial, const NoiseModel& model) {
  double total = 0.0;
  for (const auto& step : trial.steps) total += step_log_likelihood(step, model);
  return total;
}

EligibilityVector step_eligibility(const StepRecord& step,
                                   const NoiseModel& model) {
  check_step(step, model);
  return step_eligibility(step, model, ControlCovariance(step.control, model));
}

EligibilityVector step_eligibility(const StepRecord& step,
                                   const NoiseModel& model,
                                   const ControlCovariance& covariance) {
  if (step.sensitivity.rows() != step.control.size()) {
    throw InvalidArgument("step: sensitivity rows must equal control dimension");
  }
  // With a_j = C_j u, c_j = C_j du_i and w = Sigma^{-1} n:
  //   -1/2 Tr(Sigma^{-1} dSigma_i)      = -c_j^T Sigma^{-1} a_j
  //   1/2 w^T dSigma_i w                = (w^T a_j)(w^T c_j)
  // so every component is du_i^T (w + sum_j C_j^T (w w^T a_j - Sigma^{-1} a_j)).
  const Eigen::VectorXd w = covariance.solve(step.noise);
  Eigen::VectorXd direction = w;
  for (const auto& c : model.scaling_matrices) {
    const Eigen::VectorXd a = c * step.control;
    direction.noalias() +=
        c.transpose() * (w.dot(a) * w - covariance.solve(a));
  }
  return step.sensitivity.transpose() * direction;
}

EligibilityVector history_eligibility(const Trial& trial,
                                      const NoiseModel& model) {
  if (trial.steps.empty()) {
    throw InvalidArgument("history eligibility: trial has no step records");
  }
  EligibilityVector total =
      EligibilityVector::Zero(trial.steps.front().sensitivity.cols());
  for (const auto& step : trial.steps) {
    const EligibilityVector e = step_eligibility(step, model);
    if (e.size() != total.size()) {
      throw InvalidArgument("history eligibility: policy dimension changes "
                            "between steps");
    }
    total += e;
  }
  return total;
}

}  // namespace motorgrad
