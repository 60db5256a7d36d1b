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

#include "motorgrad/policies.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/LU>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

// Second-derivative map for a clamped-start (zero slope), natural-end cubic.
Eigen::MatrixXd moment_map(const std::vector<double>& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);
  const double h0 = t[1] - t[0];
  lhs(0, 0) = 2.0 * h0;
  lhs(0, 1) = h0;
  rhs(0, 0) = -6.0 / h0;
  rhs(0, 1) = 6.0 / h0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double hl = t[i] - t[i - 1];
    const double hr = t[i + 1] - t[i];
    lhs(i, i - 1) = hl;
    lhs(i, i) = 2.0 * (hl + hr);
    lhs(i, i + 1) = hr;
    rhs(i, i - 1) = 6.0 / hl;
    rhs(i, i) = -6.0 / hl - 6.0 / hr;
    rhs(i, i + 1) = 6.0 / hr;
  }
  lhs(n - 1, n - 1) = 1.0;
  return lhs.partialPivLu().solve(rhs);
}

}  // namespace

SplineTrajectory::SplineTrajectory(Eigen::VectorXd start_value,
                                   Eigen::MatrixXd knots,
                                   std::vector<double> knot_times)
    : start_value_(std::move(start_value)),
      knots_(std::move(knots)),
      knot_times_(std::move(knot_times)) {
  if (knot_times_.size() < 2) {
    throw InvalidArgument("spline needs at least 2 knots");
  }
  if (static_cast<Eigen::Index>(knot_times_.size()) != knots_.rows() + 1) {
    throw InvalidArgument("spline: need one knot time per free knot plus the "
                          "start");
  }
  if (knots_.cols() != start_value_.size()) {
    throw InvalidArgument("spline: knot columns must equal joint count");
  }
  for (std::size_t i = 1; i < knot_times_.size(); ++i) {
    if (!(knot_times_[i] > knot_times_[i - 1])) {
      throw InvalidArgument("spline: knot times must be strictly increasing");
    }
  }
  moment_map_ = moment_map(knot_times_);
}

SplineTrajectory SplineTrajectory::uniform(Eigen::VectorXd start_value,
                                           Eigen::MatrixXd knots,
                                           double t_max) {
  if (!(t_max > 0.0)) throw InvalidArgument("spline: t_max must be positive");
  const auto free = static_cast<std::size_t>(knots.rows());
  std::vector<double> times(free + 1);
  for (std::size_t i = 0; i <= free; ++i) {
    times[i] = t_max * static_cast<double>(i) / static_cast<double>(free);
  }
  return SplineTrajectory(std::move(start_value), std::move(knots),
                          std::move(times));
}

PolicyVector SplineTrajectory::parameters() const {
  PolicyVector p(num_parameters());
  const Eigen::Index nk = num_free_knots();
  for (Eigen::Index j = 0; j < num_joints(); ++j) {
    for (Eigen::Index k = 0; k < nk; ++k) p[j * nk + k] = knots_(k, j);
  }
  return p;
}

SplineTrajectory SplineTrajectory::with_parameters(const PolicyVector& p) const {
  if (p.size() != num_parameters()) {
    throw InvalidArgument("spline: expected " +
                          std::to_string(num_parameters()) + " parameters");
  }
  SplineTrajectory out = *this;
  const Eigen::Index nk = num_free_knots();
  for (Eigen::Index j = 0; j < num_joints(); ++j) {
    for (Eigen::Index k = 0; k < nk; ++k) out.knots_(k, j) = p[j * nk + k];
  }
  return out;
}

void SplineTrajectory::basis(double t, Eigen::VectorXd& value_weights,
                             Eigen::VectorXd& velocity_weights) const {
  const auto n = static_cast<Eigen::Index>(knot_times_.size());
  value_weights.setZero(n);
  velocity_weights.setZero(n);
  if (t <= knot_times_.front()) {
    value_weights[0] = 1.0;
    return;
  }
  if (t > knot_times_.back()) {
    value_weights[n - 1] = 1.0;
    return;
  }
  const auto it =
      std::upper_bound(knot_times_.begin(), knot_times_.end(), t);
  Eigen::Index k = std::min<Eigen::Index>(
      static_cast<Eigen::Index>(it - knot_times_.begin()) - 1, n - 2);
  const double h = knot_times_[k + 1] - knot_times_[k];
  const double a = (knot_times_[k + 1] - t) / h;
  const double b = (t - knot_times_[k]) / h;

  value_weights[k] += a;
  value_weights[k + 1] += b;
  value_weights += (h * h / 6.0) * ((a * a * a - a) * moment_map_.row(k) +
                                    (b * b * b - b) * moment_map_.row(k + 1))
                                       .transpose();
  velocity_weights[k] -= 1.0 / h;
  velocity_weights[k + 1] += 1.0 / h;
  velocity_weights += (h / 6.0) * (-(3.0 * a * a - 1.0) * moment_map_.row(k) +
                                   (3.0 * b * b - 1.0) * moment_map_.row(k + 1))
                                      .transpose();
}

SplineSample SplineTrajectory::evaluate(double t) const {
  Eigen::VectorXd wv;
  Eigen::VectorXd wd;
  basis(t, wv, wd);
  const Eigen::Index joints = num_joints();
  const Eigen::Index nk = num_free_knots();

  SplineSample s;
  s.value = wv[0] * start_value_ + knots_.transpose() * wv.tail(nk);
  s.velocity = wd[0] * start_value_ + knots_.transpose() * wd.tail(nk);
  s.value_sensitivity = Eigen::MatrixXd::Zero(joints, num_parameters());
  s.velocity_sensitivity = Eigen::MatrixXd::Zero(joints, num_parameters());
  for (Eigen::Index j = 0; j < joints; ++j) {
    s.value_sensitivity.row(j).segment(j * nk, nk) = wv.tail(nk).transpose();
    s.velocity_sensitivity.row(j).segment(j * nk, nk) = wd.tail(nk).transpose();
  }
  return s;
}

SplineSample spline_value_and_sensitivity(const SplineTrajectory& traj,
                                          double t) {
  return traj.evaluate(t);
}

ControlSample open_loop_control(const SplineTrajectory& traj, double t) {
  SplineSample s = traj.evaluate(t);
  return ControlSample{std::move(s.value), std::move(s.value_sensitivity)};
}

Eigen::MatrixXd PDController::diagonal_gains(Eigen::Index joints, double kp,
                                             double kd) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(joints, 2 * joints);
  for (Eigen::Index j = 0; j < joints; ++j) {
    k(j, j) = kp;
    k(j, joints + j) = kd;
  }
  return k;
}

ControlSample pd_control(const PDController& controller,
                         const Eigen::VectorXd& state, double t) {
  const Eigen::MatrixXd& k = controller.gain_matrix;
  const Eigen::Index joints = controller.desired_trajectory.num_joints();
  if (state.size() != 2 * joints || k.cols() != state.size()) {
    throw InvalidArgument("pd control: state dimension does not match gains");
  }
  const SplineSample s = controller.desired_trajectory.evaluate(t);
  Eigen::VectorXd desired(2 * joints);
  desired << s.value, s.velocity;
  Eigen::MatrixXd desired_sensitivity(2 * joints, s.value_sensitivity.cols());
  desired_sensitivity << s.value_sensitivity, s.velocity_sensitivity;
  return ControlSample{k * (desired - state), k * desired_sensitivity};
}

ControlSample cannon_policy(const PolicyVector& pi) {
  if (pi.size() != 2) throw InvalidArgument("cannon policy is (angle, speed)");
  if (!(pi[0] >= 0.0 && pi[0] <= std::numbers::pi / 2.0)) {
    throw InvalidArgument("cannon angle must lie in [0, pi/2]");
  }
  if (!(pi[1] > 0.0) || !std::isfinite(pi[1])) {
    throw InvalidArgument("cannon speed must be positive");
  }
  return ControlSample{pi, Eigen::MatrixXd::Identity(2, 2)};
}

}  // namespace motorgrad
