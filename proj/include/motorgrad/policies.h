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

#ifndef MOTORGRAD_POLICIES_H_
#define MOTORGRAD_POLICIES_H_

#include <vector>

#include <Eigen/Core>

namespace motorgrad {

using PolicyVector = Eigen::VectorXd;

// Control (or desired-state) value at one instant and its derivative with
// respect to the policy parameters.
struct ControlSample {
  Eigen::VectorXd control;
  Eigen::MatrixXd sensitivity;  // control-dim x policy-dim
};

struct SplineSample {
  Eigen::VectorXd value;
  Eigen::VectorXd velocity;
  Eigen::MatrixXd value_sensitivity;     // joints x parameters
  Eigen::MatrixXd velocity_sensitivity;  // joints x parameters
};

// Per-joint cubic interpolation through a fixed start value and free knots.
// The start has zero slope (the arm begins at rest) and the end is natural.
// Parameters are ordered joint-major: p[j * free_knots + k] is knot k of
// joint j. Outside the knot span the spline holds the boundary value with
// zero velocity.
class SplineTrajectory {
 public:
  SplineTrajectory(Eigen::VectorXd start_value, Eigen::MatrixXd knots,
                   std::vector<double> knot_times);

  // knots.rows() free knots evenly spaced on (0, t_max].
  static SplineTrajectory uniform(Eigen::VectorXd start_value,
                                  Eigen::MatrixXd knots, double t_max);

  Eigen::Index num_joints() const { return start_value_.size(); }
  Eigen::Index num_free_knots() const { return knots_.rows(); }
  Eigen::Index num_parameters() const { return knots_.size(); }

  const Eigen::VectorXd& start_value() const { return start_value_; }
  const Eigen::MatrixXd& knots() const { return knots_; }
  const std::vector<double>& knot_times() const { return knot_times_; }

  PolicyVector parameters() const;
  SplineTrajectory with_parameters(const PolicyVector& p) const;

  SplineSample evaluate(double t) const;

  // Basis weights over all knots (start first) for value and time derivative.
  // These depend only on t and the knot times.
  void basis(double t, Eigen::VectorXd& value_weights,
             Eigen::VectorXd& velocity_weights) const;

 private:
  Eigen::VectorXd start_value_;
  Eigen::MatrixXd knots_;  // free knots x joints
  std::vector<double> knot_times_;
  Eigen::MatrixXd moment_map_;  // knot values -> second derivatives
};

SplineSample spline_value_and_sensitivity(const SplineTrajectory& traj,
                                          double t);

ControlSample open_loop_control(const SplineTrajectory& traj, double t);

// u = K (x* - x) tracking a spline, x* = (q*, qdot*).
struct PDController {
  Eigen::MatrixXd gain_matrix;  // control-dim x 2*joints
  SplineTrajectory desired_trajectory;

  // Block gains: kp on positions and kd on velocities, per joint.
  static Eigen::MatrixXd diagonal_gains(Eigen::Index joints, double kp,
                                        double kd);
};

// Sensitivity is K dx*/dpi with the current state treated as fixed.
ControlSample pd_control(const PDController& controller,
                         const Eigen::VectorXd& state, double t);

// Cannon: the command is the policy (angle, speed) itself.
ControlSample cannon_policy(const PolicyVector& pi);

}  // namespace motorgrad

#endif  // MOTORGRAD_POLICIES_H_
