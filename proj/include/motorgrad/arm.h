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

#ifndef MOTORGRAD_ARM_H_
#define MOTORGRAD_ARM_H_

#include <array>
#include <optional>

#include <Eigen/Core>

#include "motorgrad/estimators.h"
#include "motorgrad/noise.h"
#include "motorgrad/policies.h"
#include "motorgrad/random.h"

namespace motorgrad {

// Planar three-link arm (upper arm, forearm, hand) in a vertical plane with
// revolute joints. Joint angles are relative; the shoulder angle is measured
// from the downward vertical, so q = 0 hangs straight down. World frame: x
// points toward the wall, y up, origin at the shoulder.
struct ArmConfig {
  std::array<double, 3> link_lengths{0.30, 0.25, 0.15};
  std::array<double, 3> link_masses{2.1, 1.2, 0.5};
  std::array<double, 3> link_inertias{2.1 * 0.30 * 0.30 / 12.0,
                                      1.2 * 0.25 * 0.25 / 12.0,
                                      0.5 * 0.15 * 0.15 / 12.0};
  double gravity = 9.81;
  Eigen::Vector3d start_posture{-0.6, -0.4, -0.3};
  double integration_dt = 1e-4;
  double nominal_release_time = 0.2;
  double release_time_sigma = 0.01;
  double wall_distance = 2.5;
  double bullseye_height = 0.0;
  double max_miss_distance = 10.0;
  NoiseModel noise_model = default_noise_model();
  bool noise_enabled = true;

  void validate() const;

  // M = 1, C_1 = 0.2 I, Sigma_0 = (0.05 N m)^2 I.
  static NoiseModel default_noise_model();
};

struct ArmState {
  Eigen::Vector3d joint_angles = Eigen::Vector3d::Zero();
  Eigen::Vector3d joint_velocities = Eigen::Vector3d::Zero();

  Eigen::VectorXd stacked() const;
};

// Joint-space mass matrix M(q).
Eigen::Matrix3d mass_matrix(const Eigen::Vector3d& q, const ArmConfig& config);

// Coriolis, centrifugal and gravity torques c(q, qdot) + g(q).
Eigen::Vector3d bias_torques(const Eigen::Vector3d& q,
                             const Eigen::Vector3d& qdot,
                             const ArmConfig& config);

double kinetic_energy(const ArmState& state, const ArmConfig& config);

// One semi-implicit Euler step of M(q) qddot + c + g = tau.
ArmState arm_dynamics_step(const ArmState& state,
                           const Eigen::Vector3d& applied_torque,
                           const ArmConfig& config);

struct TipKinematics {
  Eigen::Vector2d position;
  Eigen::Vector2d velocity;
};

// Hand tip in the arm frame, whose x axis is the zero-angle (hanging)
// direction and whose y axis points toward the wall.
TipKinematics forward_kinematics(const Eigen::Vector3d& q,
                                 const Eigen::Vector3d& qdot,
                                 const ArmConfig& config);

// Arm frame to world frame (rotation by -90 degrees).
Eigen::Vector2d arm_to_world(const Eigen::Vector2d& arm);

// Height at which a projectile released at `position` with `velocity` meets
// the plane x = wall_distance, or nullopt if it never gets there.
std::optional<double> ballistic_impact_height(const Eigen::Vector2d& position,
                                              const Eigen::Vector2d& velocity,
                                              double wall_distance,
                                              double gravity);

// Miss distance for a release, capped at max_miss_distance.
double dart_miss_distance(const Eigen::Vector2d& world_position,
                          const Eigen::Vector2d& world_velocity,
                          const ArmConfig& config);

// What a rollout keeps besides the response.
enum class Recording {
  kSteps,         // step records, summary and eligibility
  kSummary,       // summary and eligibility
  kResponseOnly,  // no eligibility; used by finite differences
};

// Seeded throw under PD tracking of the spline set by `pi`. Stream draws: the
// release time first, then one standard-normal vector per integration step,
// so equal seeds give common random numbers across policies.
Rollout dart_rollout(const PolicyVector& pi, const ArmConfig& config,
                     const PDController& controller, RandomStream& stream,
                     Recording recording = Recording::kSteps);

// (1, t_r, t_r^2). Release time does not depend on the policy, so G = 0.
FeatureMap release_time_features();

// (1, sum_t n_t) with G = [0, mean(sum_t du_t/dpi)^T].
FeatureMap noise_sum_features(Eigen::Index control_dim);

// Default tracking controller: 4-knot spline over [0, 0.25] s with per-joint
// gains kp = (60, 25, 6), kd = (6, 1.5, 0.25).
PDController default_arm_controller(const ArmConfig& config);

}  // namespace motorgrad

#endif  // MOTORGRAD_ARM_H_
