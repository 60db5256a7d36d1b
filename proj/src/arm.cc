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

#include "motorgrad/arm.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

// Beyond these a trial is scored as diverged.
constexpr double kDivergedVelocity = 1e4;  // rad/s
constexpr double kDivergedTorque = 1e6;    // N m

// Lever arm of joint k's rotation on link i's center of mass.
double lever(const ArmConfig& c, int i, int k) {
  if (k < i) return c.link_lengths[k];
  if (k == i) return 0.5 * c.link_lengths[i];
  return 0.0;
}

struct ChainTerms {
  Eigen::Matrix3d coupling;       // a_kl; D = a_kl cos(phi_k - phi_l)
  Eigen::Vector3d gravity_moment;  // sum_i m_i l_ik
};

ChainTerms chain_terms(const ArmConfig& c) {
  ChainTerms t;
  t.coupling.setZero();
  t.gravity_moment.setZero();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      t.gravity_moment[k] += c.link_masses[i] * lever(c, i, k);
      for (int l = 0; l < 3; ++l) {
        t.coupling(k, l) += c.link_masses[i] * lever(c, i, k) * lever(c, i, l);
      }
    }
  }
  for (int k = 0; k < 3; ++k) t.coupling(k, k) += c.link_inertias[k];
  return t;
}

Eigen::Vector3d absolute(const Eigen::Vector3d& q) {
  return Eigen::Vector3d(q[0], q[0] + q[1], q[0] + q[1] + q[2]);
}

// Jacobian from relative to absolute joint coordinates.
const Eigen::Matrix3d& cumulative() {
  static const Eigen::Matrix3d t =
      (Eigen::Matrix3d() << 1, 0, 0, 1, 1, 0, 1, 1, 1).finished();
  return t;
}

Eigen::Matrix3d absolute_inertia(const Eigen::Vector3d& phi,
                                 const ChainTerms& terms) {
  Eigen::Matrix3d d;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      d(k, l) = terms.coupling(k, l) * std::cos(phi[k] - phi[l]);
    }
  }
  return d;
}

}  // namespace

void ArmConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(link_lengths[i] > 0.0) || !(link_masses[i] > 0.0) ||
        !(link_inertias[i] > 0.0)) {
      throw InvalidArgument("arm: link lengths, masses and inertias must be "
                            "positive");
    }
  }
  if (!(integration_dt > 0.0)) throw InvalidArgument("arm: dt must be > 0");
  if (!(release_time_sigma >= 0.0)) {
    throw InvalidArgument("arm: release time sigma must be >= 0");
  }
  if (!(max_miss_distance > 0.0)) {
    throw InvalidArgument("arm: max miss distance must be > 0");
  }
  if (!(nominal_release_time > 0.0)) {
    throw InvalidArgument("arm: nominal release time must be > 0");
  }
  noise_model.validate();
  if (noise_model.dimension() != 3) {
    throw InvalidArgument("arm: noise model must be 3-dimensional");
  }
}

NoiseModel ArmConfig::default_noise_model() {
  NoiseModel model;
  model.scaling_matrices.push_back(0.2 * Eigen::MatrixXd::Identity(3, 3));
  model.base_covariance = 0.05 * 0.05 * Eigen::MatrixXd::Identity(3, 3);
  return model;
}

Eigen::VectorXd ArmState::stacked() const {
  Eigen::VectorXd x(6);
  x << joint_angles, joint_velocities;
  return x;
}

namespace {

Eigen::Matrix3d mass_matrix(const Eigen::Vector3d& q, const ChainTerms& terms) {
  const Eigen::Matrix3d& t = cumulative();
  return t.transpose() * absolute_inertia(absolute(q), terms) * t;
}

Eigen::Vector3d bias_torques(const Eigen::Vector3d& q,
                             const Eigen::Vector3d& qdot,
                             const ChainTerms& terms, double gravity) {
  const Eigen::Vector3d phi = absolute(q);
  const Eigen::Vector3d phidot = cumulative() * qdot;
  Eigen::Vector3d h;
  for (int k = 0; k < 3; ++k) {
    double centrifugal = 0.0;
    for (int l = 0; l < 3; ++l) {
      centrifugal += terms.coupling(k, l) * std::sin(phi[k] - phi[l]) *
                     phidot[l] * phidot[l];
    }
    h[k] = centrifugal + gravity * terms.gravity_moment[k] * std::sin(phi[k]);
  }
  return cumulative().transpose() * h;
}

ArmState integrate(const ArmState& state, const Eigen::Vector3d& torque,
                   const ChainTerms& terms, double gravity, double dt) {
  const Eigen::LLT<Eigen::Matrix3d> llt(mass_matrix(state.joint_angles, terms));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("arm mass matrix is not positive definite");
  }
  const Eigen::Vector3d qddot = llt.solve(
      torque -
      bias_torques(state.joint_angles, state.joint_velocities, terms, gravity));
  ArmState next;
  next.joint_velocities = state.joint_velocities + dt * qddot;
  next.joint_angles = state.joint_angles + dt * next.joint_velocities;
  return next;
}

}  // namespace

Eigen::Matrix3d mass_matrix(const Eigen::Vector3d& q, const ArmConfig& config) {
  return mass_matrix(q, chain_terms(config));
}

Eigen::Vector3d bias_torques(const Eigen::Vector3d& q,
                             const Eigen::Vector3d& qdot,
                             const ArmConfig& config) {
  return bias_torques(q, qdot, chain_terms(config), config.gravity);
}

double kinetic_energy(const ArmState& state, const ArmConfig& config) {
  const Eigen::Vector3d& v = state.joint_velocities;
  return 0.5 * v.dot(mass_matrix(state.joint_angles, config) * v);
}

ArmState arm_dynamics_step(const ArmState& state,
                           const Eigen::Vector3d& applied_torque,
                           const ArmConfig& config) {
  return integrate(state, applied_torque, chain_terms(config), config.gravity,
                   config.integration_dt);
}

TipKinematics forward_kinematics(const Eigen::Vector3d& q,
                                 const Eigen::Vector3d& qdot,
                                 const ArmConfig& config) {
  const Eigen::Vector3d phi = absolute(q);
  const Eigen::Vector3d phidot = cumulative() * qdot;
  TipKinematics tip{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  for (int k = 0; k < 3; ++k) {
    const double len = config.link_lengths[k];
    tip.position += len * Eigen::Vector2d(std::cos(phi[k]), std::sin(phi[k]));
    tip.velocity +=
        len * phidot[k] * Eigen::Vector2d(-std::sin(phi[k]), std::cos(phi[k]));
  }
  return tip;
}

Eigen::Vector2d arm_to_world(const Eigen::Vector2d& arm) {
  return Eigen::Vector2d(arm.y(), -arm.x());
}

std::optional<double> ballistic_impact_height(const Eigen::Vector2d& position,
                                              const Eigen::Vector2d& velocity,
                                              double wall_distance,
                                              double gravity) {
  const double gap = wall_distance - position.x();
  if (gap == 0.0) return position.y();
  if (gap < 0.0 || !(velocity.x() > 0.0)) return std::nullopt;
  const double flight = gap / velocity.x();
  return position.y() + velocity.y() * flight -
         0.5 * gravity * flight * flight;
}

double dart_miss_distance(const Eigen::Vector2d& world_position,
                          const Eigen::Vector2d& world_velocity,
                          const ArmConfig& config) {
  const auto height = ballistic_impact_height(
      world_position, world_velocity, config.wall_distance, config.gravity);
  if (!height || !std::isfinite(*height)) return config.max_miss_distance;
  return std::min(std::abs(*height - config.bullseye_height),
                  config.max_miss_distance);
}

Rollout dart_rollout(const PolicyVector& pi, const ArmConfig& config,
                     const PDController& controller, RandomStream& stream,
                     Recording recording) {
  const bool keep_steps = recording == Recording::kSteps;
  const bool score = recording != Recording::kResponseOnly;
  const Eigen::Index d = controller.desired_trajectory.num_parameters();
  if (pi.size() != d) {
    throw InvalidArgument("dart rollout: policy has dimension " +
                          std::to_string(pi.size()) + ", expected " +
                          std::to_string(d));
  }
  PDController active{controller.gain_matrix,
                      controller.desired_trajectory.with_parameters(pi)};
  const NoiseModel& model = config.noise_model;

  Rollout out;
  Trial& trial = out.trial;
  trial.seed = stream.seed();
  const double release_time =
      config.nominal_release_time + config.release_time_sigma * stream.normal();
  trial.release_time = release_time;
  trial.summary.noise_sum = Eigen::VectorXd::Zero(3);
  trial.summary.sensitivity_sum = Eigen::MatrixXd::Zero(3, d);
  out.eligibility = EligibilityVector::Zero(d);

  const double dt = config.integration_dt;
  const auto num_steps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(release_time / dt - 1e-9)));
  if (keep_steps) trial.steps.reserve(num_steps);

  const ChainTerms terms = chain_terms(config);
  const Eigen::MatrixXd& gains = active.gain_matrix;
  const SplineTrajectory& spline = active.desired_trajectory;
  const Eigen::Index nk = spline.num_free_knots();
  Eigen::VectorXd value_weights;
  Eigen::VectorXd velocity_weights;
  Eigen::MatrixXd desired_sensitivity = Eigen::MatrixXd::Zero(6, d);
  Eigen::VectorXd desired(6);

  ArmState state;
  state.joint_angles = config.start_posture;
  for (std::size_t k = 0; k < num_steps; ++k) {
    StepRecord step;
    step.time = static_cast<double>(k) * dt;
    step.state = state.stacked();

    // Same quantities as pd_control, without per-step temporaries.
    spline.basis(step.time, value_weights, velocity_weights);
    desired.head(3) = value_weights[0] * spline.start_value() +
                      spline.knots().transpose() * value_weights.tail(nk);
    desired.tail(3) = velocity_weights[0] * spline.start_value() +
                      spline.knots().transpose() * velocity_weights.tail(nk);
    for (Eigen::Index j = 0; j < 3; ++j) {
      desired_sensitivity.row(j).segment(j * nk, nk) =
          value_weights.tail(nk).transpose();
      desired_sensitivity.row(3 + j).segment(j * nk, nk) =
          velocity_weights.tail(nk).transpose();
    }
    step.control = gains * (desired - step.state);
    step.sensitivity = gains * desired_sensitivity;
    if (!step.control.allFinite() ||
        step.control.cwiseAbs().maxCoeff() > kDivergedTorque) {
      trial.diverged = true;
      break;
    }

    if (config.noise_enabled) {
      const ControlCovariance covariance(step.control, model);
      step.noise = sample_noise(covariance, stream);
      if (score) out.eligibility += step_eligibility(step, model, covariance);
    } else {
      step.noise = Eigen::VectorXd::Zero(3);
    }
    trial.summary.noise_sum += step.noise;
    trial.summary.sensitivity_sum += step.sensitivity;
    ++trial.summary.step_count;

    state = integrate(state, step.control + step.noise, terms, config.gravity,
                      dt);
    if (keep_steps) trial.steps.push_back(std::move(step));
    if (!state.joint_angles.allFinite() || !state.joint_velocities.allFinite() ||
        state.joint_velocities.cwiseAbs().maxCoeff() > kDivergedVelocity) {
      trial.diverged = true;
      break;
    }
  }

  if (trial.diverged) {
    trial.response = -config.max_miss_distance * config.max_miss_distance;
    return out;
  }
  const TipKinematics tip =
      forward_kinematics(state.joint_angles, state.joint_velocities, config);
  const double miss = dart_miss_distance(arm_to_world(tip.position),
                                         arm_to_world(tip.velocity), config);
  trial.response = -miss * miss;
  return out;
}

FeatureMap release_time_features() {
  FeatureMap map;
  map.name = "release-time";
  map.dimension = 3;
  map.evaluate = [](const Trial& trial) {
    if (!trial.release_time) {
      throw InvalidArgument("release-time features need a release time");
    }
    const double t = *trial.release_time;
    return Eigen::Vector3d(1.0, t, t * t).eval();
  };
  map.analytic_g = [](const TrialBatch& batch) {
    return Eigen::MatrixXd::Zero(batch.policy_dimension(), 3);
  };
  return map;
}

FeatureMap noise_sum_features(Eigen::Index control_dim) {
  const Eigen::Index k = control_dim;
  FeatureMap map;
  map.name = "noise-sum";
  map.dimension = 1 + k;
  map.evaluate = [k](const Trial& trial) {
    if (trial.summary.noise_sum.size() != k) {
      throw InvalidArgument("noise-sum: trial noise dimension mismatch");
    }
    Eigen::VectorXd phi(1 + k);
    phi << 1.0, trial.summary.noise_sum;
    return phi;
  };
  map.analytic_g = [k](const TrialBatch& batch) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(batch.policy_dimension(), 1 + k);
    for (const auto& trial : batch.trials) {
      g.rightCols(k) += trial.summary.sensitivity_sum.transpose();
    }
    g /= static_cast<double>(batch.size());
    return g;
  };
  return map;
}

PDController default_arm_controller(const ArmConfig& config) {
  Eigen::MatrixXd knots(3, 3);
  // rows: knot times 1..3; columns: shoulder, elbow, wrist
  knots << -0.2, -0.6, -0.6,
            0.6, -0.5, -0.3,
            1.2,  0.0,  0.4;
  Eigen::MatrixXd gains = Eigen::MatrixXd::Zero(3, 6);
  gains.leftCols(3).diagonal() << 60.0, 25.0, 6.0;
  gains.rightCols(3).diagonal() << 6.0, 1.5, 0.25;
  return PDController{
      gains,
      SplineTrajectory::uniform(config.start_posture, knots, 0.25)};
}

}  // namespace motorgrad
