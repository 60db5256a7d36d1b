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

#include "motorgrad/verification.h"

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "motorgrad/errors.h"
#include "motorgrad/parallel.h"
#include "motorgrad/random.h"
#include "motorgrad/statistics.h"

namespace motorgrad {
namespace {

constexpr int kEstimatorBlocks = 10;

enum CheckStream : std::uint64_t {
  kScoreStream = 1,
  kLikelihoodStream,
  kUnbiasedStream,
  kMassStream,
  kEnergyStream,
  kGStream,
};

CheckResult make_check(std::string name, double measured, double threshold,
                       bool at_most, std::string detail = "") {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.comparison = at_most ? "<=" : "<";
  c.passed = std::isfinite(measured) &&
             (at_most ? measured <= threshold : measured < threshold);
  c.detail = std::move(detail);
  return c;
}

CheckResult failed_check(std::string name, double threshold,
                         std::string comparison, std::string detail) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = std::numeric_limits<double>::quiet_NaN();
  c.threshold = threshold;
  c.comparison = std::move(comparison);
  c.detail = std::move(detail);
  return c;
}

// Largest |mean| / standard error over the columns of `samples`.
double max_abs_z(const Eigen::MatrixXd& samples) {
  Eigen::VectorXd mean;
  Eigen::VectorXd error;
  column_mean_and_error(samples, mean, error);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (error[i] == 0.0) {
      if (mean[i] != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(mean[i]) / error[i]);
  }
  return worst;
}

Eigen::MatrixXd eligibility_rows(const TrialBatch& batch) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(batch.size()),
                       batch.policy_dimension());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = batch.eligibilities[i].transpose();
  }
  return rows;
}

std::vector<PolicyVector> score_policies(const Environment& env,
                                         int count, std::uint64_t seed) {
  RandomStream stream(seed);
  std::vector<PolicyVector> out{env.initial_policy()};
  while (static_cast<int>(out.size()) < count) {
    PolicyVector pi = env.initial_policy();
    if (env.name() == "cannon") {
      pi[0] = 0.5 + 0.5 * stream.uniform();
      pi[1] = 18.0 + 12.0 * stream.uniform();
    } else {
      pi += 0.1 * stream.standard_normal(pi.size());
    }
    out.push_back(pi);
  }
  return out;
}

CheckResult score_check(const Environment& env, const VerificationConfig& v,
                        std::uint64_t seed) {
  double worst = 0.0;
  const auto policies = score_policies(env, v.score_policies, seed);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const TrialBatch batch =
        sample_batch(env, policies[p], derive_seed(seed, {p}),
                     static_cast<std::size_t>(v.score_trials));
    worst = std::max(worst, max_abs_z(eligibility_rows(batch)));
  }
  return make_check("score-zero-mean[" + env.name() + "]", worst, 4.0, false,
                    "max |mean|/stderr of eligibility components over " +
                        std::to_string(policies.size()) + " policies x " +
                        std::to_string(v.score_trials) + " trials");
}

// Log-likelihood of the recorded realized controls under a different policy,
// with the visited states held fixed.
using ControlFn = std::function<Eigen::VectorXd(const PolicyVector&,
                                                const StepRecord&)>;

double replayed_log_likelihood(const Trial& trial, const NoiseModel& model,
                               const PolicyVector& pi, const ControlFn& control) {
  double total = 0.0;
  for (const StepRecord& step : trial.steps) {
    StepRecord replay = step;
    replay.control = control(pi, step);
    replay.noise = step.control + step.noise - replay.control;
    total += step_log_likelihood(replay, model);
  }
  return total;
}

double fd_relative_error(const Rollout& rollout, const NoiseModel& model,
                         const PolicyVector& pi, const ControlFn& control,
                         double h) {
  Eigen::VectorXd fd(pi.size());
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    PolicyVector plus = pi;
    PolicyVector minus = pi;
    plus[i] += h;
    minus[i] -= h;
    fd[i] = (replayed_log_likelihood(rollout.trial, model, plus, control) -
             replayed_log_likelihood(rollout.trial, model, minus, control)) /
            (2.0 * h);
  }
  const double scale = std::max(fd.norm(), 1e-300);
  const double stored = (rollout.eligibility - fd).norm() / scale;
  const double recomputed =
      (history_eligibility(rollout.trial, model) - fd).norm() / scale;
  return std::max(stored, recomputed);
}

CheckResult likelihood_check(const Environment& env, const ControlFn& control,
                             int trials, double tolerance, double h,
                             std::uint64_t seed) {
  const PolicyVector pi = env.initial_policy();
  std::vector<double> errors(static_cast<std::size_t>(trials));
  parallel_for(errors.size(), [&](std::size_t t) {
    const Rollout r = env.rollout(pi, derive_seed(seed, {t}), true);
    errors[t] = fd_relative_error(r, env.noise_model(), pi, control, h);
  });
  double worst = 0.0;
  for (double e : errors) worst = std::max(worst, e);
  return make_check("eligibility-vs-likelihood[" + env.name() + "]", worst,
                    tolerance, false,
                    "max relative error against central differences over " +
                        std::to_string(trials) + " trials");
}

struct BlockEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd error;
};

BlockEstimate blocked_estimate(const Environment& env, const PolicyVector& pi,
                               const EstimatorConfig& estimator,
                               int total_samples, std::uint64_t seed) {
  Eigen::MatrixXd blocks(kEstimatorBlocks, pi.size());
  const int per_block = std::max(2, total_samples / kEstimatorBlocks);
  for (int b = 0; b < kEstimatorBlocks; ++b) {
    const TrialBatch batch =
        sample_batch(env, pi, derive_seed(seed, {static_cast<std::uint64_t>(b)}),
                     static_cast<std::size_t>(per_block));
    blocks.row(b) = estimate_from_batch(batch, env, estimator).gradient;
  }
  BlockEstimate out;
  column_mean_and_error(blocks, out.mean, out.error);
  return out;
}

double max_pair_z(const BlockEstimate& a, const BlockEstimate& b) {
  const Eigen::VectorXd se =
      (a.error.cwiseAbs2() + b.error.cwiseAbs2()).cwiseSqrt();
  return ((a.mean - b.mean).cwiseAbs().array() / se.array()).maxCoeff();
}

std::vector<CheckResult> unbiasedness_checks(const CannonEnvironment& env,
                                             int samples, std::uint64_t seed) {
  const PolicyVector pi = env.initial_policy();
  EstimatorConfig naive;
  naive.kind = EstimatorKind::kNaive;
  EstimatorConfig baseline;
  baseline.kind = EstimatorKind::kConstantBaseline;
  EstimatorConfig surface;
  surface.kind = EstimatorKind::kResponseSurface;
  surface.feature_map = "noise-quadratic";
  surface.holdout_fit = true;
  const int share = samples / 3;
  const std::vector<std::pair<std::string, BlockEstimate>> estimates{
      {"naive", blocked_estimate(env, pi, naive, share, derive_seed(seed, {0}))},
      {"constant-baseline",
       blocked_estimate(env, pi, baseline, share, derive_seed(seed, {1}))},
      {"response-surface",
       blocked_estimate(env, pi, surface, share, derive_seed(seed, {2}))}};

  double pairwise = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < estimates.size(); ++j) {
      pairwise = std::max(pairwise,
                          max_pair_z(estimates[i].second, estimates[j].second));
    }
  }
  std::vector<CheckResult> out;
  out.push_back(make_check(
      "estimator-agreement[cannon]", pairwise, 3.0, true,
      "max pairwise |difference|/combined stderr, naive vs constant-baseline "
      "vs response-surface, " + std::to_string(samples) + " samples"));

  // Common-random-number central differences of the expected response.
  const double delta = 1e-3;
  const auto n = static_cast<std::size_t>(samples);
  Eigen::MatrixXd terms(static_cast<Eigen::Index>(n), pi.size());
  parallel_for(n, [&](std::size_t s) {
    const std::uint64_t scenario = derive_seed(seed, {3, s});
    for (Eigen::Index i = 0; i < pi.size(); ++i) {
      PolicyVector plus = pi;
      PolicyVector minus = pi;
      plus[i] += delta;
      minus[i] -= delta;
      terms(static_cast<Eigen::Index>(s), i) =
          (env.response(plus, scenario) - env.response(minus, scenario)) /
          (2.0 * delta);
    }
  });
  BlockEstimate fd;
  column_mean_and_error(terms, fd.mean, fd.error);
  double versus_fd = 0.0;
  for (const auto& [name, est] : estimates) {
    versus_fd = std::max(versus_fd, max_pair_z(est, fd));
  }
  out.push_back(make_check(
      "estimator-vs-finite-difference[cannon]", versus_fd, 3.0, true,
      "max |estimate - CRN central difference|/combined stderr"));
  return out;
}

CheckResult mass_matrix_check(const ArmConfig& arm, std::uint64_t seed) {
  RandomStream stream(seed);
  double asymmetry = 0.0;
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector3d q;
    for (int j = 0; j < 3; ++j) q[j] = (2.0 * stream.uniform() - 1.0) * M_PI;
    const Eigen::Matrix3d m = mass_matrix(q, arm);
    asymmetry = std::max(asymmetry, (m - m.transpose()).cwiseAbs().maxCoeff());
    if (Eigen::LLT<Eigen::Matrix3d>(m).info() != Eigen::Success) ++failures;
  }
  CheckResult c = make_check("mass-matrix-spd[dart-arm]", asymmetry, 1e-12,
                             false,
                             "max asymmetry over 1000 random postures; " +
                                 std::to_string(failures) +
                                 " Cholesky failures");
  if (failures > 0) c.passed = false;
  return c;
}

CheckResult hanging_check(const ArmConfig& arm) {
  ArmState state;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    state = arm_dynamics_step(state, Eigen::Vector3d::Zero(), arm);
    worst = std::max({worst, state.joint_angles.cwiseAbs().maxCoeff(),
                      state.joint_velocities.cwiseAbs().maxCoeff()});
  }
  return make_check("hanging-equilibrium[dart-arm]", worst, 1e-12, true,
                    "max |state| after 1000 torque-free steps from rest at "
                    "q = 0");
}

CheckResult energy_check(const ArmConfig& base, double seconds,
                         std::uint64_t seed) {
  ArmConfig arm = base;
  arm.gravity = 0.0;
  arm.integration_dt = 1e-4;
  RandomStream stream(seed);
  ArmState state;
  for (int j = 0; j < 3; ++j) {
    state.joint_angles[j] = stream.uniform() - 0.5;
    state.joint_velocities[j] = 2.0 * (stream.uniform() - 0.5);
  }
  const double e0 = kinetic_energy(state, arm);
  double drift = 0.0;
  const auto steps = static_cast<int>(std::lround(seconds / arm.integration_dt));
  for (int i = 0; i < steps; ++i) {
    state = arm_dynamics_step(state, Eigen::Vector3d::Zero(), arm);
    drift = std::max(drift, std::abs(kinetic_energy(state, arm) - e0) / e0);
  }
  return make_check("energy-drift[dart-arm]", drift, 0.005, false,
                    "max relative kinetic-energy change, zero gravity and "
                    "torque, dt = 1e-4");
}

CheckResult g_zero_check(const DartEnvironment& env, int trials,
                         std::uint64_t seed) {
  const TrialBatch batch = sample_batch(
      env, env.initial_policy(), seed, static_cast<std::size_t>(trials));
  const FeatureMap features = env.feature_map("release-time");
  const Eigen::MatrixXd phi = evaluate_features(batch, features);
  const Eigen::Index d = batch.policy_dimension();
  Eigen::MatrixXd terms(phi.rows(), d * phi.cols());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    const Eigen::VectorXd& e = batch.eligibilities[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      terms.row(i).segment(j * d, d) = e.transpose() * phi(i, j);
    }
  }
  return make_check("release-time-g-zero[dart-arm]", max_abs_z(terms), 4.0,
                    false,
                    "max |mean|/stderr over entries of E Phi^T, " +
                        std::to_string(trials) + " trials");
}

}  // namespace

bool VerificationReport::passed() const {
  for (const CheckResult& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const CheckResult& c : checks) {
    if (!c.passed) out.push_back(c.name);
  }
  return out;
}

VerificationReport run_verification_suite(const ExperimentConfig& config) {
  VerificationReport report;
  report.seed = config.master_seed;
  auto seed_for = [&](CheckStream stream, std::uint64_t sub = 0) {
    return derive_seed(config.master_seed, {stream, sub});
  };
  const VerificationConfig& v = config.verification;

  bool noise_ok = true;
  for (const auto& [name, model] :
       {std::pair<std::string, NoiseModel>{"cannon", config.cannon.noise_model()},
        std::pair<std::string, NoiseModel>{"dart-arm",
                                           config.arm.noise_model}}) {
    CheckResult c;
    c.name = "noise-model-precondition[" + name + "]";
    c.comparison = "valid";
    try {
      model.validate();
      c.passed = true;
      c.measured = 1.0;
      c.threshold = 1.0;
      c.detail = "base covariance symmetric positive definite";
    } catch (const std::exception& e) {
      c.passed = false;
      c.measured = 0.0;
      c.threshold = 1.0;
      c.detail = e.what();
      noise_ok = false;
    }
    report.checks.push_back(c);
  }

  report.checks.push_back(mass_matrix_check(config.arm, seed_for(kMassStream)));
  report.checks.push_back(hanging_check(config.arm));
  report.checks.push_back(
      energy_check(config.arm, v.energy_seconds, seed_for(kEnergyStream)));

  if (!noise_ok) {
    for (const char* name :
         {"score-zero-mean", "eligibility-vs-likelihood", "estimator-agreement",
          "release-time-g-zero"}) {
      report.checks.push_back(failed_check(
          name, 0.0, "n/a", "skipped: noise-model precondition failed"));
    }
    return report;
  }

  CannonConfig cannon = config.cannon;
  cannon.noise_enabled = true;
  ArmConfig arm = config.arm;
  arm.noise_enabled = true;
  const CannonEnvironment cannon_env(cannon, config.cannon_initial);
  const PDController controller = config.controller.build(arm);
  const DartEnvironment arm_env(arm, controller, config.controller.policy_bound);

  report.checks.push_back(score_check(cannon_env, v, seed_for(kScoreStream, 0)));
  report.checks.push_back(score_check(arm_env, v, seed_for(kScoreStream, 1)));

  const ControlFn cannon_control = [](const PolicyVector& pi,
                                      const StepRecord&) {
    return Eigen::VectorXd(pi);
  };
  const ControlFn arm_control = [&controller](const PolicyVector& pi,
                                              const StepRecord& step) {
    const PDController moved{
        controller.gain_matrix,
        controller.desired_trajectory.with_parameters(pi)};
    return pd_control(moved, step.state, step.time).control;
  };
  report.checks.push_back(likelihood_check(cannon_env, cannon_control,
                                           v.cannon_likelihood_trials, 1e-6,
                                           1e-4, seed_for(kLikelihoodStream, 0)));
  report.checks.push_back(likelihood_check(arm_env, arm_control,
                                           v.likelihood_trials, 1e-3, 1e-5,
                                           seed_for(kLikelihoodStream, 1)));

  for (CheckResult& c : unbiasedness_checks(
           cannon_env, v.unbiasedness_samples, seed_for(kUnbiasedStream))) {
    report.checks.push_back(std::move(c));
  }
  report.checks.push_back(g_zero_check(arm_env, v.g_trials, seed_for(kGStream)));
  return report;
}

void write_report(std::ostream& out, const VerificationReport& report,
                  const std::string& header) {
  nlohmann::ordered_json j;
  j["generated"] = header;
  j["seed"] = report.seed;
  j["passed"] = report.passed();
  j["failures"] = report.failures();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::ordered_json entry;
    entry["name"] = c.name;
    entry["passed"] = c.passed;
    entry["measured"] = std::isfinite(c.measured)
                            ? nlohmann::ordered_json(c.measured)
                            : nlohmann::ordered_json(nullptr);
    entry["comparison"] = c.comparison;
    entry["threshold"] = c.threshold;
    entry["detail"] = c.detail;
    checks.push_back(std::move(entry));
  }
  j["checks"] = std::move(checks);
  out << j.dump(2) << '\n';
}

}  // namespace motorgrad
