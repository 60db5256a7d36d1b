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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: motorgrad_acceptance CLI_PATH [--only=1,4,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "motorgrad/arm.h"
#include "motorgrad/cannon.h"
#include "motorgrad/environment.h"
#include "motorgrad/estimators.h"
#include "motorgrad/experiment.h"
#include "motorgrad/experiment_config.h"
#include "motorgrad/harness.h"
#include "motorgrad/noise.h"
#include "motorgrad/parallel.h"
#include "motorgrad/random.h"
#include "motorgrad/statistics.h"

namespace mg = motorgrad;

namespace {

constexpr std::uint64_t kMaster = 20260601;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

mg::ArmConfig acceptance_arm() {
  mg::ArmConfig c;
  c.integration_dt = 1e-3;
  return c;
}

mg::DartEnvironment dart_env() {
  const mg::ArmConfig c = acceptance_arm();
  return mg::DartEnvironment(c, mg::default_arm_controller(c));
}

mg::CannonEnvironment cannon_env() {
  return mg::CannonEnvironment(mg::CannonConfig{}, Eigen::Vector2d(0.6, 22.0));
}

// Largest |mean| / standard error over the columns of `samples`.
double max_abs_z(const Eigen::MatrixXd& samples) {
  Eigen::VectorXd mean;
  Eigen::VectorXd error;
  mg::column_mean_and_error(samples, mean, error);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    worst = std::max(worst, std::abs(mean[i]) / error[i]);
  }
  return worst;
}

Eigen::MatrixXd eligibility_rows(const mg::Environment& env, const mg::PolicyVector& pi,
                                 std::uint64_t key, std::size_t n) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), pi.size());
  mg::parallel_for(n, [&](std::size_t i) {
    rows.row(static_cast<Eigen::Index>(i)) =
        env.rollout(pi, mg::derive_seed(key, {i}), false).eligibility.transpose();
  });
  return rows;
}

Outcome score_zero_mean() {
  const mg::CannonEnvironment cannon = cannon_env();
  const mg::DartEnvironment dart = dart_env();
  mg::RandomStream pick(mg::derive_seed(kMaster, {1}));
  double worst_cannon = 0.0;
  double worst_dart = 0.0;
  for (std::uint64_t p = 0; p < 3; ++p) {
    const Eigen::Vector2d pc(0.5 + 0.5 * pick.uniform(), 18.0 + 8.0 * pick.uniform());
    worst_cannon = std::max(
        worst_cannon, max_abs_z(eligibility_rows(cannon, pc, mg::derive_seed(kMaster, {1, 0, p}),
                                                 100000)));
    mg::PolicyVector pd = dart.initial_policy();
    for (Eigen::Index i = 0; i < pd.size(); ++i) pd[i] += 0.2 * pick.normal();
    worst_dart = std::max(
        worst_dart, max_abs_z(eligibility_rows(dart, pd, mg::derive_seed(kMaster, {1, 1, p}),
                                               100000)));
  }
  return {worst_cannon < 4.0 && worst_dart < 4.0,
          "max |z| cannon " + fmt(worst_cannon) + ", dart " + fmt(worst_dart) +
              " (3 policies x 1e5 trials each, bound 4)"};
}

// Log-likelihood of the recorded trial when the policy is moved to `p`:
// states and realized controls u + n stay fixed.
double replay_log_likelihood(const mg::Trial& trial, const mg::NoiseModel& model,
                             const std::function<Eigen::VectorXd(const mg::StepRecord&)>& control,
                             std::size_t first, std::size_t last) {
  double total = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    mg::StepRecord s = trial.steps[k];
    const Eigen::VectorXd realized = s.control + s.noise;
    s.control = control(s);
    s.noise = realized - s.control;
    total += mg::step_log_likelihood(s, model);
  }
  return total;
}

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

Outcome eligibility_vs_likelihood() {
  const mg::DartEnvironment dart = dart_env();
  const mg::PDController& ctrl = dart.controller();
  const mg::NoiseModel& arm_model = dart.noise_model();
  double worst_dart = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    mg::RandomStream pick(mg::derive_seed(kMaster, {2, t}));
    mg::PolicyVector pi = dart.initial_policy();
    for (Eigen::Index i = 0; i < pi.size(); ++i) pi[i] += 0.1 * pick.normal();
    const mg::Rollout r = dart.rollout(pi, mg::derive_seed(kMaster, {2, 1, t}), true);
    const mg::Trial& trial = r.trial;
    auto moved = [&](const Eigen::VectorXd& p) {
      return mg::PDController{ctrl.gain_matrix, ctrl.desired_trajectory.with_parameters(p)};
    };
    auto history = [&](const Eigen::VectorXd& p) {
      const mg::PDController c = moved(p);
      return replay_log_likelihood(
          trial, arm_model,
          [&](const mg::StepRecord& s) { return mg::pd_control(c, s.state, s.time).control; },
          0, trial.steps.size());
    };
    worst_dart = std::max(worst_dart,
                          rel(mg::history_eligibility(trial, arm_model),
                              central_difference(history, pi, 1e-5)));
    worst_dart = std::max(worst_dart, rel(r.eligibility, central_difference(history, pi, 1e-5)));
    const std::size_t k = static_cast<std::size_t>(pick.uniform() * trial.steps.size());
    auto single = [&](const Eigen::VectorXd& p) {
      const mg::PDController c = moved(p);
      return replay_log_likelihood(
          trial, arm_model,
          [&](const mg::StepRecord& s) { return mg::pd_control(c, s.state, s.time).control; },
          k, k + 1);
    };
    worst_dart = std::max(worst_dart, rel(mg::step_eligibility(trial.steps[k], arm_model),
                                          central_difference(single, pi, 1e-5)));
  }

  const mg::CannonEnvironment cannon = cannon_env();
  double worst_cannon = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    mg::RandomStream pick(mg::derive_seed(kMaster, {2, 2, t}));
    const Eigen::Vector2d pi(0.5 + 0.5 * pick.uniform(), 18.0 + 8.0 * pick.uniform());
    const mg::Rollout r = cannon.rollout(pi, mg::derive_seed(kMaster, {2, 3, t}), true);
    auto ll = [&](const Eigen::VectorXd& p) {
      return replay_log_likelihood(
          r.trial, cannon.noise_model(),
          [&](const mg::StepRecord&) { return mg::cannon_policy(p).control; }, 0, 1);
    };
    const Eigen::VectorXd fd = central_difference(ll, pi, 1e-4);
    worst_cannon = std::max(worst_cannon, rel(r.eligibility, fd));
    worst_cannon = std::max(
        worst_cannon, rel(mg::step_eligibility(r.trial.steps[0], cannon.noise_model()), fd));
  }
  return {worst_dart < 1e-3 && worst_cannon < 1e-6,
          "max relative error dart " + fmt(worst_dart) + " (< 1e-3, 100 trials), cannon " +
              fmt(worst_cannon) + " (< 1e-6, 1000 trials)"};
}

Outcome estimator_unbiasedness() {
  const mg::CannonEnvironment env = cannon_env();
  const mg::PolicyVector pi = env.initial_policy();
  constexpr std::size_t kBlocks = 1000;
  constexpr std::size_t kBlockSize = 1000;
  std::vector<mg::EstimatorConfig> configs(3);
  configs[0].kind = mg::EstimatorKind::kNaive;
  configs[1].kind = mg::EstimatorKind::kConstantBaseline;
  configs[2].kind = mg::EstimatorKind::kResponseSurface;
  configs[2].feature_map = "noise-quadratic";
  configs[2].holdout_fit = true;
  std::vector<Eigen::VectorXd> mean(3);
  std::vector<Eigen::VectorXd> error(3);
  for (std::size_t k = 0; k < 3; ++k) {
    configs[k].samples_per_step = static_cast<int>(kBlockSize);
    Eigen::MatrixXd blocks(static_cast<Eigen::Index>(kBlocks), 2);
    mg::parallel_for(kBlocks, [&](std::size_t b) {
      const mg::TrialBatch batch =
          mg::sample_batch(env, pi, mg::derive_seed(kMaster, {3, k, b}), kBlockSize);
      blocks.row(static_cast<Eigen::Index>(b)) =
          mg::estimate_from_batch(batch, env, configs[k]).gradient.transpose();
    });
    mg::column_mean_and_error(blocks, mean[k], error[k]);
  }

  // Central difference of the Monte-Carlo expectation on common scenarios.
  constexpr std::size_t kScenarios = 10000000;
  constexpr double kDelta = 1e-3;
  constexpr std::size_t kChunks = 1000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(kChunks, 2);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(kChunks, 2);
  const std::uint64_t fd_key = mg::derive_seed(kMaster, {3, 9});
  mg::parallel_for(kChunks, [&](std::size_t c) {
    for (std::size_t j = c * kScenarios / kChunks; j < (c + 1) * kScenarios / kChunks; ++j) {
      const std::uint64_t seed = mg::derive_seed(fd_key, {j});
      for (Eigen::Index i = 0; i < 2; ++i) {
        mg::PolicyVector plus = pi;
        mg::PolicyVector minus = pi;
        plus[i] += kDelta;
        minus[i] -= kDelta;
        const double d = (env.response(plus, seed) - env.response(minus, seed)) / (2 * kDelta);
        sum(static_cast<Eigen::Index>(c), i) += d;
        sq(static_cast<Eigen::Index>(c), i) += d * d;
      }
    }
  });
  const auto n = static_cast<double>(kScenarios);
  const Eigen::Vector2d fd_mean = sum.colwise().sum().transpose() / n;
  const Eigen::Vector2d fd_var =
      (sq.colwise().sum().transpose() / n - fd_mean.cwiseAbs2()) * (n / (n - 1.0));
  const Eigen::Vector2d fd_error = (fd_var / n).cwiseSqrt();

  auto z = [](const Eigen::VectorXd& a, const Eigen::VectorXd& ea, const Eigen::VectorXd& b,
              const Eigen::VectorXd& eb) {
    return ((a - b).array().abs() / (ea.cwiseAbs2() + eb.cwiseAbs2()).cwiseSqrt().array())
        .maxCoeff();
  };
  double pairwise = 0.0;
  double versus_fd = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      pairwise = std::max(pairwise, z(mean[a], error[a], mean[b], error[b]));
    }
    versus_fd = std::max(versus_fd, z(mean[a], error[a], fd_mean, fd_error));
  }
  std::ostringstream detail;
  detail << "max pairwise z " << fmt(pairwise) << ", max z vs finite difference "
         << fmt(versus_fd) << " (bound 3); fd gradient (" << fmt(fd_mean[0]) << ", "
         << fmt(fd_mean[1]) << "), rs (" << fmt(mean[2][0]) << ", " << fmt(mean[2][1]) << ")";
  return {pairwise <= 3.0 && versus_fd <= 3.0, detail.str()};
}

struct VarianceTriple {
  mg::Interval naive;
  mg::Interval baseline;
  mg::Interval surface;
};

VarianceTriple variance_intervals(const mg::Environment& env, const mg::PolicyVector& pi,
                                  const std::string& features, std::uint64_t key) {
  const mg::TrialBatch batch = mg::sample_batch(env, pi, key, 100000);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index d = pi.size();
  const mg::FeatureMap map = env.feature_map(features);
  const double a = mg::optimal_constant_baseline(batch);
  const Eigen::MatrixXd g = mg::resolve_g(batch, map);
  const Eigen::VectorXd b = mg::fit_response_surface(batch, map, g).weights;
  const Eigen::MatrixXd phi = mg::evaluate_features(batch, map);
  Eigen::MatrixXd naive(n, d);
  Eigen::MatrixXd base(n, d);
  Eigen::MatrixXd surf(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd& e = batch.eligibilities[static_cast<std::size_t>(i)];
    const double f = batch.trials[static_cast<std::size_t>(i)].response;
    naive.row(i) = (e * f).transpose();
    base.row(i) = (e * (f - a)).transpose();
    surf.row(i) = (e * (f - phi.row(i).dot(b))).transpose();
  }
  return {mg::bootstrap_trace_variance(naive, 0.99, 1000, key + 1),
          mg::bootstrap_trace_variance(base, 0.99, 1000, key + 2),
          mg::bootstrap_trace_variance(surf, 0.99, 1000, key + 3)};
}

std::string describe(const VarianceTriple& v) {
  auto one = [](const mg::Interval& i) {
    return fmt(i.point) + " [" + fmt(i.lower) + ", " + fmt(i.upper) + "]";
  };
  return "naive " + one(v.naive) + ", cb " + one(v.baseline) + ", rs " + one(v.surface);
}

bool ordered(const VarianceTriple& v) {
  return v.surface.upper < v.baseline.lower && v.baseline.upper < v.naive.lower;
}

Outcome variance_ordering() {
  const mg::CannonConfig cc;
  const mg::CannonEnvironment cannon(cc, Eigen::Vector2d(0.6, 22.0));
  const Eigen::Vector2d near_optimal(std::numbers::pi / 4.0,
                                     std::sqrt(cc.gravity * cc.target_range));
  const VarianceTriple c =
      variance_intervals(cannon, near_optimal, "noise-quadratic", mg::derive_seed(kMaster, {4, 0}));
  const mg::DartEnvironment dart = dart_env();
  const VarianceTriple a = variance_intervals(dart, dart.initial_policy(), "release-time",
                                              mg::derive_seed(kMaster, {4, 1}));
  const double reduction = 1.0 - a.surface.point / a.baseline.point;
  return {ordered(c) && ordered(a) && reduction >= 0.10,
          "cannon: " + describe(c) + "; dart: " + describe(a) + "; dart rs vs cb reduction " +
              fmt(100.0 * reduction) + "% (>= 10%)"};
}

Outcome release_time_g_zero() {
  const mg::DartEnvironment env = dart_env();
  const mg::TrialBatch batch =
      mg::sample_batch(env, env.initial_policy(), mg::derive_seed(kMaster, {5}), 100000);
  const mg::FeatureMap map = env.feature_map("release-time");
  const Eigen::MatrixXd phi = mg::evaluate_features(batch, map);
  const Eigen::Index d = env.policy_dimension();
  Eigen::MatrixXd terms(static_cast<Eigen::Index>(batch.size()), d * phi.cols());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      terms.row(row).segment(j * d, d) = batch.eligibilities[k].transpose() * phi(row, j);
    }
  }
  const double z = max_abs_z(terms);
  return {z < 4.0, "max |z| over " + std::to_string(terms.cols()) + " entries of G: " + fmt(z) +
                       " (1e5 rollouts, bound 4)"};
}

Outcome cannon_optimum() {
  mg::CannonConfig c;
  constexpr double kSigma = 0.1;
  c.noise_covariance = kSigma * kSigma * Eigen::Matrix2d::Identity();
  const mg::CannonEnvironment env(c, Eigen::Vector2d(0.7, 24.0));
  auto draw = [&](std::uint64_t key, std::size_t n) {
    std::vector<Eigen::Vector2d> noise(n);
    mg::parallel_for(n, [&](std::size_t i) {
      noise[i] = env.rollout(env.initial_policy(), mg::derive_seed(key, {i}), true)
                     .trial.steps[0]
                     .noise;
    });
    return noise;
  };
  auto responses = [&](const std::vector<Eigen::Vector2d>& noise, double th, double v) {
    std::vector<double> f(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i) {
      f[i] = mg::cannon_response(th + noise[i][0], v + noise[i][1], c);
    }
    return f;
  };
  const std::vector<Eigen::Vector2d> search = draw(mg::derive_seed(kMaster, {6, 0}), 100000);
  const double deg = std::numbers::pi / 180.0;
  double best = -1e300;
  double best_th = 0.0;
  double best_v = 0.0;
  std::vector<double> grid_th;
  for (double t = 40.0; t <= 50.0 + 1e-9; t += 0.25) grid_th.push_back(t * deg);
  std::vector<double> grid_v;
  for (double v = 23.0; v <= 26.0 + 1e-9; v += 0.02) grid_v.push_back(v);
  std::vector<double> value(grid_th.size() * grid_v.size());
  mg::parallel_for(value.size(), [&](std::size_t k) {
    const std::vector<double> f = responses(search, grid_th[k / grid_v.size()],
                                            grid_v[k % grid_v.size()]);
    double s = 0.0;
    for (double x : f) s += x;
    value[k] = s / static_cast<double>(f.size());
  });
  for (std::size_t k = 0; k < value.size(); ++k) {
    if (value[k] > best) {
      best = value[k];
      best_th = grid_th[k / grid_v.size()];
      best_v = grid_v[k % grid_v.size()];
    }
  }
  const double v0 = std::sqrt(c.gravity * c.target_range / std::sin(2.0 * best_th));
  // Fresh samples for the one-sided test.
  const std::vector<Eigen::Vector2d> test = draw(mg::derive_seed(kMaster, {6, 1}), 100000);
  const mg::MeanAndError diff =
      mg::paired_difference(responses(test, best_th, best_v), responses(test, best_th, v0));
  const double z = diff.mean / diff.standard_error;
  const double z99 = mg::normal_upper_quantile(0.01);
  const bool angle_ok = best_th >= 42.0 * deg && best_th <= 48.0 * deg;
  return {angle_ok && best_v > v0 && z > z99,
          "optimum theta " + fmt(best_th / deg) + " deg (in [42, 48]), v " + fmt(best_v) +
              " vs noise-free " + fmt(v0) + "; E[F] gain " + fmt(diff.mean) + ", z " + fmt(z) +
              " (> " + fmt(z99) + ")"};
}

Outcome curve_ordering(const std::string& source_dir) {
  const mg::ExperimentConfig config =
      mg::load_experiment_config(source_dir + "/configs/dart_curves.yaml");
  const mg::ExperimentResult result = mg::run_experiment(config);
  auto final_best = [&](mg::EstimatorKind kind) {
    for (const mg::EstimatorRun& run : result.runs) {
      if (run.estimator.kind != kind) continue;
      std::vector<double> out;
      for (const mg::LearningCurve& c : run.episodes) out.push_back(c.per_step_best_response.back());
      return out;
    }
    throw std::runtime_error("estimator missing from the curve config");
  };
  const auto cb = final_best(mg::EstimatorKind::kConstantBaseline);
  const auto rs = final_best(mg::EstimatorKind::kResponseSurface);
  const auto rsw = final_best(mg::EstimatorKind::kResponseSurfaceWeighted);
  const auto fd = final_best(mg::EstimatorKind::kPegasusFd);
  auto mean = [](const std::vector<double>& x) { return mg::mean_and_error(x).mean; };
  const mg::MeanAndError fd_cb = mg::paired_difference(fd, cb);
  const mg::MeanAndError rs_cb = mg::paired_difference(rs, cb);
  const mg::MeanAndError rsw_rs = mg::paired_difference(rsw, rs);
  // Two-sided 95% Student t with 19 degrees of freedom.
  const double t_crit = 2.093;
  const bool sizes = cb.size() == 20 && config.steps_per_episode == 30;
  const bool order = mean(fd) >= mean(rsw) && mean(rsw) >= mean(rs) && mean(rs) >= mean(cb);
  const bool significant = fd_cb.mean / fd_cb.standard_error > t_crit &&
                           rs_cb.mean / rs_cb.standard_error > t_crit;
  std::ostringstream d;
  d << "final best: pegasus " << fmt(mean(fd)) << ", rsw " << fmt(mean(rsw)) << ", rs "
    << fmt(mean(rs)) << ", cb " << fmt(mean(cb)) << "; paired t pegasus-cb "
    << fmt(fd_cb.mean / fd_cb.standard_error) << ", rs-cb "
    << fmt(rs_cb.mean / rs_cb.standard_error) << " (> " << t_crit << "); rsw-rs gap "
    << fmt(rsw_rs.mean) << " +- " << fmt(rsw_rs.standard_error);
  return {sizes && order && significant, d.str()};
}

Outcome lambda_limits() {
  auto lambda = [](double v, std::int64_t n, double k2) {
    mg::GradientEstimate e;
    e.gradient = Eigen::VectorXd::Zero(1);
    e.per_component_variance = Eigen::VectorXd::Constant(1, v);
    e.sample_count = n;
    return mg::estimate_lambda(e, k2).diagonal[0];
  };
  bool ok = true;
  std::string why;
  mg::RandomStream rng(mg::derive_seed(kMaster, {8}));
  for (int i = 0; i < 10000; ++i) {
    const double v = std::pow(10.0, -6.0 + 18.0 * rng.uniform());
    const auto n = static_cast<std::int64_t>(1 + 1000 * rng.uniform());
    const double k2 = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    const double l = lambda(v, n, k2);
    if (!(l > 0.0 && l <= 1.0)) {
      ok = false;
      why = " out of range at V=" + fmt(v);
    }
    if (std::abs(lambda(static_cast<double>(n) * k2, n, k2) - 0.5) > 1e-15) {
      ok = false;
      why = " not 0.5 at V = N k^2";
    }
  }
  if (lambda(0.0, 100, 10.0) != 1.0) {
    ok = false;
    why = " not 1 at zero variance";
  }
  double previous = 0.0;
  for (std::int64_t n = 1; n <= (std::int64_t{1} << 40); n *= 2) {
    const double l = lambda(50.0, n, 10.0);
    if (!(l > previous)) {
      ok = false;
      why = " not increasing in N";
    }
    previous = l;
  }
  if (!(1.0 - previous < 1e-10)) {
    ok = false;
    why = " does not approach 1";
  }
  return {ok, "range (0, 1], 1 at V = 0, 0.5 at V = N k^2, monotone in N -> 1" + why};
}

Outcome dynamics_sanity() {
  const mg::ArmConfig c;
  mg::RandomStream rng(mg::derive_seed(kMaster, {9}));
  double min_eig = 1e300;
  bool spd = true;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d q(std::numbers::pi * (2 * rng.uniform() - 1),
                            std::numbers::pi * (2 * rng.uniform() - 1),
                            std::numbers::pi * (2 * rng.uniform() - 1));
    const Eigen::Matrix3d m = mg::mass_matrix(q, c);
    spd = spd && (m - m.transpose()).norm() < 1e-12 &&
          Eigen::LLT<Eigen::Matrix3d>(m).info() == Eigen::Success;
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues()[0]);
  }
  spd = spd && min_eig > 0.0;

  mg::ArmConfig free = c;
  free.gravity = 0.0;
  free.integration_dt = 1e-4;
  mg::ArmState s;
  s.joint_angles = Eigen::Vector3d(0.4, -0.8, 0.6);
  s.joint_velocities = Eigen::Vector3d(2.0, -3.0, 4.0);
  const double e0 = mg::kinetic_energy(s, free);
  double drift = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = mg::arm_dynamics_step(s, Eigen::Vector3d::Zero(), free);
    drift = std::max(drift, std::abs(mg::kinetic_energy(s, free) - e0) / e0);
  }

  mg::ArmState hang;
  for (int k = 0; k < 10000; ++k) hang = mg::arm_dynamics_step(hang, Eigen::Vector3d::Zero(), c);
  const double moved = hang.stacked().norm();

  return {spd && drift < 0.005 && moved < 1e-12,
          "min eigenvalue over 1000 postures " + fmt(min_eig) + ", energy drift " +
              fmt(100.0 * drift) + "% (< 0.5%), hanging displacement " + fmt(moved)};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string without_header(const std::string& s) {
  const std::size_t nl = s.find('\n');
  return nl == std::string::npos ? std::string() : s.substr(nl + 1);
}

Outcome determinism(const std::string& cli, const std::string& source_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "motorgrad_acceptance";
  fs::create_directories(dir);
  const fs::path dart_cfg = dir / "dart_small.yaml";
  {
    std::ofstream out(dart_cfg);
    out << "episodes: 3\nsteps_per_episode: 3\noutput_format: json\n"
           "environment:\n  kind: dart-arm\n  dart_arm:\n    integration_dt: 0.001\n"
           "estimators:\n"
           "  - {kind: constant-baseline, samples_per_step: 20}\n"
           "  - {kind: response-surface, samples_per_step: 20}\n"
           "  - {kind: response-surface-weighted, samples_per_step: 20}\n"
           "  - {kind: pegasus-fd, samples_per_step: 5}\n"
           "diagnostics:\n  samples: 100\n";
  }
  struct Job {
    std::string verb;
    std::string config;
    std::string file;
    std::string extra;
  };
  const std::vector<Job> jobs = {
      {"run", source_dir + "/configs/cannon.yaml", "cannon.csv", "--per-episode"},
      {"run", dart_cfg.string(), "dart.json", "--per-episode"},
      {"diagnose", dart_cfg.string(), "diag.json", ""},
  };
  bool ok = true;
  std::string detail;
  std::size_t compared = 0;
  for (const Job& job : jobs) {
    std::vector<std::string> contents;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (std::to_string(rep) + "_" + job.file);
      const std::string cmd = "\"" + cli + "\" " + job.verb + " --config \"" + job.config +
                              "\" --seed 77 --output \"" + out.string() + "\" " + job.extra;
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail += " [" + job.verb + " " + job.file + " failed]";
      }
      contents.push_back(without_header(read_file(out)));
      if (!job.extra.empty()) {
        contents.push_back(without_header(read_file(mg::per_episode_path(out.string()))));
      }
    }
    const std::size_t half = contents.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
      ++compared;
      if (contents[i].empty() || contents[i] != contents[half + i]) {
        ok = false;
        detail += " [" + job.file + " differs]";
      }
    }
  }
  fs::remove_all(dir);
  return {ok, std::to_string(compared) + " file pairs from run/diagnose byte-identical after the "
                                         "timestamp line" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: motorgrad_acceptance CLI_PATH [--only=1,2,...]\n";
    return 2;
  }
  const std::string cli = argv[1];
  std::set<int> only;
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--only=", 0) == 0) {
      std::stringstream list(a.substr(7));
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    }
  }
  const std::string source = MOTORGRAD_SOURCE_DIR;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"score-zero-mean", score_zero_mean},
      {"eligibility-likelihood-consistency", eligibility_vs_likelihood},
      {"estimator-unbiasedness", estimator_unbiasedness},
      {"variance-reduction-ordering", variance_ordering},
      {"release-time-g-zero", release_time_g_zero},
      {"cannon-optimum-geometry", cannon_optimum},
      {"dart-learning-curve-ordering", [&] { return curve_ordering(source); }},
      {"lambda-limits", lambda_limits},
      {"dynamics-sanity", dynamics_sanity},
      {"determinism", [&] { return determinism(cli, source); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first
              << ": " << o.detail << " (" << fmt(secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
