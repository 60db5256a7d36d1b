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

#include <doctest.h>

#include <cmath>

#include "motorgrad/arm.h"
#include "motorgrad/environment.h"
#include "motorgrad/errors.h"
#include "motorgrad/harness.h"
#include "motorgrad/random.h"
#include "test_util.h"

namespace motorgrad {
namespace {

const CannonEnvironment& cannon() {
  static const CannonEnvironment env(CannonConfig{}, Eigen::Vector2d(0.7, 24.0));
  return env;
}

// d/d(angle, speed) of -(R - T)^2 at the launched values.
Eigen::Vector2d cannon_slope(const Eigen::Vector2d& launch, const CannonConfig& c) {
  const double th = launch[0];
  const double v = launch[1];
  const double miss = v * v * std::sin(2 * th) / c.gravity - c.target_range;
  return Eigen::Vector2d(-2.0 * miss * 2.0 * v * v * std::cos(2 * th) / c.gravity,
                         -2.0 * miss * 2.0 * v * std::sin(2 * th) / c.gravity);
}

TEST_CASE("names round-trip") {
  for (EstimatorKind k :
       {EstimatorKind::kNaive, EstimatorKind::kConstantBaseline,
        EstimatorKind::kResponseSurface, EstimatorKind::kResponseSurfaceWeighted,
        EstimatorKind::kPegasusFd}) {
    CHECK(parse_estimator_kind(to_string(k)) == k);
    CHECK(is_likelihood_ratio(k) == (k != EstimatorKind::kPegasusFd));
  }
  for (StepNormalization m : {StepNormalization::kRaw, StepNormalization::kComponentRms,
                              StepNormalization::kGlobalRms}) {
    CHECK(parse_step_normalization(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_estimator_kind("reinforce"), InvalidArgument);
  CHECK_THROWS_AS(parse_step_normalization("adam"), InvalidArgument);
}

TEST_CASE("estimator config validation") {
  EstimatorConfig c;
  c.samples_per_step = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.samples_per_step = 1;
  CHECK_NOTHROW(c.validate());
  c.kind = EstimatorKind::kConstantBaseline;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.samples_per_step = 10;
  c.k_squared = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.k_squared = 10.0;
  c.kind = EstimatorKind::kPegasusFd;
  c.fd_delta = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.fd_delta = 1e-3;
  CHECK(c.scenario_count() == 10);
  c.fd_scenarios = 7;
  CHECK(c.scenario_count() == 7);
}

TEST_CASE("estimate_gradient samples the documented batch") {
  EstimatorConfig c;
  c.samples_per_step = 64;
  const PolicyVector pi = cannon().initial_policy();
  const GradientEstimate a = estimate_gradient(pi, cannon(), c, 99);
  const GradientEstimate b = naive_gradient(sample_batch(cannon(), pi, 99, 64));
  CHECK((a.gradient - b.gradient).norm() == 0.0);
  CHECK(a.sample_count == 64);

  c.kind = EstimatorKind::kPegasusFd;
  CHECK_THROWS_AS(estimate_from_batch(sample_batch(cannon(), pi, 1, 8), cannon(), c),
                  InvalidArgument);
}

TEST_CASE("degenerate batches are rejected") {
  CannonConfig quiet;
  quiet.noise_enabled = false;
  const CannonEnvironment env(quiet, Eigen::Vector2d(0.7, 24.0));
  const TrialBatch b = sample_batch(env, env.initial_policy(), 1, 16);
  for (EstimatorKind k : {EstimatorKind::kNaive, EstimatorKind::kConstantBaseline,
                          EstimatorKind::kResponseSurface,
                          EstimatorKind::kResponseSurfaceWeighted}) {
    EstimatorConfig c;
    c.kind = k;
    c.samples_per_step = 16;
    CHECK_THROWS_AS(estimate_from_batch(b, env, c), DegenerateBatch);
  }
}

TEST_CASE("pegasus uses common random numbers") {
  const PolicyVector pi = cannon().initial_policy();
  const std::vector<std::uint64_t> seeds = scenario_seeds(5, 200);
  CHECK(seeds.size() == 200);
  CHECK(seeds[3] == derive_seed(5, {3}));

  const GradientEstimate fd = pegasus_fd_gradient(pi, cannon(), 1e-4, seeds);
  Eigen::Vector2d expected = Eigen::Vector2d::Zero();
  for (std::uint64_t s : seeds) {
    const StepRecord step = cannon().rollout(pi, s, true).trial.steps[0];
    expected += cannon_slope(step.control + step.noise, cannon().config());
  }
  expected /= static_cast<double>(seeds.size());
  CHECK(testing::relative_error(fd.gradient, expected) < 1e-6);
  CHECK(fd.sample_count == 200);

  const GradientEstimate again = pegasus_fd_gradient(pi, cannon(), 1e-4, seeds);
  CHECK((fd.gradient - again.gradient).norm() == 0.0);

  CannonConfig quiet;
  quiet.noise_enabled = false;
  const CannonEnvironment still(quiet, pi);
  const GradientEstimate exact = pegasus_fd_gradient(pi, still, 1e-4, seeds);
  CHECK(exact.per_component_variance.maxCoeff() < 1e-12);
  CHECK(testing::relative_error(exact.gradient, cannon_slope(pi, quiet)) < 1e-5);

  CHECK_THROWS_AS(pegasus_fd_gradient(pi, cannon(), 0.0, seeds), InvalidArgument);
  CHECK_THROWS_AS(pegasus_fd_gradient(pi, cannon(), 1e-3, {}), InvalidArgument);
}

TEST_CASE("raw and normalized steps") {
  EstimatorConfig c;
  c.samples_per_step = 50;
  const PolicyVector pi = cannon().initial_policy();
  const std::uint64_t key = 1234;
  const GradientEstimate first = estimate_gradient(pi, cannon(), c, derive_seed(key, {0}));

  StepSchedule raw{1e-4, StepNormalization::kRaw, 0.9};
  const LearningCurve a = hill_climb(pi, cannon(), c, raw, 2, key);
  CHECK(testing::relative_error(a.per_step_policy[1] - pi, 1e-4 * first.gradient) < 1e-12);

  StepSchedule rms{0.01, StepNormalization::kComponentRms, 0.9};
  const LearningCurve b = hill_climb(pi, cannon(), c, rms, 2, key);
  const Eigen::VectorXd step = b.per_step_policy[1] - pi;
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(std::abs(step[i]) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK((step[i] > 0) == (first.gradient[i] > 0));
  }

  StepSchedule global{0.01, StepNormalization::kGlobalRms, 0.9};
  const LearningCurve g = hill_climb(pi, cannon(), c, global, 2, key);
  CHECK((g.per_step_policy[1] - pi).norm() ==
        doctest::Approx(0.01 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("hill climbing curves") {
  EstimatorConfig c;
  c.kind = EstimatorKind::kResponseSurface;
  c.feature_map = "noise-quadratic";
  c.samples_per_step = 100;
  const StepSchedule s{0.02, StepNormalization::kComponentRms, 0.9};
  const LearningCurve a = hill_climb(cannon().initial_policy(), cannon(), c, s, 25, 7);
  const LearningCurve b = hill_climb(cannon().initial_policy(), cannon(), c, s, 25, 7);
  REQUIRE(a.per_step_best_response.size() == 25);
  CHECK(a.per_step_mean_response.size() == 25);
  CHECK(a.per_step_policy.size() == 25);
  CHECK(a.step_count == 25);
  CHECK_FALSE(a.frozen_at.has_value());
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(a.per_step_best_response[i] == b.per_step_best_response[i]);
    if (i > 0) CHECK(a.per_step_best_response[i] >= a.per_step_best_response[i - 1]);
    CHECK(a.per_step_best_response[i] >= a.per_step_mean_response[i]);
  }
  CHECK(a.per_step_best_response.back() > a.per_step_mean_response.front());

  CHECK_THROWS_AS(hill_climb(cannon().initial_policy(), cannon(), c, s, 0, 7),
                  InvalidArgument);
  CHECK_THROWS_AS(hill_climb(Eigen::VectorXd::Zero(3), cannon(), c, s, 2, 7),
                  InvalidArgument);
}

TEST_CASE("episodes freeze when the policy leaves the box") {
  ArmConfig arm;
  arm.integration_dt = 1e-3;
  const PDController controller = default_arm_controller(arm);
  const double bound = controller.desired_trajectory.parameters().cwiseAbs().maxCoeff();
  const DartEnvironment env(arm, controller, bound);
  EstimatorConfig c;
  c.kind = EstimatorKind::kConstantBaseline;
  c.samples_per_step = 10;
  const StepSchedule s{1.0, StepNormalization::kComponentRms, 0.9};
  const LearningCurve curve = hill_climb(env.initial_policy(), env, c, s, 5, 3);
  REQUIRE(curve.frozen_at.has_value());
  CHECK(*curve.frozen_at == 1);
  CHECK(curve.per_step_best_response.size() == 5);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(curve.per_step_best_response[i] == curve.per_step_best_response[0]);
    CHECK((curve.per_step_policy[i] - env.initial_policy()).norm() == 0.0);
  }
}

TEST_CASE("aggregate curves") {
  LearningCurve a;
  a.per_step_best_response = {-3.0, -2.0, -1.0};
  LearningCurve b;
  b.per_step_best_response = {-5.0, -4.0};
  const AggregateCurve agg = aggregate_curves({a, b});
  REQUIRE(agg.mean.size() == 3);
  CHECK(agg.episodes == 2);
  CHECK(agg.mean[0] == -4.0);
  CHECK(agg.mean[2] == -2.5);
  // Two points x, y: SE = |x - y| / 2.
  CHECK(agg.standard_error[0] == doctest::Approx(1.0));
  CHECK(agg.standard_error[2] == doctest::Approx(1.5));
  CHECK(aggregate_curves({a}).standard_error[1] == 0.0);
  CHECK_THROWS_AS(aggregate_curves({}), InvalidArgument);
  CHECK_THROWS_AS(aggregate_curves({LearningCurve{}}), InvalidArgument);
}

}  // namespace
}  // namespace motorgrad
