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

#include "motorgrad/harness.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motorgrad/errors.h"
#include "motorgrad/parallel.h"
#include "motorgrad/random.h"

namespace motorgrad {
namespace {

// Index reserved for the scenario list of an episode; step indices never
// reach it.
constexpr std::uint64_t kScenarioStream = 0xfffffffffffff00dULL;

FeatureMap features_for(const Environment& env, const EstimatorConfig& config) {
  return env.feature_map(config.feature_map.empty() ? env.default_feature_map()
                                                    : config.feature_map);
}

double batch_mean_response(const TrialBatch& batch) {
  double total = 0.0;
  for (const auto& t : batch.trials) total += t.response;
  return total / static_cast<double>(batch.size());
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kNaive:
      return "naive";
    case EstimatorKind::kConstantBaseline:
      return "constant-baseline";
    case EstimatorKind::kResponseSurface:
      return "response-surface";
    case EstimatorKind::kResponseSurfaceWeighted:
      return "response-surface-weighted";
    case EstimatorKind::kPegasusFd:
      return "pegasus-fd";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  for (EstimatorKind kind :
       {EstimatorKind::kNaive, EstimatorKind::kConstantBaseline,
        EstimatorKind::kResponseSurface,
        EstimatorKind::kResponseSurfaceWeighted, EstimatorKind::kPegasusFd}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown estimator kind '" + name + "'");
}

bool is_likelihood_ratio(EstimatorKind kind) {
  return kind != EstimatorKind::kPegasusFd;
}

void EstimatorConfig::validate() const {
  if (samples_per_step < 1) {
    throw InvalidArgument("samples_per_step must be >= 1");
  }
  if (kind != EstimatorKind::kNaive && kind != EstimatorKind::kPegasusFd &&
      samples_per_step < 2) {
    throw InvalidArgument("samples_per_step must be >= 2 for variance-based "
                          "estimators");
  }
  if (!(k_squared > 0.0)) throw InvalidArgument("k_squared must be > 0");
  if (kind == EstimatorKind::kPegasusFd && !(fd_delta > 0.0)) {
    throw InvalidArgument("fd_delta must be > 0");
  }
  if (fd_scenarios < 0) throw InvalidArgument("fd_scenarios must be >= 0");
  if (!(ridge_scale >= 0.0)) throw InvalidArgument("ridge_scale must be >= 0");
}

GradientEstimate estimate_from_batch(const TrialBatch& batch,
                                     const Environment& env,
                                     const EstimatorConfig& config,
                                     GradientDiagnostics* diagnostics) {
  batch.validate();
  if (!is_likelihood_ratio(config.kind)) {
    throw InvalidArgument("pegasus-fd does not use a trial batch");
  }
  if (batch.degenerate()) {
    throw DegenerateBatch("all eligibilities are zero (is noise disabled?)");
  }
  GradientDiagnostics local;
  GradientDiagnostics& diag = diagnostics ? *diagnostics : local;
  diag = GradientDiagnostics{};
  diag.mean_response = batch_mean_response(batch);

  switch (config.kind) {
    case EstimatorKind::kNaive:
      diag.estimate = naive_gradient(batch);
      break;
    case EstimatorKind::kConstantBaseline: {
      const double a = optimal_constant_baseline(batch);
      diag.baseline = a;
      diag.estimate = baseline_gradient(batch, a);
      break;
    }
    case EstimatorKind::kResponseSurface:
    case EstimatorKind::kResponseSurfaceWeighted: {
      const FeatureMap features = features_for(env, config);
      TrialBatch fit_batch;
      TrialBatch eval_batch;
      const TrialBatch* fit = &batch;
      const TrialBatch* eval = &batch;
      if (config.holdout_fit) {
        if (batch.size() < 2) {
          throw InsufficientData("holdout fit needs at least 2 trials");
        }
        fit_batch = batch.slice(0, batch.size() / 2);
        eval_batch = batch.slice(batch.size() / 2, batch.size());
        fit = &fit_batch;
        eval = &eval_batch;
      }
      const Eigen::MatrixXd g_fit = resolve_g(*fit, features);
      const ModelWeights b =
          fit_response_surface(*fit, features, g_fit, config.ridge_scale);
      const Eigen::MatrixXd g =
          config.holdout_fit ? resolve_g(*eval, features) : g_fit;
      diag.model_weights = b.weights;
      diag.g = g;
      diag.estimate = model_gradient(*eval, features, b, g);
      if (config.kind == EstimatorKind::kResponseSurfaceWeighted) {
        const WeightMatrix lambda =
            estimate_lambda(diag.estimate, config.k_squared);
        diag.unweighted = diag.estimate;
        diag.lambda = lambda.diagonal;
        diag.estimate = apply_weights(diag.estimate, lambda);
      }
      break;
    }
    case EstimatorKind::kPegasusFd:
      break;
  }
  return diag.estimate;
}

std::vector<std::uint64_t> scenario_seeds(std::uint64_t key, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    seeds[i] = derive_seed(key, {i});
  }
  return seeds;
}

GradientEstimate pegasus_fd_gradient(
    const PolicyVector& pi, const Environment& env, double fd_delta,
    const std::vector<std::uint64_t>& seeds) {
  if (!(fd_delta > 0.0)) throw InvalidArgument("fd_delta must be > 0");
  if (seeds.empty()) throw InvalidArgument("pegasus needs scenario seeds");
  const Eigen::Index d = pi.size();
  const std::size_t s = seeds.size();
  Eigen::MatrixXd terms(static_cast<Eigen::Index>(s), d);
  // One task per (parameter, scenario) pair.
  parallel_for(static_cast<std::size_t>(d) * s, [&](std::size_t task) {
    const auto i = static_cast<Eigen::Index>(task / s);
    const std::size_t j = task % s;
    PolicyVector plus = pi;
    PolicyVector minus = pi;
    plus[i] += fd_delta;
    minus[i] -= fd_delta;
    terms(static_cast<Eigen::Index>(j), i) =
        (env.response(plus, seeds[j]) - env.response(minus, seeds[j])) /
        (2.0 * fd_delta);
  });
  return summarize_terms(terms);
}

GradientEstimate estimate_gradient(const PolicyVector& pi,
                                   const Environment& env,
                                   const EstimatorConfig& config,
                                   std::uint64_t batch_key,
                                   GradientDiagnostics* diagnostics) {
  config.validate();
  if (config.kind == EstimatorKind::kPegasusFd) {
    const GradientEstimate est = pegasus_fd_gradient(
        pi, env, config.fd_delta,
        scenario_seeds(batch_key, config.scenario_count()));
    if (diagnostics) {
      *diagnostics = GradientDiagnostics{};
      diagnostics->estimate = est;
      diagnostics->mean_response = mean_response(
          env, pi, scenario_seeds(batch_key, config.scenario_count()));
    }
    return est;
  }
  const TrialBatch batch = sample_batch(
      env, pi, batch_key, static_cast<std::size_t>(config.samples_per_step));
  return estimate_from_batch(batch, env, config, diagnostics);
}

std::string to_string(StepNormalization mode) {
  switch (mode) {
    case StepNormalization::kRaw:
      return "raw";
    case StepNormalization::kComponentRms:
      return "component-rms";
    case StepNormalization::kGlobalRms:
      return "global-rms";
  }
  return "unknown";
}

StepNormalization parse_step_normalization(const std::string& name) {
  for (StepNormalization mode :
       {StepNormalization::kRaw, StepNormalization::kComponentRms,
        StepNormalization::kGlobalRms}) {
    if (to_string(mode) == name) return mode;
  }
  throw InvalidArgument("unknown step normalization '" + name + "'");
}

LearningCurve hill_climb(const PolicyVector& initial, const Environment& env,
                         const EstimatorConfig& estimator,
                         const StepSchedule& schedule, int num_steps,
                         std::uint64_t episode_key) {
  estimator.validate();
  if (num_steps < 1) throw InvalidArgument("num_steps must be >= 1");
  if (initial.size() != env.policy_dimension()) {
    throw InvalidArgument("initial policy has the wrong dimension");
  }
  const auto n = static_cast<std::size_t>(estimator.samples_per_step);
  const bool pegasus = estimator.kind == EstimatorKind::kPegasusFd;
  const std::vector<std::uint64_t> scenarios =
      pegasus ? scenario_seeds(derive_seed(episode_key, {kScenarioStream}),
                               estimator.scenario_count())
              : std::vector<std::uint64_t>{};

  LearningCurve curve;
  curve.step_count = num_steps;
  PolicyVector pi = initial;
  Eigen::VectorXd rms_component;
  double rms_global = 0.0;
  double best = -std::numeric_limits<double>::infinity();

  for (int s = 0; s < num_steps; ++s) {
    const std::uint64_t batch_key =
        derive_seed(episode_key, {static_cast<std::uint64_t>(s)});
    double mean = 0.0;
    GradientEstimate est;
    if (pegasus) {
      mean = mean_response(env, pi, scenario_seeds(batch_key, estimator.samples_per_step));
      est = pegasus_fd_gradient(pi, env, estimator.fd_delta, scenarios);
    } else {
      const TrialBatch batch = sample_batch(env, pi, batch_key, n);
      mean = batch_mean_response(batch);
      est = estimate_from_batch(batch, env, estimator);
    }
    best = std::max(best, mean);
    curve.per_step_mean_response.push_back(mean);
    curve.per_step_best_response.push_back(best);
    curve.per_step_policy.push_back(pi);
    if (s + 1 == num_steps) break;

    const Eigen::VectorXd& v = est.gradient;
    Eigen::VectorXd step;
    switch (schedule.normalization) {
      case StepNormalization::kRaw:
        step = schedule.step_size * v;
        break;
      case StepNormalization::kComponentRms: {
        const Eigen::VectorXd sq = v.cwiseAbs2();
        if (s == 0) {
          rms_component = sq;
        } else {
          rms_component = schedule.rms_decay * rms_component +
                          (1.0 - schedule.rms_decay) * sq;
        }
        step = Eigen::VectorXd::Zero(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          if (rms_component[i] > 0.0) {
            step[i] = schedule.step_size * v[i] / std::sqrt(rms_component[i]);
          }
        }
        break;
      }
      case StepNormalization::kGlobalRms: {
        const double sq = v.squaredNorm() / static_cast<double>(v.size());
        rms_global = s == 0 ? sq
                            : schedule.rms_decay * rms_global +
                                  (1.0 - schedule.rms_decay) * sq;
        step = rms_global > 0.0
                   ? Eigen::VectorXd(schedule.step_size * v / std::sqrt(rms_global))
                   : Eigen::VectorXd::Zero(v.size());
        break;
      }
    }
    const PolicyVector next = env.constrain(pi + step);
    if (!next.allFinite() || !env.in_bounds(next)) {
      curve.frozen_at = s + 1;
      for (int rest = s + 1; rest < num_steps; ++rest) {
        curve.per_step_mean_response.push_back(mean);
        curve.per_step_best_response.push_back(best);
        curve.per_step_policy.push_back(pi);
      }
      break;
    }
    pi = next;
  }
  return curve;
}

AggregateCurve aggregate_curves(const std::vector<LearningCurve>& curves) {
  if (curves.empty()) throw InvalidArgument("no curves to aggregate");
  std::size_t len = 0;
  for (const auto& c : curves) {
    if (c.per_step_best_response.empty()) {
      throw InvalidArgument("cannot aggregate an empty curve");
    }
    len = std::max(len, c.per_step_best_response.size());
  }
  AggregateCurve out;
  out.episodes = curves.size();
  out.mean.assign(len, 0.0);
  out.standard_error.assign(len, 0.0);
  const double n = static_cast<double>(curves.size());
  for (std::size_t s = 0; s < len; ++s) {
    auto value = [s](const LearningCurve& c) {
      const auto& r = c.per_step_best_response;
      return s < r.size() ? r[s] : r.back();
    };
    double sum = 0.0;
    for (const auto& c : curves) sum += value(c);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& c : curves) ss += (value(c) - mean) * (value(c) - mean);
    out.mean[s] = mean;
    out.standard_error[s] =
        curves.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return out;
}

}  // namespace motorgrad
