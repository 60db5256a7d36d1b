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

#ifndef MOTORGRAD_ESTIMATORS_H_
#define MOTORGRAD_ESTIMATORS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motorgrad/noise.h"

namespace motorgrad {

// A gradient estimate and the empirical variance of its single-sample terms.
struct GradientEstimate {
  Eigen::VectorXd gradient;
  Eigen::VectorXd per_component_variance;  // N-1 denominator
  std::int64_t sample_count = 0;

  double trace_variance() const { return per_component_variance.sum(); }
};

// Trials sampled at one policy plus their eligibilities, index-aligned.
struct TrialBatch {
  std::vector<Trial> trials;
  std::vector<EligibilityVector> eligibilities;

  std::size_t size() const { return trials.size(); }
  Eigen::Index policy_dimension() const;
  void validate() const;
  bool degenerate() const;  // every eligibility is exactly zero

  // Trials [begin, end) as a new batch.
  TrialBatch slice(std::size_t begin, std::size_t end) const;
};

// Features Phi(h) of a linear-in-parameters response model F^(h) = Phi^T b.
// analytic_g, when set, returns E[E(H) Phi(H)^T] (d x m) for a batch; it may
// use trial-level quantities such as recorded control sensitivities.
struct FeatureMap {
  std::string name;
  Eigen::Index dimension = 0;
  std::function<Eigen::VectorXd(const Trial&)> evaluate;
  std::function<Eigen::MatrixXd(const TrialBatch&)> analytic_g;

  bool has_analytic_g() const { return static_cast<bool>(analytic_g); }
};

FeatureMap constant_feature();

struct ModelWeights {
  Eigen::VectorXd weights;
};

struct WeightMatrix {
  Eigen::VectorXd diagonal;
};

// Ridge applied to the fitted normal matrix: rho = ridge_scale * tr(A) / m.
inline constexpr double kDefaultRidgeScale = 1e-8;

// v = (1/N) sum E(h) F(h).
GradientEstimate naive_gradient(const TrialBatch& batch);

// a = sum |E|^2 F / sum |E|^2. Throws DegenerateBatch if every |E| is zero.
double optimal_constant_baseline(const TrialBatch& batch);

// v = (1/N) sum E(h) (F(h) - a).
GradientEstimate baseline_gradient(const TrialBatch& batch, double a);

// Feature matrix, one row per trial.
Eigen::MatrixXd evaluate_features(const TrialBatch& batch,
                                  const FeatureMap& features);

// (1/N) sum E(h) Phi(h)^T.
Eigen::MatrixXd empirical_g(const TrialBatch& batch, const FeatureMap& features);

// The analytic G when the map provides one, otherwise the empirical G.
Eigen::MatrixXd resolve_g(const TrialBatch& batch, const FeatureMap& features);

// Variance-minimizing weights b = (A + rho I)^{-1} B with
//   A = mean(Phi Phi^T |E|^2) - G^T G
//   B = mean(Phi |E|^2 F) - G^T mean(E F).
ModelWeights fit_response_surface(const TrialBatch& batch,
                                  const FeatureMap& features,
                                  const Eigen::MatrixXd& g,
                                  double ridge_scale = kDefaultRidgeScale);

// v = G b + (1/N) sum E(h) (F(h) - Phi(h)^T b).
GradientEstimate model_gradient(const TrialBatch& batch,
                                const FeatureMap& features,
                                const ModelWeights& b,
                                const Eigen::MatrixXd& g);

// lambda_i = N k^2 / (V_i + N k^2).
WeightMatrix estimate_lambda(const GradientEstimate& estimate,
                             double k_squared);

GradientEstimate apply_weights(const GradientEstimate& estimate,
                               const WeightMatrix& weights);

// Mean and unbiased variance of the rows of a (N x d) matrix of single-sample
// gradient terms. Shared by all estimators.
GradientEstimate summarize_terms(const Eigen::MatrixXd& terms);

}  // namespace motorgrad

#endif  // MOTORGRAD_ESTIMATORS_H_
