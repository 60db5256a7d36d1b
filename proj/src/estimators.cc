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

#include "motorgrad/estimators.h"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

Eigen::MatrixXd eligibility_matrix(const TrialBatch& batch) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd e(n, batch.policy_dimension());
  for (Eigen::Index i = 0; i < n; ++i) e.row(i) = batch.eligibilities[i];
  return e;
}

Eigen::VectorXd responses(const TrialBatch& batch) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(batch.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = batch.trials[i].response;
  return f;
}

void check_g(const Eigen::MatrixXd& g, const TrialBatch& batch,
             const FeatureMap& features) {
  if (g.rows() != batch.policy_dimension() || g.cols() != features.dimension) {
    throw InvalidArgument("G must be " +
                          std::to_string(batch.policy_dimension()) + " x " +
                          std::to_string(features.dimension));
  }
}

}  // namespace

Eigen::Index TrialBatch::policy_dimension() const {
  return eligibilities.empty() ? 0 : eligibilities.front().size();
}

void TrialBatch::validate() const {
  if (trials.empty()) throw InvalidArgument("batch is empty");
  if (trials.size() != eligibilities.size()) {
    throw InvalidArgument("batch: trial and eligibility counts differ");
  }
  const Eigen::Index d = policy_dimension();
  for (const auto& e : eligibilities) {
    if (e.size() != d || d == 0) {
      throw InvalidArgument("batch: inconsistent eligibility dimensions");
    }
  }
}

bool TrialBatch::degenerate() const {
  for (const auto& e : eligibilities) {
    if (e.squaredNorm() > 0.0) return false;
  }
  return true;
}

TrialBatch TrialBatch::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw InvalidArgument("batch: bad slice");
  TrialBatch out;
  out.trials.assign(trials.begin() + begin, trials.begin() + end);
  out.eligibilities.assign(eligibilities.begin() + begin,
                           eligibilities.begin() + end);
  return out;
}

FeatureMap constant_feature() {
  FeatureMap map;
  map.name = "constant";
  map.dimension = 1;
  map.evaluate = [](const Trial&) { return Eigen::VectorXd::Ones(1); };
  map.analytic_g = [](const TrialBatch& batch) {
    return Eigen::MatrixXd::Zero(batch.policy_dimension(), 1);
  };
  return map;
}

GradientEstimate summarize_terms(const Eigen::MatrixXd& terms) {
  const Eigen::Index n = terms.rows();
  if (n == 0) throw InvalidArgument("no samples to summarize");
  GradientEstimate est;
  est.sample_count = n;
  est.gradient = terms.colwise().sum().transpose() / static_cast<double>(n);
  if (n == 1) {
    est.per_component_variance = Eigen::VectorXd::Zero(terms.cols());
  } else {
    const Eigen::MatrixXd centered =
        terms.rowwise() - est.gradient.transpose();
    est.per_component_variance = centered.colwise().squaredNorm().transpose() /
                                 static_cast<double>(n - 1);
  }
  return est;
}

GradientEstimate naive_gradient(const TrialBatch& batch) {
  batch.validate();
  Eigen::MatrixXd terms = eligibility_matrix(batch);
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    terms.row(i) *= batch.trials[i].response;
  }
  return summarize_terms(terms);
}

double optimal_constant_baseline(const TrialBatch& batch) {
  batch.validate();
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double norm2 = batch.eligibilities[i].squaredNorm();
    numerator += norm2 * batch.trials[i].response;
    denominator += norm2;
  }
  if (denominator == 0.0) {
    throw DegenerateBatch("optimal baseline undefined: all eligibilities are "
                          "zero");
  }
  return numerator / denominator;
}

GradientEstimate baseline_gradient(const TrialBatch& batch, double a) {
  batch.validate();
  Eigen::MatrixXd terms = eligibility_matrix(batch);
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    terms.row(i) *= batch.trials[i].response - a;
  }
  return summarize_terms(terms);
}

Eigen::MatrixXd evaluate_features(const TrialBatch& batch,
                                  const FeatureMap& features) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd phi(n, features.dimension);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = features.evaluate(batch.trials[i]);
    if (row.size() != features.dimension) {
      throw InvalidArgument("feature map '" + features.name +
                            "' returned the wrong dimension");
    }
    phi.row(i) = row;
  }
  return phi;
}

Eigen::MatrixXd empirical_g(const TrialBatch& batch,
                            const FeatureMap& features) {
  batch.validate();
  const Eigen::MatrixXd phi = evaluate_features(batch, features);
  return eligibility_matrix(batch).transpose() * phi /
         static_cast<double>(batch.size());
}

Eigen::MatrixXd resolve_g(const TrialBatch& batch, const FeatureMap& features) {
  if (features.has_analytic_g()) {
    Eigen::MatrixXd g = features.analytic_g(batch);
    check_g(g, batch, features);
    return g;
  }
  return empirical_g(batch, features);
}

ModelWeights fit_response_surface(const TrialBatch& batch,
                                  const FeatureMap& features,
                                  const Eigen::MatrixXd& g,
                                  double ridge_scale) {
  batch.validate();
  check_g(g, batch, features);
  const Eigen::Index m = features.dimension;
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n < m) {
    throw InsufficientData("response surface fit needs at least " +
                           std::to_string(m) + " trials, got " +
                           std::to_string(n));
  }
  const Eigen::MatrixXd phi = evaluate_features(batch, features);
  const Eigen::MatrixXd e = eligibility_matrix(batch);
  const Eigen::VectorXd f = responses(batch);
  const Eigen::VectorXd norm2 = e.rowwise().squaredNorm();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd a = phi.transpose() * norm2.asDiagonal() * phi * inv_n -
                      g.transpose() * g;
  const Eigen::VectorXd ef = e.transpose() * f * inv_n;
  const Eigen::VectorXd b_rhs =
      phi.transpose() * norm2.cwiseProduct(f) * inv_n - g.transpose() * ef;

  if (ridge_scale > 0.0) {
    const double rho = ridge_scale * a.trace() / static_cast<double>(m);
    a.diagonal().array() += rho;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible() || !a.allFinite()) {
    throw NumericalError("response surface normal matrix is singular");
  }
  return ModelWeights{lu.solve(b_rhs)};
}

GradientEstimate model_gradient(const TrialBatch& batch,
                                const FeatureMap& features,
                                const ModelWeights& b,
                                const Eigen::MatrixXd& g) {
  batch.validate();
  check_g(g, batch, features);
  if (b.weights.size() != features.dimension) {
    throw InvalidArgument("model weights do not match feature dimension");
  }
  const Eigen::MatrixXd phi = evaluate_features(batch, features);
  const Eigen::VectorXd model_term = g * b.weights;
  Eigen::MatrixXd terms = eligibility_matrix(batch);
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    const double residual =
        batch.trials[i].response - phi.row(i).dot(b.weights);
    terms.row(i) = model_term.transpose() + terms.row(i) * residual;
  }
  return summarize_terms(terms);
}

WeightMatrix estimate_lambda(const GradientEstimate& estimate,
                             double k_squared) {
  if (!(k_squared > 0.0) || !std::isfinite(k_squared)) {
    throw InvalidArgument("k_squared must be positive and finite");
  }
  if (estimate.sample_count < 1 ||
      estimate.per_component_variance.size() != estimate.gradient.size()) {
    throw InvalidArgument("estimate has no variance information");
  }
  const double nk2 = static_cast<double>(estimate.sample_count) * k_squared;
  WeightMatrix w;
  w.diagonal = estimate.per_component_variance.unaryExpr(
      [nk2](double v) { return nk2 / (v + nk2); });
  return w;
}

GradientEstimate apply_weights(const GradientEstimate& estimate,
                               const WeightMatrix& weights) {
  if (weights.diagonal.size() != estimate.gradient.size()) {
    throw InvalidArgument("weight dimension does not match gradient");
  }
  GradientEstimate out = estimate;
  out.gradient = estimate.gradient.cwiseProduct(weights.diagonal);
  out.per_component_variance = estimate.per_component_variance.cwiseProduct(
      weights.diagonal.cwiseAbs2());
  return out;
}

}  // namespace motorgrad
