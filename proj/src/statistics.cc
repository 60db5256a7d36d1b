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

#include "motorgrad/statistics.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "motorgrad/errors.h"

namespace motorgrad {

MeanAndError mean_and_error(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean of an empty sample");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanAndError out;
  out.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

void column_mean_and_error(const Eigen::MatrixXd& samples,
                           Eigen::VectorXd& mean, Eigen::VectorXd& error) {
  const double n = static_cast<double>(samples.rows());
  if (samples.rows() < 2) throw InvalidArgument("need at least 2 samples");
  mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  error = (centered.colwise().squaredNorm().transpose() / (n - 1.0) / n)
              .cwiseSqrt();
}

Interval bootstrap_trace_variance(const Eigen::MatrixXd& terms,
                                  double confidence, int resamples,
                                  std::uint64_t seed) {
  const Eigen::Index n = terms.rows();
  if (n < 2 || resamples < 2) {
    throw InvalidArgument("bootstrap needs at least 2 rows and 2 resamples");
  }
  auto trace_var = [](const Eigen::MatrixXd& m) {
    const Eigen::RowVectorXd mu = m.colwise().mean();
    return (m.rowwise() - mu).squaredNorm() /
           static_cast<double>(m.rows() - 1);
  };
  Interval out;
  out.point = trace_var(terms);
  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  const Eigen::Index d = terms.cols();
  for (int r = 0; r < resamples; ++r) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = terms.row(pick(engine)).transpose();
      sum += row;
      sum_sq += row.cwiseAbs2();
    }
    const double nn = static_cast<double>(n);
    stats[static_cast<std::size_t>(r)] =
        ((sum_sq - sum.cwiseAbs2() / nn) / (nn - 1.0)).sum();
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - confidence);
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  out.lower = at(tail);
  out.upper = at(1.0 - tail);
  return out;
}

MeanAndError paired_difference(const std::vector<double>& a,
                               const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("paired samples differ");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return mean_and_error(diff);
}

double normal_upper_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile needs 0 < p < 1");
  // Bisection on the complementary error function.
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace motorgrad
