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

#ifndef MOTORGRAD_STATISTICS_H_
#define MOTORGRAD_STATISTICS_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace motorgrad {

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

MeanAndError mean_and_error(const std::vector<double>& values);

// Column means and standard errors of the rows of `samples`.
void column_mean_and_error(const Eigen::MatrixXd& samples,
                           Eigen::VectorXd& mean, Eigen::VectorXd& error);

struct Interval {
  double lower = 0.0;
  double point = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap interval for the summed per-column variance of the
// rows of `terms` (the trace of the single-sample covariance).
Interval bootstrap_trace_variance(const Eigen::MatrixXd& terms,
                                  double confidence, int resamples,
                                  std::uint64_t seed);

// Paired mean difference a - b with its standard error.
MeanAndError paired_difference(const std::vector<double>& a,
                               const std::vector<double>& b);

// Upper-tail standard normal quantile: P(Z > z) = p.
double normal_upper_quantile(double p);

}  // namespace motorgrad

#endif  // MOTORGRAD_STATISTICS_H_
