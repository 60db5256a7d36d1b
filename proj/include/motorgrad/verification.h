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

#ifndef MOTORGRAD_VERIFICATION_H_
#define MOTORGRAD_VERIFICATION_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "motorgrad/experiment_config.h"

namespace motorgrad {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparison;  // how measured relates to threshold when passing
  std::string detail;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::vector<std::string> failures() const;
};

// Runs the oracle checks on the cannon and arm settings of `config`:
// noise-model preconditions, score zero mean, eligibility against finite
// differences of the log-likelihood, estimator agreement, mass-matrix
// definiteness, hanging equilibrium, energy conservation and G = 0 for
// release-time features.
VerificationReport run_verification_suite(const ExperimentConfig& config);

void write_report(std::ostream& out, const VerificationReport& report,
                  const std::string& header);

}  // namespace motorgrad

#endif  // MOTORGRAD_VERIFICATION_H_
