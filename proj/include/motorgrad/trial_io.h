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

#ifndef MOTORGRAD_TRIAL_IO_H_
#define MOTORGRAD_TRIAL_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "motorgrad/noise.h"

namespace motorgrad {

// One JSON object per line:
// {"seed", "release_time", "response", "steps": [{"t", "x", "u", "n"}]}.
// Sensitivities are not stored.
std::string trial_to_json_line(const Trial& trial);
Trial trial_from_json_line(const std::string& line);

void write_trials(std::ostream& out, const std::vector<Trial>& trials);
std::vector<Trial> read_trials(std::istream& in);

}  // namespace motorgrad

#endif  // MOTORGRAD_TRIAL_IO_H_
