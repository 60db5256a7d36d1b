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

#include "motorgrad/trial_io.h"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

using nlohmann::json;

json to_array(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd from_array(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

std::string trial_to_json_line(const Trial& trial) {
  json j;
  j["seed"] = trial.seed;
  if (trial.release_time) {
    j["release_time"] = *trial.release_time;
  } else {
    j["release_time"] = nullptr;
  }
  j["response"] = trial.response;
  json steps = json::array();
  for (const StepRecord& step : trial.steps) {
    steps.push_back({{"t", step.time},
                     {"x", to_array(step.state)},
                     {"u", to_array(step.control)},
                     {"n", to_array(step.noise)}});
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

Trial trial_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
    Trial trial;
    trial.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("release_time").is_null()) {
      trial.release_time = j.at("release_time").get<double>();
    }
    trial.response = j.at("response").get<double>();
    for (const json& s : j.at("steps")) {
      StepRecord step;
      step.time = s.at("t").get<double>();
      step.state = from_array(s.at("x"));
      step.control = from_array(s.at("u"));
      step.noise = from_array(s.at("n"));
      trial.steps.push_back(std::move(step));
    }
    return trial;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed trial record: ") + e.what());
  }
}

void write_trials(std::ostream& out, const std::vector<Trial>& trials) {
  for (const Trial& trial : trials) out << trial_to_json_line(trial) << '\n';
}

std::vector<Trial> read_trials(std::istream& in) {
  std::vector<Trial> trials;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    trials.push_back(trial_from_json_line(line));
  }
  return trials;
}

}  // namespace motorgrad
