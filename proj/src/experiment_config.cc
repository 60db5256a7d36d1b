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

#include "motorgrad/experiment_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "motorgrad/errors.h"

namespace motorgrad {
namespace {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

// Reads one mapping, remembering which keys were consumed so leftovers can be
// reported as unknown fields.
class Section {
 public:
  Section(const YAML::Node& node, std::string path,
          std::map<std::string, int>* lines)
      : node_(node), path_(std::move(path)), lines_(lines) {
    if (!node_.IsMap()) {
      throw ConfigError(line_of(node_), path_.empty() ? "<root>" : path_,
                        "expected a mapping");
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    const YAML::Node value = node_[key];
    if (value && lines_) (*lines_)[field(key)] = line_of(value);
    return static_cast<bool>(value);
  }

  YAML::Node get(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = scalar<T>(get(key), field(key));
  }

  void read_vector(const std::string& key, Eigen::Ref<Eigen::VectorXd> out) {
    if (!has(key)) return;
    const Eigen::VectorXd v = vector(get(key), field(key), out.size());
    out = v;
  }

  Eigen::MatrixXd matrix(const std::string& key, Eigen::Index rows,
                         Eigen::Index cols) {
    return parse_matrix(get(key), field(key), rows, cols);
  }

  Section child(const std::string& key) {
    return Section(get(key), field(key), lines_);
  }

  // Throws on any key that was never asked for.
  void finish() const {
    for (const auto& item : node_) {
      const std::string key = item.first.as<std::string>();
      if (!seen_.count(key)) {
        throw ConfigError(line_of(item.first), field(key), "unknown field");
      }
    }
  }

  int line() const { return line_of(node_); }
  std::map<std::string, int>* lines() const { return lines_; }

  template <typename T>
  static T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) {
      throw ConfigError(line_of(node), field, "expected a scalar value");
    }
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(line_of(node), field,
                        "cannot interpret '" + node.Scalar() + "'");
    }
  }

  static Eigen::VectorXd vector(const YAML::Node& node,
                                const std::string& field,
                                Eigen::Index expected) {
    if (!node.IsSequence()) {
      throw ConfigError(line_of(node), field, "expected a list of numbers");
    }
    if (expected >= 0 && static_cast<Eigen::Index>(node.size()) != expected) {
      throw ConfigError(line_of(node), field,
                        "expected " + std::to_string(expected) + " entries");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], field);
    }
    return v;
  }

  // rows or cols < 0 accepts any size; rows must nonetheless be consistent.
  static Eigen::MatrixXd parse_matrix(const YAML::Node& node,
                                      const std::string& field,
                                      Eigen::Index rows, Eigen::Index cols) {
    if (!node.IsSequence() || node.size() == 0) {
      throw ConfigError(line_of(node), field, "expected a list of rows");
    }
    const auto n = static_cast<Eigen::Index>(node.size());
    if (rows >= 0 && n != rows) {
      throw ConfigError(line_of(node), field,
                        "expected " + std::to_string(rows) + " rows");
    }
    const Eigen::VectorXd first = vector(node[0], field, cols);
    Eigen::MatrixXd m(n, first.size());
    m.row(0) = first.transpose();
    for (Eigen::Index r = 1; r < n; ++r) {
      m.row(r) = vector(node[static_cast<std::size_t>(r)], field, first.size())
                     .transpose();
    }
    return m;
  }

 private:
  const YAML::Node node_;
  std::string path_;
  std::map<std::string, int>* lines_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto rethrow_as_config(int line, const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError(line, field, e.what());
  }
}

void read_array3(Section& s, const std::string& key, std::array<double, 3>& a) {
  Eigen::Vector3d v(a[0], a[1], a[2]);
  s.read_vector(key, v);
  a = {v[0], v[1], v[2]};
}

void parse_cannon(Section s, ExperimentConfig& config) {
  s.read("gravity", config.cannon.gravity);
  s.read("target_range", config.cannon.target_range);
  s.read("noise_enabled", config.cannon.noise_enabled);
  if (s.has("noise_covariance")) {
    config.cannon.noise_covariance = s.matrix("noise_covariance", 2, 2);
  }
  s.read_vector("initial_policy", config.cannon_initial);
  s.finish();
}

void parse_noise(Section s, NoiseModel& model) {
  if (s.has("base_covariance")) {
    model.base_covariance = s.matrix("base_covariance", 3, 3);
  }
  if (s.has("scaling_matrices")) {
    const YAML::Node list = s.get("scaling_matrices");
    const std::string field = s.field("scaling_matrices");
    if (!list.IsSequence()) {
      throw ConfigError(line_of(list), field, "expected a list of matrices");
    }
    model.scaling_matrices.clear();
    for (const YAML::Node& m : list) {
      model.scaling_matrices.push_back(Section::parse_matrix(m, field, 3, 3));
    }
  }
  s.finish();
}

void parse_controller(Section s, ControllerConfig& c) {
  if (s.has("knots")) c.knots = s.matrix("knots", -1, 3);
  s.read("t_max", c.t_max);
  s.read_vector("position_gains", c.position_gains);
  s.read_vector("velocity_gains", c.velocity_gains);
  s.read("policy_bound", c.policy_bound);
  s.finish();
}

void parse_arm(Section s, ExperimentConfig& config) {
  ArmConfig& arm = config.arm;
  read_array3(s, "link_lengths", arm.link_lengths);
  read_array3(s, "link_masses", arm.link_masses);
  read_array3(s, "link_inertias", arm.link_inertias);
  s.read("gravity", arm.gravity);
  s.read_vector("start_posture", arm.start_posture);
  s.read("integration_dt", arm.integration_dt);
  s.read("nominal_release_time", arm.nominal_release_time);
  s.read("release_time_sigma", arm.release_time_sigma);
  s.read("wall_distance", arm.wall_distance);
  s.read("bullseye_height", arm.bullseye_height);
  s.read("max_miss_distance", arm.max_miss_distance);
  s.read("noise_enabled", arm.noise_enabled);
  if (s.has("noise")) parse_noise(s.child("noise"), arm.noise_model);
  if (s.has("controller")) parse_controller(s.child("controller"), config.controller);
  s.finish();
}

void parse_environment(Section s, ExperimentConfig& config) {
  if (!s.has("kind")) {
    throw ConfigError(s.line(), s.field("kind"), "missing required field");
  }
  const YAML::Node kind_node = s.get("kind");
  const auto kind = Section::scalar<std::string>(kind_node, s.field("kind"));
  if (kind == "cannon") {
    config.environment = EnvironmentKind::kCannon;
  } else if (kind == "dart-arm") {
    config.environment = EnvironmentKind::kDartArm;
  } else {
    throw ConfigError(line_of(kind_node), s.field("kind"),
                      "expected 'cannon' or 'dart-arm', got '" + kind + "'");
  }
  if (s.has("cannon")) parse_cannon(s.child("cannon"), config);
  if (s.has("dart_arm")) parse_arm(s.child("dart_arm"), config);
  s.finish();
}

EstimatorConfig parse_estimator(Section s) {
  EstimatorConfig e;
  if (!s.has("kind")) {
    throw ConfigError(s.line(), s.field("kind"), "missing required field");
  }
  const YAML::Node kind_node = s.get("kind");
  const auto kind = Section::scalar<std::string>(kind_node, s.field("kind"));
  e.kind = rethrow_as_config(line_of(kind_node), s.field("kind"),
                             [&] { return parse_estimator_kind(kind); });
  s.read("feature_map", e.feature_map);
  s.read("k_squared", e.k_squared);
  s.read("samples_per_step", e.samples_per_step);
  s.read("fd_delta", e.fd_delta);
  s.read("fd_scenarios", e.fd_scenarios);
  s.read("holdout_fit", e.holdout_fit);
  s.read("ridge_scale", e.ridge_scale);
  s.finish();
  return e;
}

void parse_schedule(Section s, StepSchedule& schedule) {
  s.read("step_size", schedule.step_size);
  if (s.has("normalization")) {
    const YAML::Node node = s.get("normalization");
    const auto name = Section::scalar<std::string>(node, s.field("normalization"));
    schedule.normalization =
        rethrow_as_config(line_of(node), s.field("normalization"),
                          [&] { return parse_step_normalization(name); });
  }
  s.read("rms_decay", schedule.rms_decay);
  s.finish();
}

void parse_diagnostics(Section s, DiagnosticsConfig& d) {
  if (s.has("policy")) {
    d.policy = Section::vector(s.get("policy"), s.field("policy"), -1);
  }
  s.read("samples", d.samples);
  s.finish();
}

void parse_verification(Section s, VerificationConfig& v) {
  s.read("score_trials", v.score_trials);
  s.read("score_policies", v.score_policies);
  s.read("likelihood_trials", v.likelihood_trials);
  s.read("cannon_likelihood_trials", v.cannon_likelihood_trials);
  s.read("unbiasedness_samples", v.unbiasedness_samples);
  s.read("g_trials", v.g_trials);
  s.read("energy_seconds", v.energy_seconds);
  s.finish();
}

// Shortest decimal text that parses back to the same double.
std::string format_double(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  std::string s(buf, result.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void emit_vector(YAML::Emitter& out, const Eigen::VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]);
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const Eigen::MatrixXd& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    emit_vector(out, m.row(r).transpose());
  }
  out << YAML::EndSeq;
}

void emit_double(YAML::Emitter& out, const char* key, double value) {
  out << YAML::Key << key << YAML::Value << format_double(value);
}

Eigen::Vector3d as_vector(const std::array<double, 3>& a) {
  return Eigen::Vector3d(a[0], a[1], a[2]);
}

}  // namespace

std::string to_string(EnvironmentKind kind) {
  return kind == EnvironmentKind::kCannon ? "cannon" : "dart-arm";
}

std::string to_string(OutputFormat format) {
  return format == OutputFormat::kCsv ? "csv" : "json";
}

ControllerConfig ControllerConfig::defaults() {
  ControllerConfig c;
  c.knots.resize(3, 3);
  // rows: knot times; columns: shoulder, elbow, wrist
  c.knots << -0.2, -0.6, -0.6,
              0.6, -0.5, -0.3,
              1.2,  0.0,  0.4;
  return c;
}

PDController ControllerConfig::build(const ArmConfig& arm) const {
  Eigen::MatrixXd gains = Eigen::MatrixXd::Zero(3, 6);
  gains.leftCols(3).diagonal() = position_gains;
  gains.rightCols(3).diagonal() = velocity_gains;
  return PDController{gains,
                      SplineTrajectory::uniform(arm.start_posture, knots, t_max)};
}

namespace {

// Line of `field`, or of its closest parsed ancestor.
int lookup_line(const std::map<std::string, int>& lines, std::string field) {
  while (!field.empty()) {
    const auto it = lines.find(field);
    if (it != lines.end()) return it->second;
    const auto cut = field.find_last_of(".[");
    if (cut == std::string::npos) break;
    field.erase(cut);
  }
  return 0;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    validate_fields();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    const int line = lookup_line(field_lines, e.field());
    if (line == 0) throw;
    throw ConfigError(line, e.field(), e.message());
  }
}

void ExperimentConfig::validate_fields() const {
  auto require = [](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(0, field, msg);
  };
  require(episodes >= 1, "episodes", "must be at least 1");
  require(steps_per_episode >= 1, "steps_per_episode", "must be at least 1");
  require(!estimators.empty(), "estimators", "must list at least one estimator");
  require(schedule.step_size > 0.0 && std::isfinite(schedule.step_size),
          "schedule.step_size", "must be positive");
  require(schedule.rms_decay >= 0.0 && schedule.rms_decay < 1.0,
          "schedule.rms_decay", "must lie in [0, 1)");
  require(!output_path.empty(), "output_path", "must not be empty");
  require(diagnostics.samples >= 2, "diagnostics.samples", "must be at least 2");
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    const std::string field = "estimators[" + std::to_string(i) + "]";
    try {
      estimators[i].validate();
    } catch (const InvalidArgument& e) {
      // Messages lead with the offending key.
      const std::string msg = e.what();
      const std::string key = msg.substr(0, msg.find(' '));
      for (const char* known : {"samples_per_step", "k_squared", "fd_delta",
                                "fd_scenarios", "ridge_scale"}) {
        if (key == known) throw ConfigError(0, field + "." + key, msg);
      }
      throw ConfigError(0, field, msg);
    }
  }
  if (environment == EnvironmentKind::kCannon) {
    rethrow_as_config(0, "environment.cannon", [&] {
      cannon.validate();
      return 0;
    });
  } else {
    rethrow_as_config(0, "environment.dart_arm", [&] {
      arm.validate();
      return 0;
    });
    require(controller.knots.cols() == 3 && controller.knots.rows() >= 1,
            "environment.dart_arm.controller.knots",
            "need at least one row of 3 joint angles");
    require(controller.t_max > 0.0, "environment.dart_arm.controller.t_max",
            "must be positive");
    require(controller.policy_bound > 0.0,
            "environment.dart_arm.controller.policy_bound", "must be positive");
  }
}

std::unique_ptr<Environment> ExperimentConfig::make_environment() const {
  if (environment == EnvironmentKind::kCannon) {
    return std::make_unique<CannonEnvironment>(cannon, cannon_initial);
  }
  return std::make_unique<DartEnvironment>(arm, controller.build(arm),
                                           controller.policy_bound);
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.is_null() ? 0 : e.mark.line + 1, "",
                      "syntax error: " + e.msg);
  }
  ExperimentConfig config;
  if (!root.IsDefined() || root.IsNull()) {
    throw ConfigError(0, "", "empty configuration");
  }
  Section s(root, "", &config.field_lines);
  if (s.has("environment")) {
    parse_environment(s.child("environment"), config);
  } else {
    throw ConfigError(s.line(), "environment", "missing required field");
  }
  if (s.has("estimators")) {
    const YAML::Node list = s.get("estimators");
    if (!list.IsSequence()) {
      throw ConfigError(line_of(list), "estimators", "expected a list");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "estimators[" + std::to_string(i) + "]";
      config.field_lines[field] = line_of(list[i]);
      config.estimators.push_back(
          parse_estimator(Section(list[i], field, &config.field_lines)));
    }
  }
  if (s.has("schedule")) parse_schedule(s.child("schedule"), config.schedule);
  s.read("episodes", config.episodes);
  s.read("steps_per_episode", config.steps_per_episode);
  s.read("master_seed", config.master_seed);
  s.read("paired_episodes", config.paired_episodes);
  s.read("output_path", config.output_path);
  if (s.has("output_format")) {
    const YAML::Node node = s.get("output_format");
    const auto f = Section::scalar<std::string>(node, "output_format");
    if (f == "csv") {
      config.output_format = OutputFormat::kCsv;
    } else if (f == "json") {
      config.output_format = OutputFormat::kJson;
    } else {
      throw ConfigError(line_of(node), "output_format",
                        "expected 'csv' or 'json', got '" + f + "'");
    }
  }
  if (s.has("diagnostics")) {
    parse_diagnostics(s.child("diagnostics"), config.diagnostics);
  }
  if (s.has("verification")) {
    parse_verification(s.child("verification"), config.verification);
  }
  s.finish();
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file '" + path + "'");
  return parse_experiment_config(buffer.str());
}

std::string serialize_experiment_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "master_seed" << YAML::Value << c.master_seed;
  out << YAML::Key << "episodes" << YAML::Value << c.episodes;
  out << YAML::Key << "steps_per_episode" << YAML::Value << c.steps_per_episode;
  out << YAML::Key << "paired_episodes" << YAML::Value << c.paired_episodes;
  out << YAML::Key << "output_path" << YAML::Value << c.output_path;
  out << YAML::Key << "output_format" << YAML::Value
      << to_string(c.output_format);

  out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
  emit_double(out, "step_size", c.schedule.step_size);
  out << YAML::Key << "normalization" << YAML::Value
      << to_string(c.schedule.normalization);
  emit_double(out, "rms_decay", c.schedule.rms_decay);
  out << YAML::EndMap;

  out << YAML::Key << "environment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.environment);
  out << YAML::Key << "cannon" << YAML::Value << YAML::BeginMap;
  emit_double(out, "gravity", c.cannon.gravity);
  emit_double(out, "target_range", c.cannon.target_range);
  out << YAML::Key << "noise_covariance" << YAML::Value;
  emit_matrix(out, c.cannon.noise_covariance);
  out << YAML::Key << "noise_enabled" << YAML::Value << c.cannon.noise_enabled;
  out << YAML::Key << "initial_policy" << YAML::Value;
  emit_vector(out, c.cannon_initial);
  out << YAML::EndMap;

  const ArmConfig& a = c.arm;
  out << YAML::Key << "dart_arm" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "link_lengths" << YAML::Value;
  emit_vector(out, as_vector(a.link_lengths));
  out << YAML::Key << "link_masses" << YAML::Value;
  emit_vector(out, as_vector(a.link_masses));
  out << YAML::Key << "link_inertias" << YAML::Value;
  emit_vector(out, as_vector(a.link_inertias));
  emit_double(out, "gravity", a.gravity);
  out << YAML::Key << "start_posture" << YAML::Value;
  emit_vector(out, a.start_posture);
  emit_double(out, "integration_dt", a.integration_dt);
  emit_double(out, "nominal_release_time", a.nominal_release_time);
  emit_double(out, "release_time_sigma", a.release_time_sigma);
  emit_double(out, "wall_distance", a.wall_distance);
  emit_double(out, "bullseye_height", a.bullseye_height);
  emit_double(out, "max_miss_distance", a.max_miss_distance);
  out << YAML::Key << "noise_enabled" << YAML::Value << a.noise_enabled;
  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "base_covariance" << YAML::Value;
  emit_matrix(out, a.noise_model.base_covariance);
  out << YAML::Key << "scaling_matrices" << YAML::Value << YAML::BeginSeq;
  for (const Eigen::MatrixXd& m : a.noise_model.scaling_matrices) {
    emit_matrix(out, m);
  }
  out << YAML::EndSeq << YAML::EndMap;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "knots" << YAML::Value;
  emit_matrix(out, c.controller.knots);
  emit_double(out, "t_max", c.controller.t_max);
  out << YAML::Key << "position_gains" << YAML::Value;
  emit_vector(out, c.controller.position_gains);
  out << YAML::Key << "velocity_gains" << YAML::Value;
  emit_vector(out, c.controller.velocity_gains);
  emit_double(out, "policy_bound", c.controller.policy_bound);
  out << YAML::EndMap;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "estimators" << YAML::Value << YAML::BeginSeq;
  for (const EstimatorConfig& e : c.estimators) {
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(e.kind);
    out << YAML::Key << "feature_map" << YAML::Value << e.feature_map;
    emit_double(out, "k_squared", e.k_squared);
    out << YAML::Key << "samples_per_step" << YAML::Value << e.samples_per_step;
    emit_double(out, "fd_delta", e.fd_delta);
    out << YAML::Key << "fd_scenarios" << YAML::Value << e.fd_scenarios;
    out << YAML::Key << "holdout_fit" << YAML::Value << e.holdout_fit;
    emit_double(out, "ridge_scale", e.ridge_scale);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  if (c.diagnostics.policy) {
    out << YAML::Key << "policy" << YAML::Value;
    emit_vector(out, *c.diagnostics.policy);
  }
  out << YAML::Key << "samples" << YAML::Value << c.diagnostics.samples;
  out << YAML::EndMap;

  const VerificationConfig& v = c.verification;
  out << YAML::Key << "verification" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "score_trials" << YAML::Value << v.score_trials;
  out << YAML::Key << "score_policies" << YAML::Value << v.score_policies;
  out << YAML::Key << "likelihood_trials" << YAML::Value << v.likelihood_trials;
  out << YAML::Key << "cannon_likelihood_trials" << YAML::Value
      << v.cannon_likelihood_trials;
  out << YAML::Key << "unbiasedness_samples" << YAML::Value
      << v.unbiasedness_samples;
  out << YAML::Key << "g_trials" << YAML::Value << v.g_trials;
  emit_double(out, "energy_seconds", v.energy_seconds);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace motorgrad
