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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motorgrad/errors.h"
#include "motorgrad/experiment.h"
#include "motorgrad/experiment_config.h"
#include "motorgrad/verification.h"

namespace {

using namespace motorgrad;

enum ExitCode { kOk = 0, kVerificationFailure = 1, kConfigError = 2, kIoError = 3 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* config = cmd->add_option("--config", opts.config_path,
                                 "experiment configuration file (YAML)");
  if (config_required) config->required();
  cmd->add_option("--seed", opts.seed, "overrides master_seed");
  cmd->add_option("--output", opts.output, "output file");
}

ExperimentConfig load(const CommonOptions& opts) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) {
    config = load_experiment_config(opts.config_path);
  }
  if (opts.seed) config.master_seed = *opts.seed;
  return config;
}

// Writes to `path`, or stdout when it is empty.
template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

int run_command(const CommonOptions& opts, bool per_episode) {
  ExperimentConfig config = load(opts);
  if (!opts.output.empty()) config.output_path = opts.output;
  config.validate();
  const ExperimentResult result = run_experiment(config);
  save_experiment(result, config.output_path, config.output_format,
                  per_episode);
  std::cerr << "wrote " << config.output_path << '\n';
  return kOk;
}

int verify_command(const CommonOptions& opts) {
  const ExperimentConfig config = load(opts);
  const VerificationReport report = run_verification_suite(config);
  emit(opts.output, [&](std::ostream& out) {
    write_report(out, report, timestamp_header(OutputFormat::kJson));
  });
  for (const CheckResult& c : report.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured "
              << c.measured << ' ' << c.comparison << ' ' << c.threshold;
    if (!c.passed && !c.detail.empty()) std::cerr << " (" << c.detail << ')';
    std::cerr << '\n';
  }
  if (!report.passed()) {
    std::cerr << "verification failed:";
    for (const std::string& name : report.failures()) std::cerr << ' ' << name;
    std::cerr << '\n';
    return kVerificationFailure;
  }
  return kOk;
}

int diagnose_command(const CommonOptions& opts,
                     const std::vector<double>& policy_values) {
  const ExperimentConfig config = load(opts);
  config.validate();
  Eigen::VectorXd policy;
  if (!policy_values.empty()) {
    policy = Eigen::Map<const Eigen::VectorXd>(
        policy_values.data(), static_cast<Eigen::Index>(policy_values.size()));
  } else if (config.diagnostics.policy) {
    policy = *config.diagnostics.policy;
  } else {
    policy = config.make_environment()->initial_policy();
  }
  const DiagnosticTable table = dump_gradient_diagnostics(config, policy);
  emit(opts.output, [&](std::ostream& out) {
    write_diagnostics(out, table, config.output_format,
                      timestamp_header(config.output_format));
  });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Likelihood-ratio policy-gradient experiments"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  bool per_episode = false;
  CLI::App* run = app.add_subcommand("run", "run hill-climbing experiments");
  add_common(run, run_opts, true);
  run->add_flag("--per-episode", per_episode,
                "also write per-episode curves next to the output file");

  CommonOptions verify_opts;
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_common(verify, verify_opts, false);

  CommonOptions diagnose_opts;
  std::vector<double> policy;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "dump gradient diagnostics at one policy");
  add_common(diagnose, diagnose_opts, true);
  diagnose->add_option("--policy", policy, "policy vector (default: config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return run_command(run_opts, per_episode);
    if (*verify) return verify_command(verify_opts);
    return diagnose_command(diagnose_opts, policy);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerificationFailure;
  }
}
