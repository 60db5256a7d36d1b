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

#include "motorgrad/experiment.h"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "motorgrad/errors.h"
#include "motorgrad/parallel.h"
#include "motorgrad/random.h"

namespace motorgrad {
namespace {

using nlohmann::ordered_json;

// Seeds the diagnostics batch apart from every episode stream.
constexpr std::uint64_t kDiagnosticsStream = 0xd1a6d1a6d1a6d1a6ULL;

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(vector_json(m.row(r).transpose()));
  }
  return out;
}

// Emits `body` as a JSON object whose first line carries the header.
void write_json_with_header(std::ostream& out, const std::string& header,
                            const ordered_json& body) {
  out << "{\"generated\": " << ordered_json(header).dump() << ",\n";
  const std::string text = body.dump(2);
  // body is a nonempty object: drop its opening brace
  out << text.substr(2) << '\n';
}

std::string csv_number(double x) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += csv_number(v[i]);
  }
  return out;
}

}  // namespace

std::uint64_t episode_seed(const ExperimentConfig& config,
                           std::size_t estimator_index, int episode) {
  const auto e = static_cast<std::uint64_t>(episode);
  if (config.paired_episodes) return derive_seed(config.master_seed, {e});
  return derive_seed(config.master_seed,
                     {static_cast<std::uint64_t>(estimator_index), e});
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::unique_ptr<Environment> env = config.make_environment();
  const PolicyVector initial = env->initial_policy();
  ExperimentResult result;
  for (std::size_t k = 0; k < config.estimators.size(); ++k) {
    EstimatorRun run;
    run.estimator = config.estimators[k];
    run.episodes.resize(static_cast<std::size_t>(config.episodes));
    parallel_for(run.episodes.size(), [&](std::size_t e) {
      run.episodes[e] =
          hill_climb(initial, *env, run.estimator, config.schedule,
                     config.steps_per_episode,
                     episode_seed(config, k, static_cast<int>(e)));
    });
    run.aggregate = aggregate_curves(run.episodes);
    result.runs.push_back(std::move(run));
  }
  return result;
}

std::string timestamp_header(OutputFormat format) {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  if (format == OutputFormat::kCsv) return std::string("# generated ") + buf;
  return buf;
}

void write_aggregate(std::ostream& out, const ExperimentResult& result,
                     OutputFormat format, const std::string& header) {
  if (format == OutputFormat::kCsv) {
    out << header << '\n';
    out << "estimator,step,mean_best_response,stderr,n_episodes\n";
    for (const EstimatorRun& run : result.runs) {
      const std::string name = to_string(run.estimator.kind);
      for (std::size_t s = 0; s < run.aggregate.mean.size(); ++s) {
        out << name << ',' << s + 1 << ',' << csv_number(run.aggregate.mean[s])
            << ',' << csv_number(run.aggregate.standard_error[s]) << ','
            << run.aggregate.episodes << '\n';
      }
    }
    return;
  }
  ordered_json body;
  body["columns"] = {"estimator", "step", "mean_best_response", "stderr",
                     "n_episodes"};
  ordered_json curves = ordered_json::array();
  for (const EstimatorRun& run : result.runs) {
    ordered_json c;
    c["estimator"] = to_string(run.estimator.kind);
    c["n_episodes"] = run.aggregate.episodes;
    c["mean_best_response"] = run.aggregate.mean;
    c["stderr"] = run.aggregate.standard_error;
    curves.push_back(std::move(c));
  }
  body["curves"] = std::move(curves);
  write_json_with_header(out, header, body);
}

void write_per_episode(std::ostream& out, const ExperimentResult& result,
                       OutputFormat format, const std::string& header) {
  if (format == OutputFormat::kCsv) {
    out << header << '\n';
    out << "estimator,episode,step,best_response,mean_response,frozen,policy\n";
    for (const EstimatorRun& run : result.runs) {
      const std::string name = to_string(run.estimator.kind);
      for (std::size_t e = 0; e < run.episodes.size(); ++e) {
        const LearningCurve& c = run.episodes[e];
        for (std::size_t s = 0; s < c.per_step_best_response.size(); ++s) {
          const bool frozen =
              c.frozen_at && static_cast<int>(s) >= *c.frozen_at;
          out << name << ',' << e << ',' << s + 1 << ','
              << csv_number(c.per_step_best_response[s]) << ','
              << csv_number(c.per_step_mean_response[s]) << ','
              << (frozen ? 1 : 0) << ',' << join(c.per_step_policy[s]) << '\n';
        }
      }
    }
    return;
  }
  ordered_json body;
  ordered_json runs = ordered_json::array();
  for (const EstimatorRun& run : result.runs) {
    ordered_json r;
    r["estimator"] = to_string(run.estimator.kind);
    ordered_json episodes = ordered_json::array();
    for (const LearningCurve& c : run.episodes) {
      ordered_json e;
      e["best_response"] = c.per_step_best_response;
      e["mean_response"] = c.per_step_mean_response;
      ordered_json policies = ordered_json::array();
      for (const auto& p : c.per_step_policy) policies.push_back(vector_json(p));
      e["policy"] = std::move(policies);
      e["frozen_at"] = c.frozen_at ? ordered_json(*c.frozen_at + 1)
                                   : ordered_json(nullptr);
      episodes.push_back(std::move(e));
    }
    r["episodes"] = std::move(episodes);
    runs.push_back(std::move(r));
  }
  body["runs"] = std::move(runs);
  write_json_with_header(out, header, body);
}

std::string per_episode_path(const std::string& output_path) {
  const auto slash = output_path.find_last_of('/');
  const auto dot = output_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return output_path + ".episodes";
  }
  return output_path.substr(0, dot) + ".episodes" + output_path.substr(dot);
}

namespace {

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void save_experiment(const ExperimentResult& result,
                     const std::string& output_path, OutputFormat format,
                     bool per_episode) {
  const std::string header = timestamp_header(format);
  write_file(output_path, [&](std::ostream& out) {
    write_aggregate(out, result, format, header);
  });
  if (per_episode) {
    write_file(per_episode_path(output_path), [&](std::ostream& out) {
      write_per_episode(out, result, format, header);
    });
  }
}

DiagnosticTable dump_gradient_diagnostics(const ExperimentConfig& config,
                                          const Eigen::VectorXd& policy) {
  config.validate();
  const std::unique_ptr<Environment> env = config.make_environment();
  if (policy.size() != env->policy_dimension()) {
    throw InvalidArgument("diagnostics policy has dimension " +
                          std::to_string(policy.size()) + ", expected " +
                          std::to_string(env->policy_dimension()));
  }
  DiagnosticTable table;
  table.environment = env->name();
  table.policy = policy;
  table.samples = config.diagnostics.samples;
  table.batch_seed = derive_seed(config.master_seed, {kDiagnosticsStream});
  const TrialBatch batch =
      sample_batch(*env, policy, table.batch_seed,
                   static_cast<std::size_t>(config.diagnostics.samples));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    table.responses.push_back(batch.trials[i].response);
    table.eligibility_sq_norms.push_back(batch.eligibilities[i].squaredNorm());
  }
  for (const EstimatorConfig& estimator : config.estimators) {
    DiagnosticRow row;
    row.estimator = estimator;
    GradientDiagnostics diag;
    try {
      if (estimator.kind == EstimatorKind::kPegasusFd) {
        EstimatorConfig fd = estimator;
        fd.fd_scenarios = config.diagnostics.samples;
        estimate_gradient(policy, *env, fd, table.batch_seed, &diag);
      } else {
        estimate_from_batch(batch, *env, estimator, &diag);
      }
      row.diagnostics = std::move(diag);
      row.status = "ok";
    } catch (const DegenerateBatch&) {
      row.status = "degenerate-batch";
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_diagnostics(std::ostream& out, const DiagnosticTable& table,
                       OutputFormat format, const std::string& header) {
  if (format == OutputFormat::kCsv) {
    out << header << '\n';
    out << "estimator,feature_map,status,mean_response,baseline,"
           "gradient,variance,lambda,model_weights,g\n";
    for (const DiagnosticRow& row : table.rows) {
      out << to_string(row.estimator.kind) << ',' << row.estimator.feature_map
          << ',' << '"' << row.status << '"';
      if (!row.diagnostics) {
        out << ",,,,,,,\n";
        continue;
      }
      const GradientDiagnostics& d = *row.diagnostics;
      out << ',' << csv_number(d.mean_response) << ','
          << (d.baseline ? csv_number(*d.baseline) : "") << ','
          << join(d.estimate.gradient) << ','
          << join(d.estimate.per_component_variance) << ','
          << (d.lambda ? join(*d.lambda) : "") << ','
          << (d.model_weights ? join(*d.model_weights) : "") << ',';
      if (d.g) {
        const Eigen::MatrixXd& g = *d.g;
        out << join(Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()));
      }
      out << '\n';
    }
    return;
  }
  ordered_json body;
  body["environment"] = table.environment;
  body["policy"] = vector_json(table.policy);
  body["batch_seed"] = table.batch_seed;
  body["samples"] = table.samples;
  ordered_json rows = ordered_json::array();
  for (const DiagnosticRow& row : table.rows) {
    ordered_json r;
    r["estimator"] = to_string(row.estimator.kind);
    r["feature_map"] = row.estimator.feature_map;
    r["status"] = row.status;
    if (row.diagnostics) {
      const GradientDiagnostics& d = *row.diagnostics;
      r["mean_response"] = d.mean_response;
      r["gradient"] = vector_json(d.estimate.gradient);
      r["variance"] = vector_json(d.estimate.per_component_variance);
      if (d.unweighted) r["unweighted_gradient"] = vector_json(d.unweighted->gradient);
      if (d.baseline) r["baseline"] = *d.baseline;
      if (d.model_weights) r["model_weights"] = vector_json(*d.model_weights);
      if (d.g) r["g"] = matrix_json(*d.g);
      if (d.lambda) r["lambda"] = vector_json(*d.lambda);
    }
    rows.push_back(std::move(r));
  }
  body["rows"] = std::move(rows);
  body["batch"] = {{"response", table.responses},
                   {"eligibility_squared_norm", table.eligibility_sq_norms}};
  write_json_with_header(out, header, body);
}

}  // namespace motorgrad
