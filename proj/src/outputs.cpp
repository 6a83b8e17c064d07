// Copyright 2026 The scvx Authors
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


#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include <spdlog/fmt/fmt.h>

#include "json_reader.hpp"
#include "scvx/cli.hpp"

namespace scvx {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CliError("E_IO", "cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) {
    throw CliError("E_IO", "write failed for '" + path.string() + "'");
  }
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Non-finite values have no JSON spelling; they are written as null.
ordered_json number(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace

void write_trajectory_csv(const ProblemDef& problem,
                          const NominalTrajectory& trajectory, std::ostream& out) {
  const int n = problem.n_states;
  const int m = problem.n_controls;
  auto name = [](const std::vector<std::string>& names, int i, const char* prefix) {
    return i < static_cast<int>(names.size()) ? names[i] : prefix + std::to_string(i);
  };
  std::string line = "t";
  for (int i = 0; i < n; ++i) line += "," + name(problem.state_names, i, "x");
  for (int j = 0; j < m; ++j) line += "," + name(problem.control_names, j, "u");
  out << line << '\n';
  for (int k = 0; k < trajectory.grid.size(); ++k) {
    line = fmt::format("{:.17g}", trajectory.grid[k]);
    for (int i = 0; i < n; ++i) line += fmt::format(",{:.17g}", trajectory.x(i, k));
    for (int j = 0; j < m; ++j) line += fmt::format(",{:.17g}", trajectory.u(j, k));
    out << line << '\n';
  }
}

std::string iteration_json_line(const IterationRecord& r) {
  ordered_json j;
  j["k"] = r.k;
  j["deltaJ"] = number(r.delta_J);
  j["deltaL"] = number(r.delta_L);
  j["r"] = r.ratio ? number(*r.ratio) : ordered_json(nullptr);
  j["radius_before"] = number(r.radius_before);
  j["radius_after"] = number(r.radius_after);
  j["accepted"] = r.accepted;
  j["J"] = number(r.penalized_cost_J);
  j["gamma_defect"] = number(r.gamma_defect);
  j["status"] = std::string(to_string(r.subproblem_status));
  return j.dump();
}

void write_outputs(const ScvxResult& result, const ProblemDef& problem,
                   const RunConfig& config, const json& extra,
                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw CliError("E_IO", "cannot create '" + dir.string() + "': " + ec.message());
  }

  const auto csv_path = dir / "trajectory.csv";
  std::ofstream csv = open_for_write(csv_path);
  write_trajectory_csv(problem, result.final_trajectory, csv);
  close_checked(csv, csv_path);

  const auto log_path = dir / "iterations.jsonl";
  std::ofstream log = open_for_write(log_path);
  for (const auto& rec : result.history) {
    log << iteration_json_line(rec) << '\n';
  }
  close_checked(log, log_path);

  const NominalTrajectory& traj = result.final_trajectory;
  const int last = traj.grid.size() - 1;
  double terminal_error = 0.0;
  if (problem.terminal_constraint) {
    terminal_error = (problem.terminal_constraint->matrix * traj.x.col(last) -
                      problem.terminal_constraint->rhs)
                         .lpNorm<Eigen::Infinity>();
  }
  ordered_json summary;
  summary["converged"] = result.converged;
  summary["reason"] = std::string(to_string(result.reason));
  summary["final_cost"] = number(result.final_cost);
  summary["final_penalized_cost"] = number(result.final_penalized_cost);
  summary["final_gamma_defect"] = number(result.final_defect_gamma);
  summary["accepted_successions"] = result.accepted_count();
  summary["attempts"] = static_cast<int>(result.history.size());
  summary["initial_state_error"] =
      number((traj.x.col(0) - problem.x0).lpNorm<Eigen::Infinity>());
  summary["terminal_constraint_error"] = number(terminal_error);
  summary["problem"] = {{"name", problem.name},
                        {"n_states", problem.n_states},
                        {"n_controls", problem.n_controls},
                        {"horizon", problem.horizon},
                        {"grid_N", traj.grid.size()}};
  summary["config"] = to_json(config);
  for (const auto& item : extra.items()) {
    summary[item.key()] = item.value();
  }
  summary["timestamp"] = utc_timestamp();

  const auto summary_path = dir / "summary.json";
  std::ofstream out = open_for_write(summary_path);
  out << summary.dump(2) << '\n';
  close_checked(out, summary_path);
}

}  // namespace scvx
