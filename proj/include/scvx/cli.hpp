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


#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scvx/bench.hpp"
#include "scvx/model.hpp"
#include "scvx/scvx.hpp"
#include "scvx/transcription.hpp"

namespace scvx {

/// Error carrying a machine-parsable code such as "E_CONFIG".
class CliError : public std::runtime_error {
 public:
  CliError(std::string code, const std::string& message)
      : std::runtime_error(message), code_{std::move(code)} {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

enum class ProblemFamily { drag, polynomial, scalar_toy };

std::string_view to_string(ProblemFamily family);

/**
 * Everything needed to rebuild a problem and its initial guess. This is the
 * payload of a problem file.
 */
struct ProblemSpec {
  ProblemFamily family = ProblemFamily::drag;
  int grid_N = 31;
  DragBenchParams drag;           // family == drag
  PolynomialProblem polynomial;   // family == polynomial
  double toy_u_start = 1.0;       // family == scalar_toy

  ProblemDef build() const;
  NominalTrajectory initial_guess() const;
};

nlohmann::json problem_to_json(const ProblemSpec& spec);
/// Strict: unknown keys and wrong types throw CliError("E_PROBLEM").
ProblemSpec problem_from_json(const nlohmann::json& j);
void save_problem_file(const ProblemSpec& spec, const std::filesystem::path& path);
ProblemSpec load_problem_file(const std::filesystem::path& path);

struct RunConfig {
  /// drag, no-drag, scalar-toy, random, random:<seed>, or a problem file.
  std::string benchmark = "drag";
  int grid_N = 31;
  std::uint64_t seed = 0;
  ScvxConfig scvx;
  std::string output_dir = "results";
  bool emit_debug_programs = false;
  bool emit_per_iteration = false;
  bool compare_oracle = false;
  /// Physical parameters for the built-in drag and no-drag benchmarks.
  DragBenchParams drag;

  /// Re-checks every ScvxConfig invariant plus the run-level ones.
  void validate() const;
};

/// Defaults for a benchmark name before any user overrides.
RunConfig default_run_config(const std::string& benchmark);

/**
 * Parses a run configuration. Keys absent from j keep the benchmark's
 * defaults; unknown keys throw CliError("E_CONFIG") naming the dotted key.
 */
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full echo with every defaulted value; parse_run_config accepts it back.
nlohmann::json to_json(const RunConfig& config);

/// Resolves the benchmark into a problem description.
ProblemSpec resolve_problem(const RunConfig& config);

void write_trajectory_csv(const ProblemDef& problem,
                          const NominalTrajectory& trajectory, std::ostream& out);

/// One line of iterations.jsonl, without the trailing newline.
std::string iteration_json_line(const IterationRecord& record);

/// trajectory.csv, iterations.jsonl and summary.json below dir. extra is
/// merged into the summary.
void write_outputs(const ScvxResult& result, const ProblemDef& problem,
                   const RunConfig& config, const nlohmann::json& extra,
                   const std::filesystem::path& dir);

/// Entry point of the scvx executable. Returns the process exit code:
/// 0 converged, 2 stopped on an iteration limit, 1 on any error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace scvx
