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


#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>

#include "scvx/cli.hpp"
#include "scvx/log.hpp"

namespace scvx {

using nlohmann::json;

namespace {

struct RunFlags {
  std::string benchmark;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> grid_N;
  std::optional<double> lambda;
  std::optional<double> delta_init;
  std::optional<std::uint64_t> seed;
  bool compare_oracle = false;
  bool emit_debug_programs = false;
  bool emit_per_iteration = false;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CliError("E_IO", "cannot open config '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError("E_CONFIG", path + ": " + e.what());
  }
}

RunConfig config_from_flags(const RunFlags& f) {
  if (f.benchmark.empty() == f.config_path.empty()) {
    throw CliError("E_USAGE", "exactly one of --benchmark or --config is required");
  }
  json j = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
  if (!j.is_object()) {
    throw CliError("E_CONFIG", "top level must be a JSON object");
  }
  if (!f.benchmark.empty()) j["benchmark"] = f.benchmark;
  if (f.out_dir) j["output_dir"] = *f.out_dir;
  if (f.grid_N) j["grid_N"] = *f.grid_N;
  if (f.seed) j["seed"] = *f.seed;
  if (f.lambda || f.delta_init) {
    json& s = j["scvx"];
    if (s.is_null()) s = json::object();
    if (!s.is_object()) throw CliError("E_CONFIG", "key 'scvx': must be a JSON object");
    if (f.lambda) s["lambda"] = *f.lambda;
    if (f.delta_init) s["delta_init"] = *f.delta_init;
  }
  if (f.compare_oracle) j["compare_oracle"] = true;
  if (f.emit_debug_programs) j["emit_debug_programs"] = true;
  if (f.emit_per_iteration) j["emit_per_iteration"] = true;
  return parse_run_config(j);
}

void write_csv_file(const ProblemDef& problem, const NominalTrajectory& traj,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("E_IO", "cannot open '" + path.string() + "' for writing");
  write_trajectory_csv(problem, traj, out);
  if (!out) throw CliError("E_IO", "write failed for '" + path.string() + "'");
}

json oracle_report(const RunConfig& config, const ScvxResult& result) {
  const OracleSolution oracle = no_drag_oracle(config.drag, config.grid_N);
  const double gap =
      std::abs(result.final_cost - oracle.cost) / std::max(1.0, std::abs(oracle.cost));
  const double state_diff =
      (result.final_trajectory.x - oracle.trajectory.x).lpNorm<Eigen::Infinity>();
  return json{{"kind", "no-drag conic program"},
              {"same_problem", config.drag.k_d == 0.0},
              {"oracle_cost", oracle.cost},
              {"scvx_cost", result.final_cost},
              {"relative_gap", gap},
              {"max_node_state_diff", state_diff}};
}

int do_run(const RunFlags& flags, std::ostream& out) {
  const RunConfig config = config_from_flags(flags);
  const ProblemSpec spec = resolve_problem(config);
  ProblemDef problem;
  NominalTrajectory guess;
  try {
    problem = spec.build();
    problem.validate();
    guess = spec.initial_guess();
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError("E_MODEL", e.what());
  }

  const std::filesystem::path dir = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError("E_IO", "cannot create '" + dir.string() + "': " + ec.message());

  RunObserver observer;
  if (config.emit_per_iteration) {
    const auto iter_dir = dir / "iterations";
    std::filesystem::create_directories(iter_dir, ec);
    if (ec) throw CliError("E_IO", "cannot create '" + iter_dir.string() + "'");
    // Succession 0 is the guess after boundary pinning, as the loop sees it.
    write_csv_file(problem, make_state(problem, guess, config.scvx).iterate,
                   iter_dir / "trajectory_0000.csv");
    observer.iteration = [&problem, iter_dir](const IterationRecord& rec,
                                              const NominalTrajectory& iterate) {
      if (rec.accepted) {
        write_csv_file(problem, iterate,
                       iter_dir / fmt::format("trajectory_{:04d}.csv", rec.k));
      }
    };
  }
  if (config.emit_debug_programs) {
    const auto debug_dir = dir / "debug";
    std::filesystem::create_directories(debug_dir, ec);
    if (ec) throw CliError("E_IO", "cannot create '" + debug_dir.string() + "'");
    observer.subproblem = [debug_dir](int k, const ConicProgram& program) {
      const auto path = debug_dir / fmt::format("subproblem_{:04d}.txt", k);
      std::ofstream f(path, std::ios::binary);
      if (!f) throw CliError("E_IO", "cannot open '" + path.string() + "' for writing");
      write_debug(program, f);
    };
  }

  const ScvxResult result = run(problem, guess, config.scvx, observer);

  json extra = json::object();
  if (config.compare_oracle) extra["oracle"] = oracle_report(config, result);
  write_outputs(result, problem, config, extra, dir);

  out << fmt::format("{}: {} after {} attempts ({} accepted), cost {:.10g}, gamma {:.3g}\n",
                     problem.name, to_string(result.reason), result.history.size(),
                     result.accepted_count(), result.final_cost,
                     result.final_defect_gamma);
  if (config.compare_oracle) {
    out << fmt::format("oracle cost {:.10g}, relative gap {:.3g}\n",
                       extra["oracle"]["oracle_cost"].get<double>(),
                       extra["oracle"]["relative_gap"].get<double>());
  }
  return result.converged ? 0 : 2;
}

int do_export(const RunFlags& flags, const std::string& path, std::ostream& out) {
  const RunConfig config = config_from_flags(flags);
  save_problem_file(resolve_problem(config), path);
  out << "wrote " << path << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Successive convexification trajectory optimizer", "scvx"};
  app.require_subcommand(1);

  RunFlags flags;
  std::string export_path;
  auto add_source = [&flags](CLI::App* cmd) {
    cmd->add_option("--benchmark", flags.benchmark,
                    "drag, no-drag, scalar-toy, random:<seed> or a problem file");
    cmd->add_option("--config", flags.config_path, "run configuration (JSON)");
    cmd->add_option("--grid-N", flags.grid_N, "number of grid nodes");
    cmd->add_option("--seed", flags.seed, "seed for the random benchmark");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run SCvx and write outputs");
  add_source(run_cmd);
  run_cmd->add_option("--out", flags.out_dir, "output directory");
  run_cmd->add_option("--lambda", flags.lambda, "penalty weight");
  run_cmd->add_option("--delta-init", flags.delta_init, "initial trust radius");
  run_cmd->add_flag("--compare-oracle", flags.compare_oracle,
                    "compare against the one-shot no-drag conic program");
  run_cmd->add_flag("--emit-debug-programs", flags.emit_debug_programs,
                    "dump every subproblem to debug/");
  run_cmd->add_flag("--emit-per-iteration", flags.emit_per_iteration,
                    "write one trajectory per accepted succession to iterations/");

  CLI::App* export_cmd =
      app.add_subcommand("export-problem", "write a benchmark as a problem file");
  add_source(export_cmd);
  export_cmd->add_option("--out", export_path, "problem file to write")->required();

  // CLI11 wants the arguments in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "E_USAGE: " << e.what() << '\n';
    return 1;
  }

  try {
    if (run_cmd->parsed()) return do_run(flags, out);
    return do_export(flags, export_path, out);
  } catch (const CliError& e) {
    err << e.code() << ": " << e.what() << '\n';
  } catch (const ScvxError& e) {
    err << "E_SOLVER: " << e.what() << '\n';
  } catch (const PropagationError& e) {
    err << "E_MODEL: " << e.what() << '\n';
  } catch (const ModelError& e) {
    err << "E_MODEL: " << e.what() << '\n';
  } catch (const DimensionError& e) {
    err << "E_MODEL: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "E_IO: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << e.what() << '\n';
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace scvx
