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


#include <charconv>
#include <fstream>

#include "json_reader.hpp"
#include "scvx/cli.hpp"

namespace scvx {

using nlohmann::json;
using detail::ObjectReader;

namespace {

enum class Builtin { drag, no_drag, scalar_toy, random, file };

struct BenchmarkName {
  Builtin kind = Builtin::drag;
  std::optional<std::uint64_t> seed;  // from "random:<seed>"
};

BenchmarkName classify(const std::string& name) {
  if (name == "drag") return {Builtin::drag, {}};
  if (name == "no-drag") return {Builtin::no_drag, {}};
  if (name == "scalar-toy") return {Builtin::scalar_toy, {}};
  if (name == "random") return {Builtin::random, {}};
  if (name.rfind("random:", 0) == 0) {
    const std::string digits = name.substr(7);
    std::uint64_t seed = 0;
    const auto [end, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
      throw CliError("E_CONFIG", "benchmark '" + name + "': seed must be a non-negative integer");
    }
    return {Builtin::random, seed};
  }
  std::error_code ec;
  if (!std::filesystem::is_regular_file(name, ec)) {
    throw CliError("E_CONFIG", "unknown benchmark '" + name +
                                   "' (expected drag, no-drag, scalar-toy, "
                                   "random:<seed> or a problem file)");
  }
  return {Builtin::file, {}};
}

bool is_drag_builtin(Builtin kind) {
  return kind == Builtin::drag || kind == Builtin::no_drag;
}

std::string_view penalty_name(PenaltyNorm p) {
  return p == PenaltyNorm::max_l1 ? "max_l1" : "sum_l1";
}

std::string_view virtual_control_name(VirtualControlPolicy::Kind k) {
  switch (k) {
    case VirtualControlPolicy::Kind::identity: return "identity";
    case VirtualControlPolicy::Kind::select: return "select";
    case VirtualControlPolicy::Kind::none: return "none";
  }
  return "identity";
}

void read_scvx(const json& j, ScvxConfig& c) {
  ObjectReader r(j, "scvx", "E_CONFIG");
  r.read("lambda", c.lambda);
  r.read("delta_init", c.delta_init);
  r.read("delta_lower", c.delta_lower);
  r.read("rho0", c.rho0);
  r.read("rho1", c.rho1);
  r.read("rho2", c.rho2);
  r.read("alpha", c.alpha);
  r.read("stop_tol", c.stop_tol);
  r.read("stop_tol_relative", c.stop_tol_relative);
  r.read("max_total_iters", c.max_total_iters);
  r.read("max_rejections_in_a_row", c.max_rejections_in_a_row);
  std::string penalty;
  if (r.read("penalty", penalty)) {
    if (penalty == "max_l1") {
      c.penalty = PenaltyNorm::max_l1;
    } else if (penalty == "sum_l1") {
      c.penalty = PenaltyNorm::sum_l1;
    } else {
      r.fail("penalty", "expected \"max_l1\" or \"sum_l1\"");
    }
  }
  r.read("free_final_time", c.free_final_time);
  r.read("rk4_substeps", c.linearize.integrator.substeps);
  r.read("threads", c.linearize.threads);
  std::string vc;
  if (r.read("virtual_control", vc)) {
    using K = VirtualControlPolicy::Kind;
    if (vc == "identity") {
      c.linearize.virtual_control.kind = K::identity;
    } else if (vc == "select") {
      c.linearize.virtual_control.kind = K::select;
    } else if (vc == "none") {
      c.linearize.virtual_control.kind = K::none;
    } else {
      r.fail("virtual_control", "expected \"identity\", \"select\" or \"none\"");
    }
  }
  r.read("virtual_control_columns", c.linearize.virtual_control.columns);
  r.finish();
}

void read_solver(const json& j, SolverSettings& s) {
  ObjectReader r(j, "solver", "E_CONFIG");
  std::string backend;
  if (r.read("backend", backend)) {
    if (backend == "interior_point") {
      s.backend = SolverBackend::interior_point;
    } else if (backend == "splitting") {
      s.backend = SolverBackend::splitting;
    } else {
      r.fail("backend", "expected \"interior_point\" or \"splitting\"");
    }
  }
  r.read("tol", s.tol);
  r.read("max_iters", s.max_iters);
  r.read("ipm_max_iters", s.ipm_max_iters);
  r.read("equilibration_passes", s.equilibration_passes);
  r.read("relaxation", s.relaxation);
  r.read("data_scale", s.data_scale);
  r.read("check_interval", s.check_interval);
  r.finish();
}

}  // namespace

RunConfig default_run_config(const std::string& benchmark) {
  const BenchmarkName name = classify(benchmark);
  RunConfig c;
  c.benchmark = benchmark;
  switch (name.kind) {
    case Builtin::drag:
      break;
    case Builtin::no_drag:
      c.drag.k_d = 0.0;
      break;
    case Builtin::scalar_toy:
      c.grid_N = 2;
      c.scvx = scalar_toy_config();
      break;
    case Builtin::random:
      c.seed = name.seed.value_or(0);
      c.grid_N = random_polynomial_problem(c.seed).nodes;
      break;
    case Builtin::file: {
      const ProblemSpec spec = load_problem_file(benchmark);
      c.grid_N = spec.grid_N;
      if (spec.family == ProblemFamily::scalar_toy) {
        c.scvx = scalar_toy_config();
      }
      break;
    }
  }
  return c;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& why) { throw CliError("E_CONFIG", why); };
  const BenchmarkName name = classify(benchmark);
  if (name.seed && *name.seed != seed) {
    fail("seed " + std::to_string(seed) + " conflicts with benchmark '" + benchmark + "'");
  }
  if (grid_N < 2) fail("grid_N must be at least 2");
  if (output_dir.empty()) fail("output_dir must not be empty");
  if (scvx.linearize.integrator.substeps < 1) fail("scvx.rk4_substeps must be >= 1");
  if (scvx.linearize.threads < 0) fail("scvx.threads must be >= 0");
  if (scvx.solver.ipm_max_iters < 1) fail("solver.ipm_max_iters must be >= 1");
  if (!(scvx.solver.relaxation > 0.0 && scvx.solver.relaxation < 2.0)) {
    fail("solver.relaxation must lie in (0, 2)");
  }
  try {
    scvx.validate();
    if (is_drag_builtin(name.kind)) drag.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (name.kind == Builtin::no_drag && drag.k_d != 0.0) {
    fail("drag.k_d must be 0 for the no-drag benchmark");
  }
  if (compare_oracle && !is_drag_builtin(name.kind)) {
    fail("compare_oracle is only available for the drag and no-drag benchmarks");
  }
}

RunConfig parse_run_config(const json& j) {
  ObjectReader r(j, "", "E_CONFIG");
  std::string benchmark = "drag";
  r.read("benchmark", benchmark);
  RunConfig c = default_run_config(benchmark);
  if (r.read("seed", c.seed) && classify(benchmark).kind == Builtin::random &&
      !classify(benchmark).seed) {
    c.grid_N = random_polynomial_problem(c.seed).nodes;
  }
  r.read("grid_N", c.grid_N);
  r.read("output_dir", c.output_dir);
  r.read("emit_debug_programs", c.emit_debug_programs);
  r.read("emit_per_iteration", c.emit_per_iteration);
  r.read("compare_oracle", c.compare_oracle);
  if (const json* s = r.child("scvx")) read_scvx(*s, c.scvx);
  if (const json* s = r.child("solver")) read_solver(*s, c.scvx.solver);
  if (const json* d = r.child("drag")) {
    if (!is_drag_builtin(classify(benchmark).kind)) {
      r.fail("drag", "only applies to the drag and no-drag benchmarks");
    }
    detail::read_drag_params(*d, "drag", "E_CONFIG", c.drag);
  }
  r.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CliError("E_IO", "cannot open config '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError("E_CONFIG", path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const ScvxConfig& s = c.scvx;
  const SolverSettings& so = s.solver;
  json j{{"benchmark", c.benchmark},
         {"grid_N", c.grid_N},
         {"seed", c.seed},
         {"output_dir", c.output_dir},
         {"emit_debug_programs", c.emit_debug_programs},
         {"emit_per_iteration", c.emit_per_iteration},
         {"compare_oracle", c.compare_oracle}};
  j["scvx"] = json{
      {"lambda", s.lambda},
      {"delta_init", s.delta_init},
      {"delta_lower", s.delta_lower},
      {"rho0", s.rho0},
      {"rho1", s.rho1},
      {"rho2", s.rho2},
      {"alpha", s.alpha},
      {"stop_tol", s.stop_tol ? json(*s.stop_tol) : json(nullptr)},
      {"stop_tol_relative", s.stop_tol_relative},
      {"max_total_iters", s.max_total_iters},
      {"max_rejections_in_a_row", s.max_rejections_in_a_row},
      {"penalty", std::string(penalty_name(s.penalty))},
      {"free_final_time", s.free_final_time},
      {"rk4_substeps", s.linearize.integrator.substeps},
      {"threads", s.linearize.threads},
      {"virtual_control", std::string(virtual_control_name(s.linearize.virtual_control.kind))},
      {"virtual_control_columns", s.linearize.virtual_control.columns}};
  j["solver"] = json{{"backend", std::string(to_string(so.backend))},
                     {"tol", so.tol},
                     {"max_iters", so.max_iters},
                     {"ipm_max_iters", so.ipm_max_iters},
                     {"equilibration_passes", so.equilibration_passes},
                     {"relaxation", so.relaxation},
                     {"data_scale", so.data_scale},
                     {"check_interval", so.check_interval}};
  if (is_drag_builtin(classify(c.benchmark).kind)) {
    j["drag"] = detail::drag_params_to_json(c.drag);
  }
  return j;
}

ProblemSpec resolve_problem(const RunConfig& config) {
  const BenchmarkName name = classify(config.benchmark);
  ProblemSpec spec;
  switch (name.kind) {
    case Builtin::drag:
    case Builtin::no_drag:
      spec.family = ProblemFamily::drag;
      spec.drag = config.drag;
      break;
    case Builtin::scalar_toy:
      spec.family = ProblemFamily::scalar_toy;
      break;
    case Builtin::random:
      spec.family = ProblemFamily::polynomial;
      spec.polynomial = random_polynomial_problem(config.seed);
      break;
    case Builtin::file:
      spec = load_problem_file(config.benchmark);
      break;
  }
  spec.grid_N = config.grid_N;
  return spec;
}

}  // namespace scvx
