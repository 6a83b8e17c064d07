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
#include <sstream>

#include "json_reader.hpp"
#include "scvx/cli.hpp"

namespace scvx {

using nlohmann::json;
using detail::ObjectReader;
using detail::to_array;

namespace {

constexpr const char* kFormat = "scvx-problem";
constexpr int kVersion = 1;

json drag_to_json(const DragBenchParams& p) {
  return json{{"t_f", p.t_f},
              {"mass", p.mass},
              {"k_d", p.k_d},
              {"T_max", p.T_max},
              {"x_i", to_array(p.x_i)},
              {"x_f", to_array(p.x_f)},
              {"v_i", to_array(p.v_i)},
              {"v_f", to_array(p.v_f)}};
}

json polynomial_to_json(const PolynomialProblem& p) {
  json terms = json::array();
  for (const auto& t : p.terms) {
    terms.push_back({{"output", t.output}, {"coeff", t.coeff}, {"powers", t.powers}});
  }
  return json{{"seed", p.seed},
              {"n", p.n},
              {"m", p.m},
              {"horizon", p.horizon},
              {"x0", to_array(p.x0)},
              {"terms", terms},
              {"state_lower", to_array(p.state_lower)},
              {"state_upper", to_array(p.state_upper)},
              {"control_lower", to_array(p.control_lower)},
              {"control_upper", to_array(p.control_upper)},
              {"running_state_weight", to_array(p.running_state_weight)},
              {"running_control_weight", to_array(p.running_control_weight)},
              {"terminal_target", to_array(p.terminal_target)},
              {"terminal_weight", p.terminal_weight}};
}

PolynomialProblem polynomial_from_json(const json& j, const std::string& path) {
  ObjectReader r(j, path, "E_PROBLEM");
  PolynomialProblem p;
  r.read("seed", p.seed);
  r.read("n", p.n);
  r.read("m", p.m);
  r.read("horizon", p.horizon);
  r.read("x0", p.x0);
  if (const json* terms = r.child("terms")) {
    if (!terms->is_array()) r.fail("terms", "expected an array");
    for (std::size_t i = 0; i < terms->size(); ++i) {
      ObjectReader t((*terms)[i], r.key_path("terms") + "[" + std::to_string(i) + "]",
                     "E_PROBLEM");
      PolyTerm term;
      t.read("output", term.output);
      t.read("coeff", term.coeff);
      t.read("powers", term.powers);
      t.finish();
      p.terms.push_back(std::move(term));
    }
  }
  r.read("state_lower", p.state_lower);
  r.read("state_upper", p.state_upper);
  r.read("control_lower", p.control_lower);
  r.read("control_upper", p.control_upper);
  r.read("running_state_weight", p.running_state_weight);
  r.read("running_control_weight", p.running_control_weight);
  r.read("terminal_target", p.terminal_target);
  r.read("terminal_weight", p.terminal_weight);
  r.finish();
  return p;
}

}  // namespace

std::string_view to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::drag: return "drag";
    case ProblemFamily::polynomial: return "polynomial";
    case ProblemFamily::scalar_toy: return "scalar-toy";
  }
  return "unknown";
}

namespace detail {

void read_drag_params(const json& j, const std::string& path, const std::string& code,
                      DragBenchParams& p) {
  ObjectReader r(j, path, code);
  r.read("t_f", p.t_f);
  r.read("mass", p.mass);
  r.read("k_d", p.k_d);
  r.read("T_max", p.T_max);
  r.read("x_i", p.x_i);
  r.read("x_f", p.x_f);
  r.read("v_i", p.v_i);
  r.read("v_f", p.v_f);
  r.finish();
}

json drag_params_to_json(const DragBenchParams& p) { return drag_to_json(p); }

}  // namespace detail

ProblemDef ProblemSpec::build() const {
  switch (family) {
    case ProblemFamily::drag:
      return build_drag_problem(drag, grid_N);
    case ProblemFamily::polynomial: {
      PolynomialProblem p = polynomial;
      p.nodes = grid_N;
      return build_polynomial_problem(p);
    }
    case ProblemFamily::scalar_toy:
      return build_scalar_toy();
  }
  throw std::logic_error("unhandled problem family");
}

NominalTrajectory ProblemSpec::initial_guess() const {
  switch (family) {
    case ProblemFamily::drag:
      return straight_line_guess(drag, grid_N);
    case ProblemFamily::polynomial: {
      PolynomialProblem p = polynomial;
      p.nodes = grid_N;
      return polynomial_guess(p);
    }
    case ProblemFamily::scalar_toy:
      return scalar_toy_guess(toy_u_start, grid_N);
  }
  throw std::logic_error("unhandled problem family");
}

json problem_to_json(const ProblemSpec& spec) {
  json j{{"format", kFormat},
         {"version", kVersion},
         {"family", std::string(to_string(spec.family))},
         {"grid_N", spec.grid_N}};
  switch (spec.family) {
    case ProblemFamily::drag: j["drag"] = drag_to_json(spec.drag); break;
    case ProblemFamily::polynomial: j["polynomial"] = polynomial_to_json(spec.polynomial); break;
    case ProblemFamily::scalar_toy: j["u_start"] = spec.toy_u_start; break;
  }
  return j;
}

ProblemSpec problem_from_json(const json& j) {
  ObjectReader r(j, "", "E_PROBLEM");
  std::string format;
  if (!r.read("format", format) || format != kFormat) {
    r.fail("format", std::string("expected \"") + kFormat + "\"");
  }
  int version = 0;
  if (!r.read("version", version) || version != kVersion) {
    r.fail("version", "unsupported version (expected " + std::to_string(kVersion) + ")");
  }
  std::string family;
  if (!r.read("family", family)) r.fail("family", "missing");
  ProblemSpec spec;
  if (!r.read("grid_N", spec.grid_N)) r.fail("grid_N", "missing");
  if (family == "drag") {
    spec.family = ProblemFamily::drag;
    const json* d = r.child("drag");
    if (d == nullptr) r.fail("drag", "missing");
    detail::read_drag_params(*d, "drag", "E_PROBLEM", spec.drag);
  } else if (family == "polynomial") {
    spec.family = ProblemFamily::polynomial;
    const json* p = r.child("polynomial");
    if (p == nullptr) r.fail("polynomial", "missing");
    spec.polynomial = polynomial_from_json(*p, "polynomial");
  } else if (family == "scalar-toy") {
    spec.family = ProblemFamily::scalar_toy;
    r.read("u_start", spec.toy_u_start);
  } else {
    r.fail("family", "unknown family '" + family + "'");
  }
  r.finish();
  if (spec.grid_N < 2) r.fail("grid_N", "must be at least 2");
  try {
    spec.build().validate();
  } catch (const std::exception& e) {
    throw CliError("E_PROBLEM", e.what());
  }
  return spec;
}

void save_problem_file(const ProblemSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw CliError("E_IO", "cannot open '" + path.string() + "' for writing");
  }
  out << problem_to_json(spec).dump(2) << '\n';
  if (!out) {
    throw CliError("E_IO", "write failed for '" + path.string() + "'");
  }
}

ProblemSpec load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CliError("E_IO", "cannot open problem file '" + path.string() + "'");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError("E_PROBLEM", path.string() + ": " + e.what());
  }
  try {
    return problem_from_json(j);
  } catch (const CliError& e) {
    throw CliError(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace scvx
