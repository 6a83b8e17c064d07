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


#include "scvx/bench.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace scvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

void DragBenchParams::validate() const {
  require(t_f > 0.0 && std::isfinite(t_f), "drag params: t_f must be > 0");
  require(mass > 0.0 && std::isfinite(mass), "drag params: mass must be > 0");
  require(k_d >= 0.0 && std::isfinite(k_d), "drag params: k_d must be >= 0");
  require(T_max > 0.0 && std::isfinite(T_max), "drag params: T_max must be > 0");
  require(x_i.allFinite() && x_f.allFinite() && v_i.allFinite() &&
              v_f.allFinite(),
          "drag params: boundary values must be finite");
}

void DragBenchParams::apply_to(ScvxConfig& config) const {
  config.delta_lower = delta_lower;
  config.rho0 = rho0;
  config.rho1 = rho1;
  config.rho2 = rho2;
  config.alpha = alpha;
}

ProblemDef build_drag_problem(const DragBenchParams& params, int nodes) {
  params.validate();
  require(nodes >= 2, "drag problem: at least 2 nodes required");
  const double mass = params.mass;
  const double k_d = params.k_d;

  ProblemDef p;
  p.name = k_d == 0.0 ? "no-drag" : "drag";
  p.n_states = 4;
  p.n_controls = 3;
  p.horizon = params.t_f;
  p.x0.resize(4);
  p.x0 << params.x_i, params.v_i;
  p.state_names = {"px", "py", "vx", "vy"};
  p.control_names = {"Tx", "Ty", "Gamma"};

  p.dynamics = [mass, k_d](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double) {
    const Eigen::Vector2d v = x.segment<2>(2);
    Eigen::VectorXd xdot(4);
    xdot.head<2>() = v;
    xdot.tail<2>() = (u.head<2>() - k_d * v.norm() * v) / mass;
    return xdot;
  };
  p.jacobian_x = [mass, k_d](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                             double) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A.block<2, 2>(0, 2).setIdentity();
    const Eigen::Vector2d v = x.segment<2>(2);
    const double speed = v.norm();
    if (speed > 0.0) {
      A.block<2, 2>(2, 2) =
          -(k_d / mass) *
          (speed * Eigen::Matrix2d::Identity() + v * v.transpose() / speed);
    }
    return A;
  };
  p.jacobian_u = [mass](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 3);
    B.block<2, 2>(2, 0) = Eigen::Matrix2d::Identity() / mass;
    return B;
  };

  // Running cost Γ.
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(7);
  weights(6) = 1.0;
  p.running_cost.terms.push_back(LinearCost{weights, 0.0});

  // ‖(Tx, Ty)‖ ≤ Γ ≤ T_max.
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(3, 3);
  map(0, 2) = 1.0;
  map(1, 0) = 1.0;
  map(2, 1) = 1.0;
  p.control_set = ConvexSet(3);
  p.control_set.add(SocAtom{map, Eigen::VectorXd::Zero(3)});
  p.control_set.add(BoxAtom{Eigen::Vector3d(-kInf, -kInf, -kInf),
                            Eigen::Vector3d(kInf, kInf, params.T_max)});
  p.state_set = ConvexSet(4);

  TerminalConstraint terminal;
  terminal.matrix = Eigen::MatrixXd::Identity(4, 4);
  terminal.rhs.resize(4);
  terminal.rhs << params.x_f, params.v_f;
  p.terminal_constraint = terminal;
  return p;
}

NominalTrajectory straight_line_guess(const DragBenchParams& params, int nodes) {
  params.validate();
  require(nodes >= 2, "straight-line guess: at least 2 nodes required");
  NominalTrajectory guess;
  guess.grid = TimeGrid::uniform(params.t_f, nodes);
  guess.x.resize(4, nodes);
  guess.u = Eigen::MatrixXd::Zero(3, nodes);
  const Eigen::Vector2d velocity = (params.x_f - params.x_i) / params.t_f;
  for (int k = 0; k < nodes; ++k) {
    const double s = static_cast<double>(k) / (nodes - 1);
    guess.x.col(k).head<2>() = (1.0 - s) * params.x_i + s * params.x_f;
    guess.x.col(k).tail<2>() = velocity;
  }
  return guess;
}

OracleSolution no_drag_oracle(const DragBenchParams& params, int nodes,
                              const SolverSettings& settings) {
  params.validate();
  require(nodes >= 2, "no-drag oracle: at least 2 nodes required");
  const TimeGrid grid = TimeGrid::uniform(params.t_f, nodes);
  const Eigen::VectorXd weights = grid.trapezoid_weights();
  const double mass = params.mass;

  ProgramBuilder builder;
  const int x = builder.add_variables(4 * nodes, "x");
  const int u = builder.add_variables(3 * nodes, "u");
  auto xi = [x](int k, int i) { return x + 4 * k + i; };
  auto ui = [u](int k, int j) { return u + 3 * k + j; };

  Eigen::Vector4d start, end;
  start << params.x_i, params.v_i;
  end << params.x_f, params.v_f;
  ProgramBuilder::Block initial({ConeKind::zero, 4}, "initial");
  ProgramBuilder::Block terminal({ConeKind::zero, 4}, "terminal");
  for (int i = 0; i < 4; ++i) {
    initial.coeff(i, xi(0, i), 1.0).offset(i, -start(i));
    terminal.coeff(i, xi(nodes - 1, i), 1.0).offset(i, -end(i));
  }
  builder.add_block(std::move(initial));
  builder.add_block(std::move(terminal));

  // Exact first-order-hold step of p̈ = T/m.
  for (int k = 0; k + 1 < nodes; ++k) {
    const double h = grid.step(k);
    ProgramBuilder::Block dyn({ConeKind::zero, 4}, "dynamics");
    for (int a = 0; a < 2; ++a) {
      // position
      dyn.coeff(a, xi(k, a), 1.0)
          .coeff(a, xi(k, 2 + a), h)
          .coeff(a, ui(k, a), h * h / (3.0 * mass))
          .coeff(a, ui(k + 1, a), h * h / (6.0 * mass))
          .coeff(a, xi(k + 1, a), -1.0);
      // velocity
      dyn.coeff(2 + a, xi(k, 2 + a), 1.0)
          .coeff(2 + a, ui(k, a), h / (2.0 * mass))
          .coeff(2 + a, ui(k + 1, a), h / (2.0 * mass))
          .coeff(2 + a, xi(k + 1, 2 + a), -1.0);
    }
    builder.add_block(std::move(dyn));
  }

  for (int k = 0; k < nodes; ++k) {
    ProgramBuilder::Block soc({ConeKind::soc, 3}, "thrust_cone");
    soc.coeff(0, ui(k, 2), 1.0).coeff(1, ui(k, 0), 1.0).coeff(2, ui(k, 1), 1.0);
    builder.add_block(std::move(soc));
    ProgramBuilder::Block cap({ConeKind::nonneg, 1}, "thrust_cap");
    cap.coeff(0, ui(k, 2), -1.0).offset(0, params.T_max);
    builder.add_block(std::move(cap));
    builder.add_objective(ui(k, 2), weights(k));
  }

  OracleSolution out;
  const ConicProgram program = builder.build();
  out.solution = solve(program, settings);
  if (out.solution.status != SolveStatus::optimal) {
    throw std::runtime_error("no-drag oracle: conic solve ended with status " +
                             std::string(to_string(out.solution.status)));
  }
  out.cost = program.objective_value(out.solution.primal);
  out.trajectory.grid = grid;
  out.trajectory.x.resize(4, nodes);
  out.trajectory.u.resize(3, nodes);
  for (int k = 0; k < nodes; ++k) {
    out.trajectory.x.col(k) = out.solution.primal.segment(xi(k, 0), 4);
    out.trajectory.u.col(k) = out.solution.primal.segment(ui(k, 0), 3);
  }
  return out;
}

void PolynomialProblem::validate() const {
  require(n >= 1 && m >= 1, "polynomial problem: dimensions must be positive");
  require(horizon > 0.0 && std::isfinite(horizon),
          "polynomial problem: horizon must be > 0");
  require(nodes >= 2, "polynomial problem: at least 2 nodes required");
  require(x0.size() == n, "polynomial problem: x0 size");
  require(state_lower.size() == n && state_upper.size() == n,
          "polynomial problem: state bounds size");
  require(control_lower.size() == m && control_upper.size() == m,
          "polynomial problem: control bounds size");
  require(running_state_weight.size() == n && running_control_weight.size() == m,
          "polynomial problem: running weight size");
  require(terminal_target.size() == n, "polynomial problem: target size");
  require(terminal_weight >= 0.0, "polynomial problem: terminal weight must be >= 0");
  require((running_state_weight.array() >= 0.0).all() &&
              (running_control_weight.array() >= 0.0).all(),
          "polynomial problem: running weights must be >= 0");
  for (const auto& term : terms) {
    require(term.output >= 0 && term.output < n,
            "polynomial problem: term output out of range");
    require(static_cast<int>(term.powers.size()) == n + m,
            "polynomial problem: term powers size");
    for (int p : term.powers) {
      require(p >= 0 && p <= 4, "polynomial problem: powers must lie in [0, 4]");
    }
  }
}

namespace {

// Portable draws so the corpus does not depend on the standard library's
// distribution implementations.
struct Draw {
  std::mt19937_64 rng;
  double unit() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int index(int count) { return static_cast<int>(rng() % static_cast<std::uint64_t>(count)); }
};

double monomial(const PolyTerm& term, const Eigen::VectorXd& z, int skip = -1) {
  double value = term.coeff;
  for (int j = 0; j < static_cast<int>(term.powers.size()); ++j) {
    int p = term.powers[j];
    if (j == skip) {
      value *= p;
      p -= 1;
    }
    for (int e = 0; e < p; ++e) {
      value *= z(j);
    }
  }
  return value;
}

}  // namespace

PolynomialProblem random_polynomial_problem(std::uint64_t seed) {
  Draw draw{std::mt19937_64(seed)};
  PolynomialProblem spec;
  spec.seed = seed;
  spec.n = 1 + draw.index(4);
  spec.m = 1 + draw.index(2);
  spec.horizon = 2.0;
  spec.nodes = 11;
  const int n = spec.n;
  const int m = spec.m;
  const int dim = n + m;

  spec.x0.resize(n);
  for (int i = 0; i < n; ++i) spec.x0(i) = draw.uniform(-1.0, 1.0);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      PolyTerm term{i, j < n ? draw.uniform(-0.5, 0.5) : draw.uniform(-1.0, 1.0),
                    std::vector<int>(dim, 0)};
      term.powers[j] = 1;
      spec.terms.push_back(std::move(term));
    }
    const int quadratic = 1 + draw.index(2);
    for (int q = 0; q < quadratic; ++q) {
      PolyTerm term{i, draw.uniform(-0.1, 0.1), std::vector<int>(dim, 0)};
      term.powers[draw.index(dim)] += 1;
      term.powers[draw.index(dim)] += 1;
      spec.terms.push_back(std::move(term));
    }
  }

  spec.state_lower = spec.x0.array() - 5.0;
  spec.state_upper = spec.x0.array() + 5.0;
  spec.control_lower = Eigen::VectorXd::Constant(m, -2.0);
  spec.control_upper = Eigen::VectorXd::Constant(m, 2.0);
  spec.running_state_weight.resize(n);
  spec.running_control_weight.resize(m);
  for (int i = 0; i < n; ++i) spec.running_state_weight(i) = draw.uniform(0.0, 0.5);
  for (int j = 0; j < m; ++j) spec.running_control_weight(j) = draw.uniform(0.1, 1.0);
  spec.terminal_target.resize(n);
  for (int i = 0; i < n; ++i) spec.terminal_target(i) = draw.uniform(-2.0, 2.0);
  spec.terminal_weight = draw.uniform(1.0, 5.0);
  return spec;
}

ProblemDef build_polynomial_problem(const PolynomialProblem& spec) {
  spec.validate();
  const int n = spec.n;
  const int m = spec.m;
  ProblemDef p;
  p.name = "random:" + std::to_string(spec.seed);
  p.n_states = n;
  p.n_controls = m;
  p.horizon = spec.horizon;
  p.x0 = spec.x0;
  for (int i = 0; i < n; ++i) p.state_names.push_back("x" + std::to_string(i));
  for (int j = 0; j < m; ++j) p.control_names.push_back("u" + std::to_string(j));

  const std::vector<PolyTerm> terms = spec.terms;
  p.dynamics = [terms, n](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          double) {
    Eigen::VectorXd z(x.size() + u.size());
    z << x, u;
    Eigen::VectorXd xdot = Eigen::VectorXd::Zero(n);
    for (const auto& term : terms) xdot(term.output) += monomial(term, z);
    return xdot;
  };
  auto jacobian = [terms, n, m](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd z(n + m);
    z << x, u;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n + m);
    for (const auto& term : terms) {
      for (int j = 0; j < n + m; ++j) {
        if (term.powers[j] > 0) J(term.output, j) += monomial(term, z, j);
      }
    }
    return J;
  };
  p.jacobian_x = [jacobian, n](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               double) -> Eigen::MatrixXd {
    return jacobian(x, u).leftCols(n);
  };
  p.jacobian_u = [jacobian, m](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               double) -> Eigen::MatrixXd {
    return jacobian(x, u).rightCols(m);
  };

  Eigen::VectorXd diag(n + m);
  diag << spec.running_state_weight.cwiseSqrt(), spec.running_control_weight.cwiseSqrt();
  p.running_cost.terms.push_back(
      QuadraticCost{diag.asDiagonal().toDenseMatrix(), Eigen::VectorXd::Zero(n + m), 1.0});
  p.terminal_cost.terms.push_back(QuadraticCost{
      Eigen::MatrixXd::Identity(n, n), -spec.terminal_target, spec.terminal_weight});

  p.state_set = ConvexSet(n);
  p.state_set.add(BoxAtom{spec.state_lower, spec.state_upper});
  p.control_set = ConvexSet(m);
  p.control_set.add(BoxAtom{spec.control_lower, spec.control_upper});
  return p;
}

NominalTrajectory polynomial_guess(const PolynomialProblem& spec) {
  spec.validate();
  NominalTrajectory guess;
  guess.grid = TimeGrid::uniform(spec.horizon, spec.nodes);
  guess.x = spec.x0.replicate(1, spec.nodes);
  guess.u = Eigen::MatrixXd::Zero(spec.m, spec.nodes);
  return guess;
}

ProblemDef build_scalar_toy() {
  ProblemDef p;
  p.name = "scalar-toy";
  p.n_states = 1;
  p.n_controls = 1;
  p.horizon = 1.0;
  p.x0 = Eigen::VectorXd::Zero(1);
  p.state_names = {"c"};
  p.control_names = {"u"};
  p.dynamics = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    return Eigen::VectorXd::Constant(1, 0.5 * u(0) * u(0));
  };
  p.jacobian_x = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    return Eigen::MatrixXd::Zero(1, 1);
  };
  p.jacobian_u = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, double) {
    return Eigen::MatrixXd::Constant(1, 1, u(0));
  };
  p.terminal_cost.terms.push_back(LinearCost{Eigen::VectorXd::Ones(1), 0.0});
  p.state_set = ConvexSet(1);
  p.control_set = ConvexSet(1);
  return p;
}

NominalTrajectory scalar_toy_guess(double u_start, int nodes) {
  require(nodes >= 2, "scalar toy: at least 2 nodes required");
  NominalTrajectory guess;
  guess.grid = TimeGrid::uniform(1.0, nodes);
  guess.u = Eigen::MatrixXd::Constant(1, nodes, u_start);
  guess.x.resize(1, nodes);
  for (int k = 0; k < nodes; ++k) {
    guess.x(0, k) = 0.5 * u_start * u_start * guess.grid[k];
  }
  return guess;
}

ScvxConfig scalar_toy_config() {
  ScvxConfig config;
  config.delta_init = 0.5;
  // No virtual control, so each step satisfies the linearized dynamics and
  // the defect it leaves is the linearization error of ½u². With λ = 1 that
  // defect is counted once, J equals ½u² exactly, and the loop is a plain
  // trust-region iteration on ½u². The price: λ = 1 is not an exact penalty,
  // so the cost node of the final iterate keeps its last defect. Any λ > 1
  // repairs that, but then the flat model at u = 0 lets solver noise pick
  // the step and |u| stalls near the stopping threshold.
  config.lambda = 1.0;
  config.linearize.virtual_control.kind = VirtualControlPolicy::Kind::none;
  return config;
}

}  // namespace scvx
