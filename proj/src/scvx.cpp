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

#include "scvx/scvx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/QR>

#include "scvx/log.hpp"

namespace scvx {

void ScvxConfig::validate() const {
  auto fail = [](const std::string& why) {
    throw std::invalid_argument("scvx config: " + why);
  };
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be > 0");
  if (!(delta_init > 0.0) || !std::isfinite(delta_init)) {
    fail("delta_init must be > 0");
  }
  if (!(delta_lower >= 0.0)) fail("delta_lower must be >= 0");
  if (!(rho0 >= 0.0 && rho0 < rho1 && rho1 < rho2 && rho2 < 1.0)) {
    fail("thresholds must satisfy 0 <= rho0 < rho1 < rho2 < 1");
  }
  if (!(alpha > 1.0) || !std::isfinite(alpha)) fail("alpha must be > 1");
  if (stop_tol && !(*stop_tol >= 0.0)) fail("stop_tol must be >= 0");
  if (!(stop_tol_relative >= 0.0)) fail("stop_tol_relative must be >= 0");
  if (max_total_iters < 1) fail("max_total_iters must be >= 1");
  if (max_rejections_in_a_row < 1) fail("max_rejections_in_a_row must be >= 1");
  if (free_final_time) {
    fail("free final time is not supported; fix the horizon");
  }
  if (!(solver.tol > 0.0)) fail("solver tol must be > 0");
  if (solver.max_iters < 1) fail("solver max_iters must be >= 1");
  if (stop_tol_relative > 0.0 && solver.tol > stop_tol_relative / 100.0 * (1.0 + 1e-12)) {
    fail("solver tol must not exceed stop_tol_relative / 100");
  }
}

double ScvxConfig::stop_threshold(double current_cost) const {
  if (stop_tol) {
    return *stop_tol;
  }
  return stop_tol_relative * std::max(1.0, std::abs(current_cost));
}

RadiusUpdate update_radius(double ratio, double radius,
                           const ScvxConfig& config) {
  RadiusUpdate out;
  if (!(ratio >= config.rho0)) {
    out.accepted = false;
    out.radius = radius / config.alpha;
  } else {
    out.accepted = true;
    if (ratio < config.rho1) {
      out.radius = radius / config.alpha;
    } else if (ratio < config.rho2) {
      out.radius = radius;
    } else {
      out.radius = config.alpha * radius;
    }
  }
  out.radius = std::max(out.radius, config.delta_lower);
  return out;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::delta_L_below_tol:
      return "delta_L_below_tol";
    case StopReason::max_iters:
      return "max_iters";
    case StopReason::rejection_limit:
      return "rejection_limit";
  }
  return "?";
}

int ScvxResult::accepted_count() const {
  return static_cast<int>(std::count_if(
      history.begin(), history.end(),
      [](const IterationRecord& r) { return r.accepted; }));
}

namespace {

double cost_at(const ProblemDef& problem, const TimeGrid& grid,
               const Eigen::MatrixXd& x, const Eigen::MatrixXd& u) {
  const Eigen::VectorXd weights = grid.trapezoid_weights();
  const int n = problem.n_states;
  const int m = problem.n_controls;
  Eigen::VectorXd z(n + m);
  double running = 0.0;
  if (!problem.running_cost.terms.empty()) {
    for (int k = 0; k < grid.size(); ++k) {
      z.head(n) = x.col(k);
      z.tail(m) = u.col(k);
      running += weights(k) * problem.running_cost(z);
    }
  }
  double terminal = 0.0;
  if (!problem.terminal_cost.terms.empty()) {
    terminal = problem.terminal_cost(x.col(grid.size() - 1));
  }
  return terminal + running;
}

struct CostBreakdown {
  double C = 0.0;
  double gamma = 0.0;
  double penalty = 0.0;
};

CostBreakdown evaluate_J(const ProblemDef& problem,
                         const NominalTrajectory& traj, PenaltyNorm penalty,
                         const IntegratorOptions& integrator) {
  CostBreakdown out;
  const DefectProfile defects = compute_defects(problem, traj, integrator);
  out.C = original_cost(problem, traj);
  out.gamma = defects.gamma();
  out.penalty = penalty_norm(defects.defects, penalty);
  return out;
}

bool finite_data(const SetAtom& atom) {
  return std::visit(
      [](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, BoxAtom>) {
          return !a.lower.array().isNaN().any() && !a.upper.array().isNaN().any();
        } else if constexpr (std::is_same_v<T, BallAtom>) {
          return a.center.allFinite() && std::isfinite(a.radius);
        } else if constexpr (std::is_same_v<T, SocAtom>) {
          return a.map.allFinite() && a.offset.allFinite();
        } else if constexpr (std::is_same_v<T, AffineEqualityAtom>) {
          return a.matrix.allFinite() && a.rhs.allFinite();
        } else {
          return a.normal.allFinite() && std::isfinite(a.offset);
        }
      },
      atom);
}

// Adds rows enforcing nominal + δ ∈ set, where δ occupies variables
// [first, first + dim).
void encode_membership(ProgramBuilder& builder, const ConvexSet& set,
                       const Eigen::VectorXd& nominal, int first,
                       const std::string& label) {
  const int dim = static_cast<int>(nominal.size());
  for (const auto& atom : set.atoms()) {
    if (!finite_data(atom)) {
      throw ScvxError("cannot encode " + atom_kind(atom) + " atom in " + label +
                      ": non-finite data");
    }
    if (const auto* box = std::get_if<BoxAtom>(&atom)) {
      std::vector<std::pair<int, double>> rows;  // (var, sign)
      std::vector<double> offsets;
      for (int i = 0; i < dim; ++i) {
        if (std::isfinite(box->lower(i))) {
          rows.emplace_back(first + i, 1.0);
          offsets.push_back(nominal(i) - box->lower(i));
        }
        if (std::isfinite(box->upper(i))) {
          rows.emplace_back(first + i, -1.0);
          offsets.push_back(box->upper(i) - nominal(i));
        }
      }
      if (rows.empty()) {
        continue;
      }
      ProgramBuilder::Block block({ConeKind::nonneg, static_cast<int>(rows.size())},
                                  label + ":box");
      for (std::size_t r = 0; r < rows.size(); ++r) {
        block.coeff(static_cast<int>(r), rows[r].first, rows[r].second)
            .offset(static_cast<int>(r), offsets[r]);
      }
      builder.add_block(std::move(block));
    } else if (const auto* ball = std::get_if<BallAtom>(&atom)) {
      ProgramBuilder::Block block({ConeKind::soc, dim + 1}, label + ":ball");
      block.offset(0, ball->radius);
      for (int i = 0; i < dim; ++i) {
        block.coeff(i + 1, first + i, 1.0)
            .offset(i + 1, nominal(i) - ball->center(i));
      }
      builder.add_block(std::move(block));
    } else if (const auto* soc = std::get_if<SocAtom>(&atom)) {
      const int rows = static_cast<int>(soc->map.rows());
      ProgramBuilder::Block block({ConeKind::soc, rows}, label + ":soc");
      const Eigen::VectorXd base = soc->map * nominal + soc->offset;
      for (int r = 0; r < rows; ++r) {
        for (int i = 0; i < dim; ++i) {
          if (soc->map(r, i) != 0.0) {
            block.coeff(r, first + i, soc->map(r, i));
          }
        }
        block.offset(r, base(r));
      }
      builder.add_block(std::move(block));
    } else if (const auto* eq = std::get_if<AffineEqualityAtom>(&atom)) {
      const int rows = static_cast<int>(eq->matrix.rows());
      ProgramBuilder::Block block({ConeKind::zero, rows}, label + ":affine");
      const Eigen::VectorXd base = eq->matrix * nominal - eq->rhs;
      for (int r = 0; r < rows; ++r) {
        for (int i = 0; i < dim; ++i) {
          if (eq->matrix(r, i) != 0.0) {
            block.coeff(r, first + i, eq->matrix(r, i));
          }
        }
        block.offset(r, base(r));
      }
      builder.add_block(std::move(block));
    } else if (const auto* half = std::get_if<HalfspaceAtom>(&atom)) {
      ProgramBuilder::Block block({ConeKind::nonneg, 1}, label + ":halfspace");
      for (int i = 0; i < dim; ++i) {
        if (half->normal(i) != 0.0) {
          block.coeff(0, first + i, -half->normal(i));
        }
      }
      block.offset(0, half->offset - half->normal.dot(nominal));
      builder.add_block(std::move(block));
    }
  }
}

// Adds weight·cost(nominal + δ) to the objective, where component i of δ is
// variable vars[i]. Nonlinear terms go through epigraph variables.
void encode_cost(ProgramBuilder& builder, const ConvexCost& cost,
                 const Eigen::VectorXd& nominal, const std::vector<int>& vars,
                 double weight, const std::string& label) {
  const int dim = static_cast<int>(nominal.size());
  for (const auto& term : cost.terms) {
    if (const auto* lin = std::get_if<LinearCost>(&term)) {
      for (int i = 0; i < dim; ++i) {
        if (lin->weights(i) != 0.0) {
          builder.add_objective(vars[i], weight * lin->weights(i));
        }
      }
      builder.add_objective_offset(
          weight * (lin->weights.dot(nominal) + lin->constant));
      continue;
    }
    const bool quadratic = std::holds_alternative<QuadraticCost>(term);
    const Eigen::MatrixXd& factor =
        quadratic ? std::get<QuadraticCost>(term).factor
                  : std::get<NormCost>(term).factor;
    const Eigen::VectorXd base =
        factor * nominal + (quadratic ? std::get<QuadraticCost>(term).offset
                                      : std::get<NormCost>(term).offset);
    const double term_weight = quadratic ? std::get<QuadraticCost>(term).weight
                                         : std::get<NormCost>(term).weight;
    const int rows = static_cast<int>(factor.rows());
    const int epi = builder.add_variables(1, label + ":epigraph");
    builder.add_objective(epi, weight * term_weight);
    // ½‖q‖² ≤ e  ⇔  ‖(q, e − ½)‖ ≤ e + ½ ;  ‖q‖ ≤ e directly.
    const int extra = quadratic ? 2 : 1;
    ProgramBuilder::Block block({ConeKind::soc, rows + extra},
                                label + (quadratic ? ":quadratic" : ":norm"));
    block.coeff(0, epi, 1.0);
    if (quadratic) {
      block.offset(0, 0.5);
      block.coeff(rows + 1, epi, 1.0).offset(rows + 1, -0.5);
    }
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < dim; ++i) {
        if (factor(r, i) != 0.0) {
          block.coeff(r + 1, vars[i], factor(r, i));
        }
      }
      block.offset(r + 1, base(r));
    }
    builder.add_block(std::move(block));
  }
}

}  // namespace

double original_cost(const ProblemDef& problem, const NominalTrajectory& traj) {
  traj.validate(problem);
  return cost_at(problem, traj.grid, traj.x, traj.u);
}

double penalized_cost_J(const ProblemDef& problem, const NominalTrajectory& traj,
                        double lambda, PenaltyNorm penalty,
                        const IntegratorOptions& integrator) {
  const CostBreakdown parts = evaluate_J(problem, traj, penalty, integrator);
  return parts.C + lambda * parts.penalty;
}

double penalized_cost_L(const ProblemDef& problem,
                        const std::vector<LinearizedSegment>& segments,
                        const NominalTrajectory& nominal,
                        const Eigen::MatrixXd& d, const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& v, double lambda,
                        PenaltyNorm penalty) {
  nominal.validate(problem);
  const int nodes = nominal.grid.size();
  if (d.rows() != problem.n_states || d.cols() != nodes ||
      w.rows() != problem.n_controls || w.cols() != nodes ||
      static_cast<int>(segments.size()) != nodes - 1 || v.cols() != nodes - 1) {
    throw DimensionError("penalized_cost_L: deviation sizes do not match");
  }
  Eigen::MatrixXd virtual_effect(problem.n_states, nodes - 1);
  for (int k = 0; k < nodes - 1; ++k) {
    if (segments[k].E_d.cols() != v.rows()) {
      throw DimensionError("penalized_cost_L: virtual control size mismatch");
    }
    virtual_effect.col(k) = segments[k].E_d * v.col(k);
  }
  return cost_at(problem, nominal.grid, nominal.x + d, nominal.u + w) +
         lambda * penalty_norm(virtual_effect, penalty);
}

void Subproblem::extract(const Eigen::VectorXd& primal, Eigen::MatrixXd& d,
                         Eigen::MatrixXd& w, Eigen::MatrixXd& v) const {
  const auto& L = layout;
  d.resize(L.n, L.nodes);
  w.resize(L.m, L.nodes);
  v.resize(L.n_v, L.nodes - 1);
  for (int k = 0; k < L.nodes; ++k) {
    d.col(k) = primal.segment(L.d_at(k), L.n);
    w.col(k) = primal.segment(L.w_at(k), L.m);
    if (k + 1 < L.nodes) {
      v.col(k) = primal.segment(L.v_at(k), L.n_v);
    }
  }
}

Subproblem build_subproblem(const ProblemDef& problem,
                            const NominalTrajectory& nominal,
                            const std::vector<LinearizedSegment>& segments,
                            double radius, double lambda, PenaltyNorm penalty) {
  nominal.validate(problem);
  if (!(radius > 0.0)) {
    throw std::invalid_argument("build_subproblem: trust radius must be > 0");
  }
  const int n = problem.n_states;
  const int m = problem.n_controls;
  const int nodes = nominal.grid.size();
  if (static_cast<int>(segments.size()) != nodes - 1) {
    throw DimensionError("build_subproblem: one segment per interval required");
  }
  const int n_v = static_cast<int>(segments.front().E_d.cols());

  ProgramBuilder builder;
  SubproblemLayout layout;
  layout.n = n;
  layout.m = m;
  layout.n_v = n_v;
  layout.nodes = nodes;
  layout.d = builder.add_variables(n * nodes, "d");
  layout.w = builder.add_variables(m * nodes, "w");
  layout.v = builder.add_variables(n_v * (nodes - 1), "v");
  layout.abs_v = builder.add_variables(n * (nodes - 1), "abs_Ev");
  if (penalty == PenaltyNorm::max_l1) {
    layout.penalty = builder.add_variables(1, "gamma_epigraph");
    builder.add_objective(layout.penalty, lambda);
  }

  // Initial condition: x_0 + d_0 = x0.
  {
    ProgramBuilder::Block block({ConeKind::zero, n}, "initial_state");
    for (int i = 0; i < n; ++i) {
      block.coeff(i, layout.d_at(0) + i, 1.0)
          .offset(i, nominal.x(i, 0) - problem.x0(i));
    }
    builder.add_block(std::move(block));
  }

  // d_{k+1} = A d_k + B0 w_k + B1 w_{k+1} + E v_k + c.
  for (int k = 0; k < nodes - 1; ++k) {
    const LinearizedSegment& seg = segments[k];
    ProgramBuilder::Block block({ConeKind::zero, n},
                                "dynamics[" + std::to_string(k) + "]");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (seg.A_d(i, j) != 0.0) block.coeff(i, layout.d_at(k) + j, seg.A_d(i, j));
      }
      for (int j = 0; j < m; ++j) {
        if (seg.B_d0(i, j) != 0.0) block.coeff(i, layout.w_at(k) + j, seg.B_d0(i, j));
        if (seg.B_d1(i, j) != 0.0) {
          block.coeff(i, layout.w_at(k + 1) + j, seg.B_d1(i, j));
        }
      }
      for (int j = 0; j < n_v; ++j) {
        if (seg.E_d(i, j) != 0.0) block.coeff(i, layout.v_at(k) + j, seg.E_d(i, j));
      }
      block.coeff(i, layout.d_at(k + 1) + i, -1.0);
      block.offset(i, seg.c_d(i));
    }
    builder.add_block(std::move(block));
  }

  if (problem.terminal_constraint) {
    const auto& tc = *problem.terminal_constraint;
    const int rows = static_cast<int>(tc.matrix.rows());
    const Eigen::VectorXd base = tc.matrix * nominal.x.col(nodes - 1) - tc.rhs;
    ProgramBuilder::Block block({ConeKind::zero, rows}, "terminal_state");
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < n; ++i) {
        if (tc.matrix(r, i) != 0.0) {
          block.coeff(r, layout.d_at(nodes - 1) + i, tc.matrix(r, i));
        }
      }
      block.offset(r, base(r));
    }
    builder.add_block(std::move(block));
  }

  // ‖w_k‖∞ ≤ Δ.
  for (int k = 0; k < nodes; ++k) {
    ProgramBuilder::Block block({ConeKind::nonneg, 2 * m},
                                "trust_region[" + std::to_string(k) + "]");
    for (int j = 0; j < m; ++j) {
      block.coeff(2 * j, layout.w_at(k) + j, -1.0).offset(2 * j, radius);
      block.coeff(2 * j + 1, layout.w_at(k) + j, 1.0).offset(2 * j + 1, radius);
    }
    builder.add_block(std::move(block));
  }

  for (int k = 0; k < nodes; ++k) {
    const std::string tag = "[" + std::to_string(k) + "]";
    encode_membership(builder, problem.control_set, nominal.u.col(k),
                      layout.w_at(k), "control_set" + tag);
    encode_membership(builder, problem.state_set, nominal.x.col(k),
                      layout.d_at(k), "state_set" + tag);
  }

  // |E v_k| ≤ a_k componentwise, then Σ a_k ≤ s (max) or λ Σ a_k (sum).
  for (int k = 0; k < nodes - 1; ++k) {
    const LinearizedSegment& seg = segments[k];
    ProgramBuilder::Block block({ConeKind::nonneg, 2 * n},
                                "virtual_abs[" + std::to_string(k) + "]");
    const int a = layout.abs_v + k * n;
    for (int i = 0; i < n; ++i) {
      block.coeff(2 * i, a + i, 1.0).coeff(2 * i + 1, a + i, 1.0);
      for (int j = 0; j < n_v; ++j) {
        if (seg.E_d(i, j) != 0.0) {
          block.coeff(2 * i, layout.v_at(k) + j, -seg.E_d(i, j));
          block.coeff(2 * i + 1, layout.v_at(k) + j, seg.E_d(i, j));
        }
      }
    }
    builder.add_block(std::move(block));
    if (penalty == PenaltyNorm::max_l1) {
      ProgramBuilder::Block sum({ConeKind::nonneg, 1},
                                "virtual_l1[" + std::to_string(k) + "]");
      sum.coeff(0, layout.penalty, 1.0);
      for (int i = 0; i < n; ++i) {
        sum.coeff(0, a + i, -1.0);
      }
      builder.add_block(std::move(sum));
    } else {
      for (int i = 0; i < n; ++i) {
        builder.add_objective(a + i, lambda);
      }
    }
  }

  // Discrete original cost at (x + d, u + w).
  const Eigen::VectorXd weights = nominal.grid.trapezoid_weights();
  if (!problem.running_cost.terms.empty()) {
    std::vector<int> vars(n + m);
    Eigen::VectorXd z(n + m);
    for (int k = 0; k < nodes; ++k) {
      for (int i = 0; i < n; ++i) vars[i] = layout.d_at(k) + i;
      for (int j = 0; j < m; ++j) vars[n + j] = layout.w_at(k) + j;
      z.head(n) = nominal.x.col(k);
      z.tail(m) = nominal.u.col(k);
      encode_cost(builder, problem.running_cost, z, vars, weights(k),
                  "running_cost[" + std::to_string(k) + "]");
    }
  }
  if (!problem.terminal_cost.terms.empty()) {
    std::vector<int> vars(n);
    for (int i = 0; i < n; ++i) vars[i] = layout.d_at(nodes - 1) + i;
    encode_cost(builder, problem.terminal_cost, nominal.x.col(nodes - 1), vars,
                1.0, "terminal_cost");
  }

  return Subproblem{builder.build(), layout};
}

namespace {

// Largest violation of boundary conditions and set memberships at the nominal,
// i.e. how far the zero step is from being feasible for the subproblem.
double zero_step_violation(const ProblemDef& problem,
                           const NominalTrajectory& traj) {
  double worst = (traj.x.col(0) - problem.x0).lpNorm<Eigen::Infinity>();
  if (problem.terminal_constraint) {
    const auto& tc = *problem.terminal_constraint;
    worst = std::max(worst, (tc.matrix * traj.x.col(traj.grid.size() - 1) - tc.rhs)
                                .lpNorm<Eigen::Infinity>());
  }
  for (int k = 0; k < traj.grid.size(); ++k) {
    worst = std::max(worst, problem.control_set.violation(traj.u.col(k)));
    worst = std::max(worst, problem.state_set.violation(traj.x.col(k)));
  }
  return worst;
}

constexpr double kZeroStepTol = 1e-6;

// Moves node 0 onto x0 and the last node onto the terminal affine set
// (least-norm correction), so the zero step is feasible from the start.
void pin_boundary_nodes(const ProblemDef& problem, NominalTrajectory& traj) {
  traj.x.col(0) = problem.x0;
  if (problem.terminal_constraint) {
    const auto& tc = *problem.terminal_constraint;
    const int last = traj.grid.size() - 1;
    const Eigen::VectorXd residual = tc.matrix * traj.x.col(last) - tc.rhs;
    traj.x.col(last) -= tc.matrix.completeOrthogonalDecomposition().solve(residual);
  }
}

}  // namespace

ScvxState make_state(const ProblemDef& problem, NominalTrajectory initial_guess,
                     const ScvxConfig& config) {
  config.validate();
  problem.validate();
  initial_guess.validate(problem);
  pin_boundary_nodes(problem, initial_guess);
  for (int k = 0; k < initial_guess.grid.size(); ++k) {
    if (!problem.control_set.contains(initial_guess.u.col(k), kZeroStepTol) ||
        !problem.state_set.contains(initial_guess.x.col(k), kZeroStepTol)) {
      throw std::invalid_argument("initial guess leaves the state or control "
                                  "set at node " + std::to_string(k));
    }
  }
  ScvxState state;
  state.iterate = std::move(initial_guess);
  state.radius = config.delta_init;
  state.cost_J = penalized_cost_J(problem, state.iterate, config.lambda,
                                  config.penalty, config.linearize.integrator);
  return state;
}

IterationRecord step(const ProblemDef& problem, ScvxState& state,
                     const ScvxConfig& config, const RunObserver& observer) {
  IterationRecord rec;
  rec.k = ++state.attempts;
  rec.radius_before = state.radius;
  const NominalTrajectory& nominal = state.iterate;

  const std::vector<LinearizedSegment> segments =
      linearize_trajectory(problem, nominal, config.linearize);
  const Subproblem sub = build_subproblem(problem, nominal, segments,
                                          state.radius, config.lambda,
                                          config.penalty);
  if (observer.subproblem) {
    observer.subproblem(rec.k, sub.program);
  }
  const ConicSolution sol = solve(sub.program, config.solver);
  rec.subproblem_status = sol.status;
  rec.solver_iterations = sol.iterations;

  auto finish_unchanged = [&](IterationRecord& r) {
    const CostBreakdown parts = evaluate_J(problem, nominal, config.penalty,
                                           config.linearize.integrator);
    r.penalized_cost_J = state.cost_J;
    r.gamma_defect = parts.gamma;
  };

  if (sol.status == SolveStatus::primal_infeasible ||
      sol.status == SolveStatus::dual_infeasible) {
    throw ScvxError("subproblem " + std::string(to_string(sol.status)) +
                    " at attempt " + std::to_string(rec.k) +
                    "; virtual control should make every subproblem feasible");
  }
  if (sol.status == SolveStatus::max_iters) {
    log_warn("attempt {}: subproblem solver hit max_iters, rejecting step",
             rec.k);
    state.radius = std::max(state.radius / config.alpha, config.delta_lower);
    rec.accepted = false;
    rec.radius_after = state.radius;
    finish_unchanged(rec);
    return rec;
  }

  Eigen::MatrixXd d, w, v;
  sub.extract(sol.primal, d, w, v);
  // The initial deviation is pinned exactly; with identity virtual control,
  // v is recomputed so the linear dynamics hold exactly at (d, w).
  d.col(0) = problem.x0 - nominal.x.col(0);
  if (config.linearize.virtual_control.kind ==
      VirtualControlPolicy::Kind::identity) {
    for (int k = 0; k + 1 < nominal.grid.size(); ++k) {
      const LinearizedSegment& seg = segments[k];
      v.col(k) = d.col(k + 1) - seg.A_d * d.col(k) - seg.B_d0 * w.col(k) -
                 seg.B_d1 * w.col(k + 1) - seg.c_d;
    }
  }
  double L = penalized_cost_L(problem, segments, nominal, d, w, v,
                              config.lambda, config.penalty);
  // The zero step (d = 0, w = 0, E v = −c) attains L = J(x_k). When it is
  // admissible, a solver answer that does worse is replaced by it.
  if (L > state.cost_J &&
      zero_step_violation(problem, nominal) <= kZeroStepTol) {
    log_debug("attempt {}: solver point L={} above J={}, using zero step",
              rec.k, L, state.cost_J);
    d.setZero();
    w.setZero();
    L = state.cost_J;
  }
  rec.delta_L = state.cost_J - L;

  if (rec.delta_L <= config.stop_threshold(state.cost_J)) {
    rec.stop = true;
    rec.accepted = false;
    rec.radius_after = state.radius;
    finish_unchanged(rec);
    return rec;
  }

  NominalTrajectory candidate = nominal;
  candidate.x += d;
  candidate.u += w;
  double candidate_J = std::numeric_limits<double>::infinity();
  double candidate_gamma = std::numeric_limits<double>::infinity();
  try {
    const CostBreakdown parts = evaluate_J(problem, candidate, config.penalty,
                                           config.linearize.integrator);
    candidate_J = parts.C + config.lambda * parts.penalty;
    candidate_gamma = parts.gamma;
  } catch (const PropagationError& e) {
    log_warn("attempt {}: candidate propagation failed ({}), rejecting",
             rec.k, e.what());
  }
  rec.delta_J = state.cost_J - candidate_J;
  rec.ratio = rec.delta_J / rec.delta_L;

  const RadiusUpdate update = update_radius(*rec.ratio, state.radius, config);
  rec.accepted = update.accepted;
  state.radius = update.radius;
  rec.radius_after = state.radius;
  if (update.accepted) {
    state.iterate = std::move(candidate);
    state.cost_J = candidate_J;
    rec.penalized_cost_J = candidate_J;
    rec.gamma_defect = candidate_gamma;
  } else {
    finish_unchanged(rec);
  }
  log_info("attempt {}: dJ={:.6e} dL={:.6e} r={:.4f} radius {:.4g} -> {:.4g} {}",
           rec.k, rec.delta_J, rec.delta_L, *rec.ratio, rec.radius_before,
           rec.radius_after, rec.accepted ? "accepted" : "rejected");
  return rec;
}

ScvxResult run(const ProblemDef& problem, const NominalTrajectory& initial_guess,
               const ScvxConfig& config, const RunObserver& observer) {
  ScvxState state = make_state(problem, initial_guess, config);
  ScvxResult result;
  int rejections_in_a_row = 0;
  result.reason = StopReason::max_iters;
  while (state.attempts < config.max_total_iters) {
    IterationRecord rec = step(problem, state, config, observer);
    result.history.push_back(rec);
    if (observer.iteration) {
      observer.iteration(rec, state.iterate);
    }
    if (rec.stop) {
      result.converged = true;
      result.reason = StopReason::delta_L_below_tol;
      break;
    }
    rejections_in_a_row = rec.accepted ? 0 : rejections_in_a_row + 1;
    if (rejections_in_a_row >= config.max_rejections_in_a_row) {
      result.reason = StopReason::rejection_limit;
      break;
    }
  }
  const CostBreakdown parts = evaluate_J(problem, state.iterate, config.penalty,
                                         config.linearize.integrator);
  result.final_trajectory = std::move(state.iterate);
  result.final_defect_gamma = parts.gamma;
  result.final_cost = parts.C;
  result.final_penalized_cost = parts.C + config.lambda * parts.penalty;
  return result;
}

}  // namespace scvx
