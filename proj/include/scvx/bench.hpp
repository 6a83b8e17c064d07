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
#include <vector>

#include <Eigen/Core>

#include "scvx/conic.hpp"
#include "scvx/model.hpp"
#include "scvx/scvx.hpp"
#include "scvx/transcription.hpp"

namespace scvx {

/// Planar double integrator with quadratic drag, minimum ∫Γ.
struct DragBenchParams {
  double t_f = 10.0;
  double mass = 1.0;
  double k_d = 0.25;
  double T_max = 2.0;
  Eigen::Vector2d x_i{0.0, 0.0};
  Eigen::Vector2d x_f{10.0, 10.0};
  Eigen::Vector2d v_i{5.0, 0.0};
  Eigen::Vector2d v_f{5.0, 0.0};
  double delta_lower = 0.0;
  double rho0 = 0.0;
  double rho1 = 0.25;
  double rho2 = 0.9;
  double alpha = 2.0;

  void validate() const;
  /// Copies the trust-region parameters into config.
  void apply_to(ScvxConfig& config) const;
};

/// State (px, py, vx, vy), control (Tx, Ty, Γ).
ProblemDef build_drag_problem(const DragBenchParams& params, int nodes);

/// Constant-velocity line from x_i to x_f with zero controls.
NominalTrajectory straight_line_guess(const DragBenchParams& params, int nodes);

struct OracleSolution {
  NominalTrajectory trajectory;
  double cost = 0.0;
  ConicSolution solution;
};

/// The k_d = 0 problem posed directly as one conic program in absolute node
/// variables, with closed-form interval matrices. k_d in params is ignored.
OracleSolution no_drag_oracle(const DragBenchParams& params, int nodes,
                              const SolverSettings& settings = {});

/// One monomial coeff · Π z_j^powers[j] added to ẋ[output], z = (x, u).
struct PolyTerm {
  int output = 0;
  double coeff = 0.0;
  std::vector<int> powers;
};

/// Fully serializable description of a polynomial-dynamics test problem.
struct PolynomialProblem {
  std::uint64_t seed = 0;
  int n = 1;
  int m = 1;
  double horizon = 1.0;
  int nodes = 11;
  Eigen::VectorXd x0;
  std::vector<PolyTerm> terms;
  Eigen::VectorXd state_lower, state_upper;
  Eigen::VectorXd control_lower, control_upper;
  Eigen::VectorXd running_state_weight;    // diagonal, ½ Σ q_i x_i²
  Eigen::VectorXd running_control_weight;  // diagonal, ½ Σ r_j u_j²
  Eigen::VectorXd terminal_target;
  double terminal_weight = 1.0;

  void validate() const;
};

/// Small seeded problem: n ≤ 4, m ≤ 2, mildly nonlinear dynamics, box sets.
PolynomialProblem random_polynomial_problem(std::uint64_t seed);

ProblemDef build_polynomial_problem(const PolynomialProblem& spec);

/// x held at x0, zero controls.
NominalTrajectory polynomial_guess(const PolynomialProblem& spec);

inline ProblemDef random_smooth_problem(std::uint64_t seed) {
  return build_polynomial_problem(random_polynomial_problem(seed));
}

/**
 * Minimize ½u² through a cost state: ċ = ½u², c(0) = 0, cost c(T), T = 1.
 * With u held constant the cost is exactly ½u².
 */
ProblemDef build_scalar_toy();

/// u = u_start at every node, c integrated exactly.
NominalTrajectory scalar_toy_guess(double u_start = 1.0, int nodes = 2);

/// Trust radius 0.5, λ = 1, no virtual control, default stopping rule.
ScvxConfig scalar_toy_config();

}  // namespace scvx
