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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "scvx/convex_set.hpp"

namespace scvx {

/// Raised when vector or matrix sizes disagree with the problem definition.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the user model produces NaN or Inf. Carries the inputs.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, Eigen::VectorXd x, Eigen::VectorXd u,
             double t)
      : std::runtime_error(what), x_{std::move(x)}, u_{std::move(u)}, t_{t} {}

  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& u() const { return u_; }
  double t() const { return t_; }

 private:
  Eigen::VectorXd x_;
  Eigen::VectorXd u_;
  double t_;
};

// Convex cost terms act on a stacked argument z: (x, u) for running costs and
// x alone for terminal costs.

/// weightsᵀz + constant.
struct LinearCost {
  Eigen::VectorXd weights;
  double constant = 0.0;
};

/// weight · ½‖factor·z + offset‖².
struct QuadraticCost {
  Eigen::MatrixXd factor;
  Eigen::VectorXd offset;
  double weight = 1.0;
};

/// weight · ‖factor·z + offset‖₂.
struct NormCost {
  Eigen::MatrixXd factor;
  Eigen::VectorXd offset;
  double weight = 1.0;
};

using CostTerm = std::variant<LinearCost, QuadraticCost, NormCost>;

/// A sum of convex terms. Empty means identically zero.
struct ConvexCost {
  std::vector<CostTerm> terms;

  double operator()(const Eigen::VectorXd& z) const;
  /// Throws DimensionError if a term does not accept arguments of size dim.
  void check_dim(int dim, const std::string& what) const;
};

/// matrix · x(T) = rhs.
struct TerminalConstraint {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

using DynamicsFn = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;
using JacobianFn = std::function<Eigen::MatrixXd(
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t)>;

/**
 * A continuous-time optimal control problem with nonlinear dynamics
 * ẋ = f(x, u, t), convex costs and convex state/control sets, on a fixed
 * horizon [0, T] with fixed initial state.
 *
 * Immutable after construction; all evaluation entry points are const and
 * safe to call concurrently provided the user callbacks are.
 */
struct ProblemDef {
  std::string name;
  int n_states = 0;
  int n_controls = 0;
  double horizon = 0.0;
  Eigen::VectorXd x0;
  std::optional<TerminalConstraint> terminal_constraint;

  DynamicsFn dynamics;
  /// Optional analytic ∂f/∂x and ∂f/∂u. Finite differences are used if unset.
  JacobianFn jacobian_x;
  JacobianFn jacobian_u;

  ConvexCost running_cost;   // over (x, u)
  ConvexCost terminal_cost;  // over x(T)
  ConvexSet control_set;
  ConvexSet state_set;

  /// Column labels used by output writers. Defaulted to x0.., u0.. if empty.
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;

  bool has_analytic_jacobians() const {
    return static_cast<bool>(jacobian_x) && static_cast<bool>(jacobian_u);
  }

  /// Checks every structural invariant. Throws DimensionError or
  /// std::invalid_argument.
  void validate() const;
};

struct Jacobians {
  Eigen::MatrixXd A;  // ∂f/∂x, n × n
  Eigen::MatrixXd B;  // ∂f/∂u, n × m
};

/// f(x, u, t), with dimension and finiteness checks.
Eigen::VectorXd eval_dynamics(const ProblemDef& problem,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, double t);

/// Analytic Jacobians when the problem provides them, finite differences
/// otherwise.
Jacobians eval_jacobians(const ProblemDef& problem, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double t);

/// Central differences with per-component step cbrt(ε)·max(1, |z_i|).
Jacobians finite_difference_jacobians(const ProblemDef& problem,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u, double t);

struct JacobianDiscrepancy {
  char matrix = 'A';  // 'A' or 'B'
  int row = 0;
  int col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // |analytic − numeric| / max(1, |numeric|)
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double t = 0.0;
};

struct JacobianReport {
  int samples = 0;
  double worst_error = 0.0;
  /// Worst relative error per entry over all samples.
  Eigen::MatrixXd entry_error_A;
  Eigen::MatrixXd entry_error_B;
  /// Entries exceeding the tolerance, worst sample per entry.
  std::vector<JacobianDiscrepancy> failures;

  bool passed() const { return failures.empty(); }
};

/**
 * Compares analytic Jacobians to finite differences at `samples` points
 * drawn (deterministically from `seed`) inside state_set × control_set × [0,T].
 */
JacobianReport check_jacobians(const ProblemDef& problem, int samples,
                               std::uint64_t seed, double tol);

}  // namespace scvx
