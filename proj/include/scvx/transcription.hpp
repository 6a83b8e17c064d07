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

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scvx/model.hpp"

namespace scvx {

/// Non-finite state encountered while integrating interval `interval()`.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, int interval)
      : std::runtime_error(what), interval_{interval} {}
  int interval() const { return interval_; }

 private:
  int interval_;
};

/// Strictly increasing node times from 0 to the horizon.
class TimeGrid {
 public:
  TimeGrid() = default;

  static TimeGrid uniform(double horizon, int nodes);
  /// Validates: ≥ 2 nodes, t[0] = 0, strictly increasing, finite.
  static TimeGrid from_times(std::vector<double> times);

  int size() const { return static_cast<int>(times_.size()); }
  int intervals() const { return size() - 1; }
  double operator[](int k) const { return times_[k]; }
  double step(int k) const { return times_[k + 1] - times_[k]; }
  double horizon() const { return times_.back(); }
  bool is_uniform() const { return uniform_; }
  const std::vector<double>& times() const { return times_; }

  /// Trapezoidal quadrature weights: Σ w_k g(t_k) ≈ ∫ g.
  Eigen::VectorXd trapezoid_weights() const;

 private:
  std::vector<double> times_;
  bool uniform_ = false;
};

/**
 * States and controls at the grid nodes, one column per node. Controls are
 * interpolated linearly between nodes (first-order hold).
 */
struct NominalTrajectory {
  TimeGrid grid;
  Eigen::MatrixXd x;  // n × N
  Eigen::MatrixXd u;  // m × N

  /// Dimension and finiteness checks against the problem.
  void validate(const ProblemDef& problem) const;
};

struct IntegratorOptions {
  /// Classical RK4 substeps per grid interval.
  int substeps = 64;
};

/// State at the end of one interval, integrating from x_start with controls
/// interpolated from u_start to u_end.
Eigen::VectorXd propagate_interval(const ProblemDef& problem,
                                   const Eigen::VectorXd& x_start,
                                   const Eigen::VectorXd& u_start,
                                   const Eigen::VectorXd& u_end, double t_start,
                                   double t_end,
                                   const IntegratorOptions& options = {});

/// Integrates the whole grid from x_start; column 0 equals x_start exactly.
Eigen::MatrixXd propagate_nonlinear(const ProblemDef& problem,
                                    const Eigen::VectorXd& x_start,
                                    const Eigen::MatrixXd& controls,
                                    const TimeGrid& grid,
                                    const IntegratorOptions& options = {});

/**
 * Discrete affine model of one interval about the nominal:
 *
 *   d[k+1] = A_d d[k] + B_d0 w[k] + B_d1 w[k+1] + E_d v[k] + c_d
 *
 * with c_d the one-step residual Φ(x[k], u) − x[k+1], so the model is exact
 * at d = w = v = 0.
 */
struct LinearizedSegment {
  Eigen::MatrixXd A_d;
  Eigen::MatrixXd B_d0;
  Eigen::MatrixXd B_d1;
  Eigen::MatrixXd E_d;
  Eigen::VectorXd c_d;
};

/// How the virtual control enters the dynamics.
struct VirtualControlPolicy {
  /// none removes the virtual control; subproblems are then only feasible
  /// when the linearized dynamics allow it.
  enum class Kind { identity, select, none };
  Kind kind = Kind::identity;
  /// State components driven by v when kind == select.
  std::vector<int> columns;

  /// n × n_v input matrix for the virtual control.
  Eigen::MatrixXd matrix(int n_states) const;
};

struct LinearizeOptions {
  IntegratorOptions integrator;
  VirtualControlPolicy virtual_control;
  /// Worker threads for per-interval work; 0 picks the hardware count.
  int threads = 0;
};

/// Integrates the variational equations alongside the nominal flow on every
/// interval. The result is independent of the thread count.
std::vector<LinearizedSegment> linearize_trajectory(
    const ProblemDef& problem, const NominalTrajectory& nominal,
    const LinearizeOptions& options = {});

enum class PenaltyNorm {
  max_l1,  // max over intervals of the L1 norm
  sum_l1,  // sum over intervals of the L1 norm
};

/// max_k ‖columns.col(k)‖₁. Requires at least one column.
double gamma_norm(const Eigen::MatrixXd& columns);

double penalty_norm(const Eigen::MatrixXd& columns, PenaltyNorm kind);

/// defects.col(k) = x[k+1] − Φ(x[k], u on [t_k, t_{k+1}]).
struct DefectProfile {
  Eigen::MatrixXd defects;  // n × (N − 1)

  double gamma() const { return gamma_norm(defects); }
};

DefectProfile compute_defects(const ProblemDef& problem,
                              const NominalTrajectory& trajectory,
                              const IntegratorOptions& options = {});

}  // namespace scvx
