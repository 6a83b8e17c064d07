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

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "scvx/conic.hpp"
#include "scvx/model.hpp"
#include "scvx/transcription.hpp"

namespace scvx {

/// Unrecoverable failure inside the successive convexification loop.
class ScvxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScvxConfig {
  double lambda = 1e3;
  double delta_init = 2.0;
  double delta_lower = 0.0;
  double rho0 = 0.0;
  double rho1 = 0.25;
  double rho2 = 0.9;
  double alpha = 2.0;
  /// Absolute stopping threshold on the predicted change. When unset the
  /// threshold is stop_tol_relative · max(1, |J(x_k)|).
  std::optional<double> stop_tol;
  double stop_tol_relative = 1e-6;
  int max_total_iters = 100;
  int max_rejections_in_a_row = 30;
  PenaltyNorm penalty = PenaltyNorm::max_l1;
  /// Free final time is not supported; setting this is a configuration error.
  bool free_final_time = false;

  /// Subproblems default to the interior-point backend.
  SolverSettings solver{.backend = SolverBackend::interior_point};
  LinearizeOptions linearize;

  /// Checks 0 ≤ ρ0 < ρ1 < ρ2 < 1, α > 1, λ > 0, Δ¹ > 0, Δ_l ≥ 0 and the
  /// solver/stopping tolerance coupling. Throws std::invalid_argument.
  void validate() const;

  double stop_threshold(double current_cost) const;
};

/// Outcome of the ratio test for one solved subproblem.
struct RadiusUpdate {
  bool accepted = false;
  double radius = 0.0;
};

/**
 * Trust-region bookkeeping for a computed ratio r:
 *
 *   r < ρ0        reject,  Δ/α
 *   ρ0 ≤ r < ρ1   accept,  Δ/α
 *   ρ1 ≤ r < ρ2   accept,  Δ
 *   ρ2 ≤ r        accept,  αΔ
 *
 * followed by Δ ← max(Δ, Δ_l).
 */
RadiusUpdate update_radius(double ratio, double radius, const ScvxConfig& config);

struct IterationRecord {
  int k = 0;
  double delta_J = 0.0;
  double delta_L = 0.0;
  /// Absent when the loop stopped on the predicted change.
  std::optional<double> ratio;
  double radius_before = 0.0;
  double radius_after = 0.0;
  bool accepted = false;
  bool stop = false;
  /// Penalized cost and defect at the iterate after this attempt.
  double penalized_cost_J = 0.0;
  double gamma_defect = 0.0;
  SolveStatus subproblem_status = SolveStatus::optimal;
  int solver_iterations = 0;
};

enum class StopReason { delta_L_below_tol, max_iters, rejection_limit };

std::string_view to_string(StopReason reason);

struct ScvxResult {
  NominalTrajectory final_trajectory;
  std::vector<IterationRecord> history;
  bool converged = false;
  StopReason reason = StopReason::max_iters;
  double final_defect_gamma = 0.0;
  double final_cost = 0.0;            // C(x, u)
  double final_penalized_cost = 0.0;  // J(x, u)

  int accepted_count() const;
};

/// Discrete original cost: terminal cost plus trapezoidal running cost.
double original_cost(const ProblemDef& problem, const NominalTrajectory& traj);

/// J = C + λ·penalty(defects).
double penalized_cost_J(const ProblemDef& problem, const NominalTrajectory& traj,
                        double lambda,
                        PenaltyNorm penalty = PenaltyNorm::max_l1,
                        const IntegratorOptions& integrator = {});

/// L = C(x + d, u + w) + λ·penalty(E v). d, w hold one column per node and v
/// one column per interval.
double penalized_cost_L(const ProblemDef& problem,
                        const std::vector<LinearizedSegment>& segments,
                        const NominalTrajectory& nominal,
                        const Eigen::MatrixXd& d, const Eigen::MatrixXd& w,
                        const Eigen::MatrixXd& v, double lambda,
                        PenaltyNorm penalty = PenaltyNorm::max_l1);

/// Variable offsets of a subproblem; column k of each group is contiguous.
struct SubproblemLayout {
  int n = 0;
  int m = 0;
  int n_v = 0;
  int nodes = 0;
  int d = 0;
  int w = 0;
  int v = 0;
  int abs_v = 0;
  int penalty = -1;  // epigraph of the max-of-L1 term, -1 for sum_l1

  int d_at(int k) const { return d + k * n; }
  int w_at(int k) const { return w + k * m; }
  int v_at(int k) const { return v + k * n_v; }
};

struct Subproblem {
  ConicProgram program;
  SubproblemLayout layout;

  /// Splits a primal vector into (d, w, v) matrices.
  void extract(const Eigen::VectorXd& primal, Eigen::MatrixXd& d,
               Eigen::MatrixXd& w, Eigen::MatrixXd& v) const;
};

/**
 * The convex subproblem at the nominal: linearized dynamics with virtual
 * control, ‖w_k‖∞ ≤ Δ at every node, shifted set memberships, boundary
 * conditions, and objective C(x + d, u + w) + λ·penalty(E v) through epigraph
 * variables. The objective value at a feasible point equals penalized_cost_L.
 */
Subproblem build_subproblem(const ProblemDef& problem,
                            const NominalTrajectory& nominal,
                            const std::vector<LinearizedSegment>& segments,
                            double radius, double lambda,
                            PenaltyNorm penalty = PenaltyNorm::max_l1);

/// Mutable loop state carried between attempts.
struct ScvxState {
  NominalTrajectory iterate;
  double radius = 0.0;
  double cost_J = 0.0;
  int attempts = 0;
};

/// Initializes the loop state. Node 0 of the guess is replaced by x0 and the
/// last node is moved onto the terminal constraint before J is evaluated.
ScvxState make_state(const ProblemDef& problem, NominalTrajectory initial_guess,
                     const ScvxConfig& config);

/// Optional callbacks; any member may be empty.
struct RunObserver {
  /// Called once per attempt with the iterate after that attempt.
  std::function<void(const IterationRecord&, const NominalTrajectory&)> iteration;
  /// Called with each subproblem before it is solved (attempt index k).
  std::function<void(int, const ConicProgram&)> subproblem;
};

/// One attempt: linearize, solve, ratio test, radius update. A rejected or
/// stopping attempt leaves state.iterate untouched.
IterationRecord step(const ProblemDef& problem, ScvxState& state,
                     const ScvxConfig& config, const RunObserver& observer = {});

/// Repeats step() until the predicted change falls below the stopping
/// threshold or a safety limit triggers. Every attempt is recorded.
ScvxResult run(const ProblemDef& problem, const NominalTrajectory& initial_guess,
               const ScvxConfig& config, const RunObserver& observer = {});

}  // namespace scvx
