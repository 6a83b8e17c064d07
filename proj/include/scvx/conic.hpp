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

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace scvx {

enum class ConeKind { zero, nonneg, soc };

std::string_view to_string(ConeKind kind);

struct Cone {
  ConeKind kind = ConeKind::nonneg;
  int dim = 0;
};

/// One constraint block: map·x + offset ∈ cone.
struct ConstraintBlock {
  Eigen::SparseMatrix<double> map;
  Eigen::VectorXd offset;
  Cone cone;
  std::string label;
};

/**
 * minimize objectiveᵀx + objective_offset  s.t.  map_i·x + offset_i ∈ K_i.
 *
 * The dual associated with block i is y_i ∈ K_i* (every supported cone is
 * self-dual except the zero cone, whose dual is the whole space), with
 * stationarity objective = Σ map_iᵀ y_i.
 */
struct ConicProgram {
  int num_vars = 0;
  Eigen::VectorXd objective;
  double objective_offset = 0.0;
  std::vector<ConstraintBlock> constraints;
  std::vector<std::string> var_names;

  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
  int num_rows() const;
  double objective_value(const Eigen::VectorXd& x) const {
    return objective.dot(x) + objective_offset;
  }
};

enum class SolveStatus { optimal, primal_infeasible, dual_infeasible, max_iters };

std::string_view to_string(SolveStatus status);

struct ConicSolution {
  Eigen::VectorXd primal;
  std::vector<Eigen::VectorXd> dual;
  SolveStatus status = SolveStatus::max_iters;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
};

enum class SolverBackend { splitting, interior_point };

std::string_view to_string(SolverBackend backend);

struct SolverSettings {
  SolverBackend backend = SolverBackend::splitting;
  double tol = 1e-8;
  /// Iteration cap for the splitting backend.
  int max_iters = 200000;
  /// Iteration cap for the interior-point backend.
  int ipm_max_iters = 100;
  /// Ruiz equilibration passes applied to the constraint matrix.
  int equilibration_passes = 25;
  /// ADMM over-relaxation factor in (0, 2).
  double relaxation = 1.6;
  /// Scale applied to the normalized objective and offset vectors.
  double data_scale = 1.0;
  int check_interval = 10;
};

/// Euclidean projection of a block onto a cone.
Eigen::VectorXd project_cone(const Eigen::VectorXd& block, const Cone& cone);

/// Euclidean projection onto the dual cone (the zero cone's dual is free).
Eigen::VectorXd project_dual_cone(const Eigen::VectorXd& block,
                                  const Cone& cone);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

/**
 * Relative KKT residuals recomputed from the program data:
 *
 *   primal = ‖s − Π_K(s)‖ / max(1, ‖Gx‖, ‖h‖),    s = Gx + h
 *   dual   = max(‖c − Gᵀy‖ / max(1, ‖c‖, ‖Gᵀy‖),  ‖y − Π_K*(y)‖ / max(1, ‖y‖))
 *   gap    = |cᵀx + hᵀy| / max(1, |cᵀx|, |hᵀy|)
 *
 * where G, h stack all blocks' maps and offsets.
 */
Residuals residuals(const ConicProgram& program, const ConicSolution& solution);

/// Pluggable solver interface so an external conic solver can stand in.
class ConicSolverBackend {
 public:
  virtual ~ConicSolverBackend() = default;
  virtual ConicSolution solve(const ConicProgram& program,
                              const SolverSettings& settings) const = 0;
};

/**
 * ADMM on the homogeneous self-dual embedding of the conic program, with Ruiz
 * equilibration and a sparse quasidefinite LDLᵀ factorization reused across
 * iterations. Deterministic: identical inputs give bitwise-identical output.
 */
class SplittingSolver final : public ConicSolverBackend {
 public:
  ConicSolution solve(const ConicProgram& program,
                      const SolverSettings& settings) const override;
};

/**
 * Primal-dual interior-point method on the homogeneous self-dual embedding
 * with Nesterov-Todd scaling and a Mehrotra predictor-corrector. Each
 * iteration factors a regularized quasidefinite KKT system (sparse LDLᵀ,
 * fixed ordering) and refines the solve against the exact matrix.
 */
class InteriorPointSolver final : public ConicSolverBackend {
 public:
  ConicSolution solve(const ConicProgram& program,
                      const SolverSettings& settings) const override;
};

/// Splitting backend with the given tolerance and iteration cap.
ConicSolution solve(const ConicProgram& program, double tol = 1e-8,
                    int max_iters = 200000);
/// Dispatches on settings.backend.
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings);

/**
 * Writes the program as text: a header line
 *
 *   conic vars=<n> rows=<m> cones=<kind>:<dim>,... offset=<c0>
 *
 * then `c <j> <value>` objective entries, `h <i> <value>` offsets and
 * `G <i> <j> <value>` COO triplets, all with 17 significant digits.
 */
void write_debug(const ConicProgram& program, std::ostream& out);

/// Incrementally assembles a ConicProgram from named variable groups and
/// triplet-based constraint blocks.
class ProgramBuilder {
 public:
  /// Appends `count` variables; returns the index of the first one.
  int add_variables(int count, std::string_view name);
  int num_vars() const { return num_vars_; }

  void add_objective(int var, double coeff);
  void add_objective_offset(double value) { objective_offset_ += value; }

  class Block {
   public:
    Block(Cone cone, std::string label)
        : cone_{cone}, offset_(Eigen::VectorXd::Zero(cone.dim)),
          label_{std::move(label)} {}
    /// Adds coeff·x[var] to row `row` of the block (entries accumulate).
    Block& coeff(int row, int var, double value);
    Block& offset(int row, double value);

   private:
    friend class ProgramBuilder;
    Cone cone_;
    std::vector<Eigen::Triplet<double>> entries_;
    Eigen::VectorXd offset_;
    std::string label_;
  };

  void add_block(Block block);

  ConicProgram build() const;

 private:
  int num_vars_ = 0;
  std::vector<std::string> var_names_;
  std::vector<std::pair<int, double>> objective_entries_;
  double objective_offset_ = 0.0;
  std::vector<Block> blocks_;
};

}  // namespace scvx
