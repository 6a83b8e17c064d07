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

#include "scvx/conic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "conic_detail.hpp"
#include "scvx/log.hpp"

namespace scvx {

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::zero:
      return "zero";
    case ConeKind::nonneg:
      return "nonneg";
    case ConeKind::soc:
      return "soc";
  }
  return "?";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::primal_infeasible:
      return "primal_infeasible";
    case SolveStatus::dual_infeasible:
      return "dual_infeasible";
    case SolveStatus::max_iters:
      return "max_iters";
  }
  return "?";
}

std::string_view to_string(SolverBackend backend) {
  return backend == SolverBackend::splitting ? "splitting" : "interior_point";
}

void ConicProgram::validate() const {
  if (num_vars < 0 || objective.size() != num_vars) {
    throw std::invalid_argument("conic program: objective length " +
                                std::to_string(objective.size()) +
                                " does not match num_vars " +
                                std::to_string(num_vars));
  }
  for (const auto& block : constraints) {
    if (block.cone.dim <= 0 || block.map.rows() != block.cone.dim ||
        block.offset.size() != block.cone.dim ||
        block.map.cols() != num_vars) {
      throw std::invalid_argument("conic program: block '" + block.label +
                                  "' has inconsistent dimensions");
    }
  }
}

int ConicProgram::num_rows() const {
  int rows = 0;
  for (const auto& block : constraints) {
    rows += block.cone.dim;
  }
  return rows;
}

namespace detail {

void project_soc_inplace(Eigen::Ref<Eigen::VectorXd> v) {
  const double t = v(0);
  const double norm_z = v.tail(v.size() - 1).norm();
  if (norm_z <= t) {
    return;
  }
  if (norm_z <= -t) {
    v.setZero();
    return;
  }
  const double alpha = 0.5 * (t + norm_z);
  v(0) = alpha;
  v.tail(v.size() - 1) *= alpha / norm_z;
}

void project_cone_inplace(Eigen::Ref<Eigen::VectorXd> v, ConeKind kind,
                          bool dual) {
  switch (kind) {
    case ConeKind::zero:
      if (!dual) {
        v.setZero();
      }
      break;
    case ConeKind::nonneg:
      v = v.cwiseMax(0.0);
      break;
    case ConeKind::soc:
      project_soc_inplace(v);
      break;
  }
}

void check_block_size(const Eigen::VectorXd& block, const Cone& cone) {
  if (block.size() != cone.dim) {
    throw std::invalid_argument("project_cone: vector length does not match "
                                "cone dimension");
  }
}

StackedData stack_blocks(const ConicProgram& program) {
  StackedData data;
  const int m = program.num_rows();
  std::vector<Eigen::Triplet<double>> triplets;
  data.h.resize(m);
  int row = 0;
  for (const auto& block : program.constraints) {
    data.block_start.push_back(row);
    for (int k = 0; k < block.map.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(block.map, k); it;
           ++it) {
        triplets.emplace_back(row + it.row(), it.col(), it.value());
      }
    }
    data.h.segment(row, block.cone.dim) = block.offset;
    row += block.cone.dim;
  }
  data.G.resize(m, program.num_vars);
  data.G.setFromTriplets(triplets.begin(), triplets.end());
  return data;
}

void project_stacked(Eigen::VectorXd& v, const ConicProgram& program,
                     const std::vector<int>& starts, bool dual) {
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    const auto& cone = program.constraints[i].cone;
    project_cone_inplace(v.segment(starts[i], cone.dim), cone.kind, dual);
  }
}

Residuals compute_residuals(const ConicProgram& program,
                            const StackedData& data, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y) {
  Residuals res;
  const Eigen::VectorXd Gx = data.G * x;
  Eigen::VectorXd s = Gx + data.h;
  Eigen::VectorXd s_proj = s;
  project_stacked(s_proj, program, data.block_start, false);
  res.primal = (s - s_proj).norm() /
               std::max({1.0, Gx.norm(), data.h.norm()});

  const Eigen::VectorXd Gty = data.G.transpose() * y;
  const double stationarity = (program.objective - Gty).norm() /
                              std::max({1.0, program.objective.norm(),
                                        Gty.norm()});
  Eigen::VectorXd y_proj = y;
  project_stacked(y_proj, program, data.block_start, true);
  const double dual_cone = (y - y_proj).norm() / std::max(1.0, y.norm());
  res.dual = std::max(stationarity, dual_cone);

  const double cx = program.objective.dot(x);
  const double hy = data.h.dot(y);
  res.gap = std::abs(cx + hy) / std::max({1.0, std::abs(cx), std::abs(hy)});
  return res;
}

std::vector<Eigen::VectorXd> split_dual(const ConicProgram& program,
                                        const std::vector<int>& starts,
                                        const Eigen::VectorXd& y) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(program.constraints.size());
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    out.emplace_back(y.segment(starts[i], program.constraints[i].cone.dim));
  }
  return out;
}

}  // namespace detail

using namespace detail;

Eigen::VectorXd project_cone(const Eigen::VectorXd& block, const Cone& cone) {
  check_block_size(block, cone);
  Eigen::VectorXd out = block;
  project_cone_inplace(out, cone.kind, false);
  return out;
}

Eigen::VectorXd project_dual_cone(const Eigen::VectorXd& block,
                                  const Cone& cone) {
  check_block_size(block, cone);
  Eigen::VectorXd out = block;
  project_cone_inplace(out, cone.kind, true);
  return out;
}

Residuals residuals(const ConicProgram& program,
                    const ConicSolution& solution) {
  program.validate();
  const StackedData data = stack_blocks(program);
  if (solution.primal.size() != program.num_vars ||
      solution.dual.size() != program.constraints.size()) {
    throw std::invalid_argument("residuals: solution does not match program");
  }
  Eigen::VectorXd y(data.h.size());
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    if (solution.dual[i].size() != program.constraints[i].cone.dim) {
      throw std::invalid_argument("residuals: dual block size mismatch");
    }
    y.segment(data.block_start[i], program.constraints[i].cone.dim) =
        solution.dual[i];
  }
  return compute_residuals(program, data, solution.primal, y);
}

// The embedding follows the standard form
//
//   minimize cᵀx  s.t.  Ax + s = b,  s ∈ K
//
// with A = −G, b = h. The iterates are u = (x, y, τ) and v = (r, s, κ) and
// each step solves (I + Q)ũ = u + v with
//
//       [  0   Aᵀ  c ]
//   Q = [ −A   0   b ]
//       [ −cᵀ −bᵀ  0 ]
//
// through a cached LDLᵀ of [I Aᵀ; A −I].
ConicSolution SplittingSolver::solve(const ConicProgram& program,
                                     const SolverSettings& settings) const {
  program.validate();
  if (!(settings.tol > 0.0)) {
    throw std::invalid_argument("solve: tol must be positive");
  }
  const StackedData data = stack_blocks(program);
  const int n = program.num_vars;
  const int m = static_cast<int>(data.h.size());
  const auto& starts = data.block_start;

  // Ruiz equilibration: A_hat = E A D with E constant across each SOC block.
  Eigen::SparseMatrix<double> A_hat = -data.G;
  A_hat.makeCompressed();
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd E = Eigen::VectorXd::Ones(m);
  for (int pass = 0; pass < settings.equilibration_passes; ++pass) {
    Eigen::VectorXd row_norm = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd col_norm = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < A_hat.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_hat, k); it; ++it) {
        const double a = std::abs(it.value());
        row_norm(it.row()) = std::max(row_norm(it.row()), a);
        col_norm(it.col()) = std::max(col_norm(it.col()), a);
      }
    }
    for (std::size_t i = 0; i < program.constraints.size(); ++i) {
      const auto& cone = program.constraints[i].cone;
      if (cone.kind == ConeKind::soc) {
        auto seg = row_norm.segment(starts[i], cone.dim);
        seg.setConstant(seg.maxCoeff());
      }
    }
    Eigen::VectorXd row_scale(m);
    Eigen::VectorXd col_scale(n);
    for (int i = 0; i < m; ++i) {
      row_scale(i) = row_norm(i) > 1e-12
                         ? std::clamp(1.0 / std::sqrt(row_norm(i)), 1e-4, 1e4)
                         : 1.0;
    }
    for (int j = 0; j < n; ++j) {
      col_scale(j) = col_norm(j) > 1e-12
                         ? std::clamp(1.0 / std::sqrt(col_norm(j)), 1e-4, 1e4)
                         : 1.0;
    }
    A_hat = row_scale.asDiagonal() * A_hat * col_scale.asDiagonal();
    E = E.cwiseProduct(row_scale);
    D = D.cwiseProduct(col_scale);
  }
  A_hat.makeCompressed();

  Eigen::VectorXd b_hat = E.cwiseProduct(data.h);
  Eigen::VectorXd c_hat = D.cwiseProduct(program.objective);
  const double sigma_b =
      settings.data_scale / std::max(1e-6, std::max(1.0, b_hat.norm()));
  const double sigma_c =
      settings.data_scale / std::max(1e-6, std::max(1.0, c_hat.norm()));
  b_hat *= sigma_b;
  c_hat *= sigma_c;

  // Quasidefinite KKT matrix [I Aᵀ; A −I] (lower triangle).
  Eigen::SparseMatrix<double> kkt(n + m, n + m);
  {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(n + m + A_hat.nonZeros());
    for (int j = 0; j < n; ++j) {
      triplets.emplace_back(j, j, 1.0);
    }
    for (int i = 0; i < m; ++i) {
      triplets.emplace_back(n + i, n + i, -1.0);
    }
    for (int k = 0; k < A_hat.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_hat, k); it; ++it) {
        triplets.emplace_back(n + it.row(), it.col(), it.value());
      }
    }
    kkt.setFromTriplets(triplets.begin(), triplets.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt(kkt);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("solve: KKT factorization failed");
  }

  // Solves [I Aᵀ; −A I] z = (a, e) via the quasidefinite system.
  Eigen::VectorXd rhs(n + m);
  auto solve_m = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& e) {
    rhs.head(n) = a;
    rhs.tail(m) = -e;
    return Eigen::VectorXd(ldlt.solve(rhs));
  };

  const Eigen::VectorXd g = solve_m(c_hat, b_hat);
  const double h_dot_g = c_hat.dot(g.head(n)) + b_hat.dot(g.tail(m));

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + m + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + m + 1);
  u(n + m) = 1.0;
  v(n + m) = 1.0;
  Eigen::VectorXd u_tilde(n + m + 1);
  Eigen::VectorXd relaxed(n + m + 1);

  auto project_dual_scaled = [&](Eigen::Ref<Eigen::VectorXd> y) {
    for (std::size_t i = 0; i < program.constraints.size(); ++i) {
      const auto& cone = program.constraints[i].cone;
      project_cone_inplace(y.segment(starts[i], cone.dim), cone.kind, true);
    }
  };

  ConicSolution solution;
  auto unscale = [&](double tau, Eigen::VectorXd& x, Eigen::VectorXd& y) {
    x = D.cwiseProduct(u.head(n)) / (tau * sigma_b);
    y = E.cwiseProduct(u.segment(n, m)) / (tau * sigma_c);
  };

  const double alpha = settings.relaxation;
  const int check = std::max(1, settings.check_interval);
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(m);
  int iter = 0;
  for (; iter < settings.max_iters; ++iter) {
    const Eigen::VectorXd w = u + v;
    const Eigen::VectorXd p = solve_m(w.head(n), w.segment(n, m));
    const double tau_tilde =
        (w(n + m) + c_hat.dot(p.head(n)) + b_hat.dot(p.tail(m))) /
        (1.0 + h_dot_g);
    u_tilde.head(n + m) = p - tau_tilde * g;
    u_tilde(n + m) = tau_tilde;

    relaxed = alpha * u_tilde + (1.0 - alpha) * u;
    u = relaxed - v;
    project_dual_scaled(u.segment(n, m));
    u(n + m) = std::max(u(n + m), 0.0);
    v += u - relaxed;

    if ((iter + 1) % check != 0 && iter + 1 != settings.max_iters) {
      continue;
    }
    const double tau = u(n + m);
    if (tau > 1e-12) {
      unscale(tau, x, y);
      const Residuals res = compute_residuals(program, data, x, y);
      if (std::max({res.primal, res.dual, res.gap}) <= settings.tol) {
        solution.status = SolveStatus::optimal;
        solution.primal = x;
        solution.dual = split_dual(program, starts, y);
        solution.primal_residual = res.primal;
        solution.dual_residual = res.dual;
        solution.duality_gap = res.gap;
        solution.iterations = iter + 1;
        return solution;
      }
    }

    // Infeasibility certificates on the unnormalized iterates.
    const Eigen::VectorXd y_dir = E.cwiseProduct(u.segment(n, m));
    const double h_y = data.h.dot(y_dir);
    if (h_y < 0.0) {
      const double stationarity = (data.G.transpose() * y_dir).norm();
      if (stationarity <= settings.tol * (-h_y)) {
        solution.status = SolveStatus::primal_infeasible;
        solution.primal = Eigen::VectorXd::Constant(
            n, std::numeric_limits<double>::quiet_NaN());
        solution.dual = split_dual(program, starts, y_dir / (-h_y));
        solution.iterations = iter + 1;
        return solution;
      }
    }
    const Eigen::VectorXd x_dir = D.cwiseProduct(u.head(n));
    const double c_x = program.objective.dot(x_dir);
    if (c_x < 0.0) {
      Eigen::VectorXd s_dir = data.G * x_dir;
      Eigen::VectorXd s_proj = s_dir;
      project_stacked(s_proj, program, starts, false);
      if ((s_dir - s_proj).norm() <= settings.tol * (-c_x)) {
        solution.status = SolveStatus::dual_infeasible;
        solution.primal = x_dir / (-c_x);
        solution.dual = split_dual(
            program, starts,
            Eigen::VectorXd::Constant(m,
                                      std::numeric_limits<double>::quiet_NaN()));
        solution.iterations = iter + 1;
        return solution;
      }
    }
  }

  const double tau = std::max(u(n + m), 1e-12);
  unscale(tau, x, y);
  const Residuals res = compute_residuals(program, data, x, y);
  solution.status = SolveStatus::max_iters;
  solution.primal = x;
  solution.dual = split_dual(program, starts, y);
  solution.primal_residual = res.primal;
  solution.dual_residual = res.dual;
  solution.duality_gap = res.gap;
  solution.iterations = iter;
  log_debug("conic solve hit max_iters={} (primal {:.3e}, dual {:.3e}, gap {:.3e})",
            iter, res.primal, res.dual, res.gap);
  return solution;
}

ConicSolution solve(const ConicProgram& program, double tol, int max_iters) {
  SolverSettings settings;
  settings.tol = tol;
  settings.max_iters = max_iters;
  return solve(program, settings);
}

ConicSolution solve(const ConicProgram& program,
                    const SolverSettings& settings) {
  if (settings.backend == SolverBackend::interior_point) {
    return InteriorPointSolver{}.solve(program, settings);
  }
  return SplittingSolver{}.solve(program, settings);
}

void write_debug(const ConicProgram& program, std::ostream& out) {
  program.validate();
  const StackedData data = stack_blocks(program);
  const auto old_precision = out.precision(17);
  out << "conic vars=" << program.num_vars << " rows=" << data.h.size()
      << " cones=";
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    const auto& cone = program.constraints[i].cone;
    out << (i == 0 ? "" : ",") << to_string(cone.kind) << ':' << cone.dim;
  }
  out << " offset=" << program.objective_offset << '\n';
  for (int j = 0; j < program.num_vars; ++j) {
    if (program.objective(j) != 0.0) {
      out << "c " << j << ' ' << program.objective(j) << '\n';
    }
  }
  for (int i = 0; i < data.h.size(); ++i) {
    if (data.h(i) != 0.0) {
      out << "h " << i << ' ' << data.h(i) << '\n';
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> G = data.G;
  for (int i = 0; i < G.outerSize(); ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, i);
         it; ++it) {
      out << "G " << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  out.precision(old_precision);
}

int ProgramBuilder::add_variables(int count, std::string_view name) {
  const int first = num_vars_;
  for (int i = 0; i < count; ++i) {
    var_names_.push_back(std::string(name) + "[" + std::to_string(i) + "]");
  }
  num_vars_ += count;
  return first;
}

void ProgramBuilder::add_objective(int var, double coeff) {
  objective_entries_.emplace_back(var, coeff);
}

ProgramBuilder::Block& ProgramBuilder::Block::coeff(int row, int var,
                                                    double value) {
  entries_.emplace_back(row, var, value);
  return *this;
}

ProgramBuilder::Block& ProgramBuilder::Block::offset(int row, double value) {
  offset_(row) += value;
  return *this;
}

void ProgramBuilder::add_block(Block block) {
  blocks_.push_back(std::move(block));
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram program;
  program.num_vars = num_vars_;
  program.objective = Eigen::VectorXd::Zero(num_vars_);
  for (const auto& [var, coeff] : objective_entries_) {
    program.objective(var) += coeff;
  }
  program.objective_offset = objective_offset_;
  program.var_names = var_names_;
  for (const auto& block : blocks_) {
    ConstraintBlock out;
    out.cone = block.cone_;
    out.offset = block.offset_;
    out.label = block.label_;
    out.map.resize(block.cone_.dim, num_vars_);
    out.map.setFromTriplets(block.entries_.begin(), block.entries_.end());
    program.constraints.push_back(std::move(out));
  }
  program.validate();
  return program;
}

}  // namespace scvx
