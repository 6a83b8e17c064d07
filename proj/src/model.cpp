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

#include "scvx/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>
#include <type_traits>

namespace scvx {

namespace {

std::string dims_message(const char* what, Eigen::Index got, int want) {
  std::ostringstream os;
  os << what << " has size " << got << ", expected " << want;
  return os.str();
}

void check_sizes(const ProblemDef& problem, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u) {
  if (x.size() != problem.n_states) {
    throw DimensionError(dims_message("state", x.size(), problem.n_states));
  }
  if (u.size() != problem.n_controls) {
    throw DimensionError(dims_message("control", u.size(), problem.n_controls));
  }
}

struct TermEvaluator {
  const Eigen::VectorXd& z;

  double operator()(const LinearCost& term) const {
    return term.weights.dot(z) + term.constant;
  }
  double operator()(const QuadraticCost& term) const {
    return term.weight * 0.5 * (term.factor * z + term.offset).squaredNorm();
  }
  double operator()(const NormCost& term) const {
    return term.weight * (term.factor * z + term.offset).norm();
  }
};

}  // namespace

double ConvexCost::operator()(const Eigen::VectorXd& z) const {
  double total = 0.0;
  for (const auto& term : terms) {
    total += std::visit(TermEvaluator{z}, term);
  }
  return total;
}

void ConvexCost::check_dim(int dim, const std::string& what) const {
  for (const auto& term : terms) {
    const bool ok = std::visit(
        [dim](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, LinearCost>) {
            return t.weights.size() == dim;
          } else {
            return t.factor.cols() == dim && t.offset.size() == t.factor.rows() &&
                   t.weight >= 0.0;
          }
        },
        term);
    if (!ok) {
      throw DimensionError(what + ": cost term does not match argument size " +
                           std::to_string(dim) + " (or has negative weight)");
    }
  }
}

void ProblemDef::validate() const {
  if (n_states <= 0 || n_controls <= 0) {
    throw DimensionError("problem '" + name +
                         "': state and control dimensions must be positive");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("problem '" + name +
                                "': horizon must be finite and positive");
  }
  if (x0.size() != n_states) {
    throw DimensionError(dims_message("x0", x0.size(), n_states));
  }
  if (!dynamics) {
    throw std::invalid_argument("problem '" + name + "': dynamics not set");
  }
  if (control_set.dim() != n_controls && !control_set.is_whole_space()) {
    throw DimensionError(dims_message("control set", control_set.dim(), n_controls));
  }
  if (state_set.dim() != n_states && !state_set.is_whole_space()) {
    throw DimensionError(dims_message("state set", state_set.dim(), n_states));
  }
  running_cost.check_dim(n_states + n_controls, "running cost");
  terminal_cost.check_dim(n_states, "terminal cost");
  if (terminal_constraint) {
    if (terminal_constraint->matrix.cols() != n_states ||
        terminal_constraint->matrix.rows() != terminal_constraint->rhs.size()) {
      throw DimensionError("terminal constraint has inconsistent dimensions");
    }
  }
  if (!state_set.contains(x0, 1e-9)) {
    throw std::invalid_argument("problem '" + name +
                                "': x0 is not a member of the state set");
  }
}

Eigen::VectorXd eval_dynamics(const ProblemDef& problem,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u, double t) {
  check_sizes(problem, x, u);
  Eigen::VectorXd xdot = problem.dynamics(x, u, t);
  if (xdot.size() != problem.n_states) {
    throw DimensionError(
        dims_message("dynamics output", xdot.size(), problem.n_states));
  }
  if (!xdot.allFinite()) {
    throw ModelError("dynamics returned a non-finite value", x, u, t);
  }
  return xdot;
}

Jacobians finite_difference_jacobians(const ProblemDef& problem,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u, double t) {
  check_sizes(problem, x, u);
  const double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  const int n = problem.n_states;
  const int m = problem.n_controls;
  Jacobians jac{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, m)};

  Eigen::VectorXd xp = x;
  for (int j = 0; j < n; ++j) {
    const double h = base_step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const Eigen::VectorXd f_plus = eval_dynamics(problem, xp, u, t);
    xp(j) = x(j) - h;
    const Eigen::VectorXd f_minus = eval_dynamics(problem, xp, u, t);
    xp(j) = x(j);
    jac.A.col(j) = (f_plus - f_minus) / (2.0 * h);
  }
  Eigen::VectorXd up = u;
  for (int j = 0; j < m; ++j) {
    const double h = base_step * std::max(1.0, std::abs(u(j)));
    up(j) = u(j) + h;
    const Eigen::VectorXd f_plus = eval_dynamics(problem, x, up, t);
    up(j) = u(j) - h;
    const Eigen::VectorXd f_minus = eval_dynamics(problem, x, up, t);
    up(j) = u(j);
    jac.B.col(j) = (f_plus - f_minus) / (2.0 * h);
  }
  return jac;
}

Jacobians eval_jacobians(const ProblemDef& problem, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, double t) {
  if (!problem.has_analytic_jacobians()) {
    return finite_difference_jacobians(problem, x, u, t);
  }
  check_sizes(problem, x, u);
  Jacobians jac{problem.jacobian_x(x, u, t), problem.jacobian_u(x, u, t)};
  if (jac.A.rows() != problem.n_states || jac.A.cols() != problem.n_states ||
      jac.B.rows() != problem.n_states || jac.B.cols() != problem.n_controls) {
    throw DimensionError("analytic Jacobian has the wrong shape");
  }
  if (!jac.A.allFinite() || !jac.B.allFinite()) {
    throw ModelError("Jacobian returned a non-finite value", x, u, t);
  }
  return jac;
}

namespace {

Eigen::VectorXd sample_in_set(const ConvexSet& set, const Eigen::VectorXd& center,
                              std::mt19937_64& rng) {
  const int dim = static_cast<int>(center.size());
  Eigen::VectorXd lower(dim);
  Eigen::VectorXd upper(dim);
  if (set.is_whole_space()) {
    lower.setConstant(-std::numeric_limits<double>::infinity());
    upper.setConstant(std::numeric_limits<double>::infinity());
  } else {
    std::tie(lower, upper) = set.box_bounds();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) {
    const double half = 2.0 * std::max(1.0, std::abs(center(i)));
    const double lo = std::isfinite(lower(i)) ? lower(i) : center(i) - half;
    const double hi = std::isfinite(upper(i)) ? upper(i) : center(i) + half;
    z(i) = lo + (hi - lo) * unit(rng);
  }
  return set.is_whole_space() ? z : set.project(z);
}

}  // namespace

JacobianReport check_jacobians(const ProblemDef& problem, int samples,
                               std::uint64_t seed, double tol) {
  const int n = problem.n_states;
  const int m = problem.n_controls;
  JacobianReport report;
  report.samples = samples;
  report.entry_error_A = Eigen::MatrixXd::Zero(n, n);
  report.entry_error_B = Eigen::MatrixXd::Zero(n, m);
  std::vector<std::optional<JacobianDiscrepancy>> worst_A(n * n);
  std::vector<std::optional<JacobianDiscrepancy>> worst_B(n * m);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = sample_in_set(problem.state_set, problem.x0, rng);
    const Eigen::VectorXd u =
        sample_in_set(problem.control_set, Eigen::VectorXd::Zero(m), rng);
    const double t = problem.horizon * unit(rng);
    const Jacobians analytic = eval_jacobians(problem, x, u, t);
    const Jacobians numeric = finite_difference_jacobians(problem, x, u, t);

    auto record = [&](char which, const Eigen::MatrixXd& a,
                      const Eigen::MatrixXd& fd, Eigen::MatrixXd& entry_error,
                      std::vector<std::optional<JacobianDiscrepancy>>& worst) {
      for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
          const double err =
              std::abs(a(i, j) - fd(i, j)) / std::max(1.0, std::abs(fd(i, j)));
          report.worst_error = std::max(report.worst_error, err);
          if (err > entry_error(i, j)) {
            entry_error(i, j) = err;
            if (err > tol) {
              worst[i * a.cols() + j] = JacobianDiscrepancy{
                  which, i, j, a(i, j), fd(i, j), err, x, u, t};
            }
          }
        }
      }
    };
    record('A', analytic.A, numeric.A, report.entry_error_A, worst_A);
    record('B', analytic.B, numeric.B, report.entry_error_B, worst_B);
  }
  for (auto* list : {&worst_A, &worst_B}) {
    for (auto& entry : *list) {
      if (entry) {
        report.failures.push_back(std::move(*entry));
      }
    }
  }
  return report;
}

}  // namespace scvx
