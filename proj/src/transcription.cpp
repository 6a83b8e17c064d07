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

#include "scvx/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace scvx {

TimeGrid TimeGrid::uniform(double horizon, int nodes) {
  if (nodes < 2) {
    throw std::invalid_argument("time grid needs at least 2 nodes");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("time grid horizon must be finite and positive");
  }
  TimeGrid grid;
  grid.times_.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    grid.times_[k] = horizon * static_cast<double>(k) / (nodes - 1);
  }
  grid.times_.back() = horizon;
  grid.uniform_ = true;
  return grid;
}

TimeGrid TimeGrid::from_times(std::vector<double> times) {
  if (times.size() < 2) {
    throw std::invalid_argument("time grid needs at least 2 nodes");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("time grid must start at 0");
  }
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    if (!(times[k + 1] > times[k]) || !std::isfinite(times[k + 1])) {
      throw std::invalid_argument("time grid must be finite and strictly "
                                  "increasing");
    }
  }
  TimeGrid grid;
  const double h0 = times[1] - times[0];
  grid.uniform_ = true;
  for (std::size_t k = 1; k + 1 < times.size(); ++k) {
    if (std::abs((times[k + 1] - times[k]) - h0) > 1e-12 * times.back()) {
      grid.uniform_ = false;
    }
  }
  grid.times_ = std::move(times);
  return grid;
}

Eigen::VectorXd TimeGrid::trapezoid_weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(size());
  for (int k = 0; k < intervals(); ++k) {
    const double half = 0.5 * step(k);
    w(k) += half;
    w(k + 1) += half;
  }
  return w;
}

void NominalTrajectory::validate(const ProblemDef& problem) const {
  if (x.rows() != problem.n_states || u.rows() != problem.n_controls ||
      x.cols() != grid.size() || u.cols() != grid.size()) {
    throw DimensionError("trajectory dimensions do not match the problem/grid");
  }
  if (!x.allFinite() || !u.allFinite()) {
    throw std::invalid_argument("trajectory contains non-finite entries");
  }
}

namespace {

struct Sensitivity {
  Eigen::MatrixXd Phi;   // ∂x(t)/∂x(t_k)
  Eigen::MatrixXd Psi0;  // ∂x(t)/∂u_k
  Eigen::MatrixXd Psi1;  // ∂x(t)/∂u_{k+1}
};

// Classical RK4 over one interval with first-order-hold controls. When `sens`
// is non-null the variational equations
//
//   Φ̇ = AΦ,  Ψ̇₀ = AΨ₀ + (1 − σ)B,  Ψ̇₁ = AΨ₁ + σB
//
// are integrated with the same stages. The state arithmetic does not depend
// on whether sensitivities are requested.
Eigen::VectorXd rk4_interval(const ProblemDef& problem, Eigen::VectorXd x,
                             const Eigen::VectorXd& u0,
                             const Eigen::VectorXd& u1, double t0, double t1,
                             int substeps, Sensitivity* sens, int interval) {
  if (substeps < 1) {
    throw std::invalid_argument("RK4 needs at least one substep");
  }
  const double span = t1 - t0;
  const double dt = span / substeps;
  const Eigen::VectorXd du = u1 - u0;
  const int n = problem.n_states;
  const int m = problem.n_controls;

  auto control_at = [&](double sigma) -> Eigen::VectorXd {
    return u0 + sigma * du;
  };
  auto fail = [&](const std::string& why) {
    throw PropagationError("propagation failed on interval " +
                           std::to_string(interval) + ": " + why,
                           interval);
  };

  if (sens) {
    sens->Phi = Eigen::MatrixXd::Identity(n, n);
    sens->Psi0 = Eigen::MatrixXd::Zero(n, m);
    sens->Psi1 = Eigen::MatrixXd::Zero(n, m);
  }

  struct Stage {
    Eigen::VectorXd dx;
    Eigen::MatrixXd dPhi, dPsi0, dPsi1;
  };
  auto eval_stage = [&](const Eigen::VectorXd& xs, double sigma, double t,
                        const Sensitivity* s) {
    Stage stage;
    const Eigen::VectorXd us = control_at(sigma);
    try {
      stage.dx = eval_dynamics(problem, xs, us, t);
      if (s) {
        const Jacobians jac = eval_jacobians(problem, xs, us, t);
        stage.dPhi = jac.A * s->Phi;
        stage.dPsi0 = jac.A * s->Psi0 + (1.0 - sigma) * jac.B;
        stage.dPsi1 = jac.A * s->Psi1 + sigma * jac.B;
      }
    } catch (const ModelError& e) {
      fail(e.what());
    }
    return stage;
  };
  auto advance = [&](const Sensitivity& base, const Stage& k, double h) {
    return Sensitivity{base.Phi + h * k.dPhi, base.Psi0 + h * k.dPsi0,
                       base.Psi1 + h * k.dPsi1};
  };

  for (int i = 0; i < substeps; ++i) {
    const double sigma_a = static_cast<double>(i) / substeps;
    const double sigma_b = (i + 0.5) / substeps;
    const double sigma_c = static_cast<double>(i + 1) / substeps;
    const double ta = t0 + sigma_a * span;
    const double tb = t0 + sigma_b * span;
    const double tc = t0 + sigma_c * span;

    Sensitivity s2, s3, s4;
    const Stage k1 = eval_stage(x, sigma_a, ta, sens);
    if (sens) s2 = advance(*sens, k1, 0.5 * dt);
    const Stage k2 = eval_stage(x + 0.5 * dt * k1.dx, sigma_b, tb,
                                sens ? &s2 : nullptr);
    if (sens) s3 = advance(*sens, k2, 0.5 * dt);
    const Stage k3 = eval_stage(x + 0.5 * dt * k2.dx, sigma_b, tb,
                                sens ? &s3 : nullptr);
    if (sens) s4 = advance(*sens, k3, dt);
    const Stage k4 =
        eval_stage(x + dt * k3.dx, sigma_c, tc, sens ? &s4 : nullptr);

    x += (dt / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    if (sens) {
      sens->Phi += (dt / 6.0) *
                   (k1.dPhi + 2.0 * k2.dPhi + 2.0 * k3.dPhi + k4.dPhi);
      sens->Psi0 += (dt / 6.0) *
                    (k1.dPsi0 + 2.0 * k2.dPsi0 + 2.0 * k3.dPsi0 + k4.dPsi0);
      sens->Psi1 += (dt / 6.0) *
                    (k1.dPsi1 + 2.0 * k2.dPsi1 + 2.0 * k3.dPsi1 + k4.dPsi1);
    }
    if (!x.allFinite()) {
      fail("non-finite state");
    }
  }
  return x;
}

// Runs body(k) for k in [0, count) on up to `threads` workers. Each index is
// handled by exactly one worker; the first failing index (lowest k) is
// rethrown so errors do not depend on scheduling.
template <class Body>
void parallel_for(int count, int threads, Body body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int k = 0; k < count; ++k) {
      body(k);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (int k = w; k < count; k += threads) {
          try {
            body(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
}

}  // namespace

Eigen::VectorXd propagate_interval(const ProblemDef& problem,
                                   const Eigen::VectorXd& x_start,
                                   const Eigen::VectorXd& u_start,
                                   const Eigen::VectorXd& u_end, double t_start,
                                   double t_end,
                                   const IntegratorOptions& options) {
  return rk4_interval(problem, x_start, u_start, u_end, t_start, t_end,
                      options.substeps, nullptr, 0);
}

Eigen::MatrixXd propagate_nonlinear(const ProblemDef& problem,
                                    const Eigen::VectorXd& x_start,
                                    const Eigen::MatrixXd& controls,
                                    const TimeGrid& grid,
                                    const IntegratorOptions& options) {
  if (controls.cols() != grid.size() || controls.rows() != problem.n_controls) {
    throw DimensionError("control sequence does not match the grid");
  }
  if (x_start.size() != problem.n_states) {
    throw DimensionError("initial state has the wrong size");
  }
  Eigen::MatrixXd states(problem.n_states, grid.size());
  states.col(0) = x_start;
  for (int k = 0; k < grid.intervals(); ++k) {
    states.col(k + 1) =
        rk4_interval(problem, states.col(k), controls.col(k),
                     controls.col(k + 1), grid[k], grid[k + 1],
                     options.substeps, nullptr, k);
  }
  return states;
}

Eigen::MatrixXd VirtualControlPolicy::matrix(int n_states) const {
  if (kind == Kind::identity) {
    return Eigen::MatrixXd::Identity(n_states, n_states);
  }
  if (kind == Kind::none) {
    return Eigen::MatrixXd::Zero(n_states, 0);
  }
  if (columns.empty()) {
    throw std::invalid_argument("virtual control selection is empty");
  }
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n_states, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= n_states) {
      throw std::invalid_argument("virtual control selects a missing state");
    }
    E(columns[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return E;
}

std::vector<LinearizedSegment> linearize_trajectory(
    const ProblemDef& problem, const NominalTrajectory& nominal,
    const LinearizeOptions& options) {
  nominal.validate(problem);
  const Eigen::MatrixXd E = options.virtual_control.matrix(problem.n_states);
  const int intervals = nominal.grid.intervals();
  std::vector<LinearizedSegment> segments(intervals);
  parallel_for(intervals, options.threads, [&](int k) {
    Sensitivity sens;
    const Eigen::VectorXd x_end =
        rk4_interval(problem, nominal.x.col(k), nominal.u.col(k),
                     nominal.u.col(k + 1), nominal.grid[k],
                     nominal.grid[k + 1], options.integrator.substeps, &sens, k);
    LinearizedSegment& seg = segments[k];
    seg.A_d = std::move(sens.Phi);
    seg.B_d0 = std::move(sens.Psi0);
    seg.B_d1 = std::move(sens.Psi1);
    seg.E_d = E;
    seg.c_d = x_end - nominal.x.col(k + 1);
  });
  return segments;
}

double gamma_norm(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) {
    throw std::invalid_argument("gamma_norm needs a nonempty sequence");
  }
  double worst = 0.0;
  for (int k = 0; k < columns.cols(); ++k) {
    worst = std::max(worst, columns.col(k).lpNorm<1>());
  }
  return worst;
}

double penalty_norm(const Eigen::MatrixXd& columns, PenaltyNorm kind) {
  if (kind == PenaltyNorm::max_l1) {
    return gamma_norm(columns);
  }
  if (columns.cols() == 0) {
    throw std::invalid_argument("penalty_norm needs a nonempty sequence");
  }
  double total = 0.0;
  for (int k = 0; k < columns.cols(); ++k) {
    total += columns.col(k).lpNorm<1>();
  }
  return total;
}

DefectProfile compute_defects(const ProblemDef& problem,
                              const NominalTrajectory& trajectory,
                              const IntegratorOptions& options) {
  trajectory.validate(problem);
  const int intervals = trajectory.grid.intervals();
  DefectProfile profile;
  profile.defects.resize(problem.n_states, intervals);
  for (int k = 0; k < intervals; ++k) {
    const Eigen::VectorXd x_end = rk4_interval(
        problem, trajectory.x.col(k), trajectory.u.col(k),
        trajectory.u.col(k + 1), trajectory.grid[k], trajectory.grid[k + 1],
        options.substeps, nullptr, k);
    profile.defects.col(k) = trajectory.x.col(k + 1) - x_end;
  }
  return profile;
}

}  // namespace scvx
