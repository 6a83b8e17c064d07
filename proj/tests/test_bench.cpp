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


#include <doctest.h>

#include <cmath>
#include <random>

#include "scvx/bench.hpp"

using namespace scvx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

DragBenchParams no_drag() {
  DragBenchParams p;
  p.k_d = 0.0;
  return p;
}

}  // namespace

TEST_CASE("drag benchmark dynamics at hand-checked points") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  CHECK(p.n_states == 4);
  CHECK(p.n_controls == 3);
  CHECK(p.horizon == 10.0);
  // |v| = 5, drag 0.25·25 = 6.25 opposing vx.
  const VectorXd f = eval_dynamics(p, vec({1, 2, 5, 0}), vec({0, 0, 0}), 0.0);
  CHECK((f - vec({5, 0, -6.25, 0})).norm() <= 1e-14);
  // Thrust adds directly with unit mass.
  const VectorXd g = eval_dynamics(p, vec({0, 0, 0, 0}), vec({1, -2, 3}), 0.0);
  CHECK((g - vec({0, 0, 1, -2})).norm() <= 1e-14);
  CHECK(p.x0 == vec({0, 0, 5, 0}));
  CHECK(p.terminal_constraint->rhs == vec({10, 10, 5, 0}));
  // Thrust bounded by Γ ≤ T_max.
  CHECK(p.control_set.contains(vec({1.2, 1.6, 2.0}), 1e-12));
  CHECK_FALSE(p.control_set.contains(vec({1.2, 1.6, 1.9}), 1e-9));
  CHECK_FALSE(p.control_set.contains(vec({0, 0, 2.1}), 1e-9));
}

TEST_CASE("straight-line guess") {
  const DragBenchParams params;
  const auto g = straight_line_guess(params, 31);
  CHECK(g.x.cols() == 31);
  for (int k = 0; k < 31; ++k) {
    CHECK(g.x(2, k) == doctest::Approx(1.0));
    CHECK(g.x(3, k) == doctest::Approx(1.0));
  }
  CHECK(g.x(0, 15) == doctest::Approx(5.0));
  CHECK(g.x(1, 15) == doctest::Approx(5.0));
  CHECK(g.u.isZero());
  const auto p = build_drag_problem(params, 31);
  CHECK(compute_defects(p, g).gamma() > 1e-3);
}

TEST_CASE("no-drag oracle") {
  const DragBenchParams params = no_drag();
  const auto oracle = no_drag_oracle(params, 31);
  REQUIRE(oracle.solution.status == SolveStatus::optimal);
  const auto p = build_drag_problem(params, 31);

  SUBCASE("feasible for the nonlinear problem") {
    CHECK(compute_defects(p, oracle.trajectory).gamma() <= 1e-6);
    CHECK((oracle.trajectory.x.col(0) - p.x0).norm() <= 1e-7);
    CHECK((oracle.trajectory.x.col(30) - p.terminal_constraint->rhs).norm() <= 1e-6);
    for (int k = 0; k < 31; ++k) {
      CHECK(p.control_set.contains(oracle.trajectory.u.col(k), 1e-6));
    }
    CHECK(original_cost(p, oracle.trajectory) ==
          doctest::Approx(oracle.cost).epsilon(1e-6));
  }
  SUBCASE("thrust magnitude is bang-bang at most nodes") {
    int extreme = 0;
    for (int k = 0; k < 31; ++k) {
      const double gam = oracle.trajectory.u(2, k);
      if (gam <= 0.02 * params.T_max || gam >= 0.98 * params.T_max) ++extreme;
    }
    CHECK(extreme >= 28);
  }
  SUBCASE("grid refinement changes the cost by at most 1%") {
    const auto fine = no_drag_oracle(params, 61);
    REQUIRE(fine.solution.status == SolveStatus::optimal);
    CHECK(std::abs(fine.cost - oracle.cost) <= 0.01 * oracle.cost);
  }
  SUBCASE("successive convexification reaches the oracle") {
    ScvxConfig config;
    params.apply_to(config);
    const auto r = run(p, straight_line_guess(params, 31), config);
    REQUIRE(r.converged);
    CHECK(std::abs(r.final_cost - oracle.cost) <= 1e-4 * std::abs(oracle.cost));
    const double dx = (r.final_trajectory.x - oracle.trajectory.x).cwiseAbs().maxCoeff();
    CHECK(dx <= 1e-3);
  }
}

TEST_CASE("no-drag linearization is exact away from the nominal") {
  const auto params = no_drag();
  const auto p = build_drag_problem(params, 11);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  NominalTrajectory nom = straight_line_guess(params, 11);
  nom.u = MatrixXd::NullaryExpr(3, 11, [&] { return gauss(rng); });
  const auto segs = linearize_trajectory(p, nom);
  for (int k = 0; k < 10; ++k) {
    const VectorXd d = VectorXd::NullaryExpr(4, [&] { return gauss(rng); });
    const VectorXd w0 = VectorXd::NullaryExpr(3, [&] { return gauss(rng); });
    const VectorXd w1 = VectorXd::NullaryExpr(3, [&] { return gauss(rng); });
    const VectorXd exact =
        propagate_interval(p, nom.x.col(k) + d, nom.u.col(k) + w0, nom.u.col(k + 1) + w1,
                           nom.grid[k], nom.grid[k + 1]) -
        nom.x.col(k + 1);
    const VectorXd model =
        segs[k].A_d * d + segs[k].B_d0 * w0 + segs[k].B_d1 * w1 + segs[k].c_d;
    CHECK((exact - model).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("drag Jacobians agree with finite differences") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  const auto report = check_jacobians(p, 100, 3, 1e-6);
  CHECK(report.failures.empty());
  CHECK(report.worst_error <= 1e-6);
}

TEST_CASE("random polynomial problems") {
  SUBCASE("seeded generation is reproducible") {
    for (std::uint64_t seed : {0u, 1u, 17u, 12345u}) {
      const auto a = random_polynomial_problem(seed);
      const auto b = random_polynomial_problem(seed);
      CHECK(a.n == b.n);
      CHECK(a.m == b.m);
      CHECK(a.x0 == b.x0);
      REQUIRE(a.terms.size() == b.terms.size());
      for (size_t i = 0; i < a.terms.size(); ++i) {
        CHECK(a.terms[i].coeff == b.terms[i].coeff);
        CHECK(a.terms[i].powers == b.terms[i].powers);
        CHECK(a.terms[i].output == b.terms[i].output);
      }
    }
    const auto c = random_polynomial_problem(1);
    const auto d = random_polynomial_problem(2);
    CHECK((c.x0.size() != d.x0.size() || c.x0 != d.x0 || c.terms.size() != d.terms.size()));
  }
  SUBCASE("sizes and analytic Jacobians") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CAPTURE(seed);
      const auto spec = random_polynomial_problem(seed);
      CHECK(spec.n >= 1);
      CHECK(spec.n <= 4);
      CHECK(spec.m >= 1);
      CHECK(spec.m <= 2);
      const auto p = build_polynomial_problem(spec);
      CHECK_NOTHROW(p.validate());
      CHECK(p.has_analytic_jacobians());
      CHECK(check_jacobians(p, 20, seed, 1e-6).failures.empty());
      const auto g = polynomial_guess(spec);
      CHECK_NOTHROW(g.validate(p));
    }
  }
}

TEST_CASE("scalar toy") {
  const auto p = build_scalar_toy();
  const auto g = scalar_toy_guess(0.6, 2);
  // Constant u integrates the cost state exactly.
  CHECK(g.x(0, 1) == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(compute_defects(p, g).gamma() <= 1e-12);
  CHECK(original_cost(p, g) == doctest::Approx(0.18).epsilon(1e-12));
  const auto c = scalar_toy_config();
  CHECK(c.delta_init == 0.5);
  CHECK(c.linearize.virtual_control.kind == VirtualControlPolicy::Kind::none);
}

TEST_CASE("parameter validation") {
  DragBenchParams p;
  CHECK_NOTHROW(p.validate());
  p.T_max = 0.0;
  CHECK_THROWS(p.validate());
  p = DragBenchParams{};
  p.mass = -1.0;
  CHECK_THROWS(p.validate());
  p = DragBenchParams{};
  p.k_d = -0.1;
  CHECK_THROWS(p.validate());
  p = DragBenchParams{};
  p.t_f = 0.0;
  CHECK_THROWS(p.validate());
  p = DragBenchParams{};
  p.rho2 = 1.0;
  ScvxConfig config;
  p.apply_to(config);
  CHECK(config.rho2 == 1.0);
  CHECK_THROWS(config.validate());  // trust-region values are checked by the loop config
  CHECK_THROWS(build_drag_problem(DragBenchParams{}, 1));
}
