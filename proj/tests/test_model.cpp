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
#include <cstring>

#include "scvx/bench.hpp"
#include "scvx/model.hpp"

using scvx::DragBenchParams;
using scvx::build_drag_problem;
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

TEST_CASE("drag dynamics at rest: thrust passes straight through") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  const VectorXd f = scvx::eval_dynamics(p, vec({0, 0, 0, 0}), vec({1, 0, 1}), 0.0);
  CHECK(f(2) == 1.0);
  CHECK(f(3) == 0.0);
}

TEST_CASE("drag dynamics at v=(5,0) with zero thrust") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  const VectorXd f = scvx::eval_dynamics(p, vec({0, 0, 5, 0}), vec({0, 0, 0}), 0.0);
  // 0.25 * |5| * 5 = 6.25
  CHECK(f(0) == 5.0);
  CHECK(f(1) == 0.0);
  CHECK(f(2) == doctest::Approx(-6.25).epsilon(1e-15));
  CHECK(f(3) == 0.0);
}

TEST_CASE("no-drag model is the double integrator") {
  const auto p = build_drag_problem(no_drag(), 31);
  const VectorXd x = vec({1, 2, 3, -4});
  const VectorXd u = vec({0.5, -0.25, 1});
  const VectorXd f = scvx::eval_dynamics(p, x, u, 3.0);
  CHECK((f - vec({3, -4, 0.5, -0.25})).norm() == 0.0);

  const auto jac = scvx::eval_jacobians(p, x, u, 3.0);
  MatrixXd A = MatrixXd::Zero(4, 4);
  A(0, 2) = A(1, 3) = 1.0;
  MatrixXd B = MatrixXd::Zero(4, 3);
  B(2, 0) = B(3, 1) = 1.0;
  CHECK((jac.A - A).norm() == 0.0);
  CHECK((jac.B - B).norm() == 0.0);
}

TEST_CASE("drag Jacobian at v=(5,0) matches the hand derivative") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  const auto jac = scvx::eval_jacobians(p, vec({0, 0, 5, 0}), vec({0, 0, 0}), 0.0);
  // -(k_d/m) (|v| I + v v^T / |v|) = -0.25 * diag(10, 5)
  CHECK(jac.A(2, 2) == doctest::Approx(-2.5).epsilon(1e-15));
  CHECK(jac.A(3, 3) == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(jac.A(2, 3) == 0.0);
  CHECK(jac.A(3, 2) == 0.0);
  const auto fd = scvx::finite_difference_jacobians(p, vec({0, 0, 5, 0}),
                                                    vec({0, 0, 0}), 0.0);
  CHECK((jac.A - fd.A).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("check_jacobians: exact on the linear model") {
  const auto report = scvx::check_jacobians(build_drag_problem(no_drag(), 31), 100, 3, 1e-6);
  CHECK(report.passed());
  CHECK(report.worst_error < 1e-9);
}

TEST_CASE("check_jacobians: drag model within 1e-6 over 100 samples") {
  const auto report = scvx::check_jacobians(build_drag_problem(DragBenchParams{}, 31), 100, 11, 1e-6);
  CHECK(report.samples == 100);
  CHECK(report.passed());
  CHECK(report.worst_error <= 1e-6);
}

TEST_CASE("check_jacobians flags a corrupted entry") {
  auto p = build_drag_problem(DragBenchParams{}, 31);
  const auto good = p.jacobian_x;
  p.jacobian_x = [good](const VectorXd& x, const VectorXd& u, double t) {
    MatrixXd A = good(x, u, t);
    A(2, 3) += 0.1;
    return A;
  };
  const auto report = scvx::check_jacobians(p, 20, 5, 1e-6);
  REQUIRE_FALSE(report.passed());
  REQUIRE(report.failures.size() == 1);
  const auto& f = report.failures.front();
  CHECK(f.matrix == 'A');
  CHECK(f.row == 2);
  CHECK(f.col == 3);
  CHECK(f.error >= 0.09);
  CHECK(report.entry_error_A(2, 3) >= 0.09);
}

TEST_CASE("finite differences stand in when no analytic Jacobian is given") {
  auto p = build_drag_problem(DragBenchParams{}, 31);
  p.jacobian_x = nullptr;
  p.jacobian_u = nullptr;
  CHECK_FALSE(p.has_analytic_jacobians());
  const auto jac = scvx::eval_jacobians(p, vec({0, 0, 3, 4}), vec({1, 1, 2}), 0.0);
  // -(0.25)(5 I + v v^T / 5) with v = (3, 4)
  CHECK(jac.A(2, 2) == doctest::Approx(-0.25 * (5 + 9.0 / 5)).epsilon(1e-8));
  CHECK(jac.A(2, 3) == doctest::Approx(-0.25 * 12.0 / 5).epsilon(1e-8));
  CHECK(jac.A(3, 3) == doctest::Approx(-0.25 * (5 + 16.0 / 5)).epsilon(1e-8));
}

TEST_CASE("dynamics evaluation is bitwise repeatable") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  const VectorXd x = vec({0.1, -0.7, 1.3, 2.9});
  const VectorXd u = vec({0.3, -1.1, 1.2});
  const VectorXd a = scvx::eval_dynamics(p, x, u, 1.5);
  for (int i = 0; i < 10; ++i) {
    const VectorXd b = scvx::eval_dynamics(p, x, u, 1.5);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 4) == 0);
  }
}

TEST_CASE("eval_dynamics rejects wrong sizes and non-finite output") {
  auto p = build_drag_problem(DragBenchParams{}, 31);
  CHECK_THROWS_AS(scvx::eval_dynamics(p, vec({0, 0, 0}), vec({0, 0, 0}), 0.0),
                  scvx::DimensionError);
  CHECK_THROWS_AS(scvx::eval_dynamics(p, vec({0, 0, 0, 0}), vec({0, 0}), 0.0),
                  scvx::DimensionError);
  p.dynamics = [](const VectorXd&, const VectorXd&, double) {
    return VectorXd::Constant(4, std::nan(""));
  };
  try {
    scvx::eval_dynamics(p, vec({1, 2, 3, 4}), vec({0, 0, 0}), 0.5);
    FAIL("expected ModelError");
  } catch (const scvx::ModelError& e) {
    CHECK(e.t() == 0.5);
    CHECK(e.x()(3) == 4.0);
  }
}

TEST_CASE("ProblemDef::validate catches structural errors") {
  auto p = build_drag_problem(DragBenchParams{}, 31);
  CHECK_NOTHROW(p.validate());

  auto bad = p;
  bad.x0 = vec({0, 0});
  CHECK_THROWS_AS(bad.validate(), scvx::DimensionError);

  bad = p;
  bad.horizon = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.state_set = scvx::ConvexSet(4);
  bad.state_set.add(scvx::BoxAtom{VectorXd::Constant(4, 1.0), VectorXd::Constant(4, 2.0)});
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("x0"), std::invalid_argument);

  bad = p;
  bad.running_cost.terms.push_back(scvx::LinearCost{VectorXd::Ones(3), 0.0});
  CHECK_THROWS_AS(bad.validate(), scvx::DimensionError);

  bad = p;
  bad.terminal_constraint->rhs = vec({1, 2});
  CHECK_THROWS_AS(bad.validate(), scvx::DimensionError);
}

TEST_CASE("convex cost terms evaluate as written") {
  scvx::ConvexCost cost;
  cost.terms.push_back(scvx::LinearCost{vec({1, 2}), 0.5});
  cost.terms.push_back(scvx::QuadraticCost{MatrixXd::Identity(2, 2), vec({0, -1}), 2.0});
  cost.terms.push_back(scvx::NormCost{MatrixXd::Identity(2, 2), vec({0, 0}), 3.0});
  // z = (3, 4): 11.5 + 2*0.5*(9+9) + 3*5
  CHECK(cost(vec({3, 4})) == doctest::Approx(11.5 + 18.0 + 15.0));
}
