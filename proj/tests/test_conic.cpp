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
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "scvx/conic.hpp"

#include "conic_reference.hpp"

using namespace scvx;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace scvx::testing;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SolverSettings backend(SolverBackend b) {
  SolverSettings s;
  s.backend = b;
  return s;
}

}  // namespace

TEST_CASE("LP: minimize x subject to x >= 3") {
  const auto p = make_program(vec({1}), {dense_block(MatrixXd::Ones(1, 1), vec({-3}),
                                                     ConeKind::nonneg)});
  for (auto b : {SolverBackend::splitting, SolverBackend::interior_point}) {
    CAPTURE(to_string(b));
    const auto sol = solve(p, backend(b));
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.primal(0) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(sol.dual[0](0) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("SOC: supporting point of the unit ball") {
  MatrixXd map = MatrixXd::Zero(3, 2);
  map(1, 0) = map(2, 1) = 1.0;
  const auto p = make_program(vec({-1, 0}), {dense_block(map, vec({1, 0, 0}), ConeKind::soc)});
  for (auto b : {SolverBackend::splitting, SolverBackend::interior_point}) {
    CAPTURE(to_string(b));
    const auto sol = solve(p, backend(b));
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.primal(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(sol.primal(1)) < 1e-6);
    CHECK(p.objective_value(sol.primal) == doctest::Approx(-1.0).epsilon(1e-6));
  }
}

TEST_CASE("cone projections") {
  CHECK(project_cone(vec({-1, 2}), Cone{ConeKind::nonneg, 2}) == vec({0, 2}));
  CHECK(project_cone(vec({5, 3, 4}), Cone{ConeKind::soc, 3}) == vec({5, 3, 4}));
  CHECK(project_cone(vec({-5, 3, 4}), Cone{ConeKind::soc, 3}).norm() == 0.0);
  const VectorXd p = project_cone(vec({0, 3, 4}), Cone{ConeKind::soc, 3});
  CHECK((p - vec({2.5, 1.5, 2.0})).norm() < 1e-15);
  CHECK(project_cone(vec({1, 2}), Cone{ConeKind::zero, 2}).norm() == 0.0);
  CHECK(project_dual_cone(vec({1, 2}), Cone{ConeKind::zero, 2}) == vec({1, 2}));
  CHECK_THROWS(project_cone(vec({1, 2}), Cone{ConeKind::soc, 3}));
}

TEST_CASE("SOC projection is the nearest cone point (2-D grid search)") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd v = trial == 0 ? vec({0, 1.3}) : vec({u(rng), u(rng)});
    const VectorXd p = project_cone(v, Cone{ConeKind::soc, 2});
    double best = std::numeric_limits<double>::infinity();
    const int steps = 2000;
    for (int i = 0; i <= steps; ++i) {
      const double t = 4.0 * i / steps;
      for (int j = 0; j <= steps; ++j) {
        const double z = -t + 2.0 * t * j / steps;
        best = std::min(best, std::hypot(t - v(0), z - v(1)));
      }
    }
    CHECK(std::abs(p(1)) <= p(0) + 1e-15);
    CHECK((p - v).norm() <= best + 1e-12);
    CHECK((p - v).norm() >= best - 5e-3);
  }
}

TEST_CASE("Moreau decomposition of the SOC projection") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 3.0);
  std::uniform_int_distribution<int> dim(2, 10);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng);
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = g(rng);
    const Cone k{ConeKind::soc, d};
    const VectorXd plus = project_cone(v, k);
    const VectorXd minus = project_cone(-v, k);
    // The cone is self-dual, so its polar projection is −Π_K(−v).
    worst = std::max(worst, (v - (plus - minus)).lpNorm<Eigen::Infinity>());
    CHECK(std::abs(plus.dot(minus)) <= 1e-12 * std::max(1.0, v.squaredNorm()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("residuals: hand-built optimal pair and a perturbed primal") {
  const auto p = make_program(vec({1}), {dense_block(MatrixXd::Ones(1, 1), vec({-3}),
                                                     ConeKind::nonneg)});
  ConicSolution sol;
  sol.primal = vec({3});
  sol.dual = {vec({1})};
  const Residuals r = residuals(p, sol);
  CHECK(r.primal <= 1e-12);
  CHECK(r.dual <= 1e-12);
  CHECK(r.gap <= 1e-12);

  // x = 2.9: s = −0.1 is 0.1 outside the cone. Relative to max(1, |Gx|, |h|) = 3.
  sol.primal = vec({2.9});
  const Residuals bad = residuals(p, sol);
  CHECK(bad.primal == doctest::Approx(0.1 / 3.0).epsilon(1e-12));
  CHECK(bad.primal * 3.0 >= 0.05);
}

TEST_CASE("relative residuals are invariant to scaling the data") {
  const auto inst = random_qp(5);
  const auto sol = solve(inst.program, backend(SolverBackend::splitting));
  REQUIRE(sol.status == SolveStatus::optimal);
  ConicProgram scaled = inst.program;
  scaled.objective *= 10.0;
  for (auto& b : scaled.constraints) {
    b.map *= 10.0;
    b.offset *= 10.0;
  }
  // Perturb so the residuals are not at the max(1, ·) floor.
  ConicSolution off = sol;
  off.primal.array() += 0.3;
  const Residuals a = residuals(inst.program, off);
  const Residuals b = residuals(scaled, off);
  CHECK(a.primal == doctest::Approx(b.primal).epsilon(1e-9));
  CHECK(a.dual == doctest::Approx(b.dual).epsilon(1e-9));
  CHECK(a.gap == doctest::Approx(b.gap).epsilon(1e-9));
}

TEST_CASE("battery: 100 seeded QPs against a dense KKT solve") {
  for (auto b : {SolverBackend::splitting, SolverBackend::interior_point}) {
    CAPTURE(to_string(b));
    const SolverSettings settings = backend(b);
    int optimal = 0;
    double worst_obj = 0.0;
    double worst_res = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto inst = random_qp(seed);
      const auto sol = solve(inst.program, settings);
      CAPTURE(seed);
      REQUIRE(sol.status == SolveStatus::optimal);
      ++optimal;
      const double f = inst.program.objective_value(sol.primal);
      worst_obj = std::max(worst_obj, std::abs(f - inst.oracle_objective) /
                                          std::max(1.0, std::abs(inst.oracle_objective)));
      const Check c = recompute(inst.program, sol);
      worst_res = std::max({worst_res, c.primal, c.dual, c.gap});
    }
    CHECK(optimal == 100);
    CHECK(worst_obj <= 1e-6);
    CHECK(worst_res <= 2.0 * settings.tol);
  }
}

TEST_CASE("solver is bitwise deterministic") {
  const auto inst = random_qp(17);
  for (auto b : {SolverBackend::splitting, SolverBackend::interior_point}) {
    const auto a = solve(inst.program, backend(b));
    const auto c = solve(inst.program, backend(b));
    REQUIRE(a.primal.size() == c.primal.size());
    CHECK(std::memcmp(a.primal.data(), c.primal.data(),
                      sizeof(double) * a.primal.size()) == 0);
    CHECK(a.iterations == c.iterations);
  }
}

TEST_CASE("infeasible and unbounded programs are detected") {
  // x <= -1 and x >= 1
  const auto infeasible = make_program(
      vec({0}), {dense_block(-MatrixXd::Ones(1, 1), vec({-1}), ConeKind::nonneg),
                 dense_block(MatrixXd::Ones(1, 1), vec({-1}), ConeKind::nonneg)});
  // minimize x subject to x <= 1
  const auto unbounded = make_program(
      vec({1}), {dense_block(-MatrixXd::Ones(1, 1), vec({1}), ConeKind::nonneg)});
  for (auto b : {SolverBackend::splitting, SolverBackend::interior_point}) {
    CAPTURE(to_string(b));
    CHECK(solve(infeasible, backend(b)).status == SolveStatus::primal_infeasible);
    CHECK(solve(unbounded, backend(b)).status == SolveStatus::dual_infeasible);
  }
}

TEST_CASE("program validation and builder") {
  ConicProgram p = make_program(vec({1, 2}), {dense_block(MatrixXd::Ones(2, 2), vec({0}),
                                                          ConeKind::nonneg)});
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = make_program(vec({1}), {});
  p.num_vars = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  ProgramBuilder builder;
  const int x = builder.add_variables(2, "x");
  builder.add_objective(x, 1.0);
  builder.add_objective(x, 0.5);
  ProgramBuilder::Block blk(Cone{ConeKind::nonneg, 1}, "row");
  blk.coeff(0, x, 1.0).coeff(0, x, 1.0).coeff(0, x + 1, -1.0).offset(0, 2.0);
  builder.add_block(std::move(blk));
  const ConicProgram built = builder.build();
  CHECK(built.num_vars == 2);
  CHECK(built.objective(0) == 1.5);
  CHECK(built.constraints[0].map.coeff(0, 0) == 2.0);
  CHECK(built.constraints[0].map.coeff(0, 1) == -1.0);
  CHECK(built.var_names[1] == "x[1]");
  CHECK(built.num_rows() == 1);
}
