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
#include <limits>
#include <random>

#include "scvx/bench.hpp"
#include "scvx/convex_set.hpp"

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

VectorXd random_vec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST_CASE("empty set is the whole space") {
  ConvexSet s(3);
  CHECK(s.is_whole_space());
  CHECK(s.contains(vec({1e9, -1e9, 0})));
  const VectorXd z = vec({1, 2, 3});
  CHECK((s.project(z) - z).norm() == 0.0);
}

TEST_CASE("box with lower above upper is rejected") {
  ConvexSet s(2);
  CHECK_THROWS_AS(s.add(BoxAtom{vec({0, 1}), vec({1, 0})}), std::invalid_argument);
  CHECK_THROWS(s.add(BoxAtom{vec({0}), vec({1})}));
  CHECK_THROWS(s.add(BallAtom{vec({0, 0}), -1.0}));
}

TEST_CASE("atom membership and violation") {
  const SetAtom box = BoxAtom{vec({0, 0}), vec({1, 1})};
  CHECK(atom_violation(box, vec({0.5, 1.0})) == 0.0);
  CHECK(atom_violation(box, vec({1.5, 0.5})) == doctest::Approx(0.5));

  const SetAtom ball = BallAtom{vec({0, 0}), 5.0};
  CHECK(atom_violation(ball, vec({3, 4})) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(atom_violation(ball, vec({6, 8})) == doctest::Approx(5.0));

  const SetAtom half = HalfspaceAtom{vec({1, 1}), 1.0};
  CHECK(atom_violation(half, vec({0.5, 0.5})) == 0.0);
  CHECK(atom_violation(half, vec({2, 0})) > 0.0);

  const SetAtom eq = AffineEqualityAtom{MatrixXd::Ones(1, 2), vec({1})};
  CHECK(atom_violation(eq, vec({0.25, 0.75})) == 0.0);
  CHECK(atom_violation(eq, vec({1, 1})) == doctest::Approx(1.0));
}

TEST_CASE("thrust magnitude set: 3-4-5 point on the boundary is inside") {
  const auto p = build_drag_problem(DragBenchParams{}, 31);
  CHECK(p.control_set.contains(vec({1.2, 1.6, 2.0})));
  CHECK_FALSE(p.control_set.contains(vec({1.2, 1.6, 1.9})));
  CHECK_FALSE(p.control_set.contains(vec({0.0, 0.0, 2.1})));  // above T_max
}

TEST_CASE("projections land inside each atom") {
  std::mt19937_64 rng(42);
  const int n = 4;
  MatrixXd map = MatrixXd::Zero(4, n);
  map(0, 3) = 1.0;
  map(1, 0) = map(2, 1) = map(3, 2) = 1.0;
  const std::vector<SetAtom> atoms = {
      BoxAtom{vec({-1, -2, 0, -std::numeric_limits<double>::infinity()}), vec({1, 2, 3, 0.5})},
      BallAtom{vec({0.5, 0, -1, 2}), 1.5},
      SocAtom{map, VectorXd::Zero(4)},
      AffineEqualityAtom{random_vec(rng, 2 * n, 1.0).reshaped(2, n), vec({1, -1})},
      HalfspaceAtom{vec({1, -2, 0.5, 1}), 0.3},
  };
  for (const auto& atom : atoms) {
    CAPTURE(atom_kind(atom));
    for (int trial = 0; trial < 200; ++trial) {
      const VectorXd z = random_vec(rng, n, 3.0);
      const VectorXd p = project_atom(atom, z);
      CHECK(atom_violation(atom, p) <= 1e-9);
      // Projection is idempotent.
      CHECK((project_atom(atom, p) - p).norm() <= 1e-9);
    }
  }
}

TEST_CASE("projection onto an intersection passes membership") {
  std::mt19937_64 rng(7);
  ConvexSet s(3);
  s.add(BoxAtom{vec({-1, -1, -1}), vec({1, 1, 1})});
  s.add(BallAtom{vec({0.8, 0.8, 0}), 1.0});
  s.add(HalfspaceAtom{vec({1, 0, 0}), 0.9});
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd z = random_vec(rng, 3, 2.0);
    const VectorXd p = s.project(z);
    CHECK(s.contains(p, 1e-9));
  }
}

TEST_CASE("projection is the nearest point: brute force on a 2-D ball and box") {
  ConvexSet s(2);
  s.add(BallAtom{vec({0, 0}), 1.0});
  s.add(BoxAtom{vec({-0.5, -2}), vec({2, 2})});
  const VectorXd z = vec({-1.5, 0.7});
  const VectorXd p = s.project(z);
  double best = std::numeric_limits<double>::infinity();
  const int steps = 800;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const VectorXd q = vec({-1 + 2.0 * i / steps, -1 + 2.0 * j / steps});
      if (s.contains(q, 0.0)) best = std::min(best, (q - z).norm());
    }
  }
  CHECK((p - z).norm() <= best + 1e-9);
  CHECK((p - z).norm() >= best - 5e-3);
}

TEST_CASE("box_bounds reports infinities where unconstrained") {
  ConvexSet s(2);
  s.add(BoxAtom{vec({0, -std::numeric_limits<double>::infinity()}), vec({1, 3})});
  const auto [lo, hi] = s.box_bounds();
  CHECK(lo(0) == 0.0);
  CHECK(std::isinf(lo(1)));
  CHECK(hi(1) == 3.0);
}
