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

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace scvx {

/// lower ≤ z ≤ upper, componentwise. Infinite bounds are allowed.
struct BoxAtom {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// ‖z − center‖₂ ≤ radius.
struct BallAtom {
  Eigen::VectorXd center;
  double radius = 0.0;
};

/// map·z + offset lies in the second-order cone {(t, y) : ‖y‖₂ ≤ t}. Row 0 of
/// the image is the scalar part t.
struct SocAtom {
  Eigen::MatrixXd map;
  Eigen::VectorXd offset;
};

/// matrix·z = rhs.
struct AffineEqualityAtom {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

/// normal·z ≤ offset.
struct HalfspaceAtom {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

using SetAtom = std::variant<BoxAtom, BallAtom, SocAtom, AffineEqualityAtom,
                             HalfspaceAtom>;

/// Short human-readable name of an atom kind ("box", "soc", ...).
std::string atom_kind(const SetAtom& atom);

/// Amount by which z fails to satisfy a single atom (0 when inside).
double atom_violation(const SetAtom& atom, const Eigen::VectorXd& z);

/// Euclidean projection onto a single atom.
Eigen::VectorXd project_atom(const SetAtom& atom, const Eigen::VectorXd& z);

/**
 * A convex set represented as the intersection of primitive atoms. An empty
 * atom list is the whole space.
 */
class ConvexSet {
 public:
  ConvexSet() = default;
  explicit ConvexSet(int dim) : dim_{dim} {}

  /// Validates dimensions (and lower ≤ upper for boxes) and appends the atom.
  ConvexSet& add(SetAtom atom);

  int dim() const { return dim_; }
  const std::vector<SetAtom>& atoms() const { return atoms_; }
  bool is_whole_space() const { return atoms_.empty(); }

  /// Largest atom violation at z.
  double violation(const Eigen::VectorXd& z) const;
  bool contains(const Eigen::VectorXd& z, double tol = 1e-9) const {
    return violation(z) <= tol;
  }

  /// Euclidean projection onto the intersection. Single atoms are projected in
  /// closed form; intersections use Dykstra's alternating projections.
  Eigen::VectorXd project(const Eigen::VectorXd& z) const;

  /// Componentwise bounds implied by box atoms (±inf where unconstrained).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> box_bounds() const;

 private:
  int dim_ = 0;
  std::vector<SetAtom> atoms_;
};

}  // namespace scvx
