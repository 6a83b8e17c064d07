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

#include "scvx/convex_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "scvx/conic.hpp"

namespace scvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int atom_dim(const SetAtom& atom) {
  return std::visit(
      Overloaded{
          [](const BoxAtom& a) { return static_cast<int>(a.lower.size()); },
          [](const BallAtom& a) { return static_cast<int>(a.center.size()); },
          [](const SocAtom& a) { return static_cast<int>(a.map.cols()); },
          [](const AffineEqualityAtom& a) {
            return static_cast<int>(a.matrix.cols());
          },
          [](const HalfspaceAtom& a) { return static_cast<int>(a.normal.size()); },
      },
      atom);
}

// Projection onto {z : Mz + g ∈ SOC} for a general map, as a small SOCP:
// minimize t s.t. ‖z' − z‖ ≤ t, Mz' + g ∈ SOC.
Eigen::VectorXd project_soc_preimage(const SocAtom& atom,
                                     const Eigen::VectorXd& z) {
  const int dim = static_cast<int>(z.size());
  ProgramBuilder builder;
  const int zp = builder.add_variables(dim, "z");
  const int t = builder.add_variables(1, "t");
  builder.add_objective(t, 1.0);
  ProgramBuilder::Block dist({ConeKind::soc, dim + 1}, "distance");
  dist.coeff(0, t, 1.0);
  for (int i = 0; i < dim; ++i) {
    dist.coeff(i + 1, zp + i, 1.0).offset(i + 1, -z(i));
  }
  builder.add_block(std::move(dist));
  ProgramBuilder::Block cone({ConeKind::soc, static_cast<int>(atom.map.rows())},
                             "atom");
  for (int r = 0; r < atom.map.rows(); ++r) {
    for (int c = 0; c < dim; ++c) {
      if (atom.map(r, c) != 0.0) {
        cone.coeff(r, zp + c, atom.map(r, c));
      }
    }
    cone.offset(r, atom.offset(r));
  }
  builder.add_block(std::move(cone));
  const ConicSolution sol = solve(builder.build(), 1e-12, 200000);
  return sol.primal.head(dim);
}

}  // namespace

std::string atom_kind(const SetAtom& atom) {
  return std::visit(
      Overloaded{
          [](const BoxAtom&) { return std::string("box"); },
          [](const BallAtom&) { return std::string("euclidean_ball"); },
          [](const SocAtom&) { return std::string("second_order_cone"); },
          [](const AffineEqualityAtom&) {
            return std::string("affine_equality");
          },
          [](const HalfspaceAtom&) { return std::string("halfspace"); },
      },
      atom);
}

double atom_violation(const SetAtom& atom, const Eigen::VectorXd& z) {
  return std::visit(
      Overloaded{
          [&](const BoxAtom& a) {
            double v = 0.0;
            for (int i = 0; i < z.size(); ++i) {
              v = std::max({v, a.lower(i) - z(i), z(i) - a.upper(i)});
            }
            return v;
          },
          [&](const BallAtom& a) {
            return std::max(0.0, (z - a.center).norm() - a.radius);
          },
          [&](const SocAtom& a) {
            const Eigen::VectorXd s = a.map * z + a.offset;
            return std::max(0.0, s.tail(s.size() - 1).norm() - s(0));
          },
          [&](const AffineEqualityAtom& a) {
            return (a.matrix * z - a.rhs).lpNorm<Eigen::Infinity>();
          },
          [&](const HalfspaceAtom& a) {
            return std::max(0.0, a.normal.dot(z) - a.offset);
          },
      },
      atom);
}

Eigen::VectorXd project_atom(const SetAtom& atom, const Eigen::VectorXd& z) {
  return std::visit(
      Overloaded{
          [&](const BoxAtom& a) -> Eigen::VectorXd {
            return z.cwiseMax(a.lower).cwiseMin(a.upper);
          },
          [&](const BallAtom& a) -> Eigen::VectorXd {
            const Eigen::VectorXd r = z - a.center;
            const double norm = r.norm();
            if (norm <= a.radius) {
              return z;
            }
            return a.center + r * (a.radius / norm);
          },
          [&](const SocAtom& a) -> Eigen::VectorXd {
            const Eigen::MatrixXd gram = a.map * a.map.transpose();
            const double s2 = gram(0, 0);
            const bool scaled_orthonormal =
                s2 > 0.0 &&
                (gram - s2 * Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
                        .lpNorm<Eigen::Infinity>() <= 1e-14 * s2;
            if (!scaled_orthonormal) {
              return project_soc_preimage(a, z);
            }
            const Eigen::VectorXd s = a.map * z + a.offset;
            Cone cone{ConeKind::soc, static_cast<int>(s.size())};
            return z + a.map.transpose() * (project_cone(s, cone) - s) / s2;
          },
          [&](const AffineEqualityAtom& a) -> Eigen::VectorXd {
            const Eigen::VectorXd r = a.matrix * z - a.rhs;
            const Eigen::MatrixXd gram = a.matrix * a.matrix.transpose();
            return z - a.matrix.transpose() *
                           gram.completeOrthogonalDecomposition().solve(r);
          },
          [&](const HalfspaceAtom& a) -> Eigen::VectorXd {
            const double excess = a.normal.dot(z) - a.offset;
            if (excess <= 0.0) {
              return z;
            }
            return z - a.normal * (excess / a.normal.squaredNorm());
          },
      },
      atom);
}

ConvexSet& ConvexSet::add(SetAtom atom) {
  if (atom_dim(atom) != dim_) {
    throw std::invalid_argument(atom_kind(atom) + " atom has dimension " +
                                std::to_string(atom_dim(atom)) +
                                ", set has dimension " + std::to_string(dim_));
  }
  if (const auto* box = std::get_if<BoxAtom>(&atom)) {
    if (box->upper.size() != box->lower.size() ||
        (box->lower.array() > box->upper.array()).any()) {
      throw std::invalid_argument("box atom requires lower <= upper");
    }
  }
  if (const auto* ball = std::get_if<BallAtom>(&atom); ball && ball->radius < 0) {
    throw std::invalid_argument("ball atom requires a nonnegative radius");
  }
  if (const auto* soc = std::get_if<SocAtom>(&atom)) {
    if (soc->map.rows() < 1 || soc->offset.size() != soc->map.rows()) {
      throw std::invalid_argument("second_order_cone atom has inconsistent "
                                  "map/offset sizes");
    }
  }
  if (const auto* eq = std::get_if<AffineEqualityAtom>(&atom)) {
    if (eq->rhs.size() != eq->matrix.rows()) {
      throw std::invalid_argument("affine_equality atom has inconsistent sizes");
    }
  }
  atoms_.push_back(std::move(atom));
  return *this;
}

double ConvexSet::violation(const Eigen::VectorXd& z) const {
  if (!atoms_.empty() && z.size() != dim_) {
    throw std::invalid_argument("set membership: point has wrong dimension");
  }
  double worst = 0.0;
  for (const auto& atom : atoms_) {
    worst = std::max(worst, atom_violation(atom, z));
  }
  return worst;
}

Eigen::VectorXd ConvexSet::project(const Eigen::VectorXd& z) const {
  if (atoms_.empty()) {
    return z;
  }
  if (atoms_.size() == 1) {
    return project_atom(atoms_.front(), z);
  }
  // Dykstra's algorithm: converges to the projection onto the intersection.
  Eigen::VectorXd x = z;
  std::vector<Eigen::VectorXd> increments(atoms_.size(),
                                          Eigen::VectorXd::Zero(z.size()));
  for (int sweep = 0; sweep < 20000; ++sweep) {
    const Eigen::VectorXd start = x;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Eigen::VectorXd y = x + increments[i];
      x = project_atom(atoms_[i], y);
      increments[i] = y - x;
    }
    if (violation(x) <= 1e-13 && (x - start).norm() <= 1e-15 * (1.0 + x.norm())) {
      break;
    }
  }
  return x;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> ConvexSet::box_bounds() const {
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(dim_, -kInf);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(dim_, kInf);
  for (const auto& atom : atoms_) {
    if (const auto* box = std::get_if<BoxAtom>(&atom)) {
      lower = lower.cwiseMax(box->lower);
      upper = upper.cwiseMin(box->upper);
    } else if (const auto* ball = std::get_if<BallAtom>(&atom)) {
      lower = lower.cwiseMax((ball->center.array() - ball->radius).matrix());
      upper = upper.cwiseMin((ball->center.array() + ball->radius).matrix());
    }
  }
  return {lower, upper};
}

}  // namespace scvx
