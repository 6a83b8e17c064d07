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


#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include "conic_detail.hpp"
#include "scvx/conic.hpp"
#include "scvx/log.hpp"

namespace scvx {

namespace {

using detail::StackedData;

// Internal standard form
//
//   minimize cᵀx  s.t.  Ax = b,  Gx + s = h,  s ∈ K
//
// with A, b from the zero blocks (A = map, b = −offset) and G, h from the
// cone blocks (G = −map, h = offset).
struct StandardForm {
  int n = 0;
  int p = 0;
  int m = 0;
  Eigen::SparseMatrix<double> A;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd b;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  // Cone rows: nonneg rows and SOC blocks.
  std::vector<int> lp_rows;
  std::vector<int> soc_start;
  std::vector<int> soc_dim;
  int degree = 0;
  // Per original block: start row in y (zero blocks) or z (cone blocks).
  std::vector<int> block_row;
};

StandardForm to_standard(const ConicProgram& program) {
  StandardForm f;
  f.n = program.num_vars;
  for (const auto& block : program.constraints) {
    if (block.cone.kind == ConeKind::zero) {
      f.p += block.cone.dim;
    } else {
      f.m += block.cone.dim;
    }
  }
  std::vector<Eigen::Triplet<double>> a_entries;
  std::vector<Eigen::Triplet<double>> g_entries;
  f.b.resize(f.p);
  f.h.resize(f.m);
  int ay = 0;
  int gz = 0;
  for (const auto& block : program.constraints) {
    const bool zero = block.cone.kind == ConeKind::zero;
    int& row = zero ? ay : gz;
    f.block_row.push_back(row);
    for (int k = 0; k < block.map.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(block.map, k); it; ++it) {
        if (zero) {
          a_entries.emplace_back(row + it.row(), it.col(), it.value());
        } else {
          g_entries.emplace_back(row + it.row(), it.col(), -it.value());
        }
      }
    }
    if (zero) {
      f.b.segment(row, block.cone.dim) = -block.offset;
    } else {
      f.h.segment(row, block.cone.dim) = block.offset;
      if (block.cone.kind == ConeKind::nonneg) {
        for (int i = 0; i < block.cone.dim; ++i) f.lp_rows.push_back(row + i);
        f.degree += block.cone.dim;
      } else {
        f.soc_start.push_back(row);
        f.soc_dim.push_back(block.cone.dim);
        f.degree += 1;
      }
    }
    row += block.cone.dim;
  }
  f.A.resize(f.p, f.n);
  f.A.setFromTriplets(a_entries.begin(), a_entries.end());
  f.G.resize(f.m, f.n);
  f.G.setFromTriplets(g_entries.begin(), g_entries.end());
  f.c = program.objective;
  return f;
}

// Nesterov-Todd scaling point for the product cone.
struct Scaling {
  Eigen::VectorXd lp;                // W = diag(lp) on nonneg rows
  std::vector<Eigen::MatrixXd> W;    // per SOC block, symmetric
  std::vector<Eigen::MatrixXd> Winv;
  Eigen::VectorXd lambda;            // W z = W⁻¹ s
};

double soc_det(const Eigen::Ref<const Eigen::VectorXd>& u) {
  return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

class Cones {
 public:
  explicit Cones(const StandardForm& f) : f_{f} {}

  Eigen::VectorXd identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(f_.m);
    for (int r : f_.lp_rows) e(r) = 1.0;
    for (int start : f_.soc_start) e(start) = 1.0;
    return e;
  }

  // Smallest α with u + α e in the closed cone.
  double shift_needed(const Eigen::VectorXd& u) const {
    double need = -std::numeric_limits<double>::infinity();
    for (int r : f_.lp_rows) need = std::max(need, -u(r));
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const auto seg = u.segment(f_.soc_start[i], f_.soc_dim[i]);
      need = std::max(need, seg.tail(seg.size() - 1).norm() - seg(0));
    }
    return need;
  }

  Scaling scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z) const {
    Scaling sc;
    sc.lp = Eigen::VectorXd::Zero(f_.m);
    sc.lambda.resize(f_.m);
    for (int r : f_.lp_rows) {
      sc.lp(r) = std::sqrt(s(r) / z(r));
      sc.lambda(r) = std::sqrt(s(r) * z(r));
    }
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = f_.soc_start[i];
      const int d = f_.soc_dim[i];
      const Eigen::VectorXd si = s.segment(st, d);
      const Eigen::VectorXd zi = z.segment(st, d);
      const double s_norm = std::sqrt(std::max(soc_det(si), 1e-300));
      const double z_norm = std::sqrt(std::max(soc_det(zi), 1e-300));
      const Eigen::VectorXd sb = si / s_norm;
      Eigen::VectorXd zb = zi / z_norm;
      const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
      zb.tail(d - 1) *= -1.0;  // J z̄
      Eigen::VectorXd wb = (sb + zb) / (2.0 * gamma);
      const double eta = std::sqrt(s_norm / z_norm);
      const double a = wb(0);
      const Eigen::VectorXd q = wb.tail(d - 1);
      Eigen::MatrixXd H(d, d);
      H(0, 0) = a;
      H.block(0, 1, 1, d - 1) = q.transpose();
      H.block(1, 0, d - 1, 1) = q;
      H.block(1, 1, d - 1, d - 1) =
          Eigen::MatrixXd::Identity(d - 1, d - 1) + q * q.transpose() / (1.0 + a);
      // H⁻¹ = J H J
      Eigen::MatrixXd Hinv = H;
      Hinv.block(0, 1, 1, d - 1) *= -1.0;
      Hinv.block(1, 0, d - 1, 1) *= -1.0;
      sc.W.push_back(eta * H);
      sc.Winv.push_back(Hinv / eta);
      sc.lambda.segment(st, d) = sc.W.back() * zi;
    }
    return sc;
  }

  Eigen::VectorXd apply_W(const Scaling& sc, const Eigen::VectorXd& v,
                          bool inverse) const {
    Eigen::VectorXd out(f_.m);
    for (int r : f_.lp_rows) out(r) = inverse ? v(r) / sc.lp(r) : v(r) * sc.lp(r);
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = f_.soc_start[i];
      const int d = f_.soc_dim[i];
      out.segment(st, d) = (inverse ? sc.Winv[i] : sc.W[i]) * v.segment(st, d);
    }
    return out;
  }

  Eigen::VectorXd apply_W2(const Scaling& sc, const Eigen::VectorXd& v) const {
    return apply_W(sc, apply_W(sc, v, false), false);
  }

  // Jordan product u ∘ v.
  Eigen::VectorXd product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(f_.m);
    for (int r : f_.lp_rows) out(r) = u(r) * v(r);
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = f_.soc_start[i];
      const int d = f_.soc_dim[i];
      out(st) = u.segment(st, d).dot(v.segment(st, d));
      out.segment(st + 1, d - 1) =
          u(st) * v.segment(st + 1, d - 1) + v(st) * u.segment(st + 1, d - 1);
    }
    return out;
  }

  // Solves u ∘ x = v for x.
  Eigen::VectorXd divide(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(f_.m);
    for (int r : f_.lp_rows) out(r) = v(r) / u(r);
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = f_.soc_start[i];
      const int d = f_.soc_dim[i];
      const auto u1 = u.segment(st + 1, d - 1);
      const double x0 =
          (u(st) * v(st) - u1.dot(v.segment(st + 1, d - 1))) / soc_det(u.segment(st, d));
      out(st) = x0;
      out.segment(st + 1, d - 1) = (v.segment(st + 1, d - 1) - x0 * u1) / u(st);
    }
    return out;
  }

  // Largest α ≥ 0 keeping u + α du in the cone (u interior).
  double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (int r : f_.lp_rows) {
      if (du(r) < 0.0) alpha = std::min(alpha, -u(r) / du(r));
    }
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = f_.soc_start[i];
      const int d = f_.soc_dim[i];
      const auto ui = u.segment(st, d);
      const auto di = du.segment(st, d);
      const double qa = soc_det(di);
      const double qb = 2.0 * (ui(0) * di(0) - ui.tail(d - 1).dot(di.tail(d - 1)));
      const double qc = soc_det(ui);
      double root = std::numeric_limits<double>::infinity();
      if (std::abs(qa) < 1e-300) {
        if (qb < 0.0) root = -qc / qb;
      } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
          for (double r : {q / qa, q != 0.0 ? qc / q : -1.0}) {
            if (r > 0.0) root = std::min(root, r);
          }
        }
      }
      // The scalar part must stay nonnegative along the way.
      if (di(0) < 0.0) root = std::min(root, -ui(0) / di(0));
      alpha = std::min(alpha, root);
    }
    return alpha;
  }

 private:
  const StandardForm& f_;
};

// Up-looking sparse LDLᵀ with a fill-reducing ordering and sign-aware
// dynamic regularization: a pivot whose sign disagrees with the expected
// inertia, or is tiny, is replaced by ±kDynamicReg.
class QuasidefiniteLdl {
 public:
  // `full` holds both triangles; the pattern must not change between calls.
  void factor(const Eigen::SparseMatrix<double>& full, const std::vector<int>& sign) {
    const int n = static_cast<int>(full.rows());
    if (!analyzed_) {
      Eigen::AMDOrdering<int> amd;
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
      amd(full, pinv);
      perm_ = pinv.inverse();
    }
    Eigen::SparseMatrix<double> C;
    C = full.selfadjointView<Eigen::Lower>().twistedBy(perm_);
    C.makeCompressed();
    const int* Ap = C.outerIndexPtr();
    const int* Ai = C.innerIndexPtr();
    const double* Ax = C.valuePtr();
    if (!analyzed_) {
      parent_.assign(n, -1);
      std::vector<int> flag(n), count(n, 0);
      for (int k = 0; k < n; ++k) {
        flag[k] = k;
        for (int p = Ap[k]; p < Ap[k + 1]; ++p) {
          for (int i = Ai[p]; i < k && flag[i] != k; i = parent_[i]) {
            if (parent_[i] == -1) parent_[i] = k;
            ++count[i];
            flag[i] = k;
          }
        }
      }
      Lp_.assign(n + 1, 0);
      for (int k = 0; k < n; ++k) Lp_[k + 1] = Lp_[k] + count[k];
      Li_.resize(Lp_[n]);
      Lx_.resize(Lp_[n]);
      permuted_sign_.resize(n);
      for (int i = 0; i < n; ++i) permuted_sign_[perm_.indices()(i)] = sign[i];
      analyzed_ = true;
    }
    D_.assign(n, 0.0);
    std::vector<double> y(n, 0.0);
    std::vector<int> pattern(n), flag(n), lnz(n, 0);
    for (int k = 0; k < n; ++k) {
      int top = n;
      flag[k] = k;
      for (int p = Ap[k]; p < Ap[k + 1]; ++p) {
        int i = Ai[p];
        if (i > k) continue;
        y[i] += Ax[p];
        int len = 0;
        for (; flag[i] != k; i = parent_[i]) {
          pattern[len++] = i;
          flag[i] = k;
        }
        while (len > 0) pattern[--top] = pattern[--len];
      }
      double d = y[k] + permuted_sign_[k] * kStaticReg;
      y[k] = 0.0;
      for (; top < n; ++top) {
        const int i = pattern[top];
        const double yi = y[i];
        y[i] = 0.0;
        const int end = Lp_[i] + lnz[i];
        for (int p = Lp_[i]; p < end; ++p) y[Li_[p]] -= Lx_[p] * yi;
        const double l_ki = yi / D_[i];
        d -= l_ki * yi;
        Li_[end] = k;
        Lx_[end] = l_ki;
        ++lnz[i];
      }
      if (permuted_sign_[k] * d <= kDynamicEps) {
        d = permuted_sign_[k] * kDynamicReg;
      }
      D_[k] = d;
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const int n = static_cast<int>(D_.size());
    Eigen::VectorXd x = perm_ * b;
    for (int j = 0; j < n; ++j) {
      for (int p = Lp_[j]; p < Lp_[j + 1]; ++p) x(Li_[p]) -= Lx_[p] * x(j);
    }
    for (int j = 0; j < n; ++j) x(j) /= D_[j];
    for (int j = n - 1; j >= 0; --j) {
      for (int p = Lp_[j]; p < Lp_[j + 1]; ++p) x(j) -= Lx_[p] * x(Li_[p]);
    }
    return perm_.transpose() * x;
  }

 private:
  static constexpr double kStaticReg = 1e-8;
  static constexpr double kDynamicEps = 1e-13;
  static constexpr double kDynamicReg = 1e-7;
  bool analyzed_ = false;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  std::vector<int> parent_, Lp_, Li_, permuted_sign_;
  std::vector<double> Lx_, D_;
};

// KKT system
//
//   [ 0   Aᵀ   Gᵀ  ]
//   [ A   0    0   ]
//   [ G   0   −W²  ]
//
// factored with regularization and solved with iterative refinement against
// the exact matrix.
class KktSolver {
 public:
  KktSolver(const StandardForm& f, const Cones& cones)
      : f_{f}, cones_{cones}, size_{f.n + f.p + f.m} {
    sign_.assign(size_, -1);
    std::fill(sign_.begin(), sign_.begin() + f.n, 1);
  }

  void factor(const Scaling& sc) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(size_ + 2 * (f_.A.nonZeros() + f_.G.nonZeros()) + 16 * f_.m);
    auto sym = [&t](int r, int c, double v) {
      t.emplace_back(r, c, v);
      if (r != c) t.emplace_back(c, r, v);
    };
    for (int j = 0; j < f_.n + f_.p; ++j) t.emplace_back(j, j, 0.0);
    for (int k = 0; k < f_.A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(f_.A, k); it; ++it) {
        sym(f_.n + it.row(), it.col(), it.value());
      }
    }
    const int z0 = f_.n + f_.p;
    for (int k = 0; k < f_.G.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(f_.G, k); it; ++it) {
        sym(z0 + it.row(), it.col(), it.value());
      }
    }
    for (int r : f_.lp_rows) t.emplace_back(z0 + r, z0 + r, -sc.lp(r) * sc.lp(r));
    for (std::size_t i = 0; i < f_.soc_start.size(); ++i) {
      const int st = z0 + f_.soc_start[i];
      const int d = f_.soc_dim[i];
      const Eigen::MatrixXd W2 = sc.W[i] * sc.W[i];
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c <= r; ++c) sym(st + r, st + c, -W2(r, c));
      }
    }
    Eigen::SparseMatrix<double> K(size_, size_);
    K.setFromTriplets(t.begin(), t.end());
    ldl_.factor(K, sign_);
    scaling_ = &sc;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd sol = ldl_.solve(rhs);
    const double target = 1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    for (int pass = 0; pass < 10; ++pass) {
      const Eigen::VectorXd err = rhs - multiply(sol);
      if (err.lpNorm<Eigen::Infinity>() <= target) break;
      sol += ldl_.solve(err);
    }
    return sol;
  }

 private:
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const {
    const auto x = v.head(f_.n);
    const auto y = v.segment(f_.n, f_.p);
    const Eigen::VectorXd z = v.tail(f_.m);
    Eigen::VectorXd out(size_);
    out.head(f_.n) = f_.A.transpose() * y + f_.G.transpose() * z;
    out.segment(f_.n, f_.p) = f_.A * x;
    out.tail(f_.m) = f_.G * x - cones_.apply_W2(*scaling_, z);
    return out;
  }

  const StandardForm& f_;
  const Cones& cones_;
  int size_;
  std::vector<int> sign_;
  const Scaling* scaling_ = nullptr;
  QuasidefiniteLdl ldl_;
};

}  // namespace

ConicSolution InteriorPointSolver::solve(const ConicProgram& program,
                                         const SolverSettings& settings) const {
  program.validate();
  if (!(settings.tol > 0.0)) {
    throw std::invalid_argument("solve: tol must be positive");
  }
  const StackedData data = detail::stack_blocks(program);
  const StandardForm f = to_standard(program);
  const Cones cones(f);
  const int n = f.n;
  const int p = f.p;
  const int m = f.m;
  const Eigen::VectorXd e = cones.identity();

  auto split = [&](const Eigen::VectorXd& v, Eigen::VectorXd& x, Eigen::VectorXd& y,
                   Eigen::VectorXd& z) {
    x = v.head(n);
    y = v.segment(n, p);
    z = v.tail(m);
  };
  auto stack = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z) {
    Eigen::VectorXd v(n + p + m);
    v << x, y, z;
    return v;
  };
  // Dual in the program's convention, blocks in original order.
  auto program_dual = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    Eigen::VectorXd out(data.h.size());
    for (std::size_t i = 0; i < program.constraints.size(); ++i) {
      const auto& cone = program.constraints[i].cone;
      const int r = f.block_row[i];
      out.segment(data.block_start[i], cone.dim) =
          cone.kind == ConeKind::zero ? Eigen::VectorXd(-y.segment(r, cone.dim))
                                      : Eigen::VectorXd(z.segment(r, cone.dim));
    }
    return out;
  };

  ConicSolution solution;
  KktSolver kkt(f, cones);

  // Initial point from two least-squares solves with W = I.
  Scaling unit;
  unit.lp = Eigen::VectorXd::Ones(m);
  for (std::size_t i = 0; i < f.soc_start.size(); ++i) {
    unit.W.push_back(Eigen::MatrixXd::Identity(f.soc_dim[i], f.soc_dim[i]));
    unit.Winv.push_back(unit.W.back());
  }
  kkt.factor(unit);
  Eigen::VectorXd x, y, z, s;
  {
    Eigen::VectorXd xp, yp, zp;
    split(kkt.solve(stack(Eigen::VectorXd::Zero(n), f.b, f.h)), xp, yp, zp);
    x = xp;
    s = -zp;
    const double shift = cones.shift_needed(s);
    if (shift >= 0.0) s += (1.0 + shift) * e;
    Eigen::VectorXd xd, yd, zd;
    split(kkt.solve(stack(-f.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m))),
          xd, yd, zd);
    y = yd;
    z = zd;
    const double dshift = cones.shift_needed(z);
    if (dshift >= 0.0) z += (1.0 + dshift) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  const Eigen::VectorXd rhs1 = stack(-f.c, f.b, f.h);
  auto finish = [&](SolveStatus status, int iters) {
    const Eigen::VectorXd xs = x / tau;
    const Eigen::VectorXd ys = program_dual(y, z) / tau;
    const Residuals res = detail::compute_residuals(program, data, xs, ys);
    solution.status = status;
    solution.primal = xs;
    solution.dual = detail::split_dual(program, data.block_start, ys);
    solution.primal_residual = res.primal;
    solution.dual_residual = res.dual;
    solution.duality_gap = res.gap;
    solution.iterations = iters;
    return solution;
  };

  int iter = 0;
  for (; iter < settings.ipm_max_iters; ++iter) {
    // Termination on the normalized point.
    {
      const Eigen::VectorXd xs = x / tau;
      const Eigen::VectorXd ys = program_dual(y, z) / tau;
      const Residuals res = detail::compute_residuals(program, data, xs, ys);
      if (std::max({res.primal, res.dual, res.gap}) <= settings.tol) {
        return finish(SolveStatus::optimal, iter);
      }
      const double by_hz = f.b.dot(y) + f.h.dot(z);
      if (by_hz < 0.0) {
        const Eigen::VectorXd dual_map = f.A.transpose() * y + f.G.transpose() * z;
        if (dual_map.norm() <= settings.tol * (-by_hz)) {
          solution.status = SolveStatus::primal_infeasible;
          solution.primal = Eigen::VectorXd::Constant(
              n, std::numeric_limits<double>::quiet_NaN());
          solution.dual = detail::split_dual(program, data.block_start,
                                             program_dual(y, z) / (-by_hz));
          solution.iterations = iter;
          return solution;
        }
      }
      const double cx = f.c.dot(x);
      if (cx < 0.0) {
        const double primal_map =
            std::sqrt((f.A * x).squaredNorm() + (f.G * x + s).squaredNorm());
        if (primal_map <= settings.tol * (-cx)) {
          solution.status = SolveStatus::dual_infeasible;
          solution.primal = x / (-cx);
          solution.dual = detail::split_dual(
              program, data.block_start,
              Eigen::VectorXd::Constant(data.h.size(),
                                        std::numeric_limits<double>::quiet_NaN()));
          solution.iterations = iter;
          return solution;
        }
      }
    }

    const Eigen::VectorXd rx = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
    const Eigen::VectorXd ry = f.A * x - f.b * tau;
    const Eigen::VectorXd rz = s + f.G * x - f.h * tau;
    const double rt = kappa + f.c.dot(x) + f.b.dot(y) + f.h.dot(z);

    const Scaling sc = cones.scaling(s, z);
    kkt.factor(sc);
    const Eigen::VectorXd sol1 = kkt.solve(rhs1);
    const double v1 = f.c.dot(sol1.head(n)) + f.b.dot(sol1.segment(n, p)) +
                      f.h.dot(sol1.tail(m));

    struct Direction {
      Eigen::VectorXd dx, dy, dz, ds;
      double dtau = 0.0;
      double dkappa = 0.0;
    };
    auto direction = [&](double eta, const Eigen::VectorXd& d_s, double d_k) {
      const Eigen::VectorXd w_term = cones.apply_W(sc, cones.divide(sc.lambda, d_s), false);
      const Eigen::VectorXd sol2 = kkt.solve(stack(-eta * rx, -eta * ry, -eta * rz + w_term));
      const double v2 = f.c.dot(sol2.head(n)) + f.b.dot(sol2.segment(n, p)) +
                        f.h.dot(sol2.tail(m));
      Direction d;
      d.dtau = (-eta * rt + d_k / tau - v2) / (v1 - kappa / tau);
      const Eigen::VectorXd full = sol2 + d.dtau * sol1;
      split(full, d.dx, d.dy, d.dz);
      d.ds = -w_term - cones.apply_W2(sc, d.dz);
      d.dkappa = -(d_k + kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Direction& d) {
      double a = std::min(cones.max_step(s, d.ds), cones.max_step(z, d.dz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const double mu = (s.dot(z) + tau * kappa) / (f.degree + 1);
    const Direction aff = direction(1.0, cones.product(sc.lambda, sc.lambda), kappa * tau);
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
    const Eigen::VectorXd corr =
        cones.product(cones.apply_W(sc, aff.ds, true), cones.apply_W(sc, aff.dz, false));
    const Direction dir =
        direction(1.0 - sigma,
                  cones.product(sc.lambda, sc.lambda) + corr - sigma * mu * e,
                  kappa * tau + aff.dkappa * aff.dtau - sigma * mu);
    const double alpha = std::min(1.0, 0.99 * step_to_boundary(dir));
    if (!(alpha > 1e-12) || !dir.dx.allFinite()) {
      log_debug("interior point: step length {} at iteration {}", alpha, iter);
      break;
    }
    x += alpha * dir.dx;
    y += alpha * dir.dy;
    z += alpha * dir.dz;
    s += alpha * dir.ds;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
  }
  return finish(SolveStatus::max_iters, iter);
}

}  // namespace scvx
