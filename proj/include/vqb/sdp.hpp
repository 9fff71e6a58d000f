// Copyright 2026 The vqb Authors
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

/// @file sdp.hpp
/// Primal-dual interior-point solver for semidefinite programs over Hermitian
/// blocks:
///
///   minimize   sum_k <C_k, X_k>
///   subject to sum_k <A_ik, X_k> = b_i,   X_k >= 0,
///
/// with <A, X> = Re Tr[A X]. The dual is max b^T y s.t. C_k - sum_i y_i A_ik
/// = S_k >= 0.
///
/// Complex blocks are solved through the real symmetric embedding
/// X -> [[Re X, -Im X], [Im X, Re X]]. The iteration runs on the homogeneous
/// self-dual embedding with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps, so infeasible instances terminate with a
/// certificate instead of diverging.

#include "vqb/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace vqb {

// ---------------------------------------------------------------------------
// Problem data.

/// One upper-triangle entry (row <= col) of a sparse Hermitian operator.
struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  Complex value = 0.0;
};

/// Sparse Hermitian operator stored as its upper triangle. Diagonal values
/// must be real.
using SparseHermitian = std::vector<SparseEntry>;

/// Appends H(r, c) = v (and implicitly H(c, r) = conj(v)).
inline void add_entry(SparseHermitian& h, std::size_t r, std::size_t c, Complex v) {
  if (v == Complex(0.0)) return;
  if (r > c) {
    std::swap(r, c);
    v = std::conj(v);
  }
  if (r == c) v = Complex(v.real(), 0.0);
  h.push_back({r, c, v});
}

inline SparseHermitian to_sparse(const HermitianOperator& h, double drop_below = 0.0) {
  SparseHermitian out;
  for (std::size_t c = 0; c < h.dim(); ++c)
    for (std::size_t r = 0; r <= c; ++r) {
      const Complex v = h(r, c);
      if (std::abs(v) > drop_below) add_entry(out, r, c, v);
    }
  return out;
}

inline HermitianOperator to_dense(const SparseHermitian& h, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (const SparseEntry& e : h) {
    if (e.row >= dim || e.col >= dim) throw DimensionError("sparse entry outside its block");
    const auto r = static_cast<Eigen::Index>(e.row), c = static_cast<Eigen::Index>(e.col);
    m(r, c) += e.value;
    if (r != c) m(c, r) += std::conj(e.value);
  }
  return HermitianOperator::unchecked(std::move(m));
}

/// Re Tr[A X] for sparse Hermitian A and Hermitian X.
inline double sparse_inner(const SparseHermitian& a, const ComplexMatrix& x) {
  double acc = 0.0;
  for (const SparseEntry& e : a) {
    const Complex xv = x(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
    if (e.row == e.col)
      acc += e.value.real() * xv.real();
    else
      acc += 2.0 * (e.value * std::conj(xv)).real();
  }
  return acc;
}

struct SdpBlock {
  std::size_t dim = 1;
  bool complex = false;
  std::string name;
};

struct SdpTerm {
  std::size_t block = 0;
  SparseHermitian coeff;
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;
  double rhs = 0.0;
  std::string label;
};

struct SdpProblem {
  std::vector<SdpBlock> blocks;
  std::vector<SparseHermitian> objective;  // one per block (may be empty)
  std::vector<SdpConstraint> constraints;

  void validate() const {
    if (blocks.empty()) throw InvariantError("problem has no blocks");
    if (objective.size() != blocks.size())
      throw InvariantError("objective must have one operator per block");
    auto check = [&](const SparseHermitian& h, std::size_t k) {
      for (const SparseEntry& e : h) {
        if (e.row > e.col) throw InvariantError("sparse entries must be upper triangular");
        if (e.col >= blocks[k].dim) throw DimensionError("coefficient exceeds block dimension");
        if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
          throw InvariantError("non-finite coefficient");
        if (e.row == e.col && e.value.imag() != 0.0)
          throw InvariantError("diagonal coefficient must be real");
        if (!blocks[k].complex && e.value.imag() != 0.0)
          throw InvariantError("complex coefficient on real block '" + blocks[k].name + "'");
      }
    };
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (blocks[k].dim == 0) throw DimensionError("empty block");
      check(objective[k], k);
    }
    for (const SdpConstraint& c : constraints) {
      if (!std::isfinite(c.rhs)) throw InvariantError("non-finite right-hand side");
      for (const SdpTerm& t : c.terms) {
        if (t.block >= blocks.size()) throw DimensionError("constraint references unknown block");
        check(t.coeff, t.block);
      }
    }
  }

  /// Dimension of the block in the real symmetric embedding.
  std::size_t real_dim(std::size_t k) const { return blocks[k].complex ? 2 * blocks[k].dim : blocks[k].dim; }
};

/// Sum_k <A_ik, X_k> for every constraint i.
inline RealVector apply_constraints(const SdpProblem& p, const std::vector<HermitianOperator>& x) {
  RealVector out(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    double acc = 0.0;
    for (const SdpTerm& t : p.constraints[i].terms) acc += sparse_inner(t.coeff, x[t.block].matrix());
    out(static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

/// C_k - sum_i y_i A_ik for every block.
inline std::vector<HermitianOperator> dual_slack(const SdpProblem& p, const RealVector& y) {
  std::vector<ComplexMatrix> acc;
  for (std::size_t k = 0; k < p.blocks.size(); ++k) acc.push_back(to_dense(p.objective[k], p.blocks[k].dim).matrix());
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const double yi = y(static_cast<Eigen::Index>(i));
    if (yi == 0.0) continue;
    for (const SdpTerm& t : p.constraints[i].terms)
      acc[t.block] -= yi * to_dense(t.coeff, p.blocks[t.block].dim).matrix();
  }
  std::vector<HermitianOperator> out;
  for (auto& m : acc) out.push_back(HermitianOperator::unchecked(std::move(m)));
  return out;
}

/// Writes the problem as plain text: "block <k> <dim> <real|complex>",
/// "obj <block> <row> <col> <re> <im>", "con <i> <block> <row> <col> <re> <im>"
/// and "rhs <i> <value>" lines. Entries are upper-triangular and 0-based.
inline void dump_problem(const SdpProblem& p, std::ostream& os) {
  os << std::setprecision(17);
  os << "# vqb sdp dump: minimize sum <C,X> s.t. sum <A_i,X> = b_i, X >= 0\n";
  for (std::size_t k = 0; k < p.blocks.size(); ++k)
    os << "block " << k << ' ' << p.blocks[k].dim << ' '
       << (p.blocks[k].complex ? "complex" : "real") << '\n';
  for (std::size_t k = 0; k < p.objective.size(); ++k)
    for (const SparseEntry& e : p.objective[k])
      os << "obj " << k << ' ' << e.row << ' ' << e.col << ' ' << e.value.real() << ' '
         << e.value.imag() << '\n';
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    for (const SdpTerm& t : p.constraints[i].terms)
      for (const SparseEntry& e : t.coeff)
        os << "con " << i << ' ' << t.block << ' ' << e.row << ' ' << e.col << ' '
           << e.value.real() << ' ' << e.value.imag() << '\n';
    os << "rhs " << i << ' ' << p.constraints[i].rhs << '\n';
  }
}

// ---------------------------------------------------------------------------
// Solver configuration and results.

enum class SolveStatus {
  optimal,
  max_iterations,
  primal_infeasible,
  dual_infeasible,
  numerical_failure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::primal_infeasible: return "primal_infeasible";
    case SolveStatus::dual_infeasible: return "dual_infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct SolverConfig {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  std::size_t max_iter = 200;
  double step_fraction = 0.98;
  bool allow_large_blocks = false;
  /// Extra iterations taken after the tolerances are first met.
  std::size_t polish_iterations = 2;

  /// Largest realified block accepted without allow_large_blocks.
  static constexpr std::size_t kMaxRealBlock = 260;

  void validate() const {
    if (!(tol_gap > 0) || !(tol_feas > 0)) throw InvariantError("solver tolerances must be positive");
    if (!(step_fraction > 0 && step_fraction < 1))
      throw InvariantError("step fraction must lie in (0, 1)");
    if (max_iter == 0) throw InvariantError("max_iter must be positive");
  }
};

struct SdpSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<HermitianOperator> x;
  std::vector<HermitianOperator> s;
  RealVector y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;              // |p - d| / (1 + |p| + |d|)
  double primal_residual = 0.0;  // ||A(X) - b||_2
  double dual_residual = 0.0;    // ||C - A^*(y) - S||_F
  std::size_t iterations = 0;
  std::size_t redundant_rows = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::optimal; }
};

// ---------------------------------------------------------------------------
// Internal real-symmetric form.

namespace detail {

struct RealEntry {
  Eigen::Index p;
  Eigen::Index q;
  double v;
};

/// Coefficient of one constraint on one realified block, with both triangle
/// halves listed and a dense copy restricted to its index support.
struct RowPart {
  std::size_t row = 0;
  std::vector<RealEntry> entries;
  std::vector<Eigen::Index> support;
  RealMatrix local;
};

struct RealForm {
  std::vector<Eigen::Index> dims;
  std::vector<RealMatrix> c;
  std::vector<std::vector<RowPart>> parts;  // per block
  RealVector b;
  std::size_t m = 0;
  std::size_t order = 0;  // sum of block dims
};

/// Full list of realified entries for a Hermitian coefficient, scaled by 1/2
/// on complex blocks so that <A_r, Y> = <A, X>.
inline std::vector<RealEntry> realify(const SparseHermitian& h, std::size_t n, bool complex) {
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> acc;
  auto put = [&](std::size_t p, std::size_t q, double v) {
    if (v != 0.0) acc[{static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)}] += v;
  };
  const double s = complex ? 0.5 : 1.0;
  for (const SparseEntry& e : h) {
    const std::size_t r = e.row, c = e.col;
    const double a = s * e.value.real(), b = s * e.value.imag();
    if (r == c) {
      put(r, r, a);
      if (complex) put(n + r, n + r, a);
      continue;
    }
    put(r, c, a);
    put(c, r, a);
    if (!complex) continue;
    put(n + r, n + c, a);
    put(n + c, n + r, a);
    put(r, n + c, -b);
    put(n + c, r, -b);
    put(c, n + r, b);
    put(n + r, c, b);
  }
  std::vector<RealEntry> out;
  for (const auto& [key, v] : acc)
    if (v != 0.0) out.push_back({key.first, key.second, v});
  return out;
}

inline RealMatrix dense_real(const std::vector<RealEntry>& es, Eigen::Index n) {
  RealMatrix m = RealMatrix::Zero(n, n);
  for (const RealEntry& e : es) m(e.p, e.q) += e.v;
  return m;
}

/// Rows kept after removing linear dependencies (Gram matrix + incremental
/// Cholesky). Returns false when a dependent row has an inconsistent rhs.
struct RowReduction {
  std::vector<std::size_t> kept;
  std::size_t dropped = 0;
  bool consistent = true;
};

inline RowReduction reduce_rows(const std::vector<std::vector<std::pair<std::size_t, double>>>& rows,
                                const RealVector& b) {
  const std::size_t m = rows.size();
  auto dot = [&](std::size_t i, std::size_t j) {
    const auto& a = rows[i];
    const auto& c = rows[j];
    double acc = 0.0;
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < c.size()) {
      if (a[x].first < c[y].first)
        ++x;
      else if (a[x].first > c[y].first)
        ++y;
      else
        acc += a[x++].second * c[y++].second;
    }
    return acc;
  };
  RowReduction out;
  // l[i] holds the coefficients of row i on the orthonormalized kept rows.
  std::vector<std::vector<double>> l;
  std::vector<double> lb;  // rhs expressed on the orthonormal basis
  for (std::size_t i = 0; i < m; ++i) {
    const double gii = dot(i, i);
    std::vector<double> li(out.kept.size(), 0.0);
    double resid = gii;
    for (std::size_t k = 0; k < out.kept.size(); ++k) {
      double v = dot(i, out.kept[k]);
      for (std::size_t q = 0; q < k; ++q) v -= li[q] * l[k][q];
      v /= l[k][k];
      li[k] = v;
      resid -= v * v;
    }
    const auto ii = static_cast<Eigen::Index>(i);
    if (resid <= 1e-12 * std::max(gii, 1e-300)) {
      // Dependent row: its rhs must match the combination of kept rows.
      double predicted = 0.0;
      for (std::size_t k = 0; k < out.kept.size(); ++k) predicted += li[k] * lb[k];
      if (std::abs(predicted - b(ii)) > 1e-9 * (1.0 + std::abs(b(ii)))) out.consistent = false;
      ++out.dropped;
      continue;
    }
    const double diag = std::sqrt(resid);
    li.push_back(diag);
    double bi = b(ii);
    for (std::size_t k = 0; k < out.kept.size(); ++k) bi -= li[k] * lb[k];
    lb.push_back(bi / diag);
    l.push_back(std::move(li));
    out.kept.push_back(i);
  }
  return out;
}

struct Iterate {
  std::vector<RealMatrix> x, s;
  RealVector y;
  double tau = 1.0, kappa = 1.0;
};

struct Direction {
  std::vector<RealMatrix> dx, ds;
  RealVector dy;
  double dtau = 0.0, dkappa = 0.0;
};

/// Nesterov-Todd scaling of one block: W = G G^T with G^{-1} X G^{-T} =
/// G^T S G = diag(lambda).
struct Scaling {
  RealMatrix g, ginv, w;
  RealVector lambda;
};

inline bool nt_scaling(const RealMatrix& x, const RealMatrix& s, Scaling& out) {
  Eigen::LLT<RealMatrix> lx(x), ls(s);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
  const RealMatrix l = lx.matrixL();
  const RealMatrix r = ls.matrixL();
  Eigen::JacobiSVD<RealMatrix> svd(r.transpose() * l, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector sig = svd.singularValues();
  if (sig.minCoeff() <= 0.0 || !sig.allFinite()) return false;
  const RealVector isq = sig.cwiseSqrt().cwiseInverse();
  out.g = l * svd.matrixV() * isq.asDiagonal();
  out.ginv = isq.asDiagonal() * svd.matrixU().transpose() * r.transpose();
  out.w = out.g * out.g.transpose();
  out.lambda = sig;
  return true;
}

/// Largest alpha with Lambda + alpha * D >= 0 for the scaled direction D.
inline double max_step(const RealVector& lambda, const RealMatrix& d) {
  const RealVector isq = lambda.cwiseSqrt().cwiseInverse();
  RealMatrix m = isq.asDiagonal() * d * isq.asDiagonal();
  m = 0.5 * (m + m.transpose()).eval();
  const double lo = Eigen::SelfAdjointEigenSolver<RealMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lo < 0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

class RealSolver {
 public:
  explicit RealSolver(const RealForm& f) : f_(f) {}

  double inner(const std::vector<RealMatrix>& a, const std::vector<RealMatrix>& b) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k].cwiseProduct(b[k]).sum();
    return acc;
  }

  RealVector op_a(const std::vector<RealMatrix>& x) const {
    RealVector out = RealVector::Zero(static_cast<Eigen::Index>(f_.m));
    for (std::size_t k = 0; k < f_.parts.size(); ++k)
      for (const RowPart& rp : f_.parts[k]) {
        double acc = 0.0;
        for (const RealEntry& e : rp.entries) acc += e.v * x[k](e.p, e.q);
        out(static_cast<Eigen::Index>(rp.row)) += acc;
      }
    return out;
  }

  std::vector<RealMatrix> op_at(const RealVector& y) const {
    std::vector<RealMatrix> out;
    for (std::size_t k = 0; k < f_.dims.size(); ++k) {
      RealMatrix m = RealMatrix::Zero(f_.dims[k], f_.dims[k]);
      for (const RowPart& rp : f_.parts[k]) {
        const double yi = y(static_cast<Eigen::Index>(rp.row));
        if (yi == 0.0) continue;
        for (const RealEntry& e : rp.entries) m(e.p, e.q) += yi * e.v;
      }
      out.push_back(std::move(m));
    }
    return out;
  }

  /// M_ij = sum_k <A_ik, W_k A_jk W_k>.
  RealMatrix schur(const std::vector<Scaling>& sc) const {
    const auto m = static_cast<Eigen::Index>(f_.m);
    RealMatrix out = RealMatrix::Zero(m, m);
    for (std::size_t k = 0; k < f_.parts.size(); ++k) {
      const auto& parts = f_.parts[k];
      const RealMatrix& w = sc[k].w;
      for (std::size_t jp = 0; jp < parts.size(); ++jp) {
        const RowPart& pj = parts[jp];
        const auto ns = static_cast<Eigen::Index>(pj.support.size());
        RealMatrix wcols(w.rows(), ns);
        for (Eigen::Index c = 0; c < ns; ++c) wcols.col(c) = w.col(pj.support[static_cast<std::size_t>(c)]);
        const RealMatrix t = wcols * pj.local * wcols.transpose();
        for (std::size_t ip = 0; ip <= jp; ++ip) {
          const RowPart& pi = parts[ip];
          double acc = 0.0;
          for (const RealEntry& e : pi.entries) acc += e.v * t(e.q, e.p);
          const auto i = static_cast<Eigen::Index>(pi.row), j = static_cast<Eigen::Index>(pj.row);
          out(i, j) += acc;
          if (i != j) out(j, i) += acc;
        }
      }
    }
    return out;
  }

 private:
  const RealForm& f_;
};

inline RealMatrix sym(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Solve.

namespace detail {

struct SolveOutcome {
  Iterate it;
  SolveStatus status = SolveStatus::numerical_failure;
  std::string message;
  std::size_t iterations = 0;
};

inline SolveOutcome interior_point(const RealForm& f, const SolverConfig& cfg) {
  RealSolver op(f);
  const std::size_t nb = f.dims.size();
  const auto m = static_cast<Eigen::Index>(f.m);
  SolveOutcome out;
  Iterate& it = out.it;
  for (std::size_t k = 0; k < nb; ++k) {
    it.x.push_back(RealMatrix::Identity(f.dims[k], f.dims[k]));
    it.s.push_back(RealMatrix::Identity(f.dims[k], f.dims[k]));
  }
  it.y = RealVector::Zero(m);
  const double nu = static_cast<double>(f.order) + 1.0;
  // Residuals are measured relative to the data scale.
  const double bscale = 1.0 + f.b.norm();
  double cscale = 0.0;
  for (const auto& c : f.c) cscale += c.squaredNorm();
  cscale = 1.0 + std::sqrt(cscale);

  double best_mu = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;
  // Once the tolerances are met a few extra steps are taken; the iterate
  // with the smallest residual is returned.
  std::optional<SolveOutcome> best;
  double best_merit = std::numeric_limits<double>::infinity();
  std::size_t polish_left = cfg.polish_iterations;
  auto bail = [&](SolveStatus status, std::string message) {
    if (best) return *best;
    out.status = status;
    out.message = std::move(message);
    return out;
  };

  for (std::size_t iter = 0;; ++iter) {
    out.iterations = iter;
    const RealVector ax = op.op_a(it.x);
    const RealVector rp = f.b * it.tau - ax;
    std::vector<RealMatrix> rd = op.op_at(it.y);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = f.c[k] * it.tau - rd[k] - it.s[k];
    const double pobj = op.inner(f.c, it.x);
    const double dobj = f.b.dot(it.y);
    const double rg = it.kappa - dobj + pobj;
    const double mu = (op.inner(it.x, it.s) + it.tau * it.kappa) / nu;

    double rdn = 0.0;
    for (const auto& r : rd) rdn += r.squaredNorm();
    rdn = std::sqrt(rdn);
    const double pres = (ax / it.tau - f.b).norm() / bscale;
    const double dres = rdn / it.tau / cscale;
    const double p = pobj / it.tau, d = dobj / it.tau;
    const double gap = std::abs(p - d) / (1.0 + std::abs(p) + std::abs(d));
    if (pres <= cfg.tol_feas && dres <= cfg.tol_feas && gap <= cfg.tol_gap) {
      const double merit = std::max({pres, dres, gap});
      if (merit < best_merit) {
        best_merit = merit;
        out.status = SolveStatus::optimal;
        best = out;
      }
      if (polish_left-- == 0 || merit <= 1e-3 * std::min(cfg.tol_feas, cfg.tol_gap)) return *best;
    } else if (best) {
      return *best;
    }
    // Farkas-type certificates on the unnormalized iterate.
    if (dobj > 0) {
      std::vector<RealMatrix> aty = op.op_at(it.y);
      double r = 0.0;
      for (std::size_t k = 0; k < nb; ++k) r += (aty[k] + it.s[k]).squaredNorm();
      if (std::sqrt(r) / dobj <= cfg.tol_feas) {
        out.status = SolveStatus::primal_infeasible;
        out.message = "dual ray found: b^T y > 0 with A^*(y) + S = 0";
        return out;
      }
    }
    if (pobj < 0 && ax.norm() / -pobj <= cfg.tol_feas) {
      out.status = SolveStatus::dual_infeasible;
      out.message = "primal ray found: <C,X> < 0 with A(X) = 0";
      return out;
    }
    if (iter >= cfg.max_iter) {
      return bail(SolveStatus::max_iterations,
                  "iteration limit reached (pres " + std::to_string(pres) + ", dres " +
                      std::to_string(dres) + ", gap " + std::to_string(gap) + ")");
    }
    if (mu < best_mu * 0.999) {
      best_mu = mu;
      stalled = 0;
    } else if (++stalled >= 8) {
      return bail(SolveStatus::numerical_failure,
                  "no progress (pres " + std::to_string(pres) + ", dres " + std::to_string(dres) +
                      ", gap " + std::to_string(gap) + ")");
    }

    std::vector<Scaling> sc(nb);
    for (std::size_t k = 0; k < nb; ++k)
      if (!nt_scaling(it.x[k], it.s[k], sc[k]))
        return bail(SolveStatus::numerical_failure, "lost positive definiteness of an iterate");

    RealMatrix mm = op.schur(sc);
    double reg = 0.0;
    const double maxdiag = mm.diagonal().cwiseAbs().maxCoeff();
    Eigen::LLT<RealMatrix> chol;
    for (int attempt = 0;; ++attempt) {
      RealMatrix mr = mm;
      if (reg > 0) mr.diagonal().array() += reg;
      chol.compute(mr);
      if (chol.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-12 * (1.0 + maxdiag) : reg * 100.0;
      if (attempt > 6) return bail(SolveStatus::numerical_failure, "singular Schur complement");
    }

    // Refinement against the unregularized matrix recovers accuracy lost to
    // the shift and to conditioning near the optimum.
    auto schur_solve = [&](const RealVector& r) {
      RealVector sol = chol.solve(r);
      for (int pass = 0; pass < 3; ++pass) sol += chol.solve(r - mm * sol);
      return sol;
    };

    std::vector<RealMatrix> wcw(nb);
    for (std::size_t k = 0; k < nb; ++k) wcw[k] = sym(sc[k].w * f.c[k] * sc[k].w);
    const RealVector g = op.op_a(wcw);
    const double cc = op.inner(f.c, wcw);
    const RealVector v = schur_solve(g + f.b);
    const RealVector bg = f.b - g;

    auto direction = [&](double eta, const std::vector<RealMatrix>& rc, double rtk) {
      Direction dir;
      std::vector<RealMatrix> tmp(nb);
      for (std::size_t k = 0; k < nb; ++k) tmp[k] = rc[k] - eta * sym(sc[k].w * rd[k] * sc[k].w);
      const RealVector h = eta * rp - op.op_a(tmp);
      const RealVector u = schur_solve(h);
      const double c0 = op.inner(f.c, tmp);
      dir.dtau = (eta * rg + c0 + rtk / it.tau - bg.dot(u)) / (bg.dot(v) + cc + it.kappa / it.tau);
      dir.dy = u + v * dir.dtau;
      const std::vector<RealMatrix> aty = op.op_at(dir.dy);
      for (std::size_t k = 0; k < nb; ++k) {
        dir.ds.push_back(eta * rd[k] - aty[k] + f.c[k] * dir.dtau);
        dir.dx.push_back(sym(rc[k] - sc[k].w * dir.ds[k] * sc[k].w));
      }
      dir.dkappa = (rtk - it.kappa * dir.dtau) / it.tau;
      return dir;
    };

    auto step_bound = [&](const Direction& dir, std::vector<RealMatrix>* sx,
                          std::vector<RealMatrix>* ss) {
      double a = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        const RealMatrix dxs = sym(sc[k].ginv * dir.dx[k] * sc[k].ginv.transpose());
        const RealMatrix dss = sym(sc[k].g.transpose() * dir.ds[k] * sc[k].g);
        a = std::min(a, max_step(sc[k].lambda, dxs));
        a = std::min(a, max_step(sc[k].lambda, dss));
        if (sx) sx->push_back(dxs);
        if (ss) ss->push_back(dss);
      }
      if (dir.dtau < 0) a = std::min(a, -it.tau / dir.dtau);
      if (dir.dkappa < 0) a = std::min(a, -it.kappa / dir.dkappa);
      return a;
    };

    // Predictor.
    std::vector<RealMatrix> rc(nb);
    for (std::size_t k = 0; k < nb; ++k) rc[k] = -it.x[k];
    const Direction aff = direction(1.0, rc, -it.tau * it.kappa);
    std::vector<RealMatrix> dxs, dss;
    const double a_aff = std::min(1.0, step_bound(aff, &dxs, &dss));
    double xs_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      xs_aff += (it.x[k] + a_aff * aff.dx[k]).cwiseProduct(it.s[k] + a_aff * aff.ds[k]).sum();
    const double mu_aff =
        (xs_aff + (it.tau + a_aff * aff.dtau) * (it.kappa + a_aff * aff.dkappa)) / nu;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      const RealVector& lam = sc[k].lambda;
      RealMatrix rhs = -(dxs[k] * dss[k] + dss[k] * dxs[k]);
      rhs.diagonal().array() += 2.0 * sigma * mu;
      rhs.diagonal() -= 2.0 * lam.cwiseProduct(lam);
      for (Eigen::Index i = 0; i < rhs.rows(); ++i)
        for (Eigen::Index j = 0; j < rhs.cols(); ++j) rhs(i, j) /= lam(i) + lam(j);
      rc[k] = sym(sc[k].g * rhs * sc[k].g.transpose());
    }
    const double rtk = sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
    const Direction dir = direction(1.0 - sigma, rc, rtk);
    const double alpha = std::min(1.0, cfg.step_fraction * step_bound(dir, nullptr, nullptr));
    if (!(alpha > 0) || !std::isfinite(alpha))
      return bail(SolveStatus::numerical_failure, "degenerate step length");
    for (std::size_t k = 0; k < nb; ++k) {
      it.x[k] = sym(it.x[k] + alpha * dir.dx[k]);
      it.s[k] = sym(it.s[k] + alpha * dir.ds[k]);
    }
    it.y += alpha * dir.dy;
    it.tau += alpha * dir.dtau;
    it.kappa += alpha * dir.dkappa;
  }
}

inline ComplexMatrix extract_block(const RealMatrix& y, std::size_t n, bool complex) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (!complex) return y.cast<Complex>();
  ComplexMatrix out(nn, nn);
  const RealMatrix re = 0.5 * (y.topLeftCorner(nn, nn) + y.bottomRightCorner(nn, nn));
  const RealMatrix im = 0.5 * (y.bottomLeftCorner(nn, nn) - y.topRightCorner(nn, nn));
  out.real() = re;
  out.imag() = im;
  return out;
}

}  // namespace detail

/// Residuals of a solution, recomputed from the original (complex) data.
struct CertificateReport {
  bool has_verdict = true;  // false for max_iterations solutions
  bool pass = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;  // sum_k |<X_k, S_k>|
  double min_eig_x = 0.0;
  double min_eig_s = 0.0;
  double gap = 0.0;  // |<C,X> - b^T y| / (1 + |<C,X>| + |b^T y|)
  std::string failure;
};

inline CertificateReport check_certificate(const SdpProblem& p, const SdpSolution& s, double tol) {
  CertificateReport r;
  if (s.x.size() != p.blocks.size() || s.s.size() != p.blocks.size() ||
      static_cast<std::size_t>(s.y.size()) != p.constraints.size()) {
    r.pass = false;
    r.failure = "solution shape does not match the problem";
    return r;
  }
  RealVector b(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) b(static_cast<Eigen::Index>(i)) = p.constraints[i].rhs;
  r.primal_residual = (apply_constraints(p, s.x) - b).norm();
  const auto slack = dual_slack(p, s.y);
  double dres = 0.0, pobj = 0.0;
  r.min_eig_x = std::numeric_limits<double>::infinity();
  r.min_eig_s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    dres += (slack[k] - s.s[k]).matrix().squaredNorm();
    r.complementarity += std::abs(s.x[k].inner(s.s[k]));
    r.min_eig_x = std::min(r.min_eig_x, min_eigenvalue(s.x[k]));
    r.min_eig_s = std::min(r.min_eig_s, min_eigenvalue(s.s[k]));
    pobj += sparse_inner(p.objective[k], s.x[k].matrix());
  }
  r.dual_residual = std::sqrt(dres);
  const double dobj = b.dot(s.y);
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  if (s.status == SolveStatus::max_iterations) {
    r.has_verdict = false;
    return r;
  }
  auto fail = [&](const std::string& what, double v) {
    if (r.failure.empty()) r.failure = what + " " + std::to_string(v);
  };
  if (r.primal_residual > tol) fail("primal residual", r.primal_residual);
  if (r.dual_residual > tol) fail("dual residual", r.dual_residual);
  if (r.complementarity > tol) fail("complementarity", r.complementarity);
  if (r.min_eig_x < -tol) fail("min eigenvalue of X", r.min_eig_x);
  if (r.min_eig_s < -tol) fail("min eigenvalue of S", r.min_eig_s);
  if (r.gap > tol) fail("duality gap", r.gap);
  r.pass = r.failure.empty();
  return r;
}

/// Solves the problem. Never throws for infeasible or ill-posed instances;
/// those are reported through SdpSolution::status. Throws InvariantError for
/// malformed input and for blocks above the size guardrail.
inline SdpSolution solve(const SdpProblem& p, const SolverConfig& cfg = {}) {
  p.validate();
  cfg.validate();
  const std::size_t nb = p.blocks.size();
  for (std::size_t k = 0; k < nb; ++k)
    if (p.real_dim(k) > SolverConfig::kMaxRealBlock && !cfg.allow_large_blocks)
      throw InvariantError("block '" + p.blocks[k].name + "' has realified dimension " +
                           std::to_string(p.real_dim(k)) + " > " +
                           std::to_string(SolverConfig::kMaxRealBlock) +
                           "; enable allow_large_blocks to proceed");

  // Realify every constraint, keyed by a global flat index for the rank test.
  std::vector<std::size_t> offset(nb + 1, 0);
  for (std::size_t k = 0; k < nb; ++k) offset[k + 1] = offset[k] + p.real_dim(k) * p.real_dim(k);
  const std::size_t m0 = p.constraints.size();
  std::vector<std::vector<std::pair<std::size_t, std::vector<detail::RealEntry>>>> rows(m0);
  std::vector<std::vector<std::pair<std::size_t, double>>> flat(m0);
  RealVector b0(static_cast<Eigen::Index>(m0));
  for (std::size_t i = 0; i < m0; ++i) {
    b0(static_cast<Eigen::Index>(i)) = p.constraints[i].rhs;
    std::map<std::size_t, SparseHermitian> merged;
    for (const SdpTerm& t : p.constraints[i].terms)
      merged[t.block].insert(merged[t.block].end(), t.coeff.begin(), t.coeff.end());
    for (auto& [k, h] : merged) {
      auto es = detail::realify(h, p.blocks[k].dim, p.blocks[k].complex);
      if (es.empty()) continue;
      const auto n = p.real_dim(k);
      for (const auto& e : es)
        flat[i].push_back({offset[k] + static_cast<std::size_t>(e.p) * n + static_cast<std::size_t>(e.q), e.v});
      rows[i].push_back({k, std::move(es)});
    }
    std::sort(flat[i].begin(), flat[i].end());
  }
  const detail::RowReduction red = detail::reduce_rows(flat, b0);

  SdpSolution sol;
  sol.redundant_rows = red.dropped;
  sol.y = RealVector::Zero(static_cast<Eigen::Index>(m0));
  for (std::size_t k = 0; k < nb; ++k) {
    sol.x.push_back(HermitianOperator::zero(p.blocks[k].dim));
    sol.s.push_back(HermitianOperator::zero(p.blocks[k].dim));
  }
  if (!red.consistent) {
    sol.status = SolveStatus::primal_infeasible;
    sol.message = "linearly dependent constraints with inconsistent right-hand sides";
    return sol;
  }

  detail::RealForm f;
  f.m = red.kept.size();
  f.b.resize(static_cast<Eigen::Index>(f.m));
  f.parts.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto n = static_cast<Eigen::Index>(p.real_dim(k));
    f.dims.push_back(n);
    f.order += p.real_dim(k);
    f.c.push_back(detail::dense_real(detail::realify(p.objective[k], p.blocks[k].dim, p.blocks[k].complex), n));
  }
  for (std::size_t r = 0; r < red.kept.size(); ++r) {
    const std::size_t i = red.kept[r];
    f.b(static_cast<Eigen::Index>(r)) = b0(static_cast<Eigen::Index>(i));
    for (auto& [k, es] : rows[i]) {
      detail::RowPart part;
      part.row = r;
      for (const auto& e : es) part.support.push_back(e.p);
      std::sort(part.support.begin(), part.support.end());
      part.support.erase(std::unique(part.support.begin(), part.support.end()), part.support.end());
      const auto ns = static_cast<Eigen::Index>(part.support.size());
      part.local = RealMatrix::Zero(ns, ns);
      auto pos = [&](Eigen::Index q) {
        return static_cast<Eigen::Index>(std::lower_bound(part.support.begin(), part.support.end(), q) -
                                         part.support.begin());
      };
      for (const auto& e : es) part.local(pos(e.p), pos(e.q)) += e.v;
      part.entries = std::move(es);
      f.parts[k].push_back(std::move(part));
    }
  }

  detail::SolveOutcome res = detail::interior_point(f, cfg);
  sol.status = res.status;
  sol.message = res.message;
  sol.iterations = res.iterations;

  // Infeasibility certificates are reported unnormalized; everything else is
  // divided by tau.
  const bool ray = res.status == SolveStatus::primal_infeasible ||
                   res.status == SolveStatus::dual_infeasible;
  const double scale = ray ? 1.0 : 1.0 / res.it.tau;
  for (std::size_t k = 0; k < nb; ++k) {
    const bool cx = p.blocks[k].complex;
    sol.x[k] = HermitianOperator::unchecked(
        detail::extract_block(res.it.x[k] * scale, p.blocks[k].dim, cx), true);
    sol.s[k] = HermitianOperator::unchecked(
        detail::extract_block(res.it.s[k] * scale, p.blocks[k].dim, cx) * (cx ? 2.0 : 1.0), true);
  }
  for (std::size_t r = 0; r < red.kept.size(); ++r)
    sol.y(static_cast<Eigen::Index>(red.kept[r])) = res.it.y(static_cast<Eigen::Index>(r)) * scale;

  double pobj = 0.0;
  for (std::size_t k = 0; k < nb; ++k) pobj += sparse_inner(p.objective[k], sol.x[k].matrix());
  sol.primal_objective = pobj;
  sol.dual_objective = b0.dot(sol.y);
  sol.gap = std::abs(pobj - sol.dual_objective) /
            (1.0 + std::abs(pobj) + std::abs(sol.dual_objective));
  sol.primal_residual = (apply_constraints(p, sol.x) - b0).norm();
  const auto slack = dual_slack(p, sol.y);
  double dres = 0.0;
  for (std::size_t k = 0; k < nb; ++k) dres += (slack[k] - sol.s[k]).matrix().squaredNorm();
  sol.dual_residual = std::sqrt(dres);
  return sol;
}

}  // namespace vqb
