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

/// @file sdp_builder.hpp
/// Symbolic assembly of SdpProblem instances from named variables, scalar
/// linear forms and operator-valued affine expressions.
///
/// An operator equality L(X) = K on an m x m Hermitian space becomes m^2 real
/// rows <E, L(X)> = <E, K>, one per element E of the orthonormal Hermitian
/// basis {E_aa, (E_ab + E_ba)/sqrt2, i(E_ba - E_ab)/sqrt2}. The coefficient
/// on each block is the adjoint map applied to E.

#include "vqb/sdp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vqb {

/// Handle to a PSD block of the problem under construction.
struct Variable {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t block = npos;
  std::size_t dim = 0;
  bool complex = false;
  bool valid() const { return block != npos; }
};

/// Unconstrained real scalar, encoded as plus - minus with both parts >= 0.
struct FreeVariable {
  Variable plus;
  Variable minus;
};

/// Real linear form sum <A, X> over problem variables.
class ScalarExpr {
 public:
  /// + <a, v>
  ScalarExpr& add(const Variable& v, const HermitianOperator& a) {
    require(v);
    if (a.dim() != v.dim) throw DimensionError("coefficient does not match variable dimension");
    terms_.push_back({v.block, to_sparse(a)});
    return *this;
  }
  /// + c * v for a scalar (1 x 1) variable.
  ScalarExpr& add(const Variable& v, double c) {
    require(v);
    if (v.dim != 1) throw DimensionError("scalar coefficient on a matrix variable");
    SparseHermitian h;
    add_entry(h, 0, 0, c);
    terms_.push_back({v.block, std::move(h)});
    return *this;
  }
  ScalarExpr& add(const FreeVariable& v, double c) {
    add(v.plus, c);
    return add(v.minus, -c);
  }
  /// + c * Tr[v]
  ScalarExpr& add_trace(const Variable& v, double c = 1.0) {
    require(v);
    SparseHermitian h;
    for (std::size_t i = 0; i < v.dim; ++i) add_entry(h, i, i, c);
    terms_.push_back({v.block, std::move(h)});
    return *this;
  }

  const std::vector<SdpTerm>& terms() const { return terms_; }

 private:
  static void require(const Variable& v) {
    if (!v.valid()) throw InvariantError("expression references an undeclared variable");
  }
  std::vector<SdpTerm> terms_;
};

/// Hermitian-operator-valued affine expression on a space of dimension dim.
class MatrixExpr {
 public:
  explicit MatrixExpr(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw DimensionError("operator expression needs a positive dimension");
  }

  std::size_t dim() const { return dim_; }

  /// + c * v
  MatrixExpr& add(const Variable& v, double c = 1.0) {
    require(v);
    if (v.dim != dim_) throw DimensionError("variable dimension does not match expression");
    maps_.push_back({v, c, std::nullopt, {}});
    return *this;
  }

  /// + c * Tr_drop[v], with v laid out as `layout`.
  MatrixExpr& add_partial_trace(const Variable& v, const SubsystemDims& layout,
                                std::vector<std::size_t> drop, double c = 1.0) {
    require(v);
    if (layout.total() != v.dim) throw DimensionError("layout does not match variable dimension");
    const auto kept = detail::complement(layout.count(), drop);
    std::size_t kd = 1;
    for (std::size_t i : kept) kd *= layout[i];
    if (kd != dim_) throw DimensionError("partial trace output does not match expression");
    maps_.push_back({v, c, layout, std::move(drop)});
    return *this;
  }

  /// + s * k for a scalar variable s.
  MatrixExpr& add_scaled(const Variable& s, const HermitianOperator& k) {
    require(s);
    if (s.dim != 1) throw DimensionError("scaling variable must be scalar");
    if (k.dim() != dim_) throw DimensionError("operator does not match expression dimension");
    scaled_.push_back({s, k});
    return *this;
  }
  MatrixExpr& add_scaled(const FreeVariable& s, const HermitianOperator& k) {
    add_scaled(s.plus, k);
    return add_scaled(s.minus, -k);
  }

  /// + k (moved to the right-hand side on assembly).
  MatrixExpr& add_constant(const HermitianOperator& k) {
    if (k.dim() != dim_) throw DimensionError("operator does not match expression dimension");
    constant_ = constant_ ? HermitianOperator(*constant_ + k) : k;
    return *this;
  }

 private:
  friend class ProblemBuilder;

  struct MapTerm {
    Variable var;
    double coeff;
    std::optional<SubsystemDims> layout;  // partial trace when set
    std::vector<std::size_t> drop;
  };
  struct ScaledTerm {
    Variable var;
    HermitianOperator k;
  };

  static void require(const Variable& v) {
    if (!v.valid()) throw InvariantError("expression references an undeclared variable");
  }

  std::size_t dim_;
  std::vector<MapTerm> maps_;
  std::vector<ScaledTerm> scaled_;
  std::optional<HermitianOperator> constant_;
};

/// Element `index` of the orthonormal Hermitian basis of an n x n space.
/// Order: all diagonal units, then for each pair a < b the symmetric and the
/// antisymmetric element.
inline SparseHermitian hermitian_basis_element(std::size_t n, std::size_t index) {
  SparseHermitian e;
  if (index < n) {
    add_entry(e, index, index, 1.0);
    return e;
  }
  std::size_t rest = index - n;
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (rest == 0) {
        add_entry(e, a, b, s);
        return e;
      }
      if (rest == 1) {
        add_entry(e, a, b, Complex(0.0, -s));
        return e;
      }
      rest -= 2;
    }
  throw DimensionError("Hermitian basis index out of range");
}

class ProblemBuilder {
 public:
  /// Hermitian (complex) or real symmetric PSD block.
  Variable psd(std::string name, std::size_t dim, bool complex = true) {
    if (dim == 0) throw DimensionError("block dimension must be positive");
    problem_.blocks.push_back({dim, complex && dim > 1, std::move(name)});
    problem_.objective.emplace_back();
    return {problem_.blocks.size() - 1, dim, complex && dim > 1};
  }

  Variable nonneg(std::string name) { return psd(std::move(name), 1, false); }

  FreeVariable free(const std::string& name) {
    return {nonneg(name + "+"), nonneg(name + "-")};
  }

  void minimize(const ScalarExpr& e) {
    for (auto& o : problem_.objective) o.clear();
    for (const SdpTerm& t : e.terms()) {
      check(t.block);
      auto& o = problem_.objective[t.block];
      o.insert(o.end(), t.coeff.begin(), t.coeff.end());
    }
  }

  void equal(const ScalarExpr& e, double rhs, std::string label = {}) {
    SdpConstraint c;
    c.rhs = rhs;
    c.label = std::move(label);
    for (const SdpTerm& t : e.terms()) {
      check(t.block);
      c.terms.push_back(t);
    }
    problem_.constraints.push_back(std::move(c));
  }

  /// e <= rhs through a nonnegative slack; returns the slack.
  Variable less_equal(ScalarExpr e, double rhs, const std::string& label = {}) {
    const Variable s = nonneg(label.empty() ? "slack" : label + ".slack");
    e.add(s, 1.0);
    equal(e, rhs, label);
    return s;
  }

  /// e = rhs as operators; adds dim^2 rows.
  void equal(const MatrixExpr& e, const HermitianOperator& rhs, const std::string& label = {}) {
    if (rhs.dim() != e.dim()) throw DimensionError("right-hand side does not match expression");
    const HermitianOperator target = e.constant_ ? HermitianOperator(rhs - *e.constant_) : rhs;
    const std::size_t n = e.dim();
    for (std::size_t idx = 0; idx < n * n; ++idx) {
      const SparseHermitian basis = hermitian_basis_element(n, idx);
      SdpConstraint c;
      c.rhs = sparse_inner(basis, target.matrix());
      c.label = label.empty() ? label : label + "[" + std::to_string(idx) + "]";
      for (const auto& m : e.maps_) {
        check(m.var.block);
        SparseHermitian coeff = m.layout ? partial_trace_adjoint(basis, *m.layout, m.drop)
                                         : basis;
        for (auto& entry : coeff) entry.value *= m.coeff;
        if (!m.var.complex)
          for (auto& entry : coeff) entry.value = Complex(entry.value.real(), 0.0);
        c.terms.push_back({m.var.block, std::move(coeff)});
      }
      for (const auto& s : e.scaled_) {
        check(s.var.block);
        SparseHermitian coeff;
        add_entry(coeff, 0, 0, sparse_inner(basis, s.k.matrix()));
        c.terms.push_back({s.var.block, std::move(coeff)});
      }
      problem_.constraints.push_back(std::move(c));
    }
  }

  /// e >= 0 as an operator inequality through a PSD slack P with e - P = 0.
  Variable psd_constraint(MatrixExpr e, const std::string& name) {
    const Variable p = psd(name, e.dim(), true);
    e.add(p, -1.0);
    equal(e, HermitianOperator::zero(e.dim()), name);
    return p;
  }

  const SdpProblem& problem() const { return problem_; }
  SdpProblem build() const {
    problem_.validate();
    return problem_;
  }

  /// Adjoint of Tr_drop applied to a sparse operator on the kept factors:
  /// E -> E (x) I_drop with factors placed according to `layout`.
  static SparseHermitian partial_trace_adjoint(const SparseHermitian& e, const SubsystemDims& layout,
                                               const std::vector<std::size_t>& drop) {
    const auto kept = detail::complement(layout.count(), drop);
    const auto keep_off = detail::offsets(layout, kept);
    const auto drop_off = detail::offsets(layout, drop);
    SparseHermitian out;
    for (const SparseEntry& entry : e)
      for (std::size_t z : drop_off)
        add_entry(out, keep_off[entry.row] + z, keep_off[entry.col] + z, entry.value);
    return out;
  }

 private:
  void check(std::size_t block) const {
    if (block >= problem_.blocks.size()) throw InvariantError("dangling block reference");
  }

  SdpProblem problem_;
};

/// Value of a variable in a solution.
inline const HermitianOperator& value(const SdpSolution& s, const Variable& v) {
  if (v.block >= s.x.size()) throw InvariantError("variable not present in solution");
  return s.x[v.block];
}

inline double scalar_value(const SdpSolution& s, const Variable& v) {
  if (v.dim != 1) throw DimensionError("not a scalar variable");
  return value(s, v)(0, 0).real();
}

inline double scalar_value(const SdpSolution& s, const FreeVariable& v) {
  return scalar_value(s, v.plus) - scalar_value(s, v.minus);
}

}  // namespace vqb
