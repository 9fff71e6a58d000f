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

/// @file linalg.hpp
/// Dense complex linear algebra on tensor-product spaces.
///
/// Subsystem convention: a multi-index (i_0, ..., i_{k-1}) over factor
/// dimensions (d_0, ..., d_{k-1}) maps to the flat index
/// i_0 * d_1 * ... * d_{k-1} + ... + i_{k-1}, i.e. the leftmost factor is the
/// most significant digit. Every operation that acts on a subsystem takes an
/// explicit SubsystemDims describing this layout.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vqb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or subsystem layouts do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a mathematical invariant of its type (not Hermitian,
/// not a state, not trace preserving, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

namespace tol {
inline constexpr double kConstruction = 1e-12;
inline constexpr double kSymmetrize = 1e-10;
inline constexpr double kState = 1e-10;
inline constexpr double kPsd = 1e-9;
inline constexpr double kSdp = 1e-6;
}  // namespace tol

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

/// Largest entrywise deviation from Hermiticity, |m_ij - conj(m_ji)|.
inline double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

/// Ordered list of tensor factor dimensions.
class SubsystemDims {
 public:
  SubsystemDims() = default;
  SubsystemDims(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }
  explicit SubsystemDims(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

  /// n copies of the same factor dimension.
  static SubsystemDims uniform(std::size_t d, std::size_t n) {
    return SubsystemDims(std::vector<std::size_t>(n, d));
  }

  std::size_t count() const { return dims_.size(); }
  std::size_t operator[](std::size_t i) const { return dims_.at(i); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  std::size_t total() const {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                           std::multiplies<>());
  }

  /// Row-major stride of factor i.
  std::size_t stride(std::size_t i) const {
    std::size_t s = 1;
    for (std::size_t j = i + 1; j < dims_.size(); ++j) s *= dims_[j];
    return s;
  }

  /// Layout with the listed factors removed.
  SubsystemDims without(const std::vector<std::size_t>& drop) const {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (std::find(drop.begin(), drop.end(), i) == drop.end()) kept.push_back(dims_[i]);
    SubsystemDims out;
    out.dims_ = std::move(kept);
    return out;
  }

  bool operator==(const SubsystemDims&) const = default;

 private:
  void validate() const {
    for (std::size_t d : dims_)
      if (d < 2) throw DimensionError("subsystem dimensions must be >= 2");
  }

  std::vector<std::size_t> dims_;
};

// ---------------------------------------------------------------------------

/// Dense Hermitian operator. Construction symmetrizes inputs whose
/// Hermiticity defect is within 1e-10 (relative) and rejects the rest.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  explicit HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("Hermitian operator must be square");
    if (!all_finite(m_)) throw InvariantError("operator has non-finite entries");
    const double defect = hermitian_defect(m_);
    if (defect > tol::kSymmetrize * (1.0 + max_abs(m_)))
      throw InvariantError("operator is not Hermitian (defect " + std::to_string(defect) + ")");
    symmetrize();
  }

  static HermitianOperator identity(std::size_t d) {
    return unchecked(ComplexMatrix::Identity(idx(d), idx(d)));
  }
  static HermitianOperator zero(std::size_t d) {
    return unchecked(ComplexMatrix::Zero(idx(d), idx(d)));
  }
  /// Real diagonal operator.
  static HermitianOperator diagonal(const std::vector<double>& diag) {
    ComplexMatrix m = ComplexMatrix::Zero(idx(diag.size()), idx(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m(idx(i), idx(i)) = diag[i];
    return unchecked(std::move(m));
  }
  /// |v><v|.
  static HermitianOperator projector(const ComplexVector& v) {
    return unchecked(v * v.adjoint());
  }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t r, std::size_t c) const { return m_(idx(r), idx(c)); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

  /// Re Tr[A B], the real inner product on Hermitian operators.
  double inner(const HermitianOperator& other) const {
    check_same_dim(other);
    return m_.cwiseProduct(other.m_.conjugate()).sum().real();
  }

  HermitianOperator operator+(const HermitianOperator& o) const {
    check_same_dim(o);
    return unchecked(m_ + o.m_);
  }
  HermitianOperator operator-(const HermitianOperator& o) const {
    check_same_dim(o);
    return unchecked(m_ - o.m_);
  }
  HermitianOperator operator-() const { return unchecked(-m_); }
  HermitianOperator operator*(double s) const { return unchecked(m_ * s); }
  friend HermitianOperator operator*(double s, const HermitianOperator& h) { return h * s; }
  HermitianOperator operator/(double s) const { return unchecked(m_ / s); }
  HermitianOperator& operator+=(const HermitianOperator& o) { return *this = *this + o; }
  HermitianOperator& operator-=(const HermitianOperator& o) { return *this = *this - o; }

  /// U H U^dagger.
  HermitianOperator conjugated(const ComplexMatrix& u) const {
    if (u.cols() != m_.rows()) throw DimensionError("conjugation dimension mismatch");
    ComplexMatrix r = u * m_ * u.adjoint();
    return unchecked(std::move(r), true);
  }

  /// Wraps a matrix already known to be Hermitian up to rounding.
  static HermitianOperator unchecked(ComplexMatrix m, bool symmetrize_now = false) {
    HermitianOperator h;
    h.m_ = std::move(m);
    if (symmetrize_now) h.symmetrize();
    return h;
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

  void check_same_dim(const HermitianOperator& o) const {
    if (o.dim() != dim()) throw DimensionError("operator dimension mismatch");
  }

  void symmetrize() {
    ComplexMatrix s = (m_ + m_.adjoint()) * 0.5;
    m_ = std::move(s);
  }

  ComplexMatrix m_;
};

// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian operator.
struct Spectrum {
  RealVector eigenvalues;     // ascending
  ComplexMatrix eigenvectors;  // columns

  double min_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
  double max_eigenvalue() const {
    return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0;
  }
  double trace_norm() const { return eigenvalues.cwiseAbs().sum(); }
  double operator_norm() const {
    return eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  }
  ComplexMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  }
};

inline Spectrum eig_hermitian(const HermitianOperator& h) {
  Spectrum s;
  if (h.dim() == 0) return s;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success)
    throw Error("Hermitian eigensolver did not converge");
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  return s;
}

inline double min_eigenvalue(const HermitianOperator& h) {
  if (h.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error("Hermitian eigensolver did not converge");
  return solver.eigenvalues()(0);
}

inline double trace_norm(const HermitianOperator& h) { return eig_hermitian(h).trace_norm(); }

struct PsdCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

inline PsdCheck psd_check(const HermitianOperator& h, double tolerance = tol::kPsd) {
  const double lo = min_eigenvalue(h);
  return {lo >= -tolerance, lo};
}

// ---------------------------------------------------------------------------

/// Positive semidefinite, unit-trace operator.
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator op) : op_(std::move(op)) {
    if (std::abs(op_.trace() - 1.0) > tol::kState)
      throw InvariantError("density operator must have unit trace");
    if (min_eigenvalue(op_) < -tol::kState)
      throw InvariantError("density operator must be positive semidefinite");
  }

  static DensityOperator pure(const ComplexVector& psi) {
    return DensityOperator(HermitianOperator::projector(psi / psi.norm()));
  }
  static DensityOperator basis(std::size_t d, std::size_t k) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(k)) = 1.0;
    return pure(v);
  }
  static DensityOperator maximally_mixed(std::size_t d) {
    return DensityOperator(HermitianOperator::identity(d) / static_cast<double>(d));
  }

  std::size_t dim() const { return op_.dim(); }
  const HermitianOperator& op() const { return op_; }

 private:
  HermitianOperator op_;
};

// ---------------------------------------------------------------------------

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator::unchecked(kron(a.matrix(), b.matrix()));
}

namespace detail {

inline void check_layout(std::size_t dim, const SubsystemDims& layout) {
  if (layout.total() != dim)
    throw DimensionError("subsystem layout product " + std::to_string(layout.total()) +
                         " does not match operator dimension " + std::to_string(dim));
}

/// Flat offsets of every multi-index over the listed factors, in row-major
/// order of those factors, using the strides of the full layout.
inline std::vector<std::size_t> offsets(const SubsystemDims& layout,
                                        const std::vector<std::size_t>& factors) {
  std::vector<std::size_t> out{0};
  for (std::size_t f : factors) {
    const std::size_t stride = layout.stride(f);
    std::vector<std::size_t> next;
    next.reserve(out.size() * layout[f]);
    for (std::size_t base : out)
      for (std::size_t k = 0; k < layout[f]; ++k) next.push_back(base + k * stride);
    out = std::move(next);
  }
  return out;
}

inline std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& drop) {
  for (std::size_t i : drop)
    if (i >= n) throw DimensionError("subsystem index out of range");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(drop.begin(), drop.end(), i) == drop.end()) kept.push_back(i);
  return kept;
}

}  // namespace detail

/// Partial trace of a (not necessarily Hermitian) matrix.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemDims& layout,
                                   const std::vector<std::size_t>& drop) {
  detail::check_layout(static_cast<std::size_t>(m.rows()), layout);
  const auto kept = detail::complement(layout.count(), drop);
  const auto keep_off = detail::offsets(layout, kept);
  const auto drop_off = detail::offsets(layout, drop);
  const auto n = static_cast<Eigen::Index>(keep_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      Complex acc = 0.0;
      for (std::size_t e : drop_off)
        acc += m(static_cast<Eigen::Index>(keep_off[r] + e),
                 static_cast<Eigen::Index>(keep_off[c] + e));
      out(r, c) = acc;
    }
  return out;
}

inline HermitianOperator partial_trace(const HermitianOperator& m, const SubsystemDims& layout,
                                       const std::vector<std::size_t>& drop) {
  return HermitianOperator::unchecked(partial_trace(m.matrix(), layout, drop));
}

inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const SubsystemDims& layout,
                                       std::size_t subsystem) {
  detail::check_layout(static_cast<std::size_t>(m.rows()), layout);
  if (subsystem >= layout.count()) throw DimensionError("subsystem index out of range");
  const std::size_t stride = layout.stride(subsystem);
  const std::size_t d = layout[subsystem];
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::size_t ur = static_cast<std::size_t>(r), uc = static_cast<std::size_t>(c);
      const std::size_t dr = (ur / stride) % d, dc = (uc / stride) % d;
      const std::size_t r2 = ur - dr * stride + dc * stride;
      const std::size_t c2 = uc - dc * stride + dr * stride;
      out(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c2)) = m(r, c);
    }
  return out;
}

inline HermitianOperator partial_transpose(const HermitianOperator& m,
                                           const SubsystemDims& layout, std::size_t subsystem) {
  return HermitianOperator::unchecked(partial_transpose(m.matrix(), layout, subsystem));
}

/// Reorders tensor factors: factor perm[i] of the input becomes factor i of
/// the output.
inline ComplexMatrix permute_subsystems(const ComplexMatrix& m, const SubsystemDims& layout,
                                        const std::vector<std::size_t>& perm) {
  detail::check_layout(static_cast<std::size_t>(m.rows()), layout);
  if (perm.size() != layout.count()) throw DimensionError("permutation size mismatch");
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != i) throw DimensionError("not a permutation");
  // Offsets in the input of each output flat index.
  const auto map = detail::offsets(layout, perm);
  ComplexMatrix out(m.rows(), m.cols());
  const auto n = static_cast<Eigen::Index>(map.size());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      out(r, c) = m(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c]));
  return out;
}

inline HermitianOperator permute_subsystems(const HermitianOperator& m,
                                            const SubsystemDims& layout,
                                            const std::vector<std::size_t>& perm) {
  return HermitianOperator::unchecked(permute_subsystems(m.matrix(), layout, perm));
}

}  // namespace vqb
