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

/// @file channels.hpp
/// Choi-operator representation of linear maps between qudit systems.
///
/// For a map E from B to outputs (B_1, ..., B_k) the Choi operator is
/// J = sum_ij |i><j| (x) E(|i><j|), with subsystem order (B, B_1, ..., B_k).
/// The maximally entangled vector Gamma = sum_i |ii> is always used as the
/// rank-one operator |Gamma><Gamma| (eigenvalue d, trace d).

#include "vqb/linalg.hpp"
#include "vqb/random.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace vqb {

class ChoiOperator {
 public:
  ChoiOperator() = default;

  ChoiOperator(HermitianOperator op, std::size_t in_dim, SubsystemDims out_layout)
      : op_(std::move(op)), in_dim_(in_dim), out_(std::move(out_layout)) {
    if (in_dim_ < 2) throw DimensionError("Choi input dimension must be >= 2");
    if (out_.count() == 0) throw DimensionError("Choi operator needs at least one output");
    if (op_.dim() != in_dim_ * out_.total())
      throw DimensionError("Choi operator dimension does not match its layout");
  }

  /// Choi operator whose output marginal must equal weight * I_B (to tol).
  static ChoiOperator trace_preserving(HermitianOperator op, std::size_t in_dim,
                                       SubsystemDims out_layout, double weight = 1.0,
                                       double tolerance = tol::kPsd) {
    ChoiOperator j(std::move(op), in_dim, std::move(out_layout));
    const double r = j.trace_weight_residual(weight);
    if (r > tolerance)
      throw InvariantError("Choi operator is not trace preserving with weight " +
                           std::to_string(weight) + " (residual " + std::to_string(r) + ")");
    j.weight_ = weight;
    return j;
  }

  const HermitianOperator& op() const { return op_; }
  std::size_t in_dim() const { return in_dim_; }
  const SubsystemDims& out_layout() const { return out_; }
  std::size_t output_count() const { return out_.count(); }
  std::size_t out_dim() const { return out_.total(); }
  std::optional<double> weight() const { return weight_; }

  /// Full layout (B, outputs...).
  SubsystemDims layout() const {
    std::vector<std::size_t> dims{in_dim_};
    dims.insert(dims.end(), out_.dims().begin(), out_.dims().end());
    return SubsystemDims(std::move(dims));
  }

  /// Tr over every output subsystem.
  HermitianOperator output_trace() const {
    std::vector<std::size_t> outs;
    for (std::size_t i = 1; i <= out_.count(); ++i) outs.push_back(i);
    return partial_trace(op_, layout(), outs);
  }

  /// Frobenius distance between Tr_out J and weight * I_B.
  double trace_weight_residual(double weight) const {
    return (output_trace() - HermitianOperator::identity(in_dim_) * weight).frobenius_norm();
  }

  /// Copies the trace-preservation tag without re-checking it.
  ChoiOperator with_weight(std::optional<double> w) const {
    ChoiOperator j = *this;
    j.weight_ = w;
    return j;
  }

  ChoiOperator scaled(double s) const {
    ChoiOperator j(op_ * s, in_dim_, out_);
    if (weight_) j.weight_ = *weight_ * s;
    return j;
  }

 private:
  HermitianOperator op_;
  std::size_t in_dim_ = 0;
  SubsystemDims out_;
  std::optional<double> weight_;
};

// ---------------------------------------------------------------------------
// Elementary operators.

/// |Gamma><Gamma| on C^d (x) C^d.
inline HermitianOperator gamma_operator(std::size_t d) {
  if (d < 2) throw DimensionError("dimension must be >= 2");
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i * d + i), static_cast<Eigen::Index>(j * d + j)) = 1.0;
  return HermitianOperator::unchecked(std::move(m));
}

/// sum_ij |i><j| (x) |j><i|.
inline HermitianOperator swap_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d * d);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i * d + j), static_cast<Eigen::Index>(j * d + i)) = 1.0;
  return HermitianOperator::unchecked(std::move(m));
}

inline ChoiOperator identity_choi(std::size_t d) {
  return ChoiOperator::trace_preserving(gamma_operator(d), d, {d});
}

/// Choi operator (1 - t) Gamma + t I / d of the depolarizing family. Trace
/// preserving for every real t, completely positive iff 0 <= t <= d^2/(d^2-1).
/// t = 1 is the replacement channel rho -> Tr[rho] I/d.
inline ChoiOperator depolarizing_choi(double t, std::size_t d) {
  const double dd = static_cast<double>(d);
  HermitianOperator op =
      gamma_operator(d) * (1.0 - t) + HermitianOperator::identity(d * d) * (t / dd);
  return ChoiOperator::trace_preserving(std::move(op), d, {d});
}

/// Builds the Choi operator of a linear map from its action on |i><j|.
inline ChoiOperator choi_from_action(std::size_t in_dim, const SubsystemDims& out_layout,
                                     const std::function<ComplexMatrix(const ComplexMatrix&)>& f) {
  const std::size_t out_dim = out_layout.total();
  const auto n = static_cast<Eigen::Index>(in_dim * out_dim);
  const auto di = static_cast<Eigen::Index>(in_dim), dout = static_cast<Eigen::Index>(out_dim);
  ComplexMatrix j = ComplexMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < di; ++a)
    for (Eigen::Index b = 0; b < di; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(di, di);
      e(a, b) = 1.0;
      const ComplexMatrix img = f(e);
      if (img.rows() != dout || img.cols() != dout)
        throw DimensionError("map output does not match the output layout");
      j.block(a * dout, b * dout, dout, dout) = img;
    }
  return ChoiOperator(HermitianOperator(std::move(j)), in_dim, out_layout);
}

/// E(x) = Tr_B[(x^T (x) I) J] for an arbitrary (possibly non-Hermitian) x.
inline ComplexMatrix apply_choi(const ChoiOperator& j, const ComplexMatrix& x) {
  const auto di = static_cast<Eigen::Index>(j.in_dim());
  const auto dout = static_cast<Eigen::Index>(j.out_dim());
  if (x.rows() != di || x.cols() != di) throw DimensionError("input dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  const ComplexMatrix& m = j.op().matrix();
  for (Eigen::Index k = 0; k < di; ++k)
    for (Eigen::Index i = 0; i < di; ++i) {
      const Complex w = x(k, i);
      if (w != Complex(0.0)) out += w * m.block(k * dout, i * dout, dout, dout);
    }
  return out;
}

inline HermitianOperator apply_choi(const ChoiOperator& j, const HermitianOperator& x) {
  return HermitianOperator::unchecked(apply_choi(j, x.matrix()), true);
}

inline HermitianOperator apply_choi(const ChoiOperator& j, const DensityOperator& rho) {
  return apply_choi(j, rho.op());
}

// ---------------------------------------------------------------------------
// Link product.

/// Operator tagged with the labels of the systems it acts on, in order.
struct LabeledOperator {
  HermitianOperator op;
  std::vector<int> systems;
  SubsystemDims dims;
};

/// A * B = Tr_X[A^{T_X} B] over the systems X shared by both operands. The
/// result acts on A's remaining systems followed by B's remaining systems.
inline LabeledOperator link_product(const LabeledOperator& a, const LabeledOperator& b) {
  if (a.systems.size() != a.dims.count() || b.systems.size() != b.dims.count())
    throw DimensionError("labels and dims disagree");
  detail::check_layout(a.op.dim(), a.dims);
  detail::check_layout(b.op.dim(), b.dims);

  std::vector<std::size_t> a_rest, a_shared, b_rest, b_shared;
  for (std::size_t i = 0; i < a.systems.size(); ++i) {
    const auto it = std::find(b.systems.begin(), b.systems.end(), a.systems[i]);
    if (it == b.systems.end()) {
      a_rest.push_back(i);
    } else {
      const auto jb = static_cast<std::size_t>(it - b.systems.begin());
      if (a.dims[i] != b.dims[jb]) throw DimensionError("shared system dimension mismatch");
      a_shared.push_back(i);
      b_shared.push_back(jb);
    }
  }
  for (std::size_t j = 0; j < b.systems.size(); ++j)
    if (std::find(b_shared.begin(), b_shared.end(), j) == b_shared.end()) b_rest.push_back(j);

  auto dims_of = [](const SubsystemDims& dims, const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> out;
    for (std::size_t i : idx) out.push_back(dims[i]);
    return out;
  };
  auto product = [](const std::vector<std::size_t>& v) {
    return std::accumulate(v.begin(), v.end(), std::size_t{1}, std::multiplies<>());
  };
  const auto ra = dims_of(a.dims, a_rest), x = dims_of(a.dims, a_shared),
             rb = dims_of(b.dims, b_rest);

  // A reordered to (Ra, X) with X transposed, B reordered to (X, Rb).
  std::vector<std::size_t> perm_a = a_rest;
  perm_a.insert(perm_a.end(), a_shared.begin(), a_shared.end());
  ComplexMatrix am = permute_subsystems(a.op.matrix(), a.dims, perm_a);
  if (!a_shared.empty()) {
    std::vector<std::size_t> ad = ra;
    ad.insert(ad.end(), x.begin(), x.end());
    const SubsystemDims al(ad);
    for (std::size_t k = 0; k < x.size(); ++k) am = partial_transpose(am, al, ra.size() + k);
  }
  std::vector<std::size_t> perm_b = b_shared;
  perm_b.insert(perm_b.end(), b_rest.begin(), b_rest.end());
  const ComplexMatrix bm = permute_subsystems(b.op.matrix(), b.dims, perm_b);

  const std::size_t nra = product(ra), nrb = product(rb);
  auto eye = [](std::size_t n) {
    return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  };
  const ComplexMatrix joint = kron(am, eye(nrb)) * kron(eye(nra), bm);

  std::vector<std::size_t> jd = ra;
  jd.insert(jd.end(), x.begin(), x.end());
  jd.insert(jd.end(), rb.begin(), rb.end());
  std::vector<std::size_t> drop;
  for (std::size_t k = 0; k < x.size(); ++k) drop.push_back(ra.size() + k);

  LabeledOperator out;
  if (jd.empty()) {
    out.op = HermitianOperator::unchecked(joint);
  } else {
    out.op = HermitianOperator(partial_trace(joint, SubsystemDims(jd), drop));
  }
  for (std::size_t i : a_rest) out.systems.push_back(a.systems[i]);
  for (std::size_t j : b_rest) out.systems.push_back(b.systems[j]);
  std::vector<std::size_t> od = ra;
  od.insert(od.end(), rb.begin(), rb.end());
  out.dims = SubsystemDims(od);
  return out;
}

// ---------------------------------------------------------------------------
// Marginals and twirling.

/// Choi operator of Tr_{B_drop} o E for a two-output map; `drop` is 1 or 2.
inline ChoiOperator marginal_choi(const ChoiOperator& j, std::size_t drop) {
  if (j.output_count() != 2) throw DimensionError("marginal_choi needs a two-output map");
  if (drop != 1 && drop != 2) throw DimensionError("output index must be 1 or 2");
  const std::size_t keep = drop == 1 ? 2 : 1;
  HermitianOperator m = partial_trace(j.op(), j.layout(), {drop});
  return ChoiOperator(std::move(m), j.in_dim(), {j.out_layout()[keep - 1]})
      .with_weight(j.weight());
}

struct TwirlResult {
  HermitianOperator projection;
  double fidelity = 0.0;  // F = Tr[Gamma J] / d
};

/// Projection of an operator on C^d (x) C^d onto span{Gamma, I} (the
/// commutant of U (x) conj(U)), via Schur's lemma. For Tr[J] = d this is
/// ((Fd - 1)/(d^2 - 1)) Gamma + ((d^2 - Fd)/(d^2 - 1)) I/d.
inline TwirlResult isotropic_twirl(const HermitianOperator& j, std::size_t d) {
  if (j.dim() != d * d) throw DimensionError("isotropic twirl expects a d^2-dimensional operator");
  const HermitianOperator gamma = gamma_operator(d);
  const double dd = static_cast<double>(d);
  const double overlap = gamma.inner(j);  // Tr[Gamma J]
  const double total = j.trace();
  // Omega = Gamma/d is the rank-one projector; Tr[Omega J] Omega +
  // Tr[(I - Omega) J]/(d^2 - 1) (I - Omega).
  const double on_omega = overlap / dd;
  const double off_omega = (total - on_omega) / (dd * dd - 1.0);
  HermitianOperator proj = gamma * ((on_omega - off_omega) / dd) +
                           HermitianOperator::identity(d * d) * off_omega;
  return {std::move(proj), overlap / dd};
}

// ---------------------------------------------------------------------------
// Broadcasting maps.

struct BroadcastCheck {
  bool is_broadcasting = false;
  double residual_first = 0.0;   // || Tr_{B2} J - Gamma_{BB1} ||_F
  double residual_second = 0.0;  // || Tr_{B1} J - Gamma_{BB2} ||_F
};

inline BroadcastCheck is_broadcasting_choi(const ChoiOperator& j, double tolerance = 1e-8) {
  if (j.output_count() != 2) throw DimensionError("broadcast check needs a two-output map");
  const std::size_t d = j.in_dim();
  if (j.out_layout()[0] != d || j.out_layout()[1] != d)
    throw DimensionError("broadcast outputs must match the input dimension");
  const HermitianOperator g = gamma_operator(d);
  BroadcastCheck c;
  c.residual_first = (partial_trace(j.op(), j.layout(), {2}) - g).frobenius_norm();
  c.residual_second = (partial_trace(j.op(), j.layout(), {1}) - g).frobenius_norm();
  c.is_broadcasting = c.residual_first <= tolerance && c.residual_second <= tolerance;
  return c;
}

/// Choi operator of rho -> 1/2 {rho (x) I, SWAP} + i lambda [rho (x) I, SWAP].
/// lambda = 0 is the unique unitarily covariant, permutation invariant,
/// classically consistent broadcasting map.
inline ChoiOperator canonical_broadcast_choi(std::size_t d, double lambda) {
  const ComplexMatrix swap = swap_operator(d).matrix();
  const ComplexMatrix eye = ComplexMatrix::Identity(static_cast<Eigen::Index>(d),
                                                    static_cast<Eigen::Index>(d));
  const Complex il(0.0, lambda);
  auto action = [&](const ComplexMatrix& x) -> ComplexMatrix {
    const ComplexMatrix xi = kron(x, eye);
    return 0.5 * (xi * swap + swap * xi) + il * (xi * swap - swap * xi);
  };
  const ChoiOperator j = choi_from_action(d, {d, d}, action);
  return ChoiOperator::trace_preserving(j.op(), d, {d, d});
}

/// Choi operator of rho -> rho (x) I/d (input kept on B_1, B_2 maximally mixed).
inline ChoiOperator keep_and_prepare_choi(std::size_t d) {
  const HermitianOperator op =
      kron(gamma_operator(d), HermitianOperator::identity(d)) / static_cast<double>(d);
  return ChoiOperator::trace_preserving(op, d, {d, d});
}

struct StructureReport {
  bool is_broadcasting = false;
  double broadcasting_residual = 0.0;
  double broadcasting_residual_first = 0.0;
  double broadcasting_residual_second = 0.0;
  bool is_unitary_covariant = false;
  double covariance_residual = 0.0;
  bool is_permutation_invariant = false;
  double permutation_residual = 0.0;
  bool is_classically_consistent = false;
  double classical_residual = 0.0;
};

/// Seed of the fixed Haar test set used for the covariance residual.
inline constexpr std::uint64_t kCovarianceSeed = 0x5eed2026u;
inline constexpr std::size_t kCovarianceHaarCount = 20;

/// The fixed generating test set: 20 Haar unitaries from kCovarianceSeed,
/// the cyclic shift, and two diagonal phase unitaries.
inline std::vector<ComplexMatrix> covariance_test_unitaries(std::size_t d) {
  std::vector<ComplexMatrix> out;
  std::mt19937_64 rng(kCovarianceSeed);
  for (std::size_t k = 0; k < kCovarianceHaarCount; ++k) out.push_back(haar_unitary(d, rng));
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix shift = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) shift((i + 1) % n, i) = 1.0;
  out.push_back(shift);
  for (double base : {0.7, 2.3}) {
    ComplexMatrix phase = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) phase(i, i) = std::polar(1.0, base * double(i + 1));
    out.push_back(phase);
  }
  return out;
}

inline StructureReport check_structural_conditions(const ChoiOperator& j) {
  constexpr double kFlag = 1e-8;
  const std::size_t d = j.in_dim();
  const BroadcastCheck b = is_broadcasting_choi(j, kFlag);
  StructureReport r;
  r.broadcasting_residual_first = b.residual_first;
  r.broadcasting_residual_second = b.residual_second;
  r.broadcasting_residual = std::max(b.residual_first, b.residual_second);
  r.is_broadcasting = b.is_broadcasting;

  // E o U = (U (x) U) o E  <=>  J commutes with conj(U) (x) U (x) U.
  for (const ComplexMatrix& u : covariance_test_unitaries(d)) {
    const ComplexMatrix w = kron(kron(u.conjugate(), u), u);
    const double res = (w * j.op().matrix() * w.adjoint() - j.op().matrix()).norm();
    r.covariance_residual = std::max(r.covariance_residual, res);
  }
  r.is_unitary_covariant = r.covariance_residual <= kFlag;

  const ComplexMatrix sw = kron(ComplexMatrix::Identity(static_cast<Eigen::Index>(d),
                                                        static_cast<Eigen::Index>(d)),
                                swap_operator(d).matrix());
  r.permutation_residual = (sw * j.op().matrix() * sw - j.op().matrix()).norm();
  r.is_permutation_invariant = r.permutation_residual <= kFlag;

  // ((Delta (x) Delta) o E o Delta)(|i><j|) = delta_ij |ii><ii|; the i != j
  // inputs dephase to zero, so only the diagonal inputs carry a residual.
  const auto n = static_cast<Eigen::Index>(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(i, i) = 1.0;
    const ComplexMatrix img = apply_choi(j, e);
    ComplexMatrix target = ComplexMatrix::Zero(img.rows(), img.cols());
    target(i * n + i, i * n + i) = 1.0;
    const ComplexMatrix diff = img.diagonal().asDiagonal().toDenseMatrix() - target;
    r.classical_residual = std::max(r.classical_residual, diff.norm());
  }
  r.is_classically_consistent = r.classical_residual <= kFlag;
  return r;
}

}  // namespace vqb
