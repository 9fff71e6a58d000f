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

/// @file broadcast.hpp
/// Sampling-overhead programs for virtual broadcasting.
///
/// A Hermitian-preserving trace-preserving map E is written as
/// E = x E_+ - y E_- with CPTP E_+, E_- and x - y = 1; in Choi form
/// J = J1 - J2 with J1, J2 >= 0, Tr_out J1 = x I, Tr_out J2 = y I. The
/// sampling overhead of E is nu = min (x + y) and S = nu^2. Every program in
/// this file is an instance of that decomposition with extra constraints on
/// the two one-output marginals of J1 - J2.

#include "vqb/channels.hpp"
#include "vqb/diamond.hpp"
#include "vqb/sdp.hpp"
#include "vqb/sdp_builder.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace vqb {

// ---------------------------------------------------------------------------
// Decompositions.

struct DecompositionReport {
  bool valid = false;
  double weight_residual = 0.0;    // |x - y - 1|
  double min_eig_first = 0.0;      // lambda_min(J1)
  double min_eig_second = 0.0;     // lambda_min(J2)
  double trace_residual_first = 0.0;   // ||Tr_out J1 - x I||_F
  double trace_residual_second = 0.0;  // ||Tr_out J2 - y I||_F
};

/// x E_+ - y E_- in Choi form; j1 and j2 carry weights x and y.
struct BroadcastDecomposition {
  ChoiOperator j1;
  ChoiOperator j2;
  double x = 0.0;
  double y = 0.0;

  double nu() const { return x + y; }
  double p_plus() const { return x / (x + y); }
  double p_minus() const { return 1.0 - p_plus(); }
  std::size_t in_dim() const { return j1.in_dim(); }

  /// Choi operator of the represented map, J1 - J2.
  ChoiOperator map() const {
    return ChoiOperator(j1.op() - j2.op(), j1.in_dim(), j1.out_layout()).with_weight(x - y);
  }

  DecompositionReport check(double tolerance = 1e-9) const {
    DecompositionReport r;
    r.weight_residual = std::abs(x - y - 1.0);
    r.min_eig_first = min_eigenvalue(j1.op());
    r.min_eig_second = min_eigenvalue(j2.op());
    r.trace_residual_first = j1.trace_weight_residual(x);
    r.trace_residual_second = j2.trace_weight_residual(y);
    r.valid = x >= -tolerance && y >= -tolerance && r.weight_residual <= tolerance &&
              r.min_eig_first >= -tolerance && r.min_eig_second >= -tolerance &&
              r.trace_residual_first <= tolerance && r.trace_residual_second <= tolerance;
    return r;
  }
};

struct OverheadResult {
  double nu = 0.0;
  double s = 0.0;
  std::optional<double> t;
  BroadcastDecomposition decomposition;
  SolveStatus status = SolveStatus::numerical_failure;
  SdpProblem problem;
  SdpSolution solution;

  bool ok() const { return status == SolveStatus::optimal; }
  /// Beats the naive strategy of splitting the copies between two parties.
  bool sample_efficient() const { return s < 2.0; }
};

struct ErrorThresholds {
  double a = 0.0;
  double b = 0.0;

  ErrorThresholds() = default;
  ErrorThresholds(double a_, double b_) : a(a_), b(b_) {
    if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1))
      throw InvariantError("error thresholds must lie in [0, 1]");
  }
};

struct TradeoffPoint {
  double gamma = 1.0;
  std::size_t d = 2;
  double mu = 0.0;
  double t = 0.0;
  double nu = 0.0;
  BroadcastDecomposition decomposition;
  SolveStatus status = SolveStatus::numerical_failure;
  SdpProblem problem;
  SdpSolution solution;

  bool ok() const { return status == SolveStatus::optimal; }
};

// ---------------------------------------------------------------------------
// Helpers.

/// d^2 / (d^2 - 1): the factor relating the depolarizing parameter t to the
/// half diamond distance delta = |t| (d^2 - 1)/d^2 of Lambda^t from identity.
inline double depolarizing_factor(std::size_t d) {
  const double dd = static_cast<double>(d) * static_cast<double>(d);
  return dd / (dd - 1.0);
}

/// Gamma on factors (first, second) of (B, B1, B2), identity on the third.
inline HermitianOperator gamma_between(std::size_t d, std::size_t first, std::size_t second) {
  if (first > 2 || second > 2 || first == second) throw DimensionError("invalid factor pair");
  const HermitianOperator raw = kron(gamma_operator(d), HermitianOperator::identity(d));
  // raw acts on (first, second, other); output factor k = input factor perm[k].
  std::vector<std::size_t> perm(3);
  for (std::size_t k = 0; k < 3; ++k) perm[k] = k == first ? 0 : (k == second ? 1 : 2);
  return permute_subsystems(raw, SubsystemDims{d, d, d}, perm);
}

namespace detail {

/// The shared part of every overhead program.
struct DecompositionVars {
  Variable j1, j2, x, y;
  std::size_t d = 0;
  SubsystemDims out;
};

inline DecompositionVars add_decomposition(ProblemBuilder& b, std::size_t d, const SubsystemDims& out) {
  DecompositionVars v;
  v.d = d;
  v.out = out;
  const std::size_t n = d * out.total();
  v.j1 = b.psd("J1", n);
  v.j2 = b.psd("J2", n);
  v.x = b.nonneg("x");
  v.y = b.nonneg("y");
  std::vector<std::size_t> dims{d};
  dims.insert(dims.end(), out.dims().begin(), out.dims().end());
  const SubsystemDims layout(dims);
  std::vector<std::size_t> outs;
  for (std::size_t i = 1; i < layout.count(); ++i) outs.push_back(i);
  const HermitianOperator id = HermitianOperator::identity(d);
  MatrixExpr w1(d), w2(d);
  w1.add_partial_trace(v.j1, layout, outs).add_scaled(v.x, -id);
  w2.add_partial_trace(v.j2, layout, outs).add_scaled(v.y, -id);
  b.equal(w1, HermitianOperator::zero(d), "weight1");
  b.equal(w2, HermitianOperator::zero(d), "weight2");
  b.equal(ScalarExpr().add(v.x, 1.0).add(v.y, -1.0), 1.0, "x-y");
  return v;
}

/// Marginal of J1 - J2 keeping output `keep` (1 or 2) of a broadcast layout.
inline MatrixExpr marginal_expr(const DecompositionVars& v, std::size_t keep) {
  const std::size_t d = v.d;
  const SubsystemDims layout{d, d, d};
  const std::size_t drop = keep == 1 ? 2 : 1;
  MatrixExpr e(d * d);
  e.add_partial_trace(v.j1, layout, {drop}).add_partial_trace(v.j2, layout, {drop}, -1.0);
  return e;
}

// Moves a solver block onto {J >= 0, Tr_out J = w I}: the output trace is
// corrected by a product term, then just enough of w I / d_out is mixed in
// to lift a slightly negative spectrum. Both moves are of the size of the
// solver residuals.
inline HermitianOperator repair_part(const HermitianOperator& j, std::size_t d, const SubsystemDims& out, double w) {
  const auto dout = static_cast<double>(out.total());
  const HermitianOperator id_out = HermitianOperator::identity(out.total());
  if (w <= 0.0) return HermitianOperator::zero(j.dim());
  std::vector<std::size_t> dims{d};
  dims.insert(dims.end(), out.dims().begin(), out.dims().end());
  std::vector<std::size_t> outs;
  for (std::size_t i = 1; i < dims.size(); ++i) outs.push_back(i);
  const HermitianOperator defect =
      HermitianOperator::identity(d) * w - partial_trace(j, SubsystemDims(dims), outs);
  HermitianOperator fixed = j + kron(defect, id_out) * (1.0 / dout);
  const double lo = min_eigenvalue(fixed);
  if (lo < 0.0) {
    const double eps = -lo / (w / dout - lo);
    fixed = fixed * (1.0 - eps) + HermitianOperator::identity(j.dim()) * (eps * w / dout);
  }
  return fixed;
}

template <class Result>
void fill_decomposition(Result& r, const DecompositionVars& v) {
  const SdpSolution& s = r.solution;
  double x = scalar_value(s, v.x), y = scalar_value(s, v.y);
  HermitianOperator j1 = value(s, v.j1), j2 = value(s, v.j2);
  if (s.status == SolveStatus::optimal) {
    // Keep nu = x + y and make x - y = 1 exact.
    const double nu = std::max(x + y, 1.0);
    x = (nu + 1.0) / 2.0;
    y = (nu - 1.0) / 2.0;
    j1 = repair_part(j1, v.d, v.out, x);
    j2 = repair_part(j2, v.d, v.out, y);
  }
  r.decomposition.x = x;
  r.decomposition.y = y;
  r.decomposition.j1 = ChoiOperator(j1, v.d, v.out).with_weight(x);
  r.decomposition.j2 = ChoiOperator(j2, v.d, v.out).with_weight(y);
}

inline OverheadResult finish(ProblemBuilder& b, const DecompositionVars& v, const SolverConfig& cfg) {
  b.minimize(ScalarExpr().add(v.x, 1.0).add(v.y, 1.0));
  OverheadResult r;
  r.problem = b.build();
  r.solution = solve(r.problem, cfg);
  r.status = r.solution.status;
  fill_decomposition(r, v);
  r.nu = r.decomposition.nu();
  r.s = r.nu * r.nu;
  return r;
}

inline void check_dim(std::size_t d) {
  if (d < 2) throw DimensionError("dimension must be >= 2");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Programs.

/// Optimal decomposition of a given Hermitian-preserving trace-preserving map.
inline OverheadResult overhead_of_map(const ChoiOperator& j, const SolverConfig& cfg = {}) {
  if (j.trace_weight_residual(1.0) > tol::kPsd)
    throw InvariantError("overhead_of_map expects a trace-preserving map");
  ProblemBuilder b;
  const auto v = detail::add_decomposition(b, j.in_dim(), j.out_layout());
  MatrixExpr diff(j.op().dim());
  diff.add(v.j1).add(v.j2, -1.0);
  b.equal(diff, j.op(), "J1-J2");
  return detail::finish(b, v, cfg);
}

/// Broadcasting map with both marginals fixed to Lambda^t (t = 0: exact).
inline OverheadResult z_program(double t, std::size_t d, const SolverConfig& cfg = {}) {
  detail::check_dim(d);
  ProblemBuilder b;
  const auto v = detail::add_decomposition(b, d, SubsystemDims{d, d});
  const HermitianOperator target = depolarizing_choi(t, d).op();
  b.equal(detail::marginal_expr(v, 1), target, "marginal1");
  b.equal(detail::marginal_expr(v, 2), target, "marginal2");
  OverheadResult r = detail::finish(b, v, cfg);
  r.t = t;
  return r;
}

/// Minimum overhead over all broadcasting maps (both marginals identity).
inline OverheadResult exact_overhead(std::size_t d, const SolverConfig& cfg = {}) {
  return z_program(0.0, d, cfg);
}

/// Overhead of the best broadcasting map with depolarizing marginals Lambda^t.
/// Returns nu, or the solver status when the program fails.
inline OverheadResult z_function(double t, std::size_t d, const SolverConfig& cfg = {}) {
  return z_program(t, d, cfg);
}

/// Minimum overhead with marginal half diamond distances at most (a, b).
/// Each bound uses the blocks Z_i >= 0, Z_i >= J_i - Gamma and
/// thr_i I - Tr_out Z_i >= 0. A zero threshold is imposed as the exact
/// marginal equality, which is the same set without the degenerate blocks.
inline OverheadResult approx_overhead(const ErrorThresholds& thr, std::size_t d,
                                      const SolverConfig& cfg = {}) {
  detail::check_dim(d);
  ProblemBuilder b;
  const auto v = detail::add_decomposition(b, d, SubsystemDims{d, d});
  const HermitianOperator gamma = gamma_operator(d);
  const double bounds[2] = {thr.a, thr.b};
  for (std::size_t keep = 1; keep <= 2; ++keep) {
    const double bound = bounds[keep - 1];
    const std::string name = "marginal" + std::to_string(keep);
    if (bound == 0.0) {
      b.equal(detail::marginal_expr(v, keep), gamma, name);
      continue;
    }
    const Variable z = b.psd(name + ".Z", d * d);
    MatrixExpr zq(d * d);
    zq.add(z).add_constant(gamma);
    zq.add_partial_trace(v.j1, SubsystemDims{d, d, d}, {keep == 1 ? 2u : 1u}, -1.0);
    zq.add_partial_trace(v.j2, SubsystemDims{d, d, d}, {keep == 1 ? 2u : 1u}, 1.0);
    b.psd_constraint(zq, name + ".Q");
    MatrixExpr cap(d);
    cap.add_constant(HermitianOperator::identity(d) * bound);
    cap.add_partial_trace(z, SubsystemDims{d, d}, {1}, -1.0);
    b.psd_constraint(cap, name + ".P");
  }
  return detail::finish(b, v, cfg);
}

/// The depolarizing reduction: marginals fixed to Lambda^t with
/// t = min(delta d^2/(d^2 - 1), 1).
inline OverheadResult approx_overhead_dep(double delta, std::size_t d, const SolverConfig& cfg = {}) {
  if (!(delta >= 0 && delta <= 1)) throw InvariantError("delta must lie in [0, 1]");
  detail::check_dim(d);
  return z_program(std::min(delta * depolarizing_factor(d), 1.0), d, cfg);
}

/// Minimum balanced marginal error mu(gamma, d) at sample budget
/// (x + y)^2 <= gamma, linearized as x + y <= sqrt(gamma) for x, y >= 0.
/// Marginals are Lambda^t with t = delta d^2/(d^2 - 1) and delta a
/// nonnegative variable. With fixed_delta the error is pinned instead of
/// minimized (a feasibility question).
inline TradeoffPoint min_error(double gamma, std::size_t d, const SolverConfig& cfg = {},
                               std::optional<double> fixed_delta = std::nullopt) {
  detail::check_dim(d);
  if (!std::isfinite(gamma) || gamma < 0) throw InvariantError("gamma must be a nonnegative number");
  ProblemBuilder b;
  const auto v = detail::add_decomposition(b, d, SubsystemDims{d, d});
  const Variable delta = b.nonneg("delta");
  b.less_equal(ScalarExpr().add(v.x, 1.0).add(v.y, 1.0), std::sqrt(gamma), "budget");
  const HermitianOperator gamma_op = gamma_operator(d);
  const HermitianOperator shift =
      (gamma_op - HermitianOperator::identity(d * d) / static_cast<double>(d)) * depolarizing_factor(d);
  for (std::size_t keep = 1; keep <= 2; ++keep) {
    MatrixExpr e = detail::marginal_expr(v, keep);
    e.add_scaled(delta, shift);
    b.equal(e, gamma_op, "marginal" + std::to_string(keep));
  }
  if (fixed_delta) b.equal(ScalarExpr().add(delta, 1.0), *fixed_delta, "delta");
  b.minimize(ScalarExpr().add(delta, 1.0));

  TradeoffPoint r;
  r.gamma = gamma;
  r.d = d;
  r.problem = b.build();
  r.solution = solve(r.problem, cfg);
  r.status = r.solution.status;
  detail::fill_decomposition(r, v);
  r.mu = scalar_value(r.solution, delta);
  r.t = r.mu * depolarizing_factor(d);
  r.nu = r.decomposition.nu();
  return r;
}

/// Error reached by the explicit budget-gamma construction, ((d^2 - 1)/d^2)(3 - sqrt(gamma))/4, clamped at 0.
inline double mu_upper_bound(double gamma, std::size_t d) {
  if (gamma < 1) throw InvariantError("gamma must be >= 1");
  return std::max(0.0, (3.0 - std::sqrt(gamma)) / 4.0 / depolarizing_factor(d));
}

/// The dimension-free cap (3 - sqrt(gamma))/4, clamped at 0.
inline double mu_upper_bound_cap(double gamma) {
  if (gamma < 1) throw InvariantError("gamma must be >= 1");
  return std::max(0.0, (3.0 - std::sqrt(gamma)) / 4.0);
}

struct FeasiblePointReport {
  bool valid = false;
  DecompositionReport decomposition;
  double marginal_residual_first = 0.0;   // ||Tr_{B2}(J1 - J2) - Lambda^t||_F
  double marginal_residual_second = 0.0;  // ||Tr_{B1}(J1 - J2) - Lambda^t||_F
  double t = 0.0;
};

struct FeasiblePoint {
  BroadcastDecomposition decomposition;
  double delta = 0.0;
  FeasiblePointReport report;
};

/// Explicit feasible point for budget gamma in [1, 9]: a mixture of the two
/// "keep on one side, replace the other" channels minus the channel that
/// discards the input and prepares Gamma/d on the outputs.
inline FeasiblePoint theorem5_feasible_point(double gamma, std::size_t d, double tolerance = 1e-10) {
  detail::check_dim(d);
  if (!(gamma >= 1 && gamma <= 9)) throw InvariantError("gamma must lie in [1, 9]");
  const double r = std::sqrt(gamma), dd = static_cast<double>(d);
  const SubsystemDims out{d, d};
  const HermitianOperator j1 = (gamma_between(d, 0, 1) + gamma_between(d, 0, 2)) * ((r + 1) / 4 / dd);
  const HermitianOperator j2 = gamma_between(d, 1, 2) * ((r - 1) / 2 / dd);
  FeasiblePoint p;
  p.decomposition.x = (r + 1) / 2;
  p.decomposition.y = (r - 1) / 2;
  p.decomposition.j1 = ChoiOperator(j1, d, out).with_weight(p.decomposition.x);
  p.decomposition.j2 = ChoiOperator(j2, d, out).with_weight(p.decomposition.y);
  p.delta = (3 - r) / 4 / depolarizing_factor(d);

  FeasiblePointReport& rep = p.report;
  rep.t = (3 - r) / 4;
  rep.decomposition = p.decomposition.check(tolerance);
  const ChoiOperator m = p.decomposition.map();
  const HermitianOperator target = depolarizing_choi(rep.t, d).op();
  rep.marginal_residual_first = (marginal_choi(m, 2).op() - target).frobenius_norm();
  rep.marginal_residual_second = (marginal_choi(m, 1).op() - target).frobenius_norm();
  rep.valid = rep.decomposition.valid && rep.marginal_residual_first <= tolerance &&
              rep.marginal_residual_second <= tolerance;
  return p;
}

}  // namespace vqb
