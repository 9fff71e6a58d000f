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

/// @file verify.hpp
/// The acceptance suite: eleven numbered checks over the whole library, each
/// reporting pass/fail with a one-line summary of what it measured.

#include "vqb/broadcast.hpp"
#include "vqb/diamond.hpp"
#include "vqb/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace vqb {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// Shared state of one acceptance run: solver settings and the running tally
/// of certificate checks on every optimal solve.
class Acceptance {
 public:
  explicit Acceptance(SolverConfig cfg) : cfg_(cfg) {}

  const SolverConfig& cfg() const { return cfg_; }

  /// Certifies an optimal solve; non-optimal solves are counted separately.
  bool certify(const SdpProblem& p, const SdpSolution& s) {
    if (s.status != SolveStatus::optimal) return false;
    ++certified_;
    const CertificateReport r = check_certificate(p, s, 1e-6);
    if (!r.pass) {
      ++cert_failures_;
      if (first_failure_.empty()) first_failure_ = r.failure;
    }
    return r.pass;
  }
  template <class R>
  bool ok(const R& r) {
    certify(r.problem, r.solution);
    return r.status == SolveStatus::optimal;
  }

  std::size_t certified() const { return certified_; }
  std::size_t certificate_failures() const { return cert_failures_; }
  const std::string& first_failure() const { return first_failure_; }

 private:
  SolverConfig cfg_;
  std::size_t certified_ = 0;
  std::size_t cert_failures_ = 0;
  std::string first_failure_;
};

inline double diamond_of(const HermitianOperator& j, std::size_t d, Acceptance& acc, bool& ok,
                         double* lower = nullptr) {
  const DiamondResult r = half_diamond_distance(ChoiOperator(j, d, {d}), acc.cfg(), lower ? kLowerBoundSamples : 0);
  ok = acc.ok(r) && ok;
  if (lower) *lower = r.lower_bound;
  return r.value;
}

inline CriterionResult criterion_exact(Acceptance& acc) {
  CriterionResult c{1, "exact overhead (3d-1)/(d+1) for d=2,3,4", true, {}};
  for (std::size_t d : {2u, 3u, 4u}) {
    const OverheadResult r = exact_overhead(d, acc.cfg());
    const double dd = static_cast<double>(d), want = (3 * dd - 1) / (dd + 1);
    const bool good = acc.ok(r) && std::abs(r.nu - want) <= 1e-5;
    c.pass = c.pass && good;
    c.detail += "d=" + std::to_string(d) + " nu=" + fmt("%.8f", r.nu) + " ";
  }
  return c;
}

inline CriterionResult criterion_replacement(Acceptance& acc) {
  CriterionResult c{2, "half diamond(id - R) = 1 - 1/d^2 with matching lower bound", true, {}};
  for (std::size_t d : {2u, 3u, 4u}) {
    const double dd = static_cast<double>(d);
    const HermitianOperator j = gamma_operator(d) - HermitianOperator::identity(d * d) / dd;
    bool ok = true;
    double lower = 0.0;
    const double v = diamond_of(j, d, acc, ok, &lower);
    const double want = 1.0 - 1.0 / (dd * dd);
    c.pass = c.pass && ok && std::abs(v - want) <= 1e-6 && std::abs(lower - want) <= 1e-6;
    c.detail += "d=" + std::to_string(d) + " value=" + fmt("%.8f", v) + " lower=" + fmt("%.8f", lower) + " ";
  }
  return c;
}

inline CriterionResult criterion_depolarizing(Acceptance& acc) {
  CriterionResult c{3, "half diamond(Lambda^t - id) = |t| 3/4 at d=2", true, {}};
  for (double t : {-0.5, 0.3, 1.0}) {
    bool ok = true;
    const double v = diamond_of(depolarizing_choi(t, 2).op() - gamma_operator(2), 2, acc, ok);
    c.pass = c.pass && ok && std::abs(v - std::abs(t) * 0.75) <= 1e-6;
    c.detail += "t=" + fmt("%g", t) + " value=" + fmt("%.8f", v) + " ";
  }
  return c;
}

inline CriterionResult criterion_reduction(Acceptance& acc) {
  CriterionResult c{4, "diamond-constrained and depolarizing programs agree", true, {}};
  double worst = 0.0;
  for (double delta : {0.0, 0.05, 0.1, 0.2, 0.5}) {
    const OverheadResult full = approx_overhead({delta, delta}, 2, acc.cfg());
    const OverheadResult dep = approx_overhead_dep(delta, 2, acc.cfg());
    const bool ok = acc.ok(full) && acc.ok(dep);
    worst = std::max(worst, std::abs(full.nu - dep.nu));
    c.pass = c.pass && ok;
  }
  c.pass = c.pass && worst <= 1e-5;
  c.detail = "max |difference| = " + fmt("%.2e", worst);
  return c;
}

inline CriterionResult criterion_tradeoff(Acceptance& acc) {
  CriterionResult c{5, "qubit trade-off anchors and budget ordering", true, {}};
  const TradeoffPoint one = min_error(1.0, 2, acc.cfg());
  const TradeoffPoint more = min_error(1.8, 2, acc.cfg());
  c.pass = acc.ok(one) && acc.ok(more) && std::abs(one.mu - 0.25) <= 5e-3 && std::abs(more.mu - 0.12) <= 0.02;
  c.detail = "mu(1,2)=" + fmt("%.6f", one.mu) + " mu(1.8,2)=" + fmt("%.6f", more.mu);
  for (std::size_t d : {2u, 3u, 4u}) {
    const TradeoffPoint lo = d == 2 ? one : min_error(1.0, d, acc.cfg());
    const TradeoffPoint hi = d == 2 ? more : min_error(1.8, d, acc.cfg());
    if (d != 2) c.pass = acc.ok(lo) && acc.ok(hi) && c.pass;
    const bool capped = lo.mu <= mu_upper_bound_cap(1.0) + 1e-6 && hi.mu <= mu_upper_bound_cap(1.8) + 1e-6;
    c.pass = c.pass && lo.mu >= hi.mu - 1e-6 && capped;
    if (d != 2) c.detail += " d=" + std::to_string(d) + ":" + fmt("%.5f", lo.mu) + ">=" + fmt("%.5f", hi.mu);
  }
  return c;
}

inline CriterionResult criterion_explicit_point(Acceptance& acc) {
  CriterionResult c{6, "explicit feasible point and its error bound", true, {}};
  double worst_gap = -INFINITY;
  for (double gamma : {1.0, 1.5, 2.0})
    for (std::size_t d : {2u, 3u}) {
      const FeasiblePoint p = theorem5_feasible_point(gamma, d, 1e-10);
      const TradeoffPoint opt = min_error(gamma, d, acc.cfg());
      const double bound = mu_upper_bound(gamma, d);
      c.pass = c.pass && p.report.valid && acc.ok(opt) && opt.mu <= bound + 1e-6;
      worst_gap = std::max(worst_gap, opt.mu - bound);
    }
  c.detail = "max(mu - bound) = " + fmt("%.4f", worst_gap);
  return c;
}

inline CriterionResult criterion_z(Acceptance& acc) {
  CriterionResult c{7, "Z(t) nonincreasing, convex, Z(1)=1, Z(t)<=Z(-t)", true, {}};
  std::vector<double> z(11);
  for (int i = 0; i <= 10; ++i) {
    const OverheadResult r = z_function(i / 10.0, 2, acc.cfg());
    c.pass = acc.ok(r) && c.pass;
    z[i] = r.nu;
  }
  double mono = 0.0, convex = 0.0;
  for (int i = 1; i <= 10; ++i) mono = std::max(mono, z[i] - z[i - 1]);
  for (int i = 1; i < 10; ++i) convex = std::max(convex, z[i] - (z[i - 1] + z[i + 1]) / 2);
  double even = -INFINITY;
  for (double t : {0.2, 0.5, 0.8}) {
    const OverheadResult pos = z_function(t, 2, acc.cfg()), neg = z_function(-t, 2, acc.cfg());
    c.pass = acc.ok(pos) && acc.ok(neg) && c.pass;
    even = std::max(even, pos.nu - neg.nu);
  }
  c.pass = c.pass && mono <= 1e-6 && convex <= 1e-6 && std::abs(z[10] - 1.0) <= 1e-8 && even <= 1e-6;
  c.detail = "Z(0)=" + fmt("%.6f", z[0]) + " Z(1)=" + fmt("%.10f", z[10]) + " max rise=" + fmt("%.1e", mono) +
             " max convexity excess=" + fmt("%.1e", convex);
  return c;
}

inline CriterionResult criterion_symmetry(Acceptance& acc) {
  CriterionResult c{8, "approximate overhead symmetric and jointly convex", true, {}};
  constexpr int n = 9;
  std::vector<double> grid(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const OverheadResult r = approx_overhead({i / 8.0, j / 8.0}, 2, acc.cfg());
      c.pass = acc.ok(r) && c.pass;
      grid[i * n + j] = r.nu;
    }
  double asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) asym = std::max(asym, std::abs(grid[i * n + j] - grid[j * n + i]));
  std::mt19937_64 rng(0xc0417e8);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double excess = -INFINITY;
  for (int k = 0; k < 50; ++k) {
    const int i1 = pick(rng), j1 = pick(rng), i2 = pick(rng), j2 = pick(rng);
    const OverheadResult mid = approx_overhead({(i1 + i2) / 16.0, (j1 + j2) / 16.0}, 2, acc.cfg());
    c.pass = acc.ok(mid) && c.pass;
    excess = std::max(excess, mid.nu - (grid[i1 * n + j1] + grid[i2 * n + j2]) / 2);
  }
  c.pass = c.pass && asym <= 1e-5 && excess <= 1e-5;
  c.detail = "max asymmetry=" + fmt("%.1e", asym) + " max convexity excess=" + fmt("%.1e", excess);
  return c;
}

inline CriterionResult criterion_landscape(Acceptance& acc) {
  CriterionResult c{9, "sample efficient at 0.15, not at 0.05", true, {}};
  const OverheadResult at15 = approx_overhead({0.15, 0.15}, 2, acc.cfg());
  const OverheadResult at05 = approx_overhead({0.05, 0.05}, 2, acc.cfg());
  c.pass = acc.ok(at15) && acc.ok(at05) && at15.s < 2.0 - 1e-4 && at05.s >= 2.0 + 1e-4;
  c.detail = "S(0.15)=" + fmt("%.6f", at15.s) + " S(0.05)=" + fmt("%.6f", at05.s);
  return c;
}

inline CriterionResult criterion_simulator() {
  CriterionResult c{10, "simulated protocol statistics", true, {}};
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const DensityOperator rho(HermitianOperator::diagonal({1.0, 0.0}));
  const Observable z = Observable::pauli_z();
  constexpr std::uint64_t shots = 1000000;
  const ProtocolEstimate v = run_protocol(p.decomposition, rho, z, 1, shots, 42);
  const ProtocolEstimate naive = naive_baseline(rho, z, shots, 42);
  const double t = (3.0 - std::sqrt(2.0)) / 4.0, se = v.standard_error();
  const double truth = (z.op().matrix() * rho.op().matrix()).trace().real();
  const bool mean_ok = std::abs(v.mean - (1.0 - t)) <= 5 * se;
  const bool bias_ok = std::abs(v.mean - truth) <= z.norm() * 2 * p.delta + 5 * se;
  const double ratio = v.second_moment / naive.second_moment, nu2 = p.decomposition.nu() * p.decomposition.nu();
  const bool var_ok = std::abs(ratio - nu2) <= 0.1 * nu2;
  c.pass = mean_ok && bias_ok && var_ok;
  c.detail = "mean=" + fmt("%.5f", v.mean) + " expected=" + fmt("%.5f", 1.0 - t) + " se=" + fmt("%.1e", se) +
             " second-moment ratio=" + fmt("%.4f", ratio);
  return c;
}

inline CriterionResult criterion_certificates(Acceptance& acc) {
  CriterionResult c{11, "certificates of all optimal solves; corrupted solution rejected", true, {}};
  const OverheadResult r = exact_overhead(2, acc.cfg());
  SdpSolution bad = r.solution;
  for (auto& x : bad.x) x = x * 1.01;
  const bool rejected = !check_certificate(r.problem, bad, 1e-6).pass;
  c.pass = acc.certificate_failures() == 0 && acc.certified() > 0 && rejected;
  c.detail = std::to_string(acc.certified()) + " certified, " + std::to_string(acc.certificate_failures()) +
             " failed" + (acc.first_failure().empty() ? "" : " (" + acc.first_failure() + ")") +
             (rejected ? ", corruption detected" : ", corruption NOT detected");
  return c;
}

}  // namespace detail

/// Runs all eleven checks in order, calling `report` after each.
inline std::vector<CriterionResult> run_acceptance(const SolverConfig& cfg = {},
                                                   const std::function<void(const CriterionResult&)>& report = {}) {
  detail::Acceptance acc(cfg);
  std::vector<std::function<CriterionResult()>> steps = {
      [&] { return detail::criterion_exact(acc); },       [&] { return detail::criterion_replacement(acc); },
      [&] { return detail::criterion_depolarizing(acc); }, [&] { return detail::criterion_reduction(acc); },
      [&] { return detail::criterion_tradeoff(acc); },    [&] { return detail::criterion_explicit_point(acc); },
      [&] { return detail::criterion_z(acc); },           [&] { return detail::criterion_symmetry(acc); },
      [&] { return detail::criterion_landscape(acc); },   [] { return detail::criterion_simulator(); },
      [&] { return detail::criterion_certificates(acc); }};
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult c;
    try {
      c = steps[i]();
    } catch (const std::exception& e) {
      c.id = static_cast<int>(i + 1);
      c.name = "criterion " + std::to_string(i + 1);
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) report(c);
    out.push_back(std::move(c));
  }
  return out;
}

/// "PASS [ 1] name: detail (0.12 s)"
inline std::string format_criterion(const CriterionResult& c) {
  char head[32];
  std::snprintf(head, sizeof head, "%s [%2d] ", c.pass ? "PASS" : "FAIL", c.id);
  return head + c.name + ": " + c.detail + detail::fmt(" (%.2f s)", c.seconds);
}

}  // namespace vqb
