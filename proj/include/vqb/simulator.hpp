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

/// @file simulator.hpp
/// Monte Carlo execution of the virtual broadcasting protocol.
///
/// Each shot draws the branch E_+ with probability x/(x+y) (E_- otherwise),
/// applies that channel, measures the observable on one receiver and records
/// (x+y) times the signed eigenvalue. Shot i uses Philox stream index i, and
/// results are accumulated as integer outcome counts, so a run is
/// reproducible from its seed independent of how shots are scheduled.

#include "vqb/broadcast.hpp"
#include "vqb/channels.hpp"
#include "vqb/linalg.hpp"
#include "vqb/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

namespace vqb {

/// Observable with its spectral measurement: distinct eigenvalues (merged
/// within 1e-10) and the matching eigenprojectors.
class Observable {
 public:
  static constexpr double kMergeTolerance = 1e-10;

  explicit Observable(HermitianOperator op) : op_(std::move(op)), spectrum_(eig_hermitian(op_)) {
    const Eigen::Index n = spectrum_.eigenvalues.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = spectrum_.eigenvalues(i);
      const ComplexVector col = spectrum_.eigenvectors.col(i);
      if (values_.empty() || v - values_.back() > kMergeTolerance) {
        values_.push_back(v);
        projectors_.push_back(col * col.adjoint());
      } else {
        projectors_.back() += col * col.adjoint();
      }
    }
  }

  static Observable pauli_z() { return Observable(HermitianOperator::diagonal({1.0, -1.0})); }

  const HermitianOperator& op() const { return op_; }
  const Spectrum& spectrum() const { return spectrum_; }
  std::size_t dim() const { return op_.dim(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<ComplexMatrix>& projectors() const { return projectors_; }

  /// M = lambda_max - lambda_min.
  double range() const { return values_.empty() ? 0.0 : values_.back() - values_.front(); }
  /// Operator norm max |lambda|.
  double norm() const {
    return values_.empty() ? 0.0 : std::max(std::abs(values_.front()), std::abs(values_.back()));
  }

  /// Outcome probabilities Tr[P_k sigma]; throws when one is negative beyond
  /// tolerance, which means sigma is not a state.
  std::vector<double> outcome_probabilities(const HermitianOperator& sigma) const {
    if (sigma.dim() != dim()) throw DimensionError("state does not match observable");
    std::vector<double> p(values_.size());
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = (projectors_[k] * sigma.matrix()).trace().real();
      if (p[k] < -1e-9) throw InvariantError("negative outcome probability: branch is not physical");
      p[k] = std::max(p[k], 0.0);
      total += p[k];
    }
    if (std::abs(total - 1.0) > 1e-8) throw InvariantError("branch state does not have unit trace");
    for (double& v : p) v /= total;
    return p;
  }

 private:
  HermitianOperator op_;
  Spectrum spectrum_;
  std::vector<double> values_;
  std::vector<ComplexMatrix> projectors_;
};

struct HoeffdingBudget {
  double M = 0.0;
  double nu = 0.0;
  double eps = 0.0;
  double fail_prob = 0.0;
  double unrounded = 0.0;  // M^2 nu^2 / eps^2 ln(2 / fail_prob)
  std::uint64_t n = 0;
};

/// Samples needed so the (x+y)-scaled estimate is within eps with
/// probability at least 1 - fail_prob.
inline HoeffdingBudget required_samples(double M, double nu, double eps, double fail_prob) {
  if (!(M > 0 && nu > 0 && eps > 0 && fail_prob > 0 && fail_prob < 1))
    throw InvariantError("Hoeffding inputs must be positive with fail_prob < 1");
  HoeffdingBudget b{M, nu, eps, fail_prob, 0.0, 0};
  b.unrounded = M * M * nu * nu / (eps * eps) * std::log(2.0 / fail_prob);
  b.n = static_cast<std::uint64_t>(std::ceil(b.unrounded));
  return b;
}

struct ProtocolEstimate {
  double mean = 0.0;
  double sample_std = 0.0;
  double second_moment = 0.0;  // mean of squared per-shot values
  std::uint64_t shots = 0;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t plus_shots = 0;
  std::uint64_t minus_shots = 0;
  /// Per-receiver means; two entries for the naive baseline, empty otherwise.
  std::vector<double> receiver_means;

  double standard_error() const {
    return shots > 0 ? sample_std / std::sqrt(static_cast<double>(shots)) : 0.0;
  }
};

namespace detail {

// Branch b (0: plus, 1: minus): probability, sign, outcome distribution.
struct Branch {
  double probability = 0.0;
  double sign = 1.0;
  std::vector<double> cumulative;
};

inline std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

inline std::vector<double> cumulative_of(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) c[k] = acc += p[k];
  return c;
}

// counts[b * outcomes + k] over shot indices [begin, end).
inline void count_shots(const std::vector<Branch>& branches, std::size_t outcomes, std::uint64_t seed,
                        std::uint64_t begin, std::uint64_t end, std::vector<std::uint64_t>& counts) {
  counts.assign(branches.size() * outcomes, 0);
  for (std::uint64_t i = begin; i < end; ++i) {
    const auto u = Philox4x32::uniforms(seed, i);
    const std::size_t b = branches.size() == 1 || u[0] < branches[0].probability ? 0 : 1;
    ++counts[b * outcomes + pick(branches[b].cumulative, u[1])];
  }
}

inline std::vector<std::uint64_t> count_parallel(const std::vector<Branch>& branches, std::size_t outcomes,
                                                 std::uint64_t seed, std::uint64_t shots, std::size_t jobs) {
  jobs = std::max<std::size_t>(1, std::min<std::uint64_t>(jobs, shots));
  std::vector<std::vector<std::uint64_t>> parts(jobs);
  std::vector<std::thread> threads;
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::uint64_t begin = shots * j / jobs, end = shots * (j + 1) / jobs;
    if (j + 1 == jobs)
      count_shots(branches, outcomes, seed, begin, end, parts[j]);
    else
      threads.emplace_back(count_shots, std::cref(branches), outcomes, seed, begin, end, std::ref(parts[j]));
  }
  for (auto& t : threads) t.join();
  std::vector<std::uint64_t> total(branches.size() * outcomes, 0);
  for (const auto& p : parts)
    for (std::size_t k = 0; k < p.size(); ++k) total[k] += p[k];
  return total;
}

inline HermitianOperator receiver_marginal(const ChoiOperator& j, const DensityOperator& rho, int marginal) {
  if (j.output_count() != 2) throw DimensionError("protocol expects a two-output map");
  if (marginal != 1 && marginal != 2) throw DimensionError("marginal must be 1 or 2");
  const HermitianOperator out = apply_choi(j, rho);
  return partial_trace(out, j.out_layout(), {marginal == 1 ? 1u : 0u});
}

inline std::vector<Branch> protocol_branches(const BroadcastDecomposition& dec, const DensityOperator& rho,
                                             const Observable& obs, int marginal) {
  if (rho.dim() != dec.in_dim()) throw DimensionError("state does not match the map input");
  if (!(dec.x > 0) || dec.y < 0) throw InvariantError("decomposition needs x > 0 and y >= 0");
  std::vector<Branch> out;
  const HermitianOperator plus = receiver_marginal(dec.j1, rho, marginal) / dec.x;
  out.push_back({dec.p_plus(), 1.0, cumulative_of(obs.outcome_probabilities(plus))});
  if (dec.y > 0) {
    const HermitianOperator minus = receiver_marginal(dec.j2, rho, marginal) / dec.y;
    out.push_back({dec.p_minus(), -1.0, cumulative_of(obs.outcome_probabilities(minus))});
  } else if (dec.j2.op().frobenius_norm() > 1e-9) {
    throw InvariantError("y = 0 but the negative part has nonzero weight");
  }
  return out;
}

inline void summarize(ProtocolEstimate& e, const std::vector<Branch>& branches, const Observable& obs,
                      const std::vector<std::uint64_t>& counts) {
  const std::size_t m = obs.values().size();
  double sum = 0.0, sq = 0.0;
  for (std::size_t b = 0; b < branches.size(); ++b)
    for (std::size_t k = 0; k < m; ++k) {
      const double c = static_cast<double>(counts[b * m + k]);
      const double v = branches[b].sign * e.scale * obs.values()[k];
      sum += c * v;
      sq += c * v * v;
      (b == 0 ? e.plus_shots : e.minus_shots) += counts[b * m + k];
    }
  const double n = static_cast<double>(e.shots);
  e.mean = sum / n;
  e.second_moment = sq / n;
  e.sample_std = e.shots > 1 ? std::sqrt(std::max(0.0, (sq - n * e.mean * e.mean) / (n - 1))) : 0.0;
}

}  // namespace detail

/// Exact expectation of the protocol estimator:
/// x Tr[O sigma_+] - y Tr[O sigma_-] = Tr[O Tr_other E(rho)].
inline double expected_value(const BroadcastDecomposition& dec, const DensityOperator& rho,
                             const Observable& obs, int marginal) {
  const HermitianOperator m = detail::receiver_marginal(dec.map(), rho, marginal);
  return (obs.op().matrix() * m.matrix()).trace().real();
}

/// Exact second moment of a single shot, (x+y)^2 E[lambda^2].
inline double expected_second_moment(const BroadcastDecomposition& dec, const DensityOperator& rho,
                                     const Observable& obs, int marginal) {
  const auto branches = detail::protocol_branches(dec, rho, obs, marginal);
  double out = 0.0;
  for (const auto& b : branches) {
    double prev = 0.0;
    for (std::size_t k = 0; k < b.cumulative.size(); ++k) {
      out += b.probability * (b.cumulative[k] - prev) * obs.values()[k] * obs.values()[k];
      prev = b.cumulative[k];
    }
  }
  return out * dec.nu() * dec.nu();
}

inline ProtocolEstimate run_protocol(const BroadcastDecomposition& dec, const DensityOperator& rho,
                                     const Observable& obs, int marginal, std::uint64_t shots,
                                     std::uint64_t seed, std::size_t jobs = 1) {
  if (shots == 0) throw InvariantError("shots must be positive");
  const auto branches = detail::protocol_branches(dec, rho, obs, marginal);
  ProtocolEstimate e;
  e.shots = shots;
  e.scale = dec.nu();
  e.seed = seed;
  const auto counts = detail::count_parallel(branches, obs.values().size(), seed, shots, jobs);
  detail::summarize(e, branches, obs, counts);
  return e;
}

/// Naive strategy: the copies are split evenly between the two receivers,
/// each measuring the observable on rho directly.
inline ProtocolEstimate naive_baseline(const DensityOperator& rho, const Observable& obs, std::uint64_t shots,
                                       std::uint64_t seed, std::size_t jobs = 1) {
  if (shots < 2) throw InvariantError("naive baseline needs at least two shots");
  if (rho.dim() != obs.dim()) throw DimensionError("state does not match observable");
  const std::vector<detail::Branch> branches{{1.0, 1.0, detail::cumulative_of(obs.outcome_probabilities(rho.op()))}};
  const std::uint64_t half = shots / 2;
  const std::size_t m = obs.values().size();
  ProtocolEstimate e;
  e.shots = 2 * half;
  e.seed = seed;
  std::vector<std::uint64_t> total(m, 0);
  for (std::uint64_t r = 0; r < 2; ++r) {
    const auto counts = detail::count_parallel(branches, m, seed ^ (r * 0x9e3779b97f4a7c15ull), half, jobs);
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      total[k] += counts[k];
      sum += static_cast<double>(counts[k]) * obs.values()[k];
    }
    e.receiver_means.push_back(sum / static_cast<double>(half));
  }
  detail::summarize(e, branches, obs, total);
  return e;
}

}  // namespace vqb
