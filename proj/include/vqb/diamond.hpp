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

/// @file diamond.hpp
/// Half diamond norm of a Hermitian-preserving map from its Choi operator:
///
///   1/2 ||Phi||_diamond = min mu  s.t.  Z >= 0,  Z >= J,  mu I_B >= Tr_out Z,
///
/// together with a lower bound from sampled pure inputs on the doubled space.

#include "vqb/channels.hpp"
#include "vqb/random.hpp"
#include "vqb/sdp.hpp"
#include "vqb/sdp_builder.hpp"

#include <cstdint>
#include <random>

namespace vqb {

inline constexpr std::uint64_t kLowerBoundSeed = 0x6d69616d6f6e64u;
inline constexpr std::size_t kLowerBoundSamples = 256;

struct DiamondResult {
  double value = 0.0;
  HermitianOperator witness_z;
  double lower_bound = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  SdpProblem problem;
  SdpSolution solution;

  bool ok() const { return status == SolveStatus::optimal; }
};

/// 1/2 || (Phi (x) id)(|psi><psi|) ||_1 for psi on (input, ancilla), the
/// ancilla having the input dimension.
inline double output_trace_norm(const ChoiOperator& j, const ComplexVector& psi) {
  const auto di = static_cast<Eigen::Index>(j.in_dim());
  const auto dout = static_cast<Eigen::Index>(j.out_dim());
  if (psi.size() != di * di) throw DimensionError("input state must live on input (x) ancilla");
  const ComplexMatrix& m = j.op().matrix();
  // Result on (output, ancilla): sum_ij psi_ia conj(psi_jb) Phi(|i><j|).
  ComplexMatrix out = ComplexMatrix::Zero(dout * di, dout * di);
  for (Eigen::Index i = 0; i < di; ++i)
    for (Eigen::Index jj = 0; jj < di; ++jj) {
      const auto blk = m.block(i * dout, jj * dout, dout, dout);
      for (Eigen::Index a = 0; a < di; ++a)
        for (Eigen::Index b = 0; b < di; ++b) {
          const Complex w = psi(i * di + a) * std::conj(psi(jj * di + b));
          if (w == Complex(0.0)) continue;
          for (Eigen::Index o = 0; o < dout; ++o)
            for (Eigen::Index p = 0; p < dout; ++p) out(o * di + a, p * di + b) += w * blk(o, p);
        }
    }
  return 0.5 * trace_norm(HermitianOperator::unchecked(std::move(out), true));
}

/// Best value of 1/2 ||(Phi (x) id)(psi)||_1 over the maximally entangled
/// input Gamma/sqrt(d) and `samples` Haar-random pure inputs (columns of
/// seeded Haar unitaries on the doubled space).
inline double lower_bound_by_states(const ChoiOperator& j, std::size_t samples = kLowerBoundSamples,
                                    std::uint64_t seed = kLowerBoundSeed) {
  if (samples == 0) throw InvariantError("lower bound needs at least one sample");
  const std::size_t d = j.in_dim();
  const std::size_t n = d * d;
  ComplexVector gamma = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < d; ++i) gamma(static_cast<Eigen::Index>(i * d + i)) = 1.0;
  gamma /= std::sqrt(static_cast<double>(d));
  double best = output_trace_norm(j, gamma);
  std::mt19937_64 rng(seed);
  std::size_t used = 0;
  while (used < samples) {
    const ComplexMatrix u = haar_unitary(n, rng);
    for (Eigen::Index c = 0; c < u.cols() && used < samples; ++c, ++used)
      best = std::max(best, output_trace_norm(j, u.col(c)));
  }
  return best;
}

/// Solves the diamond-norm program for a single-output Hermitian map.
inline DiamondResult half_diamond_distance(const ChoiOperator& j, const SolverConfig& cfg = {},
                                           std::size_t samples = kLowerBoundSamples,
                                           std::uint64_t seed = kLowerBoundSeed) {
  if (j.output_count() != 1) throw DimensionError("diamond norm expects a single-output map");
  const std::size_t d = j.in_dim(), dout = j.out_dim();
  const std::size_t n = d * dout;
  ProblemBuilder b;
  const Variable z = b.psd("Z", n);
  const Variable mu = b.nonneg("mu");
  MatrixExpr zq(n);
  zq.add(z).add_constant(-j.op());
  b.psd_constraint(zq, "Q");
  MatrixExpr cap(d);
  cap.add_scaled(mu, HermitianOperator::identity(d)).add_partial_trace(z, SubsystemDims{d, dout}, {1}, -1.0);
  b.psd_constraint(cap, "P");
  b.minimize(ScalarExpr().add(mu, 1.0));

  DiamondResult r;
  r.problem = b.build();
  r.solution = solve(r.problem, cfg);
  r.status = r.solution.status;
  r.value = scalar_value(r.solution, mu);
  r.witness_z = value(r.solution, z);
  r.lower_bound = samples > 0 ? lower_bound_by_states(j, samples, seed) : 0.0;
  return r;
}

}  // namespace vqb
