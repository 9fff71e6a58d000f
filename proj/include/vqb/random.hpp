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

/// @file random.hpp
/// Random number generation: the Philox4x32-10 counter-based generator used
/// by the Monte Carlo simulator, and seeded samplers for unitaries, states
/// and Hermitian test operators.

#include "vqb/linalg.hpp"

#include <array>
#include <cstdint>
#include <random>

namespace vqb {

/// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11 "Parallel random numbers:
/// as easy as 1, 2, 3"). Output block = f(counter, key) with ten rounds of
/// the multiply/xor bijection and a Weyl-sequence key schedule. Each
/// (key, counter) pair yields four independent 32-bit words, so disjoint
/// counters give reproducible streams regardless of evaluation order.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  /// Key derived from a 64-bit seed.
  static constexpr Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

  /// Two uniform doubles in [0, 1) with 53 random bits each for the given
  /// 64-bit stream index.
  static std::array<double, 2> uniforms(std::uint64_t seed, std::uint64_t index) {
    const Counter out = block(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u, 0u},
        key_from_seed(seed));
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// ---------------------------------------------------------------------------
// Seeded samplers. These use std::mt19937_64 with normal deviates, so the
// streams are reproducible for a given standard library implementation.

inline ComplexMatrix ginibre(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
inline ComplexMatrix haar_unitary(std::size_t d, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0) q.col(j) *= rjj / mag;
  }
  return q;
}

/// Haar-random pure state.
inline ComplexVector haar_state(std::size_t d, std::mt19937_64& rng) {
  ComplexVector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

/// Random full-rank density operator (Hilbert-Schmidt measure).
inline DensityOperator random_density(std::size_t d, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(HermitianOperator(rho));
}

/// Random Hermitian operator with GUE-like entries.
inline HermitianOperator random_hermitian(std::size_t d, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  return HermitianOperator::unchecked((g + g.adjoint()) * 0.5);
}

}  // namespace vqb
