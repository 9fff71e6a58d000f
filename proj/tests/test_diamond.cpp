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

#include "vqb/diamond.hpp"

#include "test_util.hpp"

using namespace vqb;
using vqb::testing::random_channel;

namespace {

ChoiOperator map_of(const HermitianOperator& j, std::size_t d) { return ChoiOperator(j, d, {d}); }

HermitianOperator id_minus_replacement(std::size_t d) {
  return gamma_operator(d) - HermitianOperator::identity(d * d) / static_cast<double>(d);
}

// Choi operator of X -> V Phi(U X U^dag) V^dag.
HermitianOperator conjugated(const HermitianOperator& j, const ComplexMatrix& u, const ComplexMatrix& v) {
  const ComplexMatrix k = kron(ComplexMatrix(u.transpose()), v);
  return HermitianOperator(k * j.matrix() * k.adjoint());
}

void expect_witness(const DiamondResult& r, const ChoiOperator& j, std::size_t d) {
  EXPECT_GE(min_eigenvalue(r.witness_z), -1e-6);
  EXPECT_GE(min_eigenvalue(r.witness_z - j.op()), -1e-6);
  const HermitianOperator tz = partial_trace(r.witness_z, SubsystemDims{d, d}, {1});
  EXPECT_LE(eig_hermitian(tz).max_eigenvalue(), r.value + 1e-6);
  EXPECT_GE(r.value, r.lower_bound - 1e-6);
}

}  // namespace

TEST(diamond, identity_minus_replacement) {
  for (std::size_t d : {2u, 3u, 4u}) {
    const ChoiOperator j = map_of(id_minus_replacement(d), d);
    const DiamondResult r = half_diamond_distance(j);
    ASSERT_TRUE(r.ok()) << r.solution.message;
    const double expected = 1.0 - 1.0 / static_cast<double>(d * d);
    EXPECT_NEAR(r.value, expected, 1e-6) << "d=" << d;
    EXPECT_NEAR(r.lower_bound, expected, 1e-6) << "d=" << d;
    EXPECT_TRUE(check_certificate(r.problem, r.solution, 1e-6).pass);
    expect_witness(r, j, d);
  }
}

TEST(diamond, maximally_entangled_input_alone) {
  const ChoiOperator j = map_of(id_minus_replacement(2), 2);
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(output_trace_norm(j, psi), 0.75, 1e-12);
}

TEST(diamond, depolarizing_difference) {
  const std::size_t d = 2;
  for (double t : {-0.5, 0.3, 0.4, 1.0}) {
    const HermitianOperator diff = depolarizing_choi(t, d).op() - gamma_operator(d);
    const DiamondResult r = half_diamond_distance(map_of(diff, d));
    ASSERT_TRUE(r.ok()) << r.solution.message;
    EXPECT_NEAR(r.value, std::abs(t) * 3.0 / 4.0, 1e-6) << "t=" << t;
    EXPECT_NEAR(r.lower_bound, std::abs(t) * 3.0 / 4.0, 1e-6) << "t=" << t;
    EXPECT_TRUE(check_certificate(r.problem, r.solution, 1e-6).pass);
  }
}

TEST(diamond, zero_map) {
  const ChoiOperator j = map_of(HermitianOperator::zero(4), 2);
  const DiamondResult r = half_diamond_distance(j);
  ASSERT_TRUE(r.ok()) << r.solution.message;
  EXPECT_NEAR(r.value, 0.0, 1e-7);
  EXPECT_EQ(lower_bound_by_states(j, 16), 0.0);
}

TEST(diamond, homogeneity) {
  std::mt19937_64 rng(11);
  const HermitianOperator diff = random_channel(2, 2, 2, rng).op() - random_channel(2, 2, 3, rng).op();
  const double base = half_diamond_distance(map_of(diff, 2)).value;
  for (double c : {-2.0, 0.5, 3.0}) {
    const DiamondResult r = half_diamond_distance(map_of(diff * c, 2));
    ASSERT_TRUE(r.ok());
    EXPECT_NEAR(r.value, std::abs(c) * base, 1e-7) << "c=" << c;
  }
}

TEST(diamond, triangle_inequality) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 4; ++trial) {
    const HermitianOperator a = random_channel(2, 2, 2, rng).op() - random_channel(2, 2, 1, rng).op();
    const HermitianOperator b = random_channel(2, 2, 3, rng).op() - random_channel(2, 2, 2, rng).op();
    const double na = half_diamond_distance(map_of(a, 2), {}, 0).value;
    const double nb = half_diamond_distance(map_of(b, 2), {}, 0).value;
    const double nab = half_diamond_distance(map_of(a + b, 2), {}, 0).value;
    EXPECT_LE(nab, na + nb + 1e-7);
  }
}

TEST(diamond, unitary_invariance) {
  std::mt19937_64 rng(13);
  for (std::size_t d : {2u, 3u}) {
    const HermitianOperator diff = random_channel(d, d, 2, rng).op() - random_channel(d, d, 2, rng).op();
    const ComplexMatrix u = haar_unitary(d, rng), v = haar_unitary(d, rng);
    const double before = half_diamond_distance(map_of(diff, d), {}, 0).value;
    const double after = half_diamond_distance(map_of(conjugated(diff, u, v), d), {}, 0).value;
    EXPECT_NEAR(before, after, 1e-7) << "d=" << d;
  }
}

TEST(diamond, lower_bound_never_exceeds_value) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const ChoiOperator j = map_of(random_channel(2, 2, 2, rng).op() - random_channel(2, 2, 2, rng).op(), 2);
    const DiamondResult r = half_diamond_distance(j);
    ASSERT_TRUE(r.ok());
    EXPECT_LE(r.lower_bound, r.value + 1e-6);
    EXPECT_GT(r.lower_bound, 0.0);
    expect_witness(r, j, 2);
  }
}

TEST(diamond, lower_bound_is_deterministic) {
  std::mt19937_64 rng(15);
  const ChoiOperator j = map_of(random_channel(2, 2, 2, rng).op() - random_channel(2, 2, 1, rng).op(), 2);
  EXPECT_EQ(lower_bound_by_states(j, 64, 7), lower_bound_by_states(j, 64, 7));
  EXPECT_THROW(lower_bound_by_states(j, 0), InvariantError);
}

TEST(diamond, rejects_multi_output_maps) {
  const ChoiOperator j = canonical_broadcast_choi(2, 0.0);
  EXPECT_THROW(half_diamond_distance(j), DimensionError);
}
