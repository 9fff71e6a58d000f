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

#include "vqb/simulator.hpp"

#include "test_util.hpp"

using namespace vqb;

namespace {

DensityOperator ket0() { return DensityOperator(HermitianOperator::diagonal({1.0, 0.0})); }

BroadcastDecomposition keep_first(std::size_t d) {
  BroadcastDecomposition dec;
  dec.x = 1.0;
  dec.y = 0.0;
  dec.j1 = ChoiOperator(gamma_between(d, 0, 1) / static_cast<double>(d), d, {d, d}).with_weight(1.0);
  dec.j2 = ChoiOperator(HermitianOperator::zero(d * d * d), d, {d, d}).with_weight(0.0);
  return dec;
}

}  // namespace

// Known-answer vectors for Philox4x32-10 from the reference implementation.
TEST(philox, known_answers) {
  using P = Philox4x32;
  EXPECT_EQ(P::block({0, 0, 0, 0}, {0, 0}), (P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(P::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(P::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(philox, uniforms_in_unit_interval) {
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto u = Philox4x32::uniforms(3, i);
    for (double v : u) {
      ASSERT_GE(v, 0.0);
      ASSERT_LT(v, 1.0);
      sum += v;
    }
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
  EXPECT_EQ(Philox4x32::uniforms(9, 17), Philox4x32::uniforms(9, 17));
  EXPECT_NE(Philox4x32::uniforms(9, 17), Philox4x32::uniforms(10, 17));
}

TEST(observable, merges_degenerate_eigenvalues) {
  const Observable o(HermitianOperator::diagonal({1.0, -1.0, 1.0}));
  ASSERT_EQ(o.values().size(), 2u);
  EXPECT_DOUBLE_EQ(o.range(), 2.0);
  EXPECT_DOUBLE_EQ(o.norm(), 1.0);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(3, 3);
  for (std::size_t k = 0; k < 2; ++k) rebuilt += o.values()[k] * o.projectors()[k];
  EXPECT_LT(vqb::testing::max_diff(rebuilt, o.op().matrix()), 1e-10);
  EXPECT_NEAR(o.projectors()[1].trace().real(), 2.0, 1e-12);
}

TEST(observable, identity_has_zero_range) {
  const Observable o(HermitianOperator::identity(2));
  EXPECT_EQ(o.values().size(), 1u);
  EXPECT_DOUBLE_EQ(o.range(), 0.0);
}

TEST(hoeffding, reference_count) {
  const HoeffdingBudget b = required_samples(2.0, 1.0, 0.1, 0.05);
  EXPECT_EQ(b.n, static_cast<std::uint64_t>(std::ceil(400.0 * std::log(40.0))));
  EXPECT_EQ(b.n, 1476u);
}

TEST(hoeffding, quadratic_in_overhead) {
  const HoeffdingBudget one = required_samples(2.0, 1.3, 0.05, 0.01);
  const HoeffdingBudget two = required_samples(2.0, 2.6, 0.05, 0.01);
  EXPECT_NEAR(two.unrounded / one.unrounded, 4.0, 1e-12);
  EXPECT_GE(two.n, 4 * one.n - 3);
  EXPECT_LE(two.n, 4 * one.n);
}

TEST(hoeffding, exact_broadcasting_loses_to_naive) {
  const double virtual_cost = required_samples(2.0, 5.0 / 3.0, 0.1, 0.05).unrounded;
  const double naive_cost = required_samples(2.0, std::sqrt(2.0), 0.1, 0.05).unrounded;
  EXPECT_NEAR(virtual_cost / naive_cost, 25.0 / 18.0, 1e-12);
  EXPECT_GT(virtual_cost / naive_cost, 1.0);
}

TEST(hoeffding, rejects_bad_inputs) {
  EXPECT_THROW(required_samples(0.0, 1.0, 0.1, 0.05), InvariantError);
  EXPECT_THROW(required_samples(2.0, 1.0, 0.1, 1.0), InvariantError);
  EXPECT_THROW(required_samples(2.0, 1.0, -0.1, 0.05), InvariantError);
}

TEST(run_protocol, unit_observable_is_exact) {
  const ProtocolEstimate e =
      run_protocol(keep_first(2), ket0(), Observable(HermitianOperator::identity(2)), 1, 1000, 5);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.sample_std, 0.0);
  EXPECT_EQ(e.plus_shots, 1000u);
  EXPECT_EQ(e.minus_shots, 0u);
}

TEST(run_protocol, expectation_matches_closed_form) {
  std::mt19937_64 rng(31);
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const double t = (3.0 - std::sqrt(2.0)) / 4.0;
  for (int trial = 0; trial < 3; ++trial) {
    const DensityOperator rho = random_density(2, rng);
    const Observable obs(random_hermitian(2, rng));
    const double direct = (obs.op().matrix() * rho.op().matrix()).trace().real();
    const double closed = (1.0 - t) * direct + t * obs.op().trace() / 2.0;
    for (int m : {1, 2}) EXPECT_NEAR(expected_value(p.decomposition, rho, obs, m), closed, 1e-12);
  }
}

TEST(run_protocol, budget_two_qubit_statistics) {
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const double t = (3.0 - std::sqrt(2.0)) / 4.0;
  const double expected = 1.0 - t;
  for (int m : {1, 2}) {
    const ProtocolEstimate e = run_protocol(p.decomposition, ket0(), Observable::pauli_z(), m, 1000000, 42);
    EXPECT_EQ(e.plus_shots + e.minus_shots, e.shots);
    EXPECT_NEAR(e.scale, std::sqrt(2.0), 1e-12);
    EXPECT_LT(std::abs(e.mean - expected), 4 * e.standard_error()) << "marginal " << m;
    // Systematic bias stays within the diamond-norm bound ||O|| 2 delta.
    EXPECT_LE(std::abs(expected - 1.0), 1.0 * 2 * p.delta);
    EXPECT_LE(std::abs(e.mean - 1.0), 2 * p.delta + 5 * e.standard_error());
  }
}

TEST(run_protocol, repeated_runs_cover_the_mean) {
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const double expected = expected_value(p.decomposition, ket0(), Observable::pauli_z(), 1);
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ProtocolEstimate e = run_protocol(p.decomposition, ket0(), Observable::pauli_z(), 1, 1000000, seed);
    covered += std::abs(e.mean - expected) <= 5 * e.standard_error();
  }
  EXPECT_GE(covered, 99);
}

TEST(run_protocol, seed_determinism_and_scheduling) {
  const FeasiblePoint p = theorem5_feasible_point(1.5, 2);
  const Observable z = Observable::pauli_z();
  const ProtocolEstimate a = run_protocol(p.decomposition, ket0(), z, 2, 50001, 77);
  const ProtocolEstimate b = run_protocol(p.decomposition, ket0(), z, 2, 50001, 77);
  const ProtocolEstimate c = run_protocol(p.decomposition, ket0(), z, 2, 50001, 77, 4);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.sample_std, b.sample_std);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.plus_shots, c.plus_shots);
  EXPECT_NE(a.mean, run_protocol(p.decomposition, ket0(), z, 2, 50001, 78).mean);
}

TEST(run_protocol, branch_frequencies) {
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const ProtocolEstimate e = run_protocol(p.decomposition, ket0(), Observable::pauli_z(), 1, 200000, 8);
  const double freq = static_cast<double>(e.plus_shots) / static_cast<double>(e.shots);
  const double pp = p.decomposition.p_plus();
  EXPECT_NEAR(freq, pp, 5 * std::sqrt(pp * (1 - pp) / 200000.0));
}

TEST(run_protocol, sdp_decomposition_broadcasts) {
  const OverheadResult r = exact_overhead(2);
  ASSERT_TRUE(r.ok());
  std::mt19937_64 rng(32);
  const DensityOperator rho = random_density(2, rng);
  const Observable obs(random_hermitian(2, rng));
  const double direct = (obs.op().matrix() * rho.op().matrix()).trace().real();
  for (int m : {1, 2}) EXPECT_NEAR(expected_value(r.decomposition, rho, obs, m), direct, 1e-7);
  const ProtocolEstimate e = run_protocol(r.decomposition, rho, obs, 1, 400000, 4);
  EXPECT_LT(std::abs(e.mean - direct), 5 * e.standard_error());
}

TEST(run_protocol, rejects_inconsistent_decompositions) {
  BroadcastDecomposition dec = keep_first(2);
  dec.j2 = ChoiOperator(gamma_between(2, 1, 2) / 2.0, 2, {2, 2});
  EXPECT_THROW(run_protocol(dec, ket0(), Observable::pauli_z(), 1, 10, 1), InvariantError);
  BroadcastDecomposition bad = keep_first(2);
  bad.j1 = ChoiOperator(kron(depolarizing_choi(-2.0, 2).op(), HermitianOperator::identity(2) / 2.0), 2, {2, 2});
  EXPECT_THROW(run_protocol(bad, ket0(), Observable::pauli_z(), 1, 10, 1), InvariantError);
  EXPECT_THROW(run_protocol(keep_first(2), ket0(), Observable::pauli_z(), 3, 10, 1), DimensionError);
  EXPECT_THROW(run_protocol(keep_first(2), ket0(), Observable::pauli_z(), 1, 0, 1), InvariantError);
}

TEST(naive_baseline, unit_observable) {
  const ProtocolEstimate e = naive_baseline(ket0(), Observable(HermitianOperator::identity(2)), 100, 3);
  EXPECT_EQ(e.mean, 1.0);
  ASSERT_EQ(e.receiver_means.size(), 2u);
  EXPECT_EQ(e.receiver_means[0], 1.0);
  EXPECT_EQ(e.shots, 100u);
}

TEST(naive_baseline, maximally_mixed_is_unbiased) {
  const DensityOperator mixed(HermitianOperator::identity(2) / 2.0);
  const ProtocolEstimate e = naive_baseline(mixed, Observable::pauli_z(), 1000000, 42);
  EXPECT_LT(std::abs(e.mean), 4 * e.standard_error());
  EXPECT_THROW(naive_baseline(mixed, Observable::pauli_z(), 1, 42), InvariantError);
}

TEST(naive_baseline, variance_overhead_is_nu_squared) {
  const FeasiblePoint p = theorem5_feasible_point(2.0, 2);
  const Observable z = Observable::pauli_z();
  const ProtocolEstimate v = run_protocol(p.decomposition, ket0(), z, 1, 1000000, 42);
  const ProtocolEstimate n = naive_baseline(ket0(), z, 1000000, 42);
  const double nu2 = p.decomposition.nu() * p.decomposition.nu();
  EXPECT_NEAR(expected_second_moment(p.decomposition, ket0(), z, 1), nu2, 1e-12);
  EXPECT_NEAR(v.second_moment / n.second_moment, nu2, 0.1 * nu2);
}
