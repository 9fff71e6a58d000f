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

#include "vqb/channels.hpp"

#include <cmath>

#include "test_util.hpp"

using namespace vqb;
using vqb::testing::max_diff;

namespace {

// Parts of the explicit budget construction built by hand for the marginal checks below.
HermitianOperator gamma_on(std::size_t d, std::size_t first, std::size_t second) {
  // Gamma on the listed pair of (B, B1, B2), identity on the remaining factor.
  const HermitianOperator g = gamma_operator(d);
  const HermitianOperator id = HermitianOperator::identity(d);
  const SubsystemDims three{d, d, d};
  const std::size_t other = 3 - first - second;
  const HermitianOperator raw = kron(g, id);  // acts on (first, second, other)
  std::vector<std::size_t> perm(3);
  // output factor k = input factor perm[k]; input order is (first, second, other)
  for (std::size_t k = 0; k < 3; ++k) perm[k] = k == first ? 0 : (k == second ? 1 : 2);
  (void)other;
  return permute_subsystems(raw, three, perm);
}

}  // namespace

TEST(gamma_operator, entries_and_trace) {
  const HermitianOperator g = gamma_operator(2);
  ComplexMatrix oracle = ComplexMatrix::Zero(4, 4);
  oracle(0, 0) = oracle(0, 3) = oracle(3, 0) = oracle(3, 3) = 1.0;
  EXPECT_EQ(max_diff(g.matrix(), oracle), 0.0);
  EXPECT_DOUBLE_EQ(gamma_operator(3).trace(), 3.0);
}

TEST(depolarizing_choi, endpoints_and_spectrum) {
  EXPECT_LT(max_diff(depolarizing_choi(0, 2).op(), gamma_operator(2)), 1e-15);
  EXPECT_LT(max_diff(depolarizing_choi(1, 3).op(), HermitianOperator::identity(9) / 3.0), 1e-15);
  const Spectrum s = eig_hermitian(depolarizing_choi(0.5, 2).op());
  EXPECT_NEAR(s.eigenvalues(0), 0.25, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 0.25, 1e-14);
  EXPECT_NEAR(s.eigenvalues(2), 0.25, 1e-14);
  EXPECT_NEAR(s.eigenvalues(3), 1.25, 1e-14);
}

TEST(depolarizing_choi, trace_preserving_for_every_t) {
  for (std::size_t d : {2u, 3u, 4u})
    for (double t : {-2.0, -0.5, 0.0, 0.3, 1.0, 1.7, 5.0}) {
      const ChoiOperator j = depolarizing_choi(t, d);
      EXPECT_LT(max_diff(j.output_trace(), HermitianOperator::identity(d)), 1e-14)
          << "t=" << t << " d=" << d;
    }
}

TEST(depolarizing_choi, cp_window) {
  for (std::size_t d : {2u, 3u}) {
    const double edge = double(d * d) / double(d * d - 1);
    EXPECT_TRUE(psd_check(depolarizing_choi(edge, d).op()).psd);
    EXPECT_FALSE(psd_check(depolarizing_choi(edge + 1e-3, d).op()).psd);
  }
}

TEST(apply_choi, identity_replacement_and_depolarizing) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const DensityOperator rho = random_density(2, rng);
    EXPECT_LT(max_diff(apply_choi(identity_choi(2), rho), rho.op()), 1e-15);
    EXPECT_LT(max_diff(apply_choi(depolarizing_choi(1, 2), rho), HermitianOperator::identity(2) / 2.0),
              1e-15);
    const double t = 0.3;
    const HermitianOperator oracle = rho.op() * (1 - t) + HermitianOperator::identity(2) * (t / 2);
    EXPECT_LT(max_diff(apply_choi(depolarizing_choi(t, 2), rho), oracle), 1e-10);
  }
  for (double t : {-0.4, 0.9, 1.2}) {
    const DensityOperator rho = random_density(3, rng);
    const HermitianOperator oracle = rho.op() * (1 - t) + HermitianOperator::identity(3) * (t / 3);
    EXPECT_LT(max_diff(apply_choi(depolarizing_choi(t, 3), rho), oracle), 1e-10);
  }
}

TEST(apply_choi, random_channel_preserves_trace) {
  std::mt19937_64 rng(22);
  const ChoiOperator j = vqb::testing::random_channel(3, 2, 3, rng);
  const DensityOperator rho = random_density(3, rng);
  EXPECT_NEAR(apply_choi(j, rho).trace(), 1.0, 1e-12);
  EXPECT_TRUE(psd_check(j.op()).psd);
  EXPECT_THROW(apply_choi(j, random_density(2, rng)), DimensionError);
}

TEST(link_product, identity_on_output_is_partial_trace) {
  std::mt19937_64 rng(23);
  const ChoiOperator j = vqb::testing::random_channel(2, 3, 2, rng);
  // Labels: 0 = B, 1 = B1.
  const LabeledOperator je{j.op(), {0, 1}, SubsystemDims{2, 3}};
  const LabeledOperator id{HermitianOperator::identity(3), {1}, SubsystemDims{3}};
  const LabeledOperator r = link_product(id, je);
  EXPECT_LT(max_diff(r.op, partial_trace(j.op(), SubsystemDims{2, 3}, {1})), 1e-13);
  EXPECT_EQ(r.systems, std::vector<int>{0});
}

TEST(link_product, composition_of_channels) {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 5; ++rep) {
    const ChoiOperator je = vqb::testing::random_channel(2, 2, 2, rng);
    const ChoiOperator jf = vqb::testing::random_channel(2, 2, 3, rng);
    // Oracle: rebuild the Choi operator of F o E from its action on |i><j|.
    const ChoiOperator oracle = choi_from_action(2, {2}, [&](const ComplexMatrix& x) {
      return apply_choi(jf, apply_choi(je, x));
    });
    // Labels: 0 = input, 1 = middle, 2 = output.
    const LabeledOperator lf{jf.op(), {1, 2}, SubsystemDims{2, 2}};
    const LabeledOperator le{je.op(), {0, 1}, SubsystemDims{2, 2}};
    const LabeledOperator composed = link_product(le, lf);
    EXPECT_EQ(composed.systems, (std::vector<int>{0, 2}));
    EXPECT_LT(max_diff(composed.op, oracle.op()), 1e-12);
  }
}

TEST(link_product, identity_after_identity) {
  const LabeledOperator a{gamma_operator(3), {0, 1}, SubsystemDims{3, 3}};
  const LabeledOperator b{gamma_operator(3), {1, 2}, SubsystemDims{3, 3}};
  EXPECT_LT(max_diff(link_product(a, b).op, gamma_operator(3)), 1e-14);
}

TEST(link_product, rejects_mismatched_shared_dimension) {
  const LabeledOperator a{gamma_operator(2), {0, 1}, SubsystemDims{2, 2}};
  const LabeledOperator b{HermitianOperator::identity(3), {1}, SubsystemDims{3}};
  EXPECT_THROW(link_product(a, b), DimensionError);
}

TEST(marginal_choi, partial_trace_and_link_product_agree) {
  std::mt19937_64 rng(25);
  const ChoiOperator j = vqb::testing::random_channel(2, 4, 2, rng);
  const ChoiOperator two(j.op(), 2, {2, 2});
  const ChoiOperator m = marginal_choi(two, 2);
  const LabeledOperator lj{two.op(), {0, 1, 2}, SubsystemDims{2, 2, 2}};
  const LabeledOperator id{HermitianOperator::identity(2), {2}, SubsystemDims{2}};
  EXPECT_LT(max_diff(m.op(), link_product(id, lj).op), 1e-12);
  EXPECT_THROW(marginal_choi(two, 3), DimensionError);
  EXPECT_THROW(marginal_choi(j, 1), DimensionError);
}

TEST(marginal_choi, exact_broadcast_marginals_are_gamma) {
  for (std::size_t d : {2u, 3u}) {
    const ChoiOperator j = canonical_broadcast_choi(d, 0.0);
    EXPECT_LT(max_diff(marginal_choi(j, 2).op(), gamma_operator(d)), 1e-13);
    EXPECT_LT(max_diff(marginal_choi(j, 1).op(), gamma_operator(d)), 1e-13);
  }
}

TEST(marginal_choi, budget_parts_reduce_to_depolarizing) {
  const std::size_t d = 2;
  const double gamma = 2.0, r = std::sqrt(gamma);
  const HermitianOperator id = HermitianOperator::identity(d);
  const HermitianOperator j1 =
      (gamma_on(d, 0, 1) + gamma_on(d, 0, 2)) * ((r + 1) / 4 / double(d));
  const HermitianOperator j2 = gamma_on(d, 1, 2) * ((r - 1) / 2 / double(d));
  const ChoiOperator c1(j1, d, {d, d}), c2(j2, d, {d, d});
  const double t = (3 - r) / 4;
  for (std::size_t drop : {1u, 2u}) {
    const HermitianOperator m = marginal_choi(c1, drop).op() - marginal_choi(c2, drop).op();
    EXPECT_LT(max_diff(m, depolarizing_choi(t, d).op()), 1e-14);
  }
}

TEST(marginal_choi, product_construction_scales_weight) {
  std::mt19937_64 rng(26);
  const ChoiOperator a = vqb::testing::random_channel(2, 2, 2, rng);
  const DensityOperator sigma = random_density(3, rng);
  const double w = 0.7;
  const HermitianOperator op = kron(a.op(), sigma.op()) * w;
  const ChoiOperator j = ChoiOperator::trace_preserving(op, 2, {2, 3}, w);
  const ChoiOperator m = marginal_choi(j, 2);
  // Oracle: direct index sum over the dropped factor.
  ComplexMatrix oracle = ComplexMatrix::Zero(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < 3; ++k) oracle(r, c) += op.matrix()(3 * r + k, 3 * c + k);
  EXPECT_LT(max_diff(m.op().matrix(), oracle), 1e-14);
  EXPECT_LT(max_diff(m.op(), a.op() * w), 1e-14);
  ASSERT_TRUE(m.weight().has_value());
  EXPECT_DOUBLE_EQ(*m.weight(), w);
}

TEST(isotropic_twirl, fixed_points) {
  for (std::size_t d : {2u, 3u}) {
    const TwirlResult g = isotropic_twirl(gamma_operator(d), d);
    EXPECT_LT(max_diff(g.projection, gamma_operator(d)), 1e-14);
    EXPECT_NEAR(g.fidelity, double(d), 1e-14);
    const HermitianOperator mixed = HermitianOperator::identity(d * d) / double(d);
    const TwirlResult m = isotropic_twirl(mixed, d);
    EXPECT_LT(max_diff(m.projection, mixed), 1e-14);
    // Tr[Gamma I/d]/d = 1/d.
    EXPECT_NEAR(m.fidelity, 1.0 / double(d), 1e-14);
  }
}

TEST(isotropic_twirl, idempotent_and_trace_preserving) {
  std::mt19937_64 rng(27);
  for (std::size_t d : {2u, 3u}) {
    for (int rep = 0; rep < 5; ++rep) {
      const HermitianOperator j = random_hermitian(d * d, rng);
      const TwirlResult once = isotropic_twirl(j, d);
      const TwirlResult twice = isotropic_twirl(once.projection, d);
      EXPECT_LT(max_diff(twice.projection, once.projection), 1e-12);
      EXPECT_NEAR(once.projection.trace(), j.trace(), 1e-12 * (1 + std::abs(j.trace())));
      EXPECT_NEAR(gamma_operator(d).inner(once.projection), gamma_operator(d).inner(j), 1e-12);
    }
  }
}

TEST(isotropic_twirl, unit_trace_formula) {
  // For Tr J = d the projection is ((Fd-1)/(d^2-1)) Gamma + ((d^2-Fd)/(d^2-1)) I/d.
  std::mt19937_64 rng(28);
  const std::size_t d = 3;
  const ChoiOperator j = vqb::testing::random_channel(d, d, 2, rng);
  const TwirlResult r = isotropic_twirl(j.op(), d);
  const double f = r.fidelity, dd = double(d);
  const HermitianOperator oracle =
      gamma_operator(d) * ((f * dd - 1) / (dd * dd - 1)) +
      HermitianOperator::identity(d * d) / dd * ((dd * dd - f * dd) / (dd * dd - 1));
  EXPECT_LT(max_diff(r.projection, oracle), 1e-13);
}

TEST(isotropic_twirl, commutes_with_random_unitaries) {
  std::mt19937_64 rng(29);
  const std::size_t d = 2;
  const HermitianOperator j = random_hermitian(d * d, rng);
  const HermitianOperator p = isotropic_twirl(j, d).projection;
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexMatrix u = haar_unitary(d, rng);
    const ComplexMatrix w = kron(u, u.conjugate());
    EXPECT_LT(max_diff(w * p.matrix() * w.adjoint(), p.matrix()), 1e-12);
  }
}

TEST(is_broadcasting_choi, examples) {
  EXPECT_TRUE(is_broadcasting_choi(canonical_broadcast_choi(2, 0.0)).is_broadcasting);
  EXPECT_TRUE(is_broadcasting_choi(canonical_broadcast_choi(2, 0.7)).is_broadcasting);
  EXPECT_TRUE(is_broadcasting_choi(canonical_broadcast_choi(3, 0.7)).is_broadcasting);
  const BroadcastCheck kp = is_broadcasting_choi(keep_and_prepare_choi(2));
  EXPECT_FALSE(kp.is_broadcasting);
  EXPECT_LT(kp.residual_first, 1e-14);
  EXPECT_NEAR(kp.residual_second,
              (depolarizing_choi(1, 2).op() - gamma_operator(2)).frobenius_norm(), 1e-14);
}

TEST(is_broadcasting_choi, marginals_act_as_identity) {
  std::mt19937_64 rng(30);
  for (double lambda : {0.0, 0.7, -1.3}) {
    const ChoiOperator j = canonical_broadcast_choi(2, lambda);
    ASSERT_TRUE(is_broadcasting_choi(j).is_broadcasting);
    for (int rep = 0; rep < 5; ++rep) {
      const DensityOperator rho = random_density(2, rng);
      const HermitianOperator out = apply_choi(j, rho);
      EXPECT_LT(max_diff(partial_trace(out, SubsystemDims{2, 2}, {1}), rho.op()), 1e-8);
      EXPECT_LT(max_diff(partial_trace(out, SubsystemDims{2, 2}, {0}), rho.op()), 1e-8);
    }
  }
}

TEST(canonical_broadcast_choi, not_physical_but_trace_preserving) {
  const ChoiOperator j = canonical_broadcast_choi(2, 0.0);
  EXPECT_FALSE(psd_check(j.op()).psd);
  EXPECT_LT(j.trace_weight_residual(1.0), 1e-14);
  // Symbolic marginal for d=2: Tr_{B2}[1/2 {|i><j| (x) I, SWAP}] = |i><j|.
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      ComplexMatrix e = ComplexMatrix::Zero(2, 2);
      e(a, b) = 1.0;
      const ComplexMatrix out = apply_choi(j, e);
      EXPECT_LT(max_diff(partial_trace(out, SubsystemDims{2, 2}, {1}), e), 1e-15);
    }
}

TEST(check_structural_conditions, canonical_map_has_all_properties) {
  for (std::size_t d : {2u, 3u}) {
    const StructureReport r = check_structural_conditions(canonical_broadcast_choi(d, 0.0));
    EXPECT_TRUE(r.is_broadcasting);
    EXPECT_TRUE(r.is_unitary_covariant) << r.covariance_residual;
    EXPECT_TRUE(r.is_permutation_invariant);
    EXPECT_EQ(r.permutation_residual, 0.0);
    EXPECT_TRUE(r.is_classically_consistent) << r.classical_residual;
  }
}

TEST(check_structural_conditions, lambda_family_breaks_permutation_symmetry) {
  const StructureReport r = check_structural_conditions(canonical_broadcast_choi(2, 0.7));
  EXPECT_TRUE(r.is_broadcasting);
  EXPECT_FALSE(r.is_permutation_invariant);
}

TEST(check_structural_conditions, keep_and_prepare) {
  const StructureReport r = check_structural_conditions(keep_and_prepare_choi(2));
  EXPECT_TRUE(r.is_unitary_covariant);
  EXPECT_FALSE(r.is_permutation_invariant);
  EXPECT_FALSE(r.is_broadcasting);
}

TEST(check_structural_conditions, explicit_budget_point) {
  const std::size_t d = 2;
  for (double gamma : {1.0, 2.0, 4.0}) {
    const double r = std::sqrt(gamma);
    const HermitianOperator j =
        (gamma_on(d, 0, 1) + gamma_on(d, 0, 2)) * ((r + 1) / 4 / double(d)) -
        gamma_on(d, 1, 2) * ((r - 1) / 2 / double(d));
    const StructureReport s = check_structural_conditions(ChoiOperator(j, d, {d, d}));
    EXPECT_FALSE(s.is_broadcasting);
    // Each marginal is Lambda^t, so the residual is |t| ||I/d - Gamma||_F.
    const double t = (3 - r) / 4;
    EXPECT_NEAR(s.broadcasting_residual,
                t * (HermitianOperator::identity(4) / 2.0 - gamma_operator(2)).frobenius_norm(),
                1e-13);
    EXPECT_TRUE(s.is_permutation_invariant);
    // The negative part prepares Gamma/d on (B1, B2), which is invariant under
    // U (x) conj(U) but not U (x) U, so covariance survives only when y = 0.
    EXPECT_EQ(s.is_unitary_covariant, gamma == 1.0);
  }
}
