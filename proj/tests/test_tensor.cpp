#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tcplab/builtin.hpp"
#include "tcplab/properties.hpp"
#include "tcplab/tensor.hpp"
#include "test_util.hpp"

using namespace tcplab;
using tcplab::testing::naive_contract;
using tcplab::testing::v2;

TEST(Tensor, ConstructionGuards) {
  EXPECT_THROW(Tensor(1, 2), ArgumentError);
  EXPECT_THROW(Tensor(3, 1), ArgumentError);
  EXPECT_THROW(Tensor(3, 2, std::vector<double>(7, 0.0)), ArgumentError);
  EXPECT_THROW(Tensor(2, 2, {0.0, NAN, 0.0, 0.0}), ArgumentError);
  EXPECT_THROW(Tensor(2, 2, {0.0, INFINITY, 0.0, 0.0}), ArgumentError);
  EXPECT_THROW(Tensor(8, 10), ResourceError);  // 10^8 entries
  EXPECT_NO_THROW(Tensor(7, 10));              // 10^7 entries, at the guard
  Tensor t(3, 2);
  EXPECT_THROW(t.set({0, 0, 0}, NAN), ArgumentError);
  EXPECT_THROW(t.set({0, 0, 2}, 1.0), ArgumentError);
  EXPECT_THROW(t.at({0, 0}), ArgumentError);
}

TEST(Tensor, FlatIndexIsLexicographic) {
  Tensor t(3, 2);
  EXPECT_EQ(t.flat_index(std::vector<int>{0, 0, 0}), 0u);
  EXPECT_EQ(t.flat_index(std::vector<int>{0, 0, 1}), 1u);
  EXPECT_EQ(t.flat_index(std::vector<int>{1, 0, 0}), 4u);
  EXPECT_EQ(t.flat_index(std::vector<int>{1, 1, 1}), 7u);
}

TEST(Tensor, FlatIndexBijection) {
  for (int m = 2; m <= 4; ++m) {
    for (int n = 2; n <= 4; ++n) {
      Tensor t(m, n);
      for (std::size_t flat = 0; flat < t.size(); ++flat) {
        const auto idx = t.multi_index(flat);
        ASSERT_EQ(t.flat_index(idx), flat) << "m=" << m << " n=" << n;
        std::size_t manual = 0;
        for (int j = 0; j < m; ++j) manual = manual * n + idx[j];
        ASSERT_EQ(manual, flat);
      }
    }
  }
}

TEST(Tensor, ContractExamples) {
  const Tensor ex1 = example1_tensor();
  const Vec y = contract(ex1, v2(1, 2));
  EXPECT_DOUBLE_EQ(y[0], -5.0);
  EXPECT_DOUBLE_EQ(y[1], -5.0);
  EXPECT_EQ(contract(ex1, v2(0, 0)), Vec::Zero(2));
  EXPECT_EQ(contract(Tensor(3, 2), v2(3, -7)), Vec::Zero(2));
  EXPECT_THROW(contract(ex1, Vec::Zero(3)), ArgumentError);
}

TEST(Tensor, FormExamples) {
  EXPECT_DOUBLE_EQ(form(example1_tensor(), v2(1, 2)), -15.0);
  EXPECT_DOUBLE_EQ(form(gus_tensor(), v2(1, 1)), 2.0);
  EXPECT_DOUBLE_EQ(form(random_gaussian(4, 3, 1), Vec::Zero(3)), 0.0);
  EXPECT_THROW(form(gus_tensor(), Vec::Zero(3)), ArgumentError);
}

TEST(Tensor, ContractMatchesNaiveSummation) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 2 + (trial / 3) % 3;
    const Tensor a = random_gaussian(m, n, stream_seed(5, trial));
    const Vec x = tcplab::testing::random_vec(n, rng, -2, 2);
    const Vec want = naive_contract(a, x);
    ASSERT_LE((contract(a, x) - want).norm(), 1e-12 * (1 + want.norm()));
  }
}

TEST(Tensor, JacobianMatchesFiniteDifferences) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 2 + (trial / 3) % 3;
    const Tensor a = random_gaussian(m, n, stream_seed(6, trial));
    const Vec x = tcplab::testing::random_vec(n, rng);
    const Mat fd = tcplab::testing::fd_jacobian([&](const Vec& z) { return contract(a, z); }, x);
    ASSERT_LE((contract_jacobian(a, x) - fd).norm(), 1e-7);
    const Mat gfd = tcplab::testing::fd_jacobian(
        [&](const Vec& z) {
          Vec out(1);
          out[0] = form(a, z);
          return out;
        },
        x);
    ASSERT_LE((form_gradient(a, x).transpose() - gfd).norm(), 1e-7);
  }
}

TEST(Tensor, Homogeneity) {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 2 + (trial / 3) % 3;
    const Tensor a = random_gaussian(m, n, stream_seed(7, trial));
    const Vec x = tcplab::testing::random_vec(n, rng);
    const double t = rng.uniform(0, 3);
    const Vec lhs = contract(a, t * x);
    const Vec rhs = std::pow(t, m - 1) * contract(a, x);
    for (int i = 0; i < n; ++i) ASSERT_LE(std::abs(lhs[i] - rhs[i]), 1e-10 * std::max(1.0, std::abs(rhs[i])));
    const double f = form(a, x);
    ASSERT_LE(std::abs(form(a, t * x) - std::pow(t, m) * f), 1e-10 * std::max(1.0, std::pow(t, m) * std::abs(f)));
    ASSERT_LE(std::abs(form(a, x) - x.dot(contract(a, x))), 1e-12 * std::max(1.0, std::abs(f)));
  }
}

TEST(Tensor, BoundedImageOnUnitBox) {
  Rng rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 2 + (trial / 3) % 3;
    const Tensor a = random_gaussian(m, n, stream_seed(8, trial));
    const Vec x = tcplab::testing::random_vec(n, rng);
    ASSERT_LE(contract(a, x).norm(), unit_box_beta(m, n) * frobenius(a) * (1 + 1e-12));
  }
  // Equality case: all-ones tensor at x = (1, ..., 1).
  Tensor ones(3, 2, std::vector<double>(8, 1.0));
  EXPECT_NEAR(contract(ones, v2(1, 1)).norm(), unit_box_beta(3, 2) * frobenius(ones), 1e-12);
}

TEST(Tensor, Norms) {
  EXPECT_DOUBLE_EQ(frobenius(Tensor(3, 2)), 0.0);
  Tensor single(3, 2);
  single.set({1, 0, 1}, 3.0);
  EXPECT_DOUBLE_EQ(frobenius(single), 3.0);
  EXPECT_DOUBLE_EQ(frobenius(example1_tensor()), 2.0);
  EXPECT_DOUBLE_EQ(pair_norm(Tensor(3, 2), Vec::Zero(2)), 0.0);
  EXPECT_DOUBLE_EQ(pair_norm(example1_tensor(), Vec::Zero(2)), 2.0);
  EXPECT_DOUBLE_EQ(pair_norm(Tensor(3, 2), v2(3, 4)), 5.0);
}

TEST(Tensor, Arithmetic) {
  const Tensor ex1 = example1_tensor();
  EXPECT_EQ(ex1 + Tensor(3, 2), ex1);
  EXPECT_EQ(add(ex1, Tensor(3, 2)), ex1);
  const Tensor twice = scale(2.0, ex1);
  int nonzero = 0;
  for (double v : twice.entries()) {
    if (v != 0.0) {
      ++nonzero;
      EXPECT_EQ(v, -2.0);
    }
  }
  EXPECT_EQ(nonzero, 4);
  EXPECT_EQ(ex1 - ex1, Tensor(3, 2));
  EXPECT_THROW(ex1 + Tensor(3, 3), ArgumentError);
  EXPECT_THROW(ex1 + Tensor(2, 2), ArgumentError);

  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor a = random_gaussian(3, 3, stream_seed(9, trial));
    const Vec x = tcplab::testing::random_vec(3, rng);
    const double t = rng.uniform(-3, 3);
    ASSERT_LE((contract(scale(t, a), x) - t * contract(a, x)).norm(), 1e-12 * (1 + contract(a, x).norm()));
  }
}

TEST(Tensor, RandomGaussianIsSeeded) {
  EXPECT_EQ(random_gaussian(3, 3, 42), random_gaussian(3, 3, 42));
  EXPECT_NE(random_gaussian(3, 3, 42), random_gaussian(3, 3, 43));
  // Pooled mean over 100 draws of 27 entries: standard error 1/sqrt(2700).
  double sum = 0;
  std::size_t count = 0;
  for (int d = 0; d < 100; ++d) {
    const Tensor t = random_gaussian(3, 3, stream_seed(1, d));
    for (double v : t.entries()) {
      sum += v;
      ++count;
    }
  }
  EXPECT_LT(std::abs(sum / count), 5.0 / std::sqrt(2700.0));
}

TEST(Tensor, NonR0WitnessStructure) {
  const FaceMask alpha = FaceMask::from_indices({0}, 2);
  const Tensor w = non_r0_witness(3, 2, alpha, 3);
  for (std::size_t flat = 1; flat < w.size(); ++flat) EXPECT_EQ(w[flat], 0.0);
  EXPECT_NE(w.at({0, 0, 0}), 0.0);
  EXPECT_EQ(contract(w, v2(0, 1)), Vec::Zero(2));
  EXPECT_THROW(non_r0_witness(3, 2, FaceMask::full(2), 1), ArgumentError);
  EXPECT_THROW(non_r0_witness(3, 3, alpha, 1), ArgumentError);

  // Entries with an index outside alpha vanish, for all masks with n = 3.
  for (std::uint32_t bits = 0; bits < 7; ++bits) {
    const FaceMask a(bits, 3);
    const Tensor t = non_r0_witness(3, 3, a, bits + 100);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
      bool inside = true;
      for (int i : t.multi_index(flat)) inside = inside && a.contains(i);
      if (!inside) ASSERT_EQ(t[flat], 0.0);
      else ASSERT_NE(t[flat], 0.0);
    }
  }
}

TEST(Tensor, NonR0WitnessFailsR0Check) {
  for (std::uint32_t bits : {0u, 1u, 2u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Tensor w = non_r0_witness(3, 2, FaceMask(bits, 2), seed);
      const PropertyReport r = check_r0(w);
      ASSERT_EQ(r.verdict, Verdict::Fails) << "bits=" << bits << " seed=" << seed;
      ASSERT_TRUE(certificate_valid(r, w));
    }
  }
}
