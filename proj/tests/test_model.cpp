#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "boro/experiments.hpp"
#include "boro/model.hpp"
#include "support.hpp"

using namespace boro;
using boro::testing::abs_loss;
using boro::testing::scalar_dataset;

TEST(EmpiricalModel, SinglePoint) {
  const EmpiricalModel m = empirical_model(scalar_dataset({{0, 1}}));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.prob()[0], 1.0);
  EXPECT_EQ(m[0].x[0], 0.0);
  EXPECT_EQ(m[0].y[0], 1.0);
}

TEST(EmpiricalModel, MultiplicitiesBecomeWeights) {
  const EmpiricalModel m = empirical_model(scalar_dataset({{0, 1}, {0, 1}, {1, 2}}));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.n(), 3u);
  EXPECT_DOUBLE_EQ(m.prob()[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.prob()[1], 1.0 / 3.0);
}

TEST(EmpiricalModel, BitwiseDistinctness) {
  // -0.0 and 0.0 compare equal as doubles but are different bit patterns.
  const EmpiricalModel m = empirical_model(scalar_dataset({{0.0, 1}, {-0.0, 1}}));
  EXPECT_EQ(m.size(), 2u);
}

TEST(EmpiricalModel, RejectsEmptyAndRaggedData) {
  EXPECT_THROW(empirical_model(Dataset{}), InvalidArgument);
  EXPECT_THROW(Dataset({{{0.0}, {1.0}}, {{0.0, 1.0}, {1.0}}}), InvalidArgument);
}

TEST(EmpiricalModel, PermutationAndDuplicationInvariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Dataset d = boro::testing::random_small_dataset(3 + trial % 9, 1 + trial % 5, rng);
    const EmpiricalModel m = empirical_model(d);
    double total = 0.0;
    for (double w : m.prob()) total += w;
    ASSERT_NEAR(total, 1.0, 1e-12);

    auto shuffled = d.samples();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const EmpiricalModel ms = empirical_model(Dataset(shuffled));
    ASSERT_EQ(ms.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_TRUE(bitwise_equal(ms[i].x, m[i].x));
      ASSERT_EQ(ms.prob()[i], m.prob()[i]);
    }

    auto doubled = d.samples();
    doubled.insert(doubled.end(), d.begin(), d.end());
    const EmpiricalModel md = empirical_model(Dataset(doubled));
    ASSERT_EQ(md.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) ASSERT_NEAR(md.prob()[i], m.prob()[i], 1e-15);
  }
}

TEST(EmpiricalModel, SupportIndices) {
  const Dataset d = scalar_dataset({{1, 1}, {0, 1}, {1, 1}});
  const EmpiricalModel m = empirical_model(d);
  const auto idx = support_indices(d, m);
  EXPECT_EQ(idx, (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_THROW(support_indices(scalar_dataset({{5, 5}}), m), InvalidArgument);
}

TEST(EmpiricalModel, Reweighted) {
  const EmpiricalModel m = empirical_model(scalar_dataset({{0, 1}, {1, 2}}));
  const EmpiricalModel r = m.reweighted({1.0, 0.0});
  EXPECT_EQ(r.prob()[1], 0.0);
  EXPECT_THROW(m.reweighted({0.7, 0.7}), InvalidArgument);
}

TEST(ExpectedLoss, NewsvendorZeroAtMatch) {
  const LossSpec l = newsvendor_loss();
  const ContextualDistribution d{{{4.0}}, {1.0}};
  const double z = 4.0;
  EXPECT_EQ(expected_loss(l, std::span(&z, 1), d), 0.0);
}

TEST(ExpectedLoss, SymmetricAbsolute) {
  const ContextualDistribution d{{{-1.0}, {1.0}}, {0.5, 0.5}};
  const double z = 0.0;
  EXPECT_DOUBLE_EQ(expected_loss(abs_loss(), std::span(&z, 1), d), 1.0);
}

TEST(ExpectedLoss, WeightedHandSum) {
  const ContextualDistribution d{{{1.0}, {3.0}}, {0.25, 0.75}};
  const double z = 1.0;
  EXPECT_DOUBLE_EQ(expected_loss(abs_loss(), std::span(&z, 1), d), 1.5);
}

TEST(ExpectedLoss, InfinitySentinelPropagates) {
  LossSpec l = abs_loss();
  l.loss = [](std::span<const double>, std::span<const double> y) { return y[0] > 0 ? kInfinity : 0.0; };
  const ContextualDistribution d{{{-1.0}, {1.0}}, {0.5, 0.5}};
  const double z = 0.0;
  EXPECT_EQ(expected_loss(l, std::span(&z, 1), d), kInfinity);
}

TEST(ExpectedLoss, ConvexInDecision) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0), lam(0.0, 1.0);
  const LossSpec l = newsvendor_loss();
  for (int trial = 0; trial < 1000; ++trial) {
    ContextualDistribution d;
    const std::size_t size = 1 + trial % 6;
    d.weights = boro::testing::random_simplex(size, rng);
    for (std::size_t i = 0; i < size; ++i) d.labels.push_back({u(rng)});
    const double z1 = u(rng), z2 = u(rng), t = lam(rng);
    const double zm = t * z1 + (1 - t) * z2;
    const double fm = expected_loss(l, std::span(&zm, 1), d);
    const double f1 = expected_loss(l, std::span(&z1, 1), d);
    const double f2 = expected_loss(l, std::span(&z2, 1), d);
    ASSERT_LE(fm, t * f1 + (1 - t) * f2 + 1e-9);
  }
}

TEST(ContextualDistribution, Validation) {
  EXPECT_THROW((ContextualDistribution{{{1.0}}, {0.5}}.validate()), InvalidArgument);
  EXPECT_THROW((ContextualDistribution{{{1.0}, {2.0}}, {1.5, -0.5}}.validate()), InvalidArgument);
  EXPECT_NO_THROW((ContextualDistribution{{{1.0}, {2.0}}, {0.5, 0.5}}.validate()));
}
