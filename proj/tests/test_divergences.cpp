#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "boro/divergences.hpp"
#include "support.hpp"

using namespace boro;
using boro::testing::random_simplex;

TEST(BootstrapDistance, Examples) {
  const Vector a{0.5, 0.5}, b{0.25, 0.75};
  EXPECT_EQ(bootstrap_distance(a, a), 0.0);
  EXPECT_NEAR(bootstrap_distance(a, b), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(bootstrap_distance(a, b), 0.14384, 1e-5);
  EXPECT_NEAR(bootstrap_distance(Vector{1.0, 0.0}, a), std::log(2.0), 1e-15);
}

TEST(BootstrapDistance, ZeroLogZeroAndSupport) {
  EXPECT_EQ(entropy_generator().f(0.0), 0.0);
  EXPECT_EQ(bootstrap_distance(Vector{0.0, 1.0}, Vector{0.0, 1.0}), 0.0);
  EXPECT_EQ(bootstrap_distance(Vector{0.5, 0.5}, Vector{0.0, 1.0}), kInfinity);
  EXPECT_THROW(bootstrap_distance(Vector{1.0}, Vector{0.5, 0.5}), InvalidArgument);
}

TEST(NamedDistance, Pearson) {
  const Vector a{0.5, 0.5}, b{0.25, 0.75};
  EXPECT_EQ(named_distance(DistanceKind::pearson, a, a), 0.0);
  EXPECT_NEAR(named_distance(DistanceKind::pearson, a, b), 1.0 / 3.0, 1e-15);
}

TEST(NamedDistance, BurgAndUnsupported) {
  const Vector a{0.5, 0.5}, b{0.25, 0.75};
  EXPECT_NEAR(named_distance(DistanceKind::burg, a, b), bootstrap_distance(b, a), 1e-15);
  EXPECT_EQ(named_distance(DistanceKind::burg, Vector{1.0, 0.0}, a), kInfinity);
  EXPECT_THROW(named_distance(DistanceKind::wasserstein, a, b), InvalidArgument);
  EXPECT_THROW(named_distance(DistanceKind::f_divergence, a, b), InvalidArgument);
  EXPECT_THROW(generator_for(DistanceKind::wasserstein), InvalidArgument);
  for (auto k : {DistanceKind::bootstrap, DistanceKind::pearson, DistanceKind::burg, DistanceKind::f_divergence,
                 DistanceKind::wasserstein})
    EXPECT_EQ(parse_distance(to_string(k)), k);
  EXPECT_THROW(parse_distance("hellinger"), InvalidArgument);
}

TEST(Divergences, RandomizedIdentitiesAndConvexity) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  const FDivergence ent = entropy_generator();
  FDivergence square_minus_one{[](double t) { return t * t - 1.0; }, nullptr, nullptr};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t size = 2 + trial % 5;
    const Vector m1 = random_simplex(size, rng), m2 = random_simplex(size, rng), ref = random_simplex(size, rng);
    // Generator identities.
    ASSERT_NEAR(f_divergence(ent, m1, ref), bootstrap_distance(m1, ref), 1e-12);
    ASSERT_NEAR(f_divergence(square_minus_one, m1, ref), named_distance(DistanceKind::pearson, m1, ref), 1e-12);
    ASSERT_NEAR(f_divergence(pearson_generator(), m1, ref), named_distance(DistanceKind::pearson, m1, ref), 1e-12);
    ASSERT_NEAR(f_divergence(burg_generator(), m1, ref), named_distance(DistanceKind::burg, m1, ref), 1e-12);

    // Convexity in the first argument.
    const double t = lam(rng);
    Vector mix(size);
    for (std::size_t i = 0; i < size; ++i) mix[i] = t * m1[i] + (1 - t) * m2[i];
    for (auto k : {DistanceKind::bootstrap, DistanceKind::pearson, DistanceKind::burg}) {
      const double lhs = named_distance(k, mix, ref);
      const double rhs = t * named_distance(k, m1, ref) + (1 - t) * named_distance(k, m2, ref);
      ASSERT_LE(lhs, rhs + 1e-9);
    }

    // Discrimination: a perturbation of size 1e-3 is detected.
    Vector pert = ref;
    pert[0] += 1e-3;
    pert[1] -= std::min(1e-3, pert[1]);
    double total = 0.0;
    for (double v : pert) total += v;
    for (double& v : pert) v /= total;
    for (auto k : {DistanceKind::bootstrap, DistanceKind::pearson, DistanceKind::burg}) {
      ASSERT_EQ(named_distance(k, ref, ref), 0.0);
      ASSERT_GT(named_distance(k, pert, ref), 0.0);
    }
  }
}
