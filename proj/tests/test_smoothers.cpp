#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "boro/smoothers.hpp"
#include "support.hpp"

using namespace boro;

namespace {

constexpr SmootherKind kAll[] = {SmootherKind::uniform, SmootherKind::epanechnikov, SmootherKind::tricubic,
                                 SmootherKind::gaussian, SmootherKind::naive};

}  // namespace

TEST(Smoothers, ValuesAtOrigin) {
  const Vector zero{0.0};
  EXPECT_DOUBLE_EQ(evaluate_scaled(Smoother{SmootherKind::epanechnikov}, Bandwidth(1.0), zero), 0.75);
  EXPECT_NEAR(evaluate_scaled(Smoother{SmootherKind::gaussian}, Bandwidth(1.0), zero), 0.398942, 1e-6);
  EXPECT_DOUBLE_EQ(evaluate_scaled(Smoother{SmootherKind::gaussian}, Bandwidth(1.0), zero),
                   1.0 / std::sqrt(2.0 * std::numbers::pi));
  EXPECT_EQ(evaluate_scaled(Smoother{SmootherKind::naive}, Bandwidth(0.1), Vector{100.0}), 1.0);
}

TEST(Smoothers, UniformOutsideScaledBall) {
  EXPECT_EQ(evaluate_scaled(Smoother{SmootherKind::uniform}, Bandwidth(0.5), Vector{1.0}), 0.0);
  EXPECT_GT(evaluate_scaled(Smoother{SmootherKind::uniform}, Bandwidth(0.5), Vector{0.4}), 0.0);
}

TEST(Smoothers, ParseRoundTrip) {
  for (SmootherKind k : kAll) EXPECT_EQ(parse_smoother(to_string(k)), k);
  EXPECT_THROW(parse_smoother("cosine"), InvalidArgument);
  EXPECT_THROW(Bandwidth(0.0), InvalidArgument);
  EXPECT_THROW(Bandwidth(-1.0), InvalidArgument);
}

TEST(Smoothers, EvenCompactAndScaleCovariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), hs(0.1, 3.0), cs(0.2, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Smoother s{kAll[trial % 5]};
    const std::size_t d = 1 + trial % 3;
    Vector dx(d), neg(d), scaled(d);
    const double c = cs(rng);
    for (std::size_t i = 0; i < d; ++i) {
      dx[i] = u(rng);
      neg[i] = -dx[i];
      scaled[i] = c * dx[i];
    }
    const Bandwidth h(hs(rng));
    const double v = evaluate_scaled(s, h, dx);
    ASSERT_GE(v, 0.0);
    ASSERT_EQ(v, evaluate_scaled(s, h, neg));
    ASSERT_NEAR(evaluate_scaled(s, Bandwidth(c * h.value), scaled), v, 1e-12);
    double norm = 0.0;
    for (double a : dx) norm += a * a;
    if (s.compact_support() && std::sqrt(norm) / h.value > 1.0) ASSERT_EQ(v, 0.0);
  }
}

TEST(Bandwidth, RuleOfThumbExample) {
  // Population std 2 for covariates alternating 1 +- 2.
  std::vector<std::pair<double, double>> xy;
  for (int i = 0; i < 100; ++i) xy.push_back({i % 2 ? 3.0 : -1.0, 0.0});
  const Dataset d = boro::testing::scalar_dataset(xy);
  EXPECT_NEAR(mean_covariate_std(d), 2.0, 1e-12);
  EXPECT_NEAR(bandwidth_rule_of_thumb(d).value, 0.2, 1e-12);
}

TEST(Bandwidth, SingleSampleIsAnError) {
  EXPECT_THROW(bandwidth_rule_of_thumb(boro::testing::scalar_dataset({{1.0, 0.0}})), InvalidArgument);
}

TEST(Bandwidth, Homogeneous) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<SupervisedSample> a, b;
  for (int i = 0; i < 40; ++i) {
    const double x0 = g(rng), x1 = g(rng);
    a.push_back({{x0, x1}, {0.0}});
    b.push_back({{3.5 * x0, 3.5 * x1}, {0.0}});
  }
  EXPECT_NEAR(bandwidth_rule_of_thumb(Dataset(b)).value, 3.5 * bandwidth_rule_of_thumb(Dataset(a)).value, 1e-12);
  // dim_x = 2 gives the exponent -1/3.
  EXPECT_NEAR(bandwidth_rule_of_thumb(Dataset(a)).value, mean_covariate_std(Dataset(a)) * std::pow(40.0, -1.0 / 3.0),
              1e-12);
}
