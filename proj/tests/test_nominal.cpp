#include <gtest/gtest.h>

#include <random>

#include "boro/experiments.hpp"
#include "boro/nominal.hpp"
#include "support.hpp"

using namespace boro;
using boro::testing::scalar_dataset;

TEST(Saa, NewsvendorQuantile) {
  std::vector<Vector> labels;
  for (int y = 1; y <= 10; ++y) labels.push_back({static_cast<double>(y)});
  const Prescription p = saa_prescribe(newsvendor_loss(), labels);
  // The 10/11 quantile of 1..10 is 10; the cost there is the mean holding cost.
  EXPECT_NEAR(p.z[0], 10.0, 1e-6);
  EXPECT_NEAR(p.cost, 4.5, 1e-8);
}

TEST(Saa, SquaredLossMean) {
  const std::vector<Vector> labels{{1.0}, {3.0}};
  EXPECT_NEAR(saa_prescribe(boro::testing::squared_loss(), labels).z[0], 2.0, 1e-6);
}

TEST(Saa, SingleLabel) {
  const std::vector<Vector> labels{{7.25}};
  const Prescription p = saa_prescribe(newsvendor_loss(), labels);
  EXPECT_NEAR(p.z[0], 7.25, 1e-6);
  EXPECT_NEAR(p.cost, 0.0, 1e-6);
  EXPECT_THROW(saa_prescribe(newsvendor_loss(), std::vector<Vector>{}), InvalidArgument);
}

TEST(Nominal, NaiveFullNeighborhoodIsSaa) {
  const Dataset data = scalar_dataset({{0.1, 3}, {0.5, 8}, {0.9, 1}, {0.2, 4}, {0.2, 4}});
  const EmpiricalModel m = empirical_model(data);
  const Vector xbar{0.0};
  const Learner nn = NnLearner{Smoother{SmootherKind::naive}, Bandwidth(1.0), data.size(), euclidean_proximity()};
  const Prescription a = nominal_prescribe(nn, newsvendor_loss(), m, xbar);
  const Prescription b = saa_prescribe(newsvendor_loss(), data.labels());
  EXPECT_NEAR(a.cost, b.cost, 1e-9);
  EXPECT_EQ(a.active_j, m.size());
}

TEST(Nominal, PointMassContext) {
  const EmpiricalModel m = empirical_model(scalar_dataset({{0, 2}, {5, 9}}));
  const Vector xbar{0.0};
  const Learner nw = NwLearner{Smoother{SmootherKind::uniform}, Bandwidth(1.0)};
  const Prescription p = nominal_prescribe(nw, newsvendor_loss(), m, xbar);
  EXPECT_NEAR(p.z[0], 2.0, 1e-6);
  EXPECT_NEAR(p.cost, 0.0, 1e-6);
}

TEST(Nominal, DuplicationInvariant) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = boro::testing::random_small_dataset(6, 4, rng);
    auto doubled = d.samples();
    doubled.insert(doubled.end(), d.begin(), d.end());
    const Vector xbar{0.1};
    const Learner nw = NwLearner{Smoother{SmootherKind::gaussian}, Bandwidth(0.5)};
    const double a = nominal_prescribe(nw, newsvendor_loss(), empirical_model(d), xbar).cost;
    const double b = nominal_prescribe(nw, newsvendor_loss(), empirical_model(Dataset(doubled)), xbar).cost;
    ASSERT_NEAR(a, b, 1e-9);
  }
}

TEST(Newsvendor, OracleQuantileExamples) {
  ContextualDistribution u;
  for (int y = 1; y <= 11; ++y) {
    u.labels.push_back({static_cast<double>(y)});
    u.weights.push_back(1.0 / 11.0);
  }
  EXPECT_EQ(newsvendor_oracle_quantile(u), 10.0);
  EXPECT_EQ(newsvendor_oracle_quantile(ContextualDistribution{{{4.0}}, {1.0}}), 4.0);
  EXPECT_EQ(newsvendor_oracle_quantile(ContextualDistribution{{{5.0}, {9.0}}, {0.95, 0.05}}), 5.0);
}

TEST(Newsvendor, PrescriptionMatchesOracleOnRandomDistributions) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(100.0, 20.0);
  const LossSpec l = newsvendor_loss();
  for (int trial = 0; trial < 200; ++trial) {
    ContextualDistribution d;
    const std::size_t size = 1 + trial % 12;
    d.weights = boro::testing::random_simplex(size, rng, 0.0);
    for (std::size_t i = 0; i < size; ++i) d.labels.push_back({std::round(g(rng))});
    const double q = newsvendor_oracle_quantile(d);
    const double oracle = expected_loss(l, std::span(&q, 1), d);
    ASSERT_NEAR(prescribe_for(l, d).cost, oracle, 1e-9);
  }
}

TEST(Newsvendor, LossExamples) {
  const LossSpec l = newsvendor_loss();
  const Vector one{1.0};
  EXPECT_EQ(l(Vector{1.0}, one), 0.0);
  EXPECT_EQ(l(Vector{0.0}, one), 10.0);
  EXPECT_EQ(l(Vector{2.0}, one), 1.0);
  Vector g(1);
  l.subgradient(Vector{1.0}, one, g);
  EXPECT_EQ(g[0], -10.0);
}
