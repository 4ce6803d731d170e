#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "boro/bootstrap.hpp"
#include "boro/experiments.hpp"
#include "boro/robust.hpp"
#include "support.hpp"

using namespace boro;

namespace {

struct NewsvendorFixture {
  NewsvendorModel model;
  Dataset data;
  EmpiricalModel m;
  Learner nw;
  Learner nn;

  explicit NewsvendorFixture(std::size_t n, std::uint64_t seed = 1)
      : data([&] {
          std::mt19937_64 rng(seed);
          return model.sample(n, rng);
        }()),
        m(empirical_model(data)),
        nw(NwLearner{Smoother{SmootherKind::gaussian}, bandwidth_rule_of_thumb(data)}),
        nn(NnLearner{Smoother{SmootherKind::naive}, Bandwidth(1.0),
                     static_cast<std::size_t>(std::round(std::sqrt(static_cast<double>(n)))),
                     mahalanobis_proximity(data)}) {}
};

/// Spearman rank correlation (no ties expected in the x values).
double spearman(const Vector& x, const Vector& y) {
  auto ranks = [](const Vector& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vector r(v.size());
    for (std::size_t p = 0; p < idx.size();) {
      std::size_t q = p;
      while (q + 1 < idx.size() && v[idx[q + 1]] == v[idx[p]]) ++q;
      for (std::size_t t = p; t <= q; ++t) r[idx[t]] = 0.5 * static_cast<double>(p + q);
      p = q + 1;
    }
    return r;
  };
  const Vector rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Resample, SingleSampleAndDeterminism) {
  const Dataset one = boro::testing::scalar_dataset({{3.0, 4.0}});
  const Dataset r = resample(one, 99);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].x, one[0].x);

  std::mt19937_64 rng(3);
  const Dataset d = boro::testing::random_small_dataset(20, 20, rng);
  const Dataset a = resample(d, 5), b = resample(d, 5);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(a[i].x, b[i].x);
  EXPECT_EQ(resample_seed(5, 7), resample_seed(5, 7));
  EXPECT_NE(resample_seed(5, 7), resample_seed(5, 8));
}

TEST(Resample, MultiplicityMeanIsOne) {
  const std::size_t n = 10, reps = 10000;
  Vector mean(n, 0.0);
  for (std::size_t b = 0; b < reps; ++b) {
    const auto counts = resample_counts(n, resample_seed(123, b));
    ASSERT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), n);
    for (std::size_t i = 0; i < n; ++i) mean[i] += static_cast<double>(counts[i]) / reps;
  }
  for (double v : mean) EXPECT_NEAR(v, 1.0, 0.05);
}

TEST(Resample, CountsMatchDrawnDataset) {
  std::mt19937_64 rng(4);
  std::vector<SupervisedSample> s;
  for (int i = 0; i < 15; ++i) s.push_back({{static_cast<double>(i)}, {0.0}});
  const Dataset d(s);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto counts = resample_counts(d.size(), seed);
    std::vector<std::size_t> seen(d.size(), 0);
    for (const auto& smp : resample(d, seed)) ++seen[static_cast<std::size_t>(smp.x[0])];
    ASSERT_EQ(seen, counts);
  }
}

TEST(ResampleCost, MatchesRebuiltModel) {
  const NewsvendorFixture f(40);
  const Vector z{97.0};
  const LossSpec loss = newsvendor_loss();
  for (const Learner* l : {&f.nw, &f.nn}) {
    const ResampleCostEvaluator eval(*l, loss, f.data, f.model.context, z);
    for (std::uint64_t b = 0; b < 200; ++b) {
      const std::uint64_t seed = resample_seed(8, b);
      const double fast = eval.cost(resample_counts(f.data.size(), seed));
      const double slow = nominal_cost(*l, loss, empirical_model(resample(f.data, seed)), f.model.context, z);
      ASSERT_NEAR(fast, slow, 1e-9 * (1.0 + std::abs(slow)));
    }
  }
}

TEST(Disappointment, InfiniteBudgetNeverDisappoints) {
  const NewsvendorFixture f(50);
  Prescription p;
  p.z = {95.0};
  p.cost = kInfinity;
  BootstrapPlan plan;
  plan.resamples = 300;
  const auto rep = estimate_disappointment(p, f.nw, newsvendor_loss(), f.data, f.model.context, plan);
  EXPECT_EQ(rep.empirical_b, 0.0);
  EXPECT_EQ(rep.bound_b, 1.0);
}

TEST(Disappointment, SingleResampleIsBinary) {
  const NewsvendorFixture f(50);
  const Prescription p = nominal_prescribe(f.nw, newsvendor_loss(), f.m, f.model.context);
  BootstrapPlan plan;
  plan.resamples = 1;
  for (std::uint64_t s = 0; s < 10; ++s) {
    plan.seed = s;
    const double b = estimate_disappointment(p, f.nw, newsvendor_loss(), f.data, f.model.context, plan).empirical_b;
    ASSERT_TRUE(b == 0.0 || b == 1.0);
  }
}

TEST(Disappointment, IndependentOfThreadCount) {
  const NewsvendorFixture f(60);
  const Prescription p = nominal_prescribe(f.nn, newsvendor_loss(), f.m, f.model.context);
  BootstrapPlan plan;
  plan.resamples = 500;
  plan.keep_costs = true;
  const auto one = estimate_disappointment(p, f.nn, newsvendor_loss(), f.data, f.model.context, plan);
  plan.threads = 4;
  const auto four = estimate_disappointment(p, f.nn, newsvendor_loss(), f.data, f.model.context, plan);
  EXPECT_EQ(one.costs, four.costs);
  EXPECT_EQ(one.empirical_b, four.empirical_b);
}

TEST(Disappointment, NominalAboutHalf) {
  const NewsvendorFixture f(100, 3);
  const Prescription p = nominal_prescribe(f.nw, newsvendor_loss(), f.m, f.model.context);
  BootstrapPlan plan;
  const auto rep = estimate_disappointment(p, f.nw, newsvendor_loss(), f.data, f.model.context, plan);
  EXPECT_GE(rep.empirical_b, 0.4);
  EXPECT_LE(rep.empirical_b, 0.6);
}

TEST(Disappointment, CalibratedRobustMeetsBound) {
  const NewsvendorFixture f(100, 5);
  BootstrapPlan plan;
  const double b = 0.1;
  const double margin = 3.0 * std::sqrt(b * (1 - b) / static_cast<double>(plan.resamples));
  for (const Learner* l : {&f.nw, &f.nn}) {
    const Prescription p = robust_prescribe(RobustConfig::with_target(b), *l, newsvendor_loss(), f.m, f.model.context);
    const auto rep = estimate_disappointment(p, *l, newsvendor_loss(), f.data, f.model.context, plan);
    EXPECT_LE(rep.bound_b, b + 1e-9);
    EXPECT_LE(rep.empirical_b, b + margin);
  }
}

TEST(Disappointment, DecreasesAlongRadiusGrid) {
  const NewsvendorFixture f(50, 7);
  BootstrapPlan plan;
  Vector radii{0.0, 0.005, 0.01, 0.02, 0.04, 0.08}, rates;
  for (double r : radii) {
    const Prescription p =
        robust_prescribe(RobustConfig::with_radius(r), f.nw, newsvendor_loss(), f.m, f.model.context);
    rates.push_back(estimate_disappointment(p, f.nw, newsvendor_loss(), f.data, f.model.context, plan).empirical_b);
  }
  // With six points, rho <= -0.886 is significant at p < 0.01 (one-sided).
  EXPECT_LE(spearman(radii, rates), -0.886);
  EXPECT_LT(rates.back(), rates.front());
}

TEST(BoundCurve, Examples) {
  const NewsvendorFixture f(200);
  EXPECT_NEAR(bound_curve(f.nw, std::log(100.0) / 200.0, f.m, f.model.context), 0.01, 1e-12);
  EXPECT_EQ(bound_curve(f.nw, 0.0, f.m, f.model.context), 1.0);
  const double nn = bound_curve(f.nn, 0.05, f.m, f.model.context);
  EXPECT_GT(nn, 0.0);
  EXPECT_LE(nn, 1.0);
}
