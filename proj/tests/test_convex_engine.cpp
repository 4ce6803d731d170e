#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "boro/convex_engine.hpp"
#include "boro/experiments.hpp"
#include "support.hpp"

using namespace boro;

TEST(LogSumExp, Examples) {
  const Vector half{std::log(0.5), std::log(0.5)}, zeros{0.0, 0.0};
  EXPECT_NEAR(log_sum_exp(half, zeros), 0.0, 1e-15);
  EXPECT_NEAR(log_sum_exp(zeros), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_sum_exp(Vector{1000.0, 0.0}), 1000.0, 1e-12);
  EXPECT_NEAR(log_sum_exp(Vector{-1e6, -1e6}), -1e6 + std::log(2.0), 1e-9);
  EXPECT_EQ(log_sum_exp(Vector{-kInfinity, -kInfinity}), -kInfinity);
  EXPECT_THROW(log_sum_exp(Vector{}), InvalidArgument);
}

TEST(BisectRoot, Examples) {
  EXPECT_NEAR(bisect_root([](double x) { return x - 1.0; }, 0.0, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(bisect_root([](double x) { return std::exp(x) - 2.0; }, 0.0, 2.0), std::log(2.0), 1e-12);
  EXPECT_THROW(bisect_root([](double x) { return x * x + 1.0; }, 0.0, 2.0), SolverError);
}

TEST(ConvexDecreasingRoot, FindsRootFromTheLeft) {
  // f(x) = exp(-x) - 0.25 is convex and decreasing with root ln 4.
  auto f = [](double x, double* d) {
    if (d) *d = -std::exp(-x);
    return std::exp(-x) - 0.25;
  };
  const double x = convex_decreasing_root(f, 0.0, kInfinity);
  EXPECT_NEAR(x, std::log(4.0), 1e-12);
  EXPECT_GE(f(x, nullptr), 0.0);
}

TEST(ScalarMinimizers, GoldenAndBrent) {
  auto f = [](double x) { return (x - 0.3) * (x - 0.3) + 1.0; };
  EXPECT_NEAR(golden_section_minimize(f, -2.0, 2.0).x, 0.3, 1e-7);
  EXPECT_NEAR(brent_minimize(f, -2.0, 2.0).x, 0.3, 1e-7);
}

TEST(ProjectSimplex, Examples) {
  const Vector a = project_simplex(Vector{0.5, 0.9});
  EXPECT_NEAR(a[0], 0.3, 1e-15);
  EXPECT_NEAR(a[1], 0.7, 1e-15);
  const Vector b = project_simplex(Vector{-5.0, 3.0});
  EXPECT_EQ(b[0], 0.0);
  EXPECT_EQ(b[1], 1.0);
  const Vector c{0.2, 0.3, 0.5};
  const Vector pc = project_simplex(c);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pc[i], c[i], 1e-15);
}

TEST(ProjectSimplex, RandomizedFixedPoint) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector v(1 + trial % 8);
    for (auto& x : v) x = g(rng);
    const Vector p = project_simplex(v);
    double total = 0.0;
    for (double x : p) {
      ASSERT_GE(x, 0.0);
      total += x;
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
    const Vector pp = project_simplex(p);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(pp[i], p[i], 1e-12);
    // Optimality: v - p is constant on the support of p and not larger elsewhere.
    double tau = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) tau = v[i] - p[i];
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) ASSERT_NEAR(v[i] - p[i], tau, 1e-9);
      else ASSERT_LE(v[i], tau + 1e-9);
    }
  }
}

TEST(MinimizeConvex, Quadratic) {
  auto f = [](std::span<const double> z, std::span<double> g) {
    if (!g.empty()) g[0] = 2.0 * (z[0] - 3.0);
    return (z[0] - 3.0) * (z[0] - 3.0);
  };
  const auto r = minimize_convex(f, {}, Vector{0.0}, {});
  EXPECT_NEAR(r.x[0], 3.0, 1e-6);
}

TEST(MinimizeConvex, FlatArgmin) {
  auto f = [](std::span<const double> z, std::span<double> g) {
    if (!g.empty()) g[0] = (z[0] > 1.0 ? 1.0 : -1.0) + (z[0] > 2.0 ? 1.0 : -1.0);
    return std::abs(z[0] - 1.0) + std::abs(z[0] - 2.0);
  };
  EXPECT_NEAR(minimize_convex(f, {}, Vector{-7.0}, {}).value, 1.0, 1e-8);
}

TEST(MinimizeConvex, LinearOnSimplexHitsVertex) {
  const Vector c{1.0, 0.0, 2.0};
  auto f = [&](std::span<const double> z, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      v += c[i] * z[i];
      if (!g.empty()) g[i] = c[i];
    }
    return v;
  };
  const auto r = minimize_convex(f, [](std::span<double> z) { project_simplex_inplace(z); },
                                 Vector{1.0 / 3, 1.0 / 3, 1.0 / 3}, {});
  EXPECT_NEAR(r.value, 0.0, 1e-8);
  EXPECT_NEAR(r.x[1], 1.0, 1e-8);
}

TEST(MinimizeConvex, DeterministicWithRestarts) {
  auto f = [](std::span<const double> z, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = z[i] - static_cast<double>(i);
      v += std::abs(d);
      if (!g.empty()) g[i] = d > 0 ? 1.0 : -1.0;
    }
    return v;
  };
  SolveSettings s;
  s.restarts = 2;
  s.seed = 42;
  const auto a = minimize_convex(f, {}, Vector{5.0, 5.0, 5.0}, s);
  const auto b = minimize_convex(f, {}, Vector{5.0, 5.0, 5.0}, s);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.value, b.value);
  EXPECT_NEAR(a.value, 0.0, 1e-6);
}

TEST(MinimizeConvex, BudgetExhaustionCarriesIterate) {
  auto f = [](std::span<const double> z, std::span<double> g) {
    g[0] = z[0] > 0 ? 1.0 : -1.0;
    g[1] = z[1] > 0 ? 1.0 : -1.0;
    return std::abs(z[0]) + std::abs(z[1]);
  };
  SolveSettings s;
  s.max_iter = 10;
  try {
    minimize_convex(f, {}, Vector{100.0, 100.0}, s);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.best().x.size(), 2u);
    EXPECT_LT(e.best().value, 200.0);
  }
}

TEST(Subgradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-50.0, 50.0), ret(-200.0, 200.0);
  const LossSpec nv = newsvendor_loss();
  const LossSpec pf = portfolio_loss();
  for (int trial = 0; trial < 1000; ++trial) {
    {
      const Vector y{u(rng)};
      Vector z{u(rng)};
      if (std::abs(z[0] - y[0]) < 1e-3) z[0] += 1.0;
      Vector g(1);
      nv.subgradient(z, y, g);
      const Vector fd = finite_difference_gradient([&](std::span<const double> x) { return nv(x, y); }, z);
      ASSERT_NEAR(g[0], fd[0], 1e-4 * std::max(1.0, std::abs(g[0])));
    }
    {
      Vector y(6), z(7);
      for (auto& v : y) v = ret(rng);
      for (auto& v : z) v = u(rng);
      double r = 0.0;
      for (int a = 0; a < 6; ++a) r += z[a] * y[a];
      if (std::abs(-r - z[6]) < 1e-2) z[6] += 1.0;
      Vector g(7);
      pf.subgradient(z, y, g);
      const Vector fd = finite_difference_gradient([&](std::span<const double> x) { return pf(x, y); }, z);
      for (int i = 0; i < 7; ++i) ASSERT_NEAR(g[i], fd[i], 1e-4 * std::max(1.0, std::abs(g[i])));
    }
  }
}
