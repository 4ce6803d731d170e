#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "boro/experiments.hpp"
#include "boro/learners.hpp"
#include "boro/model.hpp"
#include "boro/primal.hpp"
#include "boro/smoothers.hpp"

namespace boro::testing {

inline Dataset scalar_dataset(const std::vector<std::pair<double, double>>& xy) {
  std::vector<SupervisedSample> s;
  for (auto [x, y] : xy) s.push_back({{x}, {y}});
  return Dataset(std::move(s));
}

/// L(z, y) = |z - y| on scalars.
inline LossSpec abs_loss() {
  LossSpec l;
  l.name = "abs";
  l.dim_z = 1;
  l.loss = [](std::span<const double> z, std::span<const double> y) { return std::abs(z[0] - y[0]); };
  l.subgradient = [](std::span<const double> z, std::span<const double> y, std::span<double> g) {
    g[0] = z[0] > y[0] ? 1.0 : (z[0] < y[0] ? -1.0 : 0.0);
  };
  return l;
}

inline LossSpec squared_loss() {
  LossSpec l;
  l.name = "squared";
  l.dim_z = 1;
  l.loss = [](std::span<const double> z, std::span<const double> y) { return (z[0] - y[0]) * (z[0] - y[0]); };
  l.subgradient = [](std::span<const double> z, std::span<const double> y, std::span<double> g) {
    g[0] = 2.0 * (z[0] - y[0]);
  };
  return l;
}

/// Random probability vector with entries bounded away from zero.
inline Vector random_simplex(std::size_t size, std::mt19937_64& rng, double floor = 0.02) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  Vector p(size);
  double total = 0.0;
  for (auto& v : p) total += (v = u(rng));
  for (auto& v : p) v /= total;
  return p;
}

/// Random dataset of n samples over a handful of distinct scalar points, so
/// multiplicities above one are common.
inline Dataset random_small_dataset(std::size_t n, std::size_t distinct, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, distinct - 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> label(0.0, 10.0);
  std::vector<SupervisedSample> pool(distinct);
  for (auto& s : pool) s = {{u(rng)}, {label(rng)}};
  std::vector<SupervisedSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[i < distinct ? i : pick(rng)]);
  return Dataset(std::move(out));
}

/// Models on the grid {multiples of 1/steps} of the simplex over `size` points.
template <class Fn>
void for_each_grid_model(std::size_t size, std::size_t steps, Fn&& fn) {
  Vector q(size, 0.0);
  std::vector<std::size_t> c(size, 0);
  auto rec = [&](auto& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == size) {
      c[i] = left;
      for (std::size_t t = 0; t < size; ++t) q[t] = static_cast<double>(c[t]) / static_cast<double>(steps);
      fn(q);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      c[i] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, steps);
}

inline double kl(const Vector& q, const Vector& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) d += q[i] * std::log(q[i] / p[i]);
  return d;
}

/// Exhaustive worst case of a grouped instance over grid models with
/// KL(Q || M) <= r and the instance's mass constraints. Returns -inf when no
/// grid model is feasible.
inline double grid_worst_case(const GroupedInstance& inst, double r, std::size_t steps = 200) {
  double best = -kInfinity;
  for_each_grid_model(inst.size(), steps, [&](const Vector& q) {
    if (kl(q, inst.prob) > r) return;
    double in = 0.0, bd = 0.0, num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (inst.region[i] == Region::inner) in += q[i];
      if (inst.region[i] == Region::boundary) bd += q[i];
      if (inst.region[i] != Region::outside) {
        num += inst.weight[i] * inst.loss[i] * q[i];
        den += inst.weight[i] * q[i];
      }
    }
    if (inst.constrained && (in > inst.upper + 1e-12 || in + bd < inst.lower - 1e-12)) return;
    if (!(den > 0.0)) return;
    best = std::max(best, num / den);
  });
  return best;
}

inline GroupedInstance random_kernel_instance(std::size_t size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> l(0.0, 10.0);
  Vector weight(size), loss(size);
  for (auto& v : weight) v = w(rng);
  for (auto& v : loss) v = l(rng);
  return GroupedInstance::kernel(weight, loss, random_simplex(size, rng, 0.05));
}

/// Small random robust instance: n <= 8 samples on at most five distinct
/// points, a context, and a scalar decision with absolute loss, so every loss
/// lies in [0, 10].
struct SmallCase {
  Dataset data;
  EmpiricalModel model;
  Vector xbar;
  Vector z;
  NwLearner nw;
  NnLearner nn;
};

inline SmallCase random_small_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick_n(2, 8);
  const std::size_t n = pick_n(rng);
  std::uniform_int_distribution<std::size_t> pick_distinct(2, std::min<std::size_t>(5, n));
  Dataset data = random_small_dataset(n, pick_distinct(rng), rng);
  EmpiricalModel m = empirical_model(data);
  std::uniform_real_distribution<double> u(-1.0, 1.0), zs(0.0, 10.0), hs(0.3, 2.0);
  std::uniform_int_distribution<std::size_t> pick_k(1, n);
  const Bandwidth h(hs(rng));
  return SmallCase{data,
                   m,
                   Vector{u(rng)},
                   Vector{zs(rng)},
                   NwLearner{Smoother{SmootherKind::gaussian}, h},
                   NnLearner{Smoother{SmootherKind::gaussian}, h, pick_k(rng), euclidean_proximity()}};
}

}  // namespace boro::testing
