#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "boro/model.hpp"
#include "boro/smoothers.hpp"

namespace boro {

/// Proximity of a sample to a context, with a tiebreak that makes the
/// composite key (base value, tiebreak rank) discriminating on distinct samples.
struct ProximityFn {
  std::function<double(const SupervisedSample& m, std::span<const double> xbar)> base;
  std::function<bool(const SupervisedSample& a, const SupervisedSample& b)> tiebreak_less;
};

/// Support indices ordered by proximity to the context. Prefix j (the first j
/// entries of `order`) is the j-th neighborhood; prefix 0 is empty and prefix
/// size() is the whole support. `cumulative_mass[j]` is the model mass of
/// prefix j, so it has size() + 1 entries.
struct NeighborhoodChain {
  std::vector<std::size_t> order;
  Vector cumulative_mass;

  std::size_t size() const noexcept { return order.size(); }
  std::span<const std::size_t> prefix(std::size_t j) const { return std::span(order).first(j); }
};

struct NwLearner {
  Smoother smoother;
  Bandwidth h;
};

struct NnLearner {
  Smoother smoother;
  Bandwidth h;
  std::size_t k;
  ProximityFn distance;
};

using Learner = std::variant<NwLearner, NnLearner>;

/// Tolerance used when comparing cumulative neighborhood mass against k/n.
inline constexpr double kMassTolerance = 1e-12;

/// S((x_i - xbar) / h) for every support point.
Vector smoother_weights(const Smoother& s, Bandwidth h, const EmpiricalModel& m, std::span<const double> xbar);

ContextualDistribution nw_contextualize(const NwLearner& l, const EmpiricalModel& m, std::span<const double> xbar);

NeighborhoodChain build_neighborhoods(const ProximityFn& d, const EmpiricalModel& m, std::span<const double> xbar);

/// Same ordering as `chain`, cumulative masses recomputed for other weights on
/// the same support.
NeighborhoodChain rebase_neighborhoods(const NeighborhoodChain& chain, const Vector& prob);

/// Smallest j >= 1 whose prefix carries mass >= k/n. Also checks that prefix
/// j - 1 carries at most (k - 1)/n.
std::size_t select_neighborhood(const NeighborhoodChain& chain, std::size_t k, std::size_t n);

ContextualDistribution nn_contextualize(const NnLearner& l, const EmpiricalModel& m, std::span<const double> xbar);

/// Contextualize on a given neighborhood index instead of the one selected by
/// the mass rule.
ContextualDistribution nn_contextualize_at(const NnLearner& l, const EmpiricalModel& m, std::span<const double> xbar,
                                           const NeighborhoodChain& chain, std::size_t j);

ContextualDistribution contextualize(const Learner& l, const EmpiricalModel& m, std::span<const double> xbar);

/// d(m, xbar) = (x - xbar)^T Sigma^-1 (x - xbar) with Sigma the empirical
/// covariance of the covariates (denominator n), plus `ridge` * I. Ties are
/// broken lexicographically on (label, covariates).
ProximityFn mahalanobis_proximity(const Dataset& data, double ridge = 0.0);

/// Squared Euclidean distance with the same tiebreak as above.
ProximityFn euclidean_proximity();

/// Lexicographic value order on (y, x).
bool label_then_covariate_less(const SupervisedSample& a, const SupervisedSample& b);

}  // namespace boro
