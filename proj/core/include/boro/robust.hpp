#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "boro/convex_engine.hpp"
#include "boro/divergences.hpp"
#include "boro/learners.hpp"
#include "boro/model.hpp"
#include "boro/nominal.hpp"
#include "boro/primal.hpp"

namespace boro {

/// Ambiguity set specification: a distance and either a radius or a target
/// bootstrap disappointment from which the radius is derived.
class RobustConfig {
 public:
  static RobustConfig with_radius(double r, DistanceKind d = DistanceKind::bootstrap);
  static RobustConfig with_target(double b, DistanceKind d = DistanceKind::bootstrap);

  DistanceKind distance() const noexcept { return distance_; }
  const std::optional<double>& radius() const noexcept { return radius_; }
  const std::optional<double>& target_b() const noexcept { return target_b_; }

 private:
  RobustConfig() = default;
  DistanceKind distance_ = DistanceKind::bootstrap;
  std::optional<double> radius_;
  std::optional<double> target_b_;
};

struct DualVariables {
  double alpha = 0.0;
  double nu = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
};

enum class Regime {
  nominal,     // zero radius: the ambiguity set is the training model
  dual,        // interior dual optimum
  max_loss,    // radius large enough to reach the worst point mass
  primal,      // interior-point primal (non-bootstrap distances)
  infeasible,  // the ambiguity set misses the neighborhood's model set
};

std::string_view to_string(Regime r);

struct RobustEvaluation {
  double cost = -kInfinity;
  Regime regime = Regime::infeasible;
  DualVariables dual;
  std::optional<std::size_t> active_j;
  Vector worst_case;          // model weights on the training support; empty when infeasible
  double scale = 0.0;         // s in P = s * Q
  Vector contextual_weights;  // learner weights induced by the worst case, per support point

  /// The worst-case model as an empirical model on the training support.
  EmpiricalModel worst_case_model(const EmpiricalModel& training) const;
};

/// Robust cost of a grouped instance under the bootstrap (relative entropy)
/// distance, from the dual. With constraints this is a partial
/// nearest-neighbors cost; without, the kernel cost. `nu_hint` narrows the
/// search over the dual multiplier of the divergence budget.
RobustEvaluation bootstrap_dual_cost(const GroupedInstance& inst, double radius, double nu_hint = 0.0);

/// Smallest relative entropy from the training masses to the instance's mass
/// constraints (exact, via the three region masses).
double bootstrap_min_distance(const GroupedInstance& inst);

/// Same cost for any convex distance through the primal interior-point solver.
RobustEvaluation primal_cost(const FDivergence& gen, const GroupedInstance& inst, double radius);

struct MinRadii {
  Vector r_star;  // r_star[j - 1] for neighborhood j
  std::size_t nominal_j = 0;
};

/// Region layout of neighborhood j in `chain` with nearest-neighbor mass
/// bounds (k - 1)/n and k/n.
GroupedInstance neighborhood_instance(const NeighborhoodChain& chain, std::size_t j, std::size_t k, std::size_t n,
                                      const Vector& prob, const Vector& weight, const Vector& loss);

MinRadii min_radii(std::size_t k, const EmpiricalModel& m, const NeighborhoodChain& chain,
                   DistanceKind distance = DistanceKind::bootstrap);

/// r = ln(1/b) / n.
double calibrate_radius_nw(double target_b, std::size_t n);
/// Smallest r >= 0 with sum_j exp(-n max(r, r*_j)) <= b.
double calibrate_radius_nn(double target_b, std::size_t n, const MinRadii& radii);

/// Disappointment bounds: exp(-n r) and sum_j exp(-n max(r, r*_j)).
double nw_bound(double r, std::size_t n);
double nn_bound(double r, std::size_t n, const MinRadii& radii);

/// Precomputes the decision-independent pieces of a robust cost at one
/// context (smoother weights, neighborhood chain, minimum radii, radius) and
/// evaluates the cost and a Danskin subgradient at any decision. Keeps warm
/// starts between calls, so one instance should not be shared across threads.
class RobustCostEvaluator {
 public:
  RobustCostEvaluator(const RobustConfig& cfg, const Learner& learner, const LossSpec& loss, const EmpiricalModel& m,
                      std::span<const double> xbar);

  double radius() const noexcept { return radius_; }
  bool nearest_neighbors() const noexcept { return nn_; }
  const MinRadii& radii() const noexcept { return radii_; }
  const NeighborhoodChain& chain() const noexcept { return chain_; }
  const Vector& smoother() const noexcept { return weight_; }

  RobustEvaluation evaluate(std::span<const double> z);
  /// Partial cost of neighborhood j (nearest neighbors only).
  RobustEvaluation evaluate_partial(std::span<const double> z, std::size_t j);
  /// Sum of contextual weights times loss subgradients.
  void subgradient(std::span<const double> z, const RobustEvaluation& e, std::span<double> g) const;

 private:
  Vector losses(std::span<const double> z) const;
  RobustEvaluation solve(const GroupedInstance& inst, std::size_t hint_slot);

  const LossSpec& loss_;
  const EmpiricalModel& model_;
  DistanceKind distance_;
  bool nn_ = false;
  std::size_t k_ = 0;
  double radius_ = 0.0;
  Vector weight_;
  NeighborhoodChain chain_;
  MinRadii radii_;
  std::vector<double> nu_hint_;
};

RobustEvaluation robust_nw_cost(const RobustConfig& cfg, const NwLearner& learner, const LossSpec& loss,
                                const EmpiricalModel& m, std::span<const double> xbar, std::span<const double> z);

RobustEvaluation robust_nn_partial_cost(const RobustConfig& cfg, const NnLearner& learner, const LossSpec& loss,
                                        const EmpiricalModel& m, std::span<const double> xbar, std::size_t j,
                                        std::span<const double> z);

RobustEvaluation robust_nn_cost(const RobustConfig& cfg, const NnLearner& learner, const LossSpec& loss,
                                const EmpiricalModel& m, std::span<const double> xbar, std::span<const double> z);

/// Radius implied by `cfg` for this learner, model and context.
double resolve_radius(const RobustConfig& cfg, const Learner& learner, const EmpiricalModel& m,
                      std::span<const double> xbar);

Prescription robust_prescribe(const RobustConfig& cfg, const Learner& learner, const LossSpec& loss,
                              const EmpiricalModel& m, std::span<const double> xbar,
                              const SolveSettings& settings = {});

}  // namespace boro
