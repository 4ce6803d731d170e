#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "boro/divergences.hpp"
#include "boro/model.hpp"

namespace boro {

/// Which part of a neighborhood chain a support point falls in.
enum class Region : std::uint8_t {
  inner,     // prefix j - 1
  boundary,  // the j-th point (every point, for the kernel learner)
  outside,   // beyond prefix j
};

/// A robust cost evaluation reduced to per-support-point numbers at a fixed
/// decision: smoother weight S_i, loss L_i, training mass M_i, and region.
/// The optional mass constraints read Q(inner) <= upper and
/// Q(inner + boundary) >= lower.
struct GroupedInstance {
  Vector weight;
  Vector loss;
  Vector prob;
  std::vector<Region> region;
  bool constrained = false;
  double upper = 1.0;
  double lower = 0.0;

  std::size_t size() const noexcept { return prob.size(); }
  void validate() const;

  /// Every point in the boundary region, no mass constraints.
  static GroupedInstance kernel(Vector weight, Vector loss, Vector prob);
};

struct PrimalSettings {
  double gap_tol = 1e-11;   // barrier duality-gap target, relative to the objective scale
  double t_growth = 8.0;
  std::size_t max_newton = 400;  // per centering step
};

struct PrimalSolution {
  bool feasible = false;
  double cost = -kInfinity;  // -inf when the ambiguity set misses the constraint set
  Vector model;              // worst-case model Q (sums to one)
  double scale = 0.0;        // s with P = s * Q
  std::size_t newton_steps = 0;
};

/// Smallest divergence D(Q, M) over models satisfying the instance's mass
/// constraints, computed by a log-barrier method. Returns the minimizer in
/// `argmin` when non-null.
double primal_min_distance(const FDivergence& gen, const GroupedInstance& inst, Vector* argmin = nullptr,
                           const PrimalSettings& settings = {});

/// Robust cost in primal form: maximize sum S L P over (P, s) with
/// sum S P = 1 on the neighborhood, sum P = s, the mass constraints scaled by
/// s, and the perspective constraint s D(P/s, M) <= s r. Solved by a
/// log-barrier interior-point method with equality-constrained Newton steps.
PrimalSolution primal_robust_cost(const FDivergence& gen, const GroupedInstance& inst, double radius,
                                  const PrimalSettings& settings = {});

}  // namespace boro
