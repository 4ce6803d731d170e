#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "boro/convex_engine.hpp"
#include "boro/learners.hpp"
#include "boro/model.hpp"

namespace boro {

struct Prescription {
  Vector z;
  double cost = 0.0;  // budgeted training cost at z
  double radius = 0.0;
  std::optional<std::size_t> active_j;  // neighborhood attaining the cost (nearest neighbors only)
  std::size_t iterations = 0;
  double final_step = 0.0;
  std::string status;
};

/// Minimizes (1/n) sum L(z, y_i) over the feasible set.
Prescription saa_prescribe(const LossSpec& loss, std::span<const Vector> labels, const SolveSettings& settings = {});

/// Minimizes E_w[L(z, Y)] for a fixed contextual distribution.
Prescription prescribe_for(const LossSpec& loss, const ContextualDistribution& dist,
                           const SolveSettings& settings = {});

/// Nominal contextual cost c(z, Y(xbar, M)).
double nominal_cost(const Learner& learner, const LossSpec& loss, const EmpiricalModel& m,
                    std::span<const double> xbar, std::span<const double> z);

Prescription nominal_prescribe(const Learner& learner, const LossSpec& loss, const EmpiricalModel& m,
                               std::span<const double> xbar, const SolveSettings& settings = {});

/// Objective oracle E_w[L(z, Y)] with the matching subgradient.
ObjectiveFn expected_loss_objective(const LossSpec& loss, const ContextualDistribution& dist);

}  // namespace boro
