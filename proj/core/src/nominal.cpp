#include "boro/nominal.hpp"

#include <algorithm>
#include <cmath>

#include "boro/error.hpp"

namespace boro {

ObjectiveFn expected_loss_objective(const LossSpec& loss, const ContextualDistribution& dist) {
  return [&loss, &dist](std::span<const double> z, std::span<double> g) {
    if (!g.empty()) {
      std::fill(g.begin(), g.end(), 0.0);
      Vector gi(z.size());
      for (std::size_t i = 0; i < dist.weights.size(); ++i) {
        if (dist.weights[i] == 0.0) continue;
        loss.subgradient(z, dist.labels[i], gi);
        for (std::size_t c = 0; c < g.size(); ++c) g[c] += dist.weights[i] * gi[c];
      }
    }
    return expected_loss(loss, z, dist);
  };
}

Prescription prescribe_for(const LossSpec& loss, const ContextualDistribution& dist, const SolveSettings& settings) {
  dist.validate();
  const ProjectionFn project = loss.project ? ProjectionFn(loss.project) : ProjectionFn();
  const MinimizeResult r =
      minimize_convex(expected_loss_objective(loss, dist), project, loss.initial_point(), settings, loss.coordinate_scale);
  if (!std::isfinite(r.value)) throw SolverError("nominal_prescribe", "objective is not finite at the minimizer");
  Prescription p;
  p.z = r.x;
  p.cost = r.value;
  p.iterations = r.iterations;
  p.final_step = r.final_step;
  p.status = r.status;
  return p;
}

Prescription saa_prescribe(const LossSpec& loss, std::span<const Vector> labels, const SolveSettings& settings) {
  if (labels.empty()) throw InvalidArgument("nominal_prescribe", "empty data");
  ContextualDistribution dist;
  dist.labels.assign(labels.begin(), labels.end());
  dist.weights.assign(labels.size(), 1.0 / static_cast<double>(labels.size()));
  return prescribe_for(loss, dist, settings);
}

double nominal_cost(const Learner& learner, const LossSpec& loss, const EmpiricalModel& m,
                    std::span<const double> xbar, std::span<const double> z) {
  return expected_loss(loss, z, contextualize(learner, m, xbar));
}

Prescription nominal_prescribe(const Learner& learner, const LossSpec& loss, const EmpiricalModel& m,
                               std::span<const double> xbar, const SolveSettings& settings) {
  const ContextualDistribution dist = contextualize(learner, m, xbar);
  Prescription p = prescribe_for(loss, dist, settings);
  if (const auto* nn = std::get_if<NnLearner>(&learner)) {
    const NeighborhoodChain chain = build_neighborhoods(nn->distance, m, xbar);
    p.active_j = select_neighborhood(chain, nn->k, m.n());
  }
  return p;
}

}  // namespace boro
