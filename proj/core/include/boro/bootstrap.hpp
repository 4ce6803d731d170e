#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "boro/learners.hpp"
#include "boro/model.hpp"
#include "boro/nominal.hpp"

namespace boro {

struct BootstrapPlan {
  std::size_t resamples = 2000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool keep_costs = false;

  void validate() const;
};

struct DisappointmentReport {
  double empirical_b = 0.0;
  double bound_b = 1.0;
  std::size_t resamples = 0;
  std::size_t disappointments = 0;
  std::size_t empty_windows = 0;  // counted among the disappointments
  Vector costs;                   // per-resample nominal costs when requested (+inf for empty windows)
};

/// SplitMix64 finalizer; used to derive independent per-resample seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t resample_seed(std::uint64_t seed, std::size_t index);

/// n draws with replacement, uniformly over the training samples.
Dataset resample(const Dataset& data, std::uint64_t seed);

/// Multiplicity of every training sample in the resample with the given seed
/// (same draws as `resample`).
std::vector<std::size_t> resample_counts(std::size_t n, std::uint64_t seed);

/// Frequency with which the nominal contextual cost of `p.z` on bootstrap
/// resamples of the training data exceeds the budgeted cost `p.cost`.
/// `bound_b` is the guarantee for the bootstrap distance at radius p.radius.
DisappointmentReport estimate_disappointment(const Prescription& p, const Learner& learner, const LossSpec& loss,
                                             const Dataset& training, std::span<const double> xbar,
                                             const BootstrapPlan& plan);

/// Nominal contextual cost on a resample given by per-sample counts, computed
/// directly from the training support (no model rebuild). Returns +inf when
/// the resample leaves the context window empty.
class ResampleCostEvaluator {
 public:
  ResampleCostEvaluator(const Learner& learner, const LossSpec& loss, const Dataset& training,
                        std::span<const double> xbar, std::span<const double> z);

  double cost(const std::vector<std::size_t>& counts) const;

 private:
  bool nn_ = false;
  std::size_t k_ = 0;
  std::vector<std::size_t> support_of_;  // training sample -> support index
  Vector weight_;                        // smoother weight per support point
  Vector loss_;                          // L(z, y) per support point
  std::vector<std::size_t> order_;       // neighborhood order (nearest neighbors)
};

/// Theoretical disappointment bound at radius r for a learner, model and context.
double bound_curve(const Learner& learner, double r, const EmpiricalModel& m, std::span<const double> xbar);

}  // namespace boro
