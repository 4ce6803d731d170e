#include "boro/bootstrap.hpp"

#include <cmath>
#include <random>

#include "boro/error.hpp"
#include "boro/parallel.hpp"
#include "boro/robust.hpp"

namespace boro {

namespace {

// Relative slack so that a resample reproducing the training cost up to
// rounding does not count as a disappointment.
constexpr double kCostSlack = 1e-12;

}  // namespace

void BootstrapPlan::validate() const {
  if (resamples == 0) throw InvalidArgument("bootstrap_harness", "need at least one resample");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t resample_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index));
}

std::vector<std::size_t> resample_counts(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("bootstrap_harness", "empty data");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t d = 0; d < n; ++d) ++counts[pick(rng)];
  return counts;
}

Dataset resample(const Dataset& data, std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("bootstrap_harness", "empty data");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<SupervisedSample> out;
  out.reserve(data.size());
  for (std::size_t d = 0; d < data.size(); ++d) out.push_back(data[pick(rng)]);
  return Dataset(std::move(out));
}

ResampleCostEvaluator::ResampleCostEvaluator(const Learner& learner, const LossSpec& loss, const Dataset& training,
                                             std::span<const double> xbar, std::span<const double> z) {
  const EmpiricalModel m = empirical_model(training);
  support_of_ = support_indices(training, m);
  loss_.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) loss_[i] = loss(z, m[i].y);
  if (const auto* nw = std::get_if<NwLearner>(&learner)) {
    weight_ = smoother_weights(nw->smoother, nw->h, m, xbar);
  } else {
    const auto& nn = std::get<NnLearner>(learner);
    nn_ = true;
    k_ = nn.k;
    weight_ = smoother_weights(nn.smoother, nn.h, m, xbar);
    order_ = build_neighborhoods(nn.distance, m, xbar).order;
  }
}

double ResampleCostEvaluator::cost(const std::vector<std::size_t>& counts) const {
  Vector mult(weight_.size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) mult[support_of_[i]] += static_cast<double>(counts[i]);
  double num = 0.0;
  double den = 0.0;
  auto add = [&](std::size_t s) {
    const double w = mult[s] * weight_[s];
    if (w > 0.0) {
      num += w * loss_[s];
      den += w;
    }
  };
  if (!nn_) {
    for (std::size_t s = 0; s < weight_.size(); ++s) add(s);
  } else {
    double seen = 0.0;
    const double need = static_cast<double>(k_);
    for (std::size_t s : order_) {
      if (mult[s] == 0.0) continue;
      add(s);
      seen += mult[s];
      if (seen >= need) break;
    }
  }
  if (!(den > 0.0)) return kInfinity;
  return num / den;
}

double bound_curve(const Learner& learner, double r, const EmpiricalModel& m, std::span<const double> xbar) {
  if (!(r >= 0.0)) throw InvalidArgument("bootstrap_harness", "radius must be nonnegative");
  if (std::holds_alternative<NwLearner>(learner)) return std::min(1.0, nw_bound(r, m.n()));
  const auto& nn = std::get<NnLearner>(learner);
  const NeighborhoodChain chain = build_neighborhoods(nn.distance, m, xbar);
  return std::min(1.0, nn_bound(r, m.n(), min_radii(nn.k, m, chain)));
}

DisappointmentReport estimate_disappointment(const Prescription& p, const Learner& learner, const LossSpec& loss,
                                             const Dataset& training, std::span<const double> xbar,
                                             const BootstrapPlan& plan) {
  plan.validate();
  if (training.empty()) throw InvalidArgument("bootstrap_harness", "empty data");
  const ResampleCostEvaluator eval(learner, loss, training, xbar, p.z);
  const double budget = p.cost;
  const double threshold = budget + kCostSlack * std::max(1.0, std::abs(budget));

  Vector costs(plan.resamples);
  parallel_for(plan.resamples, plan.threads, [&](std::size_t b) {
    costs[b] = eval.cost(resample_counts(training.size(), resample_seed(plan.seed, b)));
  });

  DisappointmentReport rep;
  rep.resamples = plan.resamples;
  for (double c : costs) {
    if (std::isinf(c)) ++rep.empty_windows;
    if (c > threshold) ++rep.disappointments;
  }
  rep.empirical_b = static_cast<double>(rep.disappointments) / static_cast<double>(plan.resamples);
  rep.bound_b = bound_curve(learner, p.radius, empirical_model(training), xbar);
  if (plan.keep_costs) rep.costs = std::move(costs);
  return rep;
}

}  // namespace boro
