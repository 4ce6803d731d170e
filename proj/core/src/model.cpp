#include "boro/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "boro/error.hpp"

namespace boro {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

bool sample_less(const SupervisedSample& a, const SupervisedSample& b) {
  if (bitwise_less(a.x, b.x)) return true;
  if (bitwise_less(b.x, a.x)) return false;
  return bitwise_less(a.y, b.y);
}

bool sample_equal(const SupervisedSample& a, const SupervisedSample& b) {
  return bitwise_equal(a.x, b.x) && bitwise_equal(a.y, b.y);
}

}  // namespace

bool bitwise_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](double u, double v) {
    return std::bit_cast<std::uint64_t>(u) < std::bit_cast<std::uint64_t>(v);
  });
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](double u, double v) {
    return std::bit_cast<std::uint64_t>(u) == std::bit_cast<std::uint64_t>(v);
  });
}

Dataset::Dataset(std::vector<SupervisedSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) return;
  dim_x_ = samples_.front().x.size();
  dim_y_ = samples_.front().y.size();
  if (dim_x_ == 0 || dim_y_ == 0) throw InvalidArgument("model", "samples need at least one covariate and one label");
  for (const auto& s : samples_) {
    if (s.x.size() != dim_x_ || s.y.size() != dim_y_)
      throw InvalidArgument("model", "inconsistent sample dimensions");
    if (!all_finite(s.x) || !all_finite(s.y)) throw InvalidArgument("model", "non-finite sample entry");
  }
}

std::vector<Vector> Dataset::labels() const {
  std::vector<Vector> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.y);
  return out;
}

EmpiricalModel::EmpiricalModel(std::vector<SupervisedSample> support, Vector prob, std::size_t n)
    : support_(std::move(support)), prob_(std::move(prob)), n_(n) {
  if (support_.empty()) throw InvalidArgument("model", "empty data");
  if (support_.size() != prob_.size()) throw InvalidArgument("model", "support and weights differ in length");
  if (n_ < support_.size()) throw InvalidArgument("model", "support larger than sample count");
  double total = 0.0;
  for (double w : prob_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("model", "empirical weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) throw InvalidArgument("model", "weights do not sum to one");
}

EmpiricalModel EmpiricalModel::reweighted(Vector prob) const {
  if (prob.size() != support_.size()) throw InvalidArgument("model", "weight vector has wrong length");
  double total = 0.0;
  for (double w : prob) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("model", "negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("model", "weights do not sum to one");
  EmpiricalModel out = *this;
  out.prob_ = std::move(prob);
  return out;
}

std::vector<std::size_t> support_indices(const Dataset& data, const EmpiricalModel& m) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  const auto& support = m.support();
  for (const auto& s : data) {
    const auto it = std::lower_bound(support.begin(), support.end(), s, sample_less);
    if (it == support.end() || !sample_equal(*it, s)) throw InvalidArgument("model", "sample not in the model support");
    out.push_back(static_cast<std::size_t>(it - support.begin()));
  }
  return out;
}

void ContextualDistribution::validate() const {
  if (labels.size() != weights.size()) throw InvalidArgument("model", "labels and weights differ in length");
  if (labels.empty()) throw InvalidArgument("model", "empty contextual distribution");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("model", "negative contextual weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw InvalidArgument("model", "contextual weights do not sum to one");
}

Vector LossSpec::project_copy(Vector z) const {
  if (project) project(z);
  return z;
}

Vector LossSpec::initial_point() const {
  Vector z = start.empty() ? Vector(dim_z, 0.0) : start;
  return project_copy(std::move(z));
}

EmpiricalModel empirical_model(const Dataset& data) {
  if (data.empty()) throw InvalidArgument("model", "empty data");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sample_less(data[a], data[b]); });

  std::vector<SupervisedSample> support;
  std::vector<std::size_t> counts;
  for (std::size_t i : idx) {
    if (!support.empty() && sample_equal(support.back(), data[i])) {
      ++counts.back();
    } else {
      support.push_back(data[i]);
      counts.push_back(1);
    }
  }
  const double n = static_cast<double>(data.size());
  Vector prob(counts.size());
  std::transform(counts.begin(), counts.end(), prob.begin(), [n](std::size_t c) { return static_cast<double>(c) / n; });
  return EmpiricalModel(std::move(support), std::move(prob), data.size());
}

double expected_loss(const LossSpec& loss, std::span<const double> z, const ContextualDistribution& dist) {
  if (z.size() != loss.dim_z) throw InvalidArgument("model", "decision dimension mismatch");
  if (dist.labels.size() != dist.weights.size()) throw InvalidArgument("model", "labels and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < dist.labels.size(); ++i) {
    const double w = dist.weights[i];
    if (w == 0.0) continue;
    const double l = loss(z, dist.labels[i]);
    if (l == kInfinity) return kInfinity;
    total += w * l;
  }
  return total;
}

}  // namespace boro
