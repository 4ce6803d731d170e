#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace boro {

using Vector = std::vector<double>;

/// Sentinel for extended-real losses. Any expectation touching it is +inf.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SupervisedSample {
  Vector x;  // covariates
  Vector y;  // labels
};

/// Ordered sequence of covariate-label pairs with fixed dimensions.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<SupervisedSample> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  std::size_t dim_x() const noexcept { return dim_x_; }
  std::size_t dim_y() const noexcept { return dim_y_; }

  const SupervisedSample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<SupervisedSample>& samples() const noexcept { return samples_; }
  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  std::vector<Vector> labels() const;

 private:
  std::vector<SupervisedSample> samples_;
  std::size_t dim_x_ = 0;
  std::size_t dim_y_ = 0;
};

/// Finitely supported model over distinct samples.
///
/// `support` is sorted lexicographically by the bit patterns of (x, y), so two
/// datasets with the same multiset of samples produce identical models. `n` is
/// the sample count the model stands for; nearest-neighbor mass thresholds are
/// expressed as k/n.
class EmpiricalModel {
 public:
  EmpiricalModel(std::vector<SupervisedSample> support, Vector prob, std::size_t n);

  std::size_t size() const noexcept { return support_.size(); }
  std::size_t n() const noexcept { return n_; }
  const std::vector<SupervisedSample>& support() const noexcept { return support_; }
  const Vector& prob() const noexcept { return prob_; }
  const SupervisedSample& operator[](std::size_t i) const { return support_[i]; }

  /// Same support and n, new weights. Zero weights are allowed here (the
  /// reweighted model may drop points), but the weights must sum to one.
  EmpiricalModel reweighted(Vector prob) const;

 private:
  std::vector<SupervisedSample> support_;
  Vector prob_;
  std::size_t n_;
};

/// Weighted label distribution. Entry i corresponds to one support point of the
/// model it came from, so labels may repeat.
struct ContextualDistribution {
  std::vector<Vector> labels;
  Vector weights;

  void validate() const;
};

/// Convex loss L(z, y) with a subgradient oracle and the feasible set of
/// decisions given as a Euclidean projection.
struct LossSpec {
  using LossFn = std::function<double(std::span<const double> z, std::span<const double> y)>;
  using SubgradientFn =
      std::function<void(std::span<const double> z, std::span<const double> y, std::span<double> g)>;
  using ProjectionFn = std::function<void(std::span<double> z)>;

  std::string name;
  std::size_t dim_z = 1;
  LossFn loss;
  SubgradientFn subgradient;
  ProjectionFn project;        // identity when empty
  Vector start;                // feasible starting decision; zeros when empty
  Vector coordinate_scale;     // optimizer change of variables; ones when empty

  double operator()(std::span<const double> z, std::span<const double> y) const { return loss(z, y); }
  Vector project_copy(Vector z) const;
  Vector initial_point() const;
};

/// Groups identical samples. Each distinct point receives multiplicity / n.
EmpiricalModel empirical_model(const Dataset& data);

/// Support index of every sample of `data` in `m` (which must contain them).
std::vector<std::size_t> support_indices(const Dataset& data, const EmpiricalModel& m);

/// Sum of weights * L(z, y); +inf whenever a weighted term is infinite.
double expected_loss(const LossSpec& loss, std::span<const double> z, const ContextualDistribution& dist);

/// Lexicographic order on the raw bit patterns of two vectors.
bool bitwise_less(std::span<const double> a, std::span<const double> b);
bool bitwise_equal(std::span<const double> a, std::span<const double> b);

}  // namespace boro
