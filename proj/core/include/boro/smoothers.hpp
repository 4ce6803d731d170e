#pragma once

#include <span>
#include <string>
#include <string_view>

#include "boro/model.hpp"

namespace boro {

enum class SmootherKind { uniform, epanechnikov, tricubic, gaussian, naive };

/// Nonnegative, even kernel evaluated on a covariate offset. The compact
/// kernels vanish outside the Euclidean unit ball; `naive` is identically one.
struct Smoother {
  SmootherKind kind = SmootherKind::gaussian;

  double operator()(std::span<const double> dx) const;
  bool compact_support() const noexcept;
};

struct Bandwidth {
  double value;

  explicit Bandwidth(double h);
};

SmootherKind parse_smoother(std::string_view name);
std::string_view to_string(SmootherKind kind);

/// S(dx / h).
double evaluate_scaled(const Smoother& s, Bandwidth h, std::span<const double> dx);

/// Scalar version on a precomputed Euclidean norm ||dx||/h; avoids allocating.
double evaluate_radial(SmootherKind kind, double scaled_norm);

/// h = sigma * n^(-1/(dim_x + 1)), where sigma is the mean of the per-coordinate
/// sample standard deviations of the covariates.
Bandwidth bandwidth_rule_of_thumb(const Dataset& data);

/// Mean of the per-coordinate standard deviations of the empirical covariate
/// marginal (denominator n).
double mean_covariate_std(const Dataset& data);

}  // namespace boro
