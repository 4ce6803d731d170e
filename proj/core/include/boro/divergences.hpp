#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "boro/model.hpp"

namespace boro {

enum class DistanceKind { bootstrap, pearson, burg, f_divergence, wasserstein };

DistanceKind parse_distance(std::string_view name);
std::string_view to_string(DistanceKind kind);

/// Convex generator f with f(1) = 0, plus the first two derivatives (used by
/// the interior-point primal solver).
struct FDivergence {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

/// f(t) = t log t (relative entropy), with 0 log 0 = 0.
FDivergence entropy_generator();
/// f(t) = (t - 1)^2. Agrees with t^2 - 1 on the probability simplex.
FDivergence pearson_generator();
/// f(t) = -log t.
FDivergence burg_generator();
/// Generator for the named kind; throws for wasserstein.
FDivergence generator_for(DistanceKind kind);

/// sum m * log(m / mref) with 0 log 0 = 0. Requires mref > 0 everywhere.
double bootstrap_distance(std::span<const double> m, std::span<const double> mref);

/// sum f(m / mref) * mref.
double f_divergence(const FDivergence& gen, std::span<const double> m, std::span<const double> mref);

/// Distance functions over a common finite support. Burg returns +inf when m
/// vanishes where mref does not. `gen` is only read for f_divergence.
double named_distance(DistanceKind kind, std::span<const double> m, std::span<const double> mref,
                      const FDivergence* gen = nullptr);

}  // namespace boro
