#include "boro/smoothers.hpp"

#include <cmath>
#include <numbers>

#include "boro/error.hpp"

namespace boro {

namespace {

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

}  // namespace

double evaluate_radial(SmootherKind kind, double u) {
  switch (kind) {
    case SmootherKind::uniform:
      return u <= 1.0 ? 0.5 : 0.0;
    case SmootherKind::epanechnikov:
      return u <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case SmootherKind::tricubic: {
      if (u > 1.0) return 0.0;
      const double t = 1.0 - u * u * u;
      return 70.0 / 81.0 * t * t * t;
    }
    case SmootherKind::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case SmootherKind::naive:
      return 1.0;
  }
  return 0.0;
}

double Smoother::operator()(std::span<const double> dx) const { return evaluate_radial(kind, euclidean_norm(dx)); }

bool Smoother::compact_support() const noexcept {
  return kind == SmootherKind::uniform || kind == SmootherKind::epanechnikov || kind == SmootherKind::tricubic;
}

Bandwidth::Bandwidth(double h) : value(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("smoothers", "bandwidth must be positive");
}

SmootherKind parse_smoother(std::string_view name) {
  if (name == "uniform") return SmootherKind::uniform;
  if (name == "epanechnikov") return SmootherKind::epanechnikov;
  if (name == "tricubic") return SmootherKind::tricubic;
  if (name == "gaussian") return SmootherKind::gaussian;
  if (name == "naive") return SmootherKind::naive;
  throw InvalidArgument("smoothers", "unknown smoother '" + std::string(name) + "'");
}

std::string_view to_string(SmootherKind kind) {
  switch (kind) {
    case SmootherKind::uniform: return "uniform";
    case SmootherKind::epanechnikov: return "epanechnikov";
    case SmootherKind::tricubic: return "tricubic";
    case SmootherKind::gaussian: return "gaussian";
    case SmootherKind::naive: return "naive";
  }
  return "?";
}

double evaluate_scaled(const Smoother& s, Bandwidth h, std::span<const double> dx) {
  return evaluate_radial(s.kind, euclidean_norm(dx) / h.value);
}

double mean_covariate_std(const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 2) throw InvalidArgument("smoothers", "need at least two samples for a standard deviation");
  const std::size_t d = data.dim_x();
  double acc = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (const auto& s : data) mean += s.x[c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& s : data) var += (s.x[c] - mean) * (s.x[c] - mean);
    acc += std::sqrt(var / static_cast<double>(n));
  }
  return acc / static_cast<double>(d);
}

Bandwidth bandwidth_rule_of_thumb(const Dataset& data) {
  const double sigma = mean_covariate_std(data);
  if (!(sigma > 0.0)) throw InvalidArgument("smoothers", "degenerate covariates");
  const double n = static_cast<double>(data.size());
  return Bandwidth(sigma * std::pow(n, -1.0 / (static_cast<double>(data.dim_x()) + 1.0)));
}

}  // namespace boro
