#include "boro/divergences.hpp"

#include <cmath>

#include "boro/error.hpp"

namespace boro {

namespace {

void check_pair(std::span<const double> m, std::span<const double> mref) {
  if (m.size() != mref.size()) throw InvalidArgument("divergences", "models must share a support");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < 0.0 || mref[i] < 0.0) throw InvalidArgument("divergences", "negative weights");
  }
}

}  // namespace

DistanceKind parse_distance(std::string_view name) {
  if (name == "bootstrap" || name == "kl" || name == "entropy") return DistanceKind::bootstrap;
  if (name == "pearson") return DistanceKind::pearson;
  if (name == "burg") return DistanceKind::burg;
  if (name == "f_divergence") return DistanceKind::f_divergence;
  if (name == "wasserstein") return DistanceKind::wasserstein;
  throw InvalidArgument("divergences", "unknown distance '" + std::string(name) + "'");
}

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::bootstrap: return "bootstrap";
    case DistanceKind::pearson: return "pearson";
    case DistanceKind::burg: return "burg";
    case DistanceKind::f_divergence: return "f_divergence";
    case DistanceKind::wasserstein: return "wasserstein";
  }
  return "?";
}

FDivergence entropy_generator() {
  return {[](double t) { return t > 0.0 ? t * std::log(t) : 0.0; },
          [](double t) { return std::log(t) + 1.0; },
          [](double t) { return 1.0 / t; }};
}

FDivergence pearson_generator() {
  return {[](double t) { return (t - 1.0) * (t - 1.0); },
          [](double t) { return 2.0 * (t - 1.0); },
          [](double) { return 2.0; }};
}

FDivergence burg_generator() {
  return {[](double t) { return t > 0.0 ? -std::log(t) : kInfinity; },
          [](double t) { return -1.0 / t; },
          [](double t) { return 1.0 / (t * t); }};
}

FDivergence generator_for(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::bootstrap: return entropy_generator();
    case DistanceKind::pearson: return pearson_generator();
    case DistanceKind::burg: return burg_generator();
    case DistanceKind::f_divergence:
      throw InvalidArgument("divergences", "f_divergence needs an explicit generator");
    case DistanceKind::wasserstein: break;
  }
  throw InvalidArgument("divergences", "wasserstein distance is not supported");
}

double bootstrap_distance(std::span<const double> m, std::span<const double> mref) {
  check_pair(m, mref);
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0.0) continue;
    if (mref[i] == 0.0) return kInfinity;
    total += m[i] * std::log(m[i] / mref[i]);
  }
  return total;
}

double f_divergence(const FDivergence& gen, std::span<const double> m, std::span<const double> mref) {
  check_pair(m, mref);
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (mref[i] == 0.0) {
      if (m[i] > 0.0) return kInfinity;
      continue;
    }
    const double term = gen.f(m[i] / mref[i]);
    if (term == kInfinity) return kInfinity;
    total += term * mref[i];
  }
  return total;
}

double named_distance(DistanceKind kind, std::span<const double> m, std::span<const double> mref,
                      const FDivergence* gen) {
  switch (kind) {
    case DistanceKind::bootstrap:
      return bootstrap_distance(m, mref);
    case DistanceKind::pearson: {
      check_pair(m, mref);
      double total = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double diff = m[i] - mref[i];
        if (mref[i] == 0.0) {
          if (diff != 0.0) return kInfinity;
          continue;
        }
        total += diff * diff / mref[i];
      }
      return total;
    }
    case DistanceKind::burg: {
      check_pair(m, mref);
      double total = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (mref[i] == 0.0) continue;
        if (m[i] == 0.0) return kInfinity;
        total += mref[i] * std::log(mref[i] / m[i]);
      }
      return total;
    }
    case DistanceKind::f_divergence:
      if (gen == nullptr) throw InvalidArgument("divergences", "f_divergence needs an explicit generator");
      return f_divergence(*gen, m, mref);
    case DistanceKind::wasserstein:
      break;
  }
  throw InvalidArgument("divergences", "wasserstein distance is not supported");
}

}  // namespace boro
