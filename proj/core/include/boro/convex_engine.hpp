#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "boro/error.hpp"
#include "boro/model.hpp"

namespace boro {

enum class StepRule {
  harmonic,      // a / (1 + t)
  inverse_sqrt,  // a / sqrt(1 + t)
};

struct SolveSettings {
  double tol_obj = 1e-8;
  double tol_x = 1e-9;
  std::size_t max_iter = 10'000;
  StepRule step_rule = StepRule::inverse_sqrt;
  double initial_step = 1.0;       // in scaled coordinates
  std::size_t round_length = 200;  // subgradient iterations between step-size restarts
  std::size_t restarts = 0;        // extra independent starts from seeded perturbations
  std::uint64_t seed = 0;

  void validate() const;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  std::size_t iterations = 0;
  double final_step = 0.0;
  std::string status;
};

/// Raised when a solver runs out of iterations; carries the best iterate.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(std::string module, const std::string& what, MinimizeResult best)
      : SolverError(std::move(module), what), best_(std::move(best)) {}
  const MinimizeResult& best() const noexcept { return best_; }

 private:
  MinimizeResult best_;
};

/// Objective oracle: returns f(x); when `g` is non-empty it also receives a
/// subgradient at x.
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> g)>;
using ProjectionFn = std::function<void(std::span<double> x)>;

/// log(sum exp(values)), max-shifted. Entries equal to -inf are skipped; the
/// result is -inf when every entry is.
double log_sum_exp(std::span<const double> values);

/// log(sum exp(log_weights[i] + exponents[i])).
double log_sum_exp(std::span<const double> log_weights, std::span<const double> exponents);

/// Root of a monotone function by bisection on [lo, hi]. Stops when |f| <= tol_f
/// or the bracket is narrower than tol_x.
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol_x = 1e-12,
                   double tol_f = 0.0);

/// Root of a convex, nonincreasing function. `lo` must satisfy f(lo) > 0.
/// Newton steps from the left never overshoot for such functions; the
/// bisection bracket guards against flat derivatives. `hi` may be +inf.
/// Returns the last point with f > 0 once f <= tol_f or the step stalls.
double convex_decreasing_root(const std::function<double(double, double*)>& f, double lo, double hi,
                              double tol_x = 1e-13, double tol_f = 0.0);

struct ScalarMinimum {
  double x;
  double value;
  std::size_t evaluations;
};

/// Golden-section search for a unimodal function on [lo, hi], run until the
/// interval is below tol (absolute) or stops shrinking in floating point.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                      double tol = 0.0, std::size_t max_eval = 400);

/// Brent's method (golden section with parabolic acceleration) for smooth
/// unimodal functions.
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi, double rel_tol = 1e-10,
                             std::size_t max_eval = 200);

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Vector project_simplex(std::span<const double> v);
void project_simplex_inplace(std::span<double> v);

/// Minimizes a convex function over a convex set given by its projection.
///
/// One-dimensional problems use a geometrically grown bracket followed by
/// golden-section search. Higher dimensions use projected subgradient steps
/// normalized by the subgradient norm, restarted in rounds with a shrinking
/// step, and the best iterate is returned. `scale` (optional) is a per
/// coordinate change of variables x = scale * u; coordinates coupled by the
/// projection must share a scale.
MinimizeResult minimize_convex(const ObjectiveFn& objective, const ProjectionFn& project, Vector x0,
                               const SolveSettings& settings, std::span<const double> scale = {});

/// Central finite differences with step h.
Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> x, double h = 1e-6);

}  // namespace boro
