#include "boro/convex_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace boro {

namespace {

constexpr double kGolden = 0.3819660112501051;  // 2 - phi
constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

}  // namespace

void SolveSettings::validate() const {
  if (!(tol_obj > 0.0) || !(tol_x > 0.0)) throw InvalidArgument("convex_engine", "tolerances must be positive");
  if (max_iter == 0 || round_length == 0) throw InvalidArgument("convex_engine", "iteration limits must be positive");
  if (!(initial_step > 0.0)) throw InvalidArgument("convex_engine", "initial step must be positive");
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("convex_engine", "log_sum_exp of an empty sequence");
  double hi = -kInfinity;
  for (double v : values) hi = std::max(hi, v);
  if (hi == -kInfinity) return -kInfinity;
  if (hi == kInfinity) return kInfinity;
  double s = 0.0;
  for (double v : values) s += std::exp(v - hi);
  return hi + std::log(s);
}

double log_sum_exp(std::span<const double> log_weights, std::span<const double> exponents) {
  if (log_weights.size() != exponents.size()) throw InvalidArgument("convex_engine", "length mismatch");
  if (log_weights.empty()) throw InvalidArgument("convex_engine", "log_sum_exp of an empty sequence");
  double hi = -kInfinity;
  for (std::size_t i = 0; i < exponents.size(); ++i) hi = std::max(hi, log_weights[i] + exponents[i]);
  if (hi == -kInfinity) return -kInfinity;
  double s = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) s += std::exp(log_weights[i] + exponents[i] - hi);
  return hi + std::log(s);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol_x, double tol_f) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw SolverError("convex_engine", "bisect_root: no sign change on bracket");
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol_x || mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (std::abs(fm) <= tol_f || fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double convex_decreasing_root(const std::function<double(double, double*)>& f, double lo, double hi, double tol_x,
                              double tol_f) {
  double x = lo;
  double dx = 0.0;
  double fx = f(x, &dx);
  if (!(fx > 0.0)) {
    if (fx == 0.0) return x;
    throw SolverError("convex_engine", "root search needs a positive value at the left end");
  }
  // Newton from the left never overshoots a convex decreasing root, but it
  // crawls where f is flat before a cliff. A step that fails to halve f hands
  // the next move to bisection, or to bracket growth while hi is open.
  double grow = std::max(1.0, std::abs(x));
  bool newton_ok = true;
  for (int it = 0; it < 2000; ++it) {
    if (fx <= tol_f) return x;
    double next = newton_ok && dx < 0.0 ? x - fx / dx : x;
    if (!(next > x) || !(next < hi)) {
      if (std::isfinite(hi)) {
        next = 0.5 * (x + hi);
      } else {
        next = x + grow;
        grow *= 2.0;
      }
    }
    if (!(next > x) || !(next < hi)) return x;  // bracket at the resolution of doubles
    double dn = 0.0;
    const double fn = f(next, &dn);
    if (fn > 0.0) {
      newton_ok = fn <= 0.5 * fx;
      x = next;
      fx = fn;
      dx = dn;
    } else if (fn < 0.0) {
      hi = next;
      newton_ok = true;
    } else {
      return next;
    }
    if (hi - x <= tol_x * (1.0 + std::abs(x))) return x;
  }
  return x;
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol,
                                      std::size_t max_eval) {
  if (hi < lo) std::swap(lo, hi);
  double a = lo;
  double b = hi;
  double x1 = a + kGolden * (b - a);
  double x2 = b - kGolden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  std::size_t evals = 2;
  while (evals < max_eval) {
    const double width = b - a;
    if (width <= tol || width <= 4.0 * kEps * std::max(std::abs(a), std::abs(b))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + kGolden * (b - a);
      if (x1 == a || x1 == x2) break;
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b - kGolden * (b - a);
      if (x2 == b || x2 == x1) break;
      f2 = f(x2);
    }
    ++evals;
  }
  return f1 <= f2 ? ScalarMinimum{x1, f1, evals} : ScalarMinimum{x2, f2, evals};
}

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi, double rel_tol,
                             std::size_t max_eval) {
  if (hi < lo) std::swap(lo, hi);
  double a = lo;
  double b = hi;
  double x = a + kGolden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  std::size_t evals = 1;
  while (evals < max_eval) {
    const double m = 0.5 * (a + b);
    const double tol1 = rel_tol * std::abs(x) + 1e-14;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m >= x) ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= m) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

void project_simplex_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0) return;
  Vector sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += sorted[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) tau = t;
  }
  double total = 0.0;
  for (double& a : v) {
    a = std::max(a - tau, 0.0);
    total += a;
  }
  // Clean up the last few ulps so the result sums to one.
  if (total > 0.0) {
    for (double& a : v) a /= total;
  }
}

Vector project_simplex(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  project_simplex_inplace(out);
  return out;
}

namespace {

struct ScaledProblem {
  const ObjectiveFn& objective;
  const ProjectionFn& project;
  Vector scale;

  // Maps u to a feasible x; returns x.
  Vector to_feasible(std::span<const double> u) const {
    Vector x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = scale[i] * u[i];
    if (project) project(x);
    return x;
  }
  Vector to_scaled(std::span<const double> x) const {
    Vector u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] / scale[i];
    return u;
  }
};

MinimizeResult minimize_scalar_problem(const ScaledProblem& p, const Vector& x0, const SolveSettings& s) {
  std::size_t evals = 0;
  auto f = [&](double u) {
    ++evals;
    const Vector x = p.to_feasible(std::span<const double>(&u, 1));
    return p.objective(x, {});
  };
  const double u0 = p.to_scaled(x0)[0];
  double h = s.initial_step;
  const double f0 = f(u0);
  const double fp = f(u0 + h);
  const double fm = f(u0 - h);
  double lo = u0 - h;
  double hi = u0 + h;
  if (fp < f0 || fm < f0) {
    const double dir = (fp <= fm) ? 1.0 : -1.0;
    double a = u0;
    double b = u0 + dir * h;
    double fb = std::min(fp, fm);
    double c = b + dir * 2.0 * h;
    double fc = f(c);
    int grow = 0;
    while (fc < fb) {
      a = b;
      b = c;
      fb = fc;
      h *= 2.0;
      c = b + dir * 2.0 * h;
      fc = f(c);
      if (++grow > 1000 || !std::isfinite(c)) throw SolverError("convex_engine", "objective appears unbounded below");
    }
    lo = std::min(a, c);
    hi = std::max(a, c);
  }
  const ScalarMinimum best = golden_section_minimize(f, lo, hi, 0.0, 600);
  MinimizeResult out;
  out.x = p.to_feasible(std::span<const double>(&best.x, 1));
  out.value = p.objective(out.x, {});
  out.iterations = evals;
  out.final_step = hi - lo;
  out.status = "converged";
  return out;
}

MinimizeResult subgradient_run(const ScaledProblem& p, Vector x0, const SolveSettings& s, std::size_t budget) {
  const std::size_t dim = x0.size();
  Vector x = p.to_feasible(p.to_scaled(x0));
  Vector g(dim);
  double fx = p.objective(x, g);
  MinimizeResult best{x, fx, 0, s.initial_step, "running"};

  double a = s.initial_step;
  std::size_t iter = 0;
  Vector gu(dim);
  while (iter < budget) {
    Vector round_start = best.x;
    Vector u = p.to_scaled(round_start);
    x = round_start;
    fx = p.objective(x, g);
    const double best_before = best.value;
    double travel_bound = 0.0;
    for (std::size_t t = 0; t < s.round_length && iter < budget; ++t, ++iter) {
      for (std::size_t i = 0; i < dim; ++i) gu[i] = g[i] * p.scale[i];
      const double gn = norm2(gu);
      if (!(gn > 0.0)) {
        best = {x, fx, iter, 0.0, "converged"};
        return best;
      }
      const double step = (s.step_rule == StepRule::harmonic) ? a / (1.0 + static_cast<double>(t))
                                                              : a / std::sqrt(1.0 + static_cast<double>(t));
      travel_bound += step;
      for (std::size_t i = 0; i < dim; ++i) u[i] -= step * gu[i] / gn;
      x = p.to_feasible(u);
      u = p.to_scaled(x);
      fx = p.objective(x, g);
      if (fx < best.value) {
        best.x = x;
        best.value = fx;
      }
    }
    // Keep the step while the round's best point drifted far from its start;
    // otherwise the optimum is near and the step shrinks.
    const Vector us = p.to_scaled(round_start);
    const Vector ub = p.to_scaled(best.x);
    double moved = 0.0;
    for (std::size_t i = 0; i < dim; ++i) moved += (ub[i] - us[i]) * (ub[i] - us[i]);
    moved = std::sqrt(moved);
    if (moved < 0.5 * travel_bound) a *= 0.5;
    best.iterations = iter;
    best.final_step = a;
    if (a < s.tol_x && best_before - best.value <= s.tol_obj * (1.0 + std::abs(best.value))) {
      best.status = "converged";
      return best;
    }
  }
  best.status = "budget exhausted";
  return best;
}

}  // namespace

MinimizeResult minimize_convex(const ObjectiveFn& objective, const ProjectionFn& project, Vector x0,
                               const SolveSettings& settings, std::span<const double> scale) {
  settings.validate();
  if (x0.empty()) throw InvalidArgument("convex_engine", "empty starting point");
  ScaledProblem p{objective, project, Vector(x0.size(), 1.0)};
  if (!scale.empty()) {
    if (scale.size() != x0.size()) throw InvalidArgument("convex_engine", "scale has wrong dimension");
    p.scale.assign(scale.begin(), scale.end());
  }
  if (x0.size() == 1) return minimize_scalar_problem(p, x0, settings);

  MinimizeResult best = subgradient_run(p, x0, settings, settings.max_iter);
  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t r = 0; r < settings.restarts; ++r) {
    Vector start = x0;
    for (std::size_t i = 0; i < start.size(); ++i) start[i] += p.scale[i] * settings.initial_step * noise(rng);
    if (project) project(start);
    MinimizeResult run = subgradient_run(p, start, settings, settings.max_iter);
    run.iterations += best.iterations;
    if (run.value < best.value) {
      best = std::move(run);
    } else {
      best.iterations = run.iterations;
    }
  }
  if (best.status == "budget exhausted")
    throw ConvergenceError("convex_engine", "iteration budget exhausted", best);
  return best;
}

Vector finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> x, double h) {
  Vector g(x.size());
  Vector probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    probe[i] = orig - h;
    const double fm = f(probe);
    probe[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace boro
