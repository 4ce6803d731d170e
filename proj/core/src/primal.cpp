#include "boro/primal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "boro/error.hpp"

namespace boro {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Log-barrier objective over a strictly feasible region with one linear
/// equality a^T x = const, kept invariant by the Newton steps.
class BarrierObjective {
 public:
  virtual ~BarrierObjective() = default;
  /// Barrier value at parameter t, or nullopt outside the strict interior.
  virtual std::optional<double> value(const VectorXd& x, double t) const = 0;
  virtual void derivatives(const VectorXd& x, double t, VectorXd& grad, MatrixXd& hess) const = 0;
  virtual const VectorXd& equality() const = 0;
};

/// Damped Newton centering. Returns the number of steps taken.
std::size_t center(const BarrierObjective& obj, VectorXd& x, double t, std::size_t max_steps) {
  const std::size_t dim = static_cast<std::size_t>(x.size());
  VectorXd grad(dim);
  MatrixXd hess(dim, dim);
  const VectorXd& a = obj.equality();
  std::size_t steps = 0;
  std::optional<double> fx = obj.value(x, t);
  if (!fx) throw SolverError("primal", "barrier iterate left the interior");
  for (; steps < max_steps; ++steps) {
    obj.derivatives(x, t, grad, hess);
    // Eliminate the equality multiplier through the Hessian factorization;
    // the bordered KKT system loses the direction once the barrier terms
    // dwarf the unit equality row.
    const Eigen::LDLT<MatrixXd> ldlt(hess);
    const VectorXd hg = ldlt.solve(grad);
    const VectorXd ha = ldlt.solve(a);
    const double aha = a.dot(ha);
    VectorXd dx = -hg;
    if (aha > 0.0) dx += ha * (a.dot(hg) / aha);
    // Strip drift off the equality manifold from rounding.
    const double aa = a.squaredNorm();
    if (aa > 0.0) dx -= a * (a.dot(dx) / aa);
    const double decrement = -grad.dot(dx);
    if (!(decrement > 1e-14)) break;
    double step = 1.0;
    std::optional<double> fn;
    // Inside the quadratic region the full step is taken without the
    // sufficient-decrease test, which loses meaning to cancellation at large t.
    const bool quadratic = decrement < 0.1;
    while (step > 1e-30) {
      fn = obj.value(x + step * dx, t);
      if (fn && (quadratic || *fn <= *fx - 0.25 * step * decrement)) break;
      step *= 0.5;
    }
    if (!(step > 1e-30) || !fn) break;
    x += step * dx;
    fx = fn;
    if (decrement * step < 1e-15) break;
  }
  return steps;
}

struct Layout {
  std::vector<std::size_t> index;  // active support index per variable
  std::vector<Region> region;
  double inactive_f0 = 0.0;        // sum over forced-zero points of M_i f(0)
  bool has_upper = false;
  bool has_lower = false;
};

Layout make_layout(const FDivergence& gen, const GroupedInstance& inst) {
  Layout lay;
  const bool inner_zero = inst.constrained && inst.upper <= 0.0;
  const bool outside_zero = inst.constrained && inst.lower >= 1.0;
  std::size_t inner = 0;
  std::size_t outside = 0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const Region g = inst.region[i];
    if ((g == Region::inner && inner_zero) || (g == Region::outside && outside_zero)) {
      lay.inactive_f0 += inst.prob[i] * gen.f(0.0);
      continue;
    }
    lay.index.push_back(i);
    lay.region.push_back(g);
    inner += (g == Region::inner);
    outside += (g == Region::outside);
  }
  lay.has_upper = inst.constrained && inner > 0 && inst.upper < 1.0;
  lay.has_lower = inst.constrained && outside > 0 && inst.lower > 0.0;
  return lay;
}

/// Sums of the variables over the inner and the inner+boundary regions.
std::pair<double, double> region_sums(const Layout& lay, const VectorXd& x) {
  double in = 0.0;
  double near = 0.0;
  for (std::size_t v = 0; v < lay.index.size(); ++v) {
    if (lay.region[v] == Region::inner) in += x(v);
    if (lay.region[v] != Region::outside) near += x(v);
  }
  return {in, near};
}

/// Phase one: minimize D(Q, M) over the constrained simplex.
class DistanceBarrier final : public BarrierObjective {
 public:
  DistanceBarrier(const FDivergence& gen, const GroupedInstance& inst, const Layout& lay)
      : gen_(gen), inst_(inst), lay_(lay), ones_(VectorXd::Ones(static_cast<Eigen::Index>(lay.index.size()))) {}

  double distance(const VectorXd& q) const {
    double d = lay_.inactive_f0;
    for (std::size_t v = 0; v < lay_.index.size(); ++v) {
      const double m = inst_.prob[lay_.index[v]];
      d += m * gen_.f(q(v) / m);
    }
    return d;
  }

  std::optional<double> value(const VectorXd& q, double t) const override {
    double barrier = 0.0;
    for (Eigen::Index v = 0; v < q.size(); ++v) {
      if (!(q(v) > 0.0)) return std::nullopt;
      barrier -= std::log(q(v));
    }
    const auto [in, near] = region_sums(lay_, q);
    if (lay_.has_upper) {
      if (!(in < inst_.upper)) return std::nullopt;
      barrier -= std::log(inst_.upper - in);
    }
    if (lay_.has_lower) {
      if (!(near > inst_.lower)) return std::nullopt;
      barrier -= std::log(near - inst_.lower);
    }
    const double d = distance(q);
    if (!std::isfinite(d)) return std::nullopt;
    return t * d + barrier;
  }

  void derivatives(const VectorXd& q, double t, VectorXd& grad, MatrixXd& hess) const override {
    const Eigen::Index dim = q.size();
    grad.setZero(dim);
    hess.setZero(dim, dim);
    for (Eigen::Index v = 0; v < dim; ++v) {
      const double m = inst_.prob[lay_.index[static_cast<std::size_t>(v)]];
      grad(v) = t * gen_.df(q(v) / m) - 1.0 / q(v);
      hess(v, v) = t * gen_.d2f(q(v) / m) / m + 1.0 / (q(v) * q(v));
    }
    const auto [in, near] = region_sums(lay_, q);
    if (lay_.has_upper) add_linear(grad, hess, Region::inner, false, inst_.upper - in);
    if (lay_.has_lower) add_linear(grad, hess, Region::outside, true, near - inst_.lower);
  }

  const VectorXd& equality() const override { return ones_; }

 private:
  // Barrier -log(slack) for slack = upper - sum(inner) (mark inner) or
  // slack = sum(not outside) - lower (mark the complement of outside).
  void add_linear(VectorXd& grad, MatrixXd& hess, Region mark, bool complement, double slack) const {
    const Eigen::Index dim = grad.size();
    VectorXd ds(dim);
    for (Eigen::Index v = 0; v < dim; ++v) {
      const bool in = lay_.region[static_cast<std::size_t>(v)] == mark;
      ds(v) = complement ? (in ? 0.0 : 1.0) : (in ? -1.0 : 0.0);
    }
    grad -= ds / slack;
    hess += ds * ds.transpose() / (slack * slack);
  }

  const FDivergence& gen_;
  const GroupedInstance& inst_;
  const Layout& lay_;
  VectorXd ones_;
};

/// Phase two: maximize sum S L P subject to the perspective constraint.
class CostBarrier final : public BarrierObjective {
 public:
  CostBarrier(const FDivergence& gen, const GroupedInstance& inst, const Layout& lay, double radius)
      : gen_(gen), inst_(inst), lay_(lay), radius_(radius) {
    const Eigen::Index dim = static_cast<Eigen::Index>(lay.index.size());
    a_.setZero(dim);
    c_.setZero(dim);
    for (Eigen::Index v = 0; v < dim; ++v) {
      const std::size_t i = lay.index[static_cast<std::size_t>(v)];
      if (lay.region[static_cast<std::size_t>(v)] == Region::outside) continue;
      a_(v) = inst.weight[i];
      c_(v) = inst.weight[i] * inst.loss[i];
    }
  }

  double objective(const VectorXd& p) const { return c_.dot(p); }

  // s D(P/s, M) - r s.
  double divergence_slack(const VectorXd& p) const {
    const double s = p.sum();
    double g = s * (lay_.inactive_f0 - radius_);
    for (Eigen::Index v = 0; v < p.size(); ++v) {
      const double m = inst_.prob[lay_.index[static_cast<std::size_t>(v)]];
      g += m * s * gen_.f(p(v) / (s * m));
    }
    return g;
  }

  std::optional<double> value(const VectorXd& p, double t) const override {
    double barrier = 0.0;
    for (Eigen::Index v = 0; v < p.size(); ++v) {
      if (!(p(v) > 0.0)) return std::nullopt;
      barrier -= std::log(p(v));
    }
    const double s = p.sum();
    const auto [in, near] = region_sums(lay_, p);
    if (lay_.has_upper) {
      const double slack = inst_.upper * s - in;
      if (!(slack > 0.0)) return std::nullopt;
      barrier -= std::log(slack);
    }
    if (lay_.has_lower) {
      const double slack = near - inst_.lower * s;
      if (!(slack > 0.0)) return std::nullopt;
      barrier -= std::log(slack);
    }
    const double g0 = divergence_slack(p);
    if (!(g0 < 0.0)) return std::nullopt;
    barrier -= std::log(-g0);
    return -t * objective(p) + barrier;
  }

  void derivatives(const VectorXd& p, double t, VectorXd& grad, MatrixXd& hess) const override {
    const Eigen::Index dim = p.size();
    const double s = p.sum();
    grad = -t * c_;
    hess.setZero(dim, dim);
    for (Eigen::Index v = 0; v < dim; ++v) {
      grad(v) -= 1.0 / p(v);
      hess(v, v) += 1.0 / (p(v) * p(v));
    }

    // Perspective constraint.
    VectorXd tt(dim), d1(dim), d2(dim), m(dim);
    double common = lay_.inactive_f0 - radius_;
    double curvature = 0.0;
    for (Eigen::Index v = 0; v < dim; ++v) {
      m(v) = inst_.prob[lay_.index[static_cast<std::size_t>(v)]];
      tt(v) = p(v) / (s * m(v));
      d1(v) = gen_.df(tt(v));
      d2(v) = gen_.d2f(tt(v));
      common += m(v) * (gen_.f(tt(v)) - tt(v) * d1(v));
      curvature += m(v) * d2(v) * tt(v) * tt(v);
    }
    VectorXd g0grad = d1.array() + common;
    MatrixXd g0hess = MatrixXd::Constant(dim, dim, curvature / s);
    for (Eigen::Index k = 0; k < dim; ++k) {
      g0hess(k, k) += d2(k) / (s * m(k));
      for (Eigen::Index l = 0; l < dim; ++l) g0hess(k, l) -= (d2(k) * tt(k) + d2(l) * tt(l)) / s;
    }
    const double g0 = divergence_slack(p);
    grad += g0grad / (-g0);
    hess += g0grad * g0grad.transpose() / (g0 * g0) + g0hess / (-g0);

    const auto [in, near] = region_sums(lay_, p);
    if (lay_.has_upper) {
      VectorXd ds(dim);  // gradient of the slack u s - in
      for (Eigen::Index v = 0; v < dim; ++v)
        ds(v) = inst_.upper - (lay_.region[static_cast<std::size_t>(v)] == Region::inner ? 1.0 : 0.0);
      const double slack = inst_.upper * s - in;
      grad -= ds / slack;
      hess += ds * ds.transpose() / (slack * slack);
    }
    if (lay_.has_lower) {
      VectorXd ds(dim);  // gradient of the slack near - l s
      for (Eigen::Index v = 0; v < dim; ++v)
        ds(v) = (lay_.region[static_cast<std::size_t>(v)] != Region::outside ? 1.0 : 0.0) - inst_.lower;
      const double slack = near - inst_.lower * s;
      grad -= ds / slack;
      hess += ds * ds.transpose() / (slack * slack);
    }
  }

  const VectorXd& equality() const override { return a_; }

 private:
  const FDivergence& gen_;
  const GroupedInstance& inst_;
  const Layout& lay_;
  double radius_;
  VectorXd a_;
  VectorXd c_;
};

std::size_t constraint_count(const Layout& lay, bool phase_two) {
  return lay.index.size() + (lay.has_upper ? 1 : 0) + (lay.has_lower ? 1 : 0) + (phase_two ? 1 : 0);
}

/// Strictly interior start for phase one: region masses inside the polytope,
/// spread proportionally to M within each region.
VectorXd interior_start(const GroupedInstance& inst, const Layout& lay) {
  double m_in = 0.0, m_bd = 0.0, m_out = 0.0;
  for (std::size_t v = 0; v < lay.index.size(); ++v) {
    const double m = inst.prob[lay.index[v]];
    (lay.region[v] == Region::inner ? m_in : lay.region[v] == Region::boundary ? m_bd : m_out) += m;
  }
  double q_in = m_in, q_bd = m_bd, q_out = m_out;
  if (inst.constrained) {
    q_in = m_in > 0.0 ? 0.5 * std::min(inst.upper, 1.0) : 0.0;
    q_out = m_out > 0.0 ? 0.5 * (1.0 - std::max(inst.lower, q_in)) : 0.0;
    q_bd = 1.0 - q_in - q_out;
  }
  VectorXd q(static_cast<Eigen::Index>(lay.index.size()));
  for (std::size_t v = 0; v < lay.index.size(); ++v) {
    const double m = inst.prob[lay.index[v]];
    const Region g = lay.region[v];
    const double share = g == Region::inner ? q_in / m_in : g == Region::boundary ? q_bd / m_bd : q_out / m_out;
    q(static_cast<Eigen::Index>(v)) = m * share;
  }
  return q;
}

struct PhaseOne {
  VectorXd q;
  double distance;
  double lower_bound;
  std::size_t steps;
};

/// Runs phase one. Stops early once the iterate sits comfortably below
/// `stop_below` (pass -inf to solve to full accuracy).
PhaseOne run_phase_one(const FDivergence& gen, const GroupedInstance& inst, const Layout& lay,
                       const PrimalSettings& settings, double stop_below) {
  DistanceBarrier obj(gen, inst, lay);
  PhaseOne out{interior_start(inst, lay), 0.0, -kInfinity, 0};
  const double m = static_cast<double>(constraint_count(lay, false));
  double t = 1.0;
  for (int outer = 0; outer < 200; ++outer) {
    out.steps += center(obj, out.q, t, settings.max_newton);
    out.distance = obj.distance(out.q);
    out.lower_bound = out.distance - m / t;
    if (out.distance < stop_below && out.distance <= 0.5 * (stop_below + out.lower_bound)) break;
    if (m / t < settings.gap_tol * std::max(1.0, std::abs(out.distance))) break;
    t *= settings.t_growth;
  }
  return out;
}

}  // namespace

void GroupedInstance::validate() const {
  if (weight.size() != prob.size() || loss.size() != prob.size() || region.size() != prob.size())
    throw InvalidArgument("primal", "instance vectors differ in length");
  if (prob.empty()) throw InvalidArgument("primal", "empty instance");
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] > 0.0)) throw InvalidArgument("primal", "training masses must be positive");
    if (!(weight[i] >= 0.0)) throw InvalidArgument("primal", "smoother weights must be nonnegative");
  }
  if (constrained && !(upper >= 0.0 && lower <= 1.0 && upper <= lower))
    throw InvalidArgument("primal", "mass bounds must satisfy 0 <= upper <= lower <= 1");
}

GroupedInstance GroupedInstance::kernel(Vector weight, Vector loss, Vector prob) {
  GroupedInstance g;
  g.region.assign(prob.size(), Region::boundary);
  g.weight = std::move(weight);
  g.loss = std::move(loss);
  g.prob = std::move(prob);
  return g;
}

double primal_min_distance(const FDivergence& gen, const GroupedInstance& inst, Vector* argmin,
                           const PrimalSettings& settings) {
  inst.validate();
  const Layout lay = make_layout(gen, inst);
  if (lay.index.empty()) return kInfinity;
  const PhaseOne p1 = run_phase_one(gen, inst, lay, settings, -kInfinity);
  if (argmin) {
    argmin->assign(inst.size(), 0.0);
    for (std::size_t v = 0; v < lay.index.size(); ++v) (*argmin)[lay.index[v]] = p1.q(static_cast<Eigen::Index>(v));
  }
  return p1.distance;
}

PrimalSolution primal_robust_cost(const FDivergence& gen, const GroupedInstance& inst, double radius,
                                  const PrimalSettings& settings) {
  inst.validate();
  if (!(radius >= 0.0)) throw InvalidArgument("primal", "radius must be nonnegative");
  PrimalSolution out;
  const Layout lay = make_layout(gen, inst);
  if (lay.index.empty()) return out;

  const PhaseOne p1 = run_phase_one(gen, inst, lay, settings, radius);
  out.newton_steps = p1.steps;
  if (!(p1.distance < radius)) return out;

  CostBarrier obj(gen, inst, lay, radius);
  const double window = obj.equality().dot(p1.q);
  if (!(window > 0.0)) return out;
  VectorXd p = p1.q / window;

  const double m = static_cast<double>(constraint_count(lay, true));
  double t = 1.0;
  for (int outer = 0; outer < 200; ++outer) {
    out.newton_steps += center(obj, p, t, settings.max_newton);
    if (m / t < settings.gap_tol * std::max(1.0, std::abs(obj.objective(p)))) break;
    t *= settings.t_growth;
  }
  out.feasible = true;
  out.cost = obj.objective(p);
  out.scale = p.sum();
  out.model.assign(inst.size(), 0.0);
  for (std::size_t v = 0; v < lay.index.size(); ++v)
    out.model[lay.index[v]] = p(static_cast<Eigen::Index>(v)) / out.scale;
  return out;
}

}  // namespace boro
