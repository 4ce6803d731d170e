#include "boro/robust.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "boro/error.hpp"

namespace boro {

namespace {

constexpr std::size_t kGroups = 3;
using GroupArray = std::array<double, kGroups>;

std::size_t slot(Region r) { return static_cast<std::size_t>(r); }

// x (a - log x) with 0 log 0 = 0.
double entropy_term(double x, double a) {
  if (x <= 0.0) return 0.0;
  if (a == -kInfinity) return -kInfinity;
  return x * (a - std::log(x));
}

struct GroupChoice {
  double value = -kInfinity;
  GroupArray q{0.0, 0.0, 0.0};
};

/// Spreads `total` over the listed groups proportionally to exp(a).
void softmax_into(const GroupArray& a, std::initializer_list<std::size_t> groups, double total, GroupArray& q) {
  double hi = -kInfinity;
  for (std::size_t g : groups) hi = std::max(hi, a[g]);
  if (total <= 0.0 || hi == -kInfinity) {
    for (std::size_t g : groups) q[g] = (total <= 0.0) ? 0.0 : kInfinity;  // infinity flags an impossible split
    return;
  }
  double sum = 0.0;
  for (std::size_t g : groups) sum += std::exp(a[g] - hi);
  for (std::size_t g : groups) q[g] = total * std::exp(a[g] - hi) / sum;
}

/// max over region masses q of sum q_g (a_g - log q_g) subject to
/// q_in <= upper and q_in + q_bd >= lower when constrained. The objective is
/// concave, so the best feasible maximizer over the four faces of the
/// constraint set (none, either, both active) is the global maximizer.
GroupChoice region_entropy_max(const GroupArray& a, bool constrained, double upper, double lower) {
  constexpr std::size_t in = 0, bd = 1, out = 2;
  std::array<GroupArray, 4> cand;
  std::size_t count = 0;
  softmax_into(a, {in, bd, out}, 1.0, cand[count++]);
  if (constrained) {
    GroupArray q{};
    q[in] = upper;
    softmax_into(a, {bd, out}, 1.0 - upper, q);
    cand[count++] = q;
    q = GroupArray{};
    q[out] = 1.0 - lower;
    softmax_into(a, {in, bd}, lower, q);
    cand[count++] = q;
    cand[count++] = GroupArray{upper, lower - upper, 1.0 - lower};
  }
  GroupChoice best;
  for (std::size_t c = 0; c < count; ++c) {
    const GroupArray& q = cand[c];
    bool ok = true;
    for (std::size_t g = 0; g < kGroups; ++g) ok = ok && std::isfinite(q[g]) && q[g] >= 0.0;
    if (!ok) continue;
    if (constrained && (q[in] > upper + 1e-12 || q[in] + q[bd] < lower - 1e-12)) continue;
    double v = 0.0;
    for (std::size_t g = 0; g < kGroups; ++g) v += entropy_term(q[g], a[g]);
    if (v > best.value) best = {v, q};
  }
  return best;
}

bool forced_zero(const GroupedInstance& inst, Region r) {
  return inst.constrained &&
         ((r == Region::inner && inst.upper <= 0.0) || (r == Region::outside && inst.lower >= 1.0));
}

GroupArray region_masses(const GroupedInstance& inst, const std::vector<bool>* keep = nullptr) {
  GroupArray m{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (!keep || (*keep)[i]) m[slot(inst.region[i])] += inst.prob[i];
  return m;
}

GroupArray log_of(const GroupArray& m) {
  GroupArray a;
  for (std::size_t g = 0; g < kGroups; ++g) a[g] = m[g] > 0.0 ? std::log(m[g]) : -kInfinity;
  return a;
}

/// Worst-case model spread as q_g * M_i / M(g) over the kept points.
RobustEvaluation spread_model(const GroupedInstance& inst, const GroupArray& q, const GroupArray& mass,
                              const std::vector<bool>& keep) {
  RobustEvaluation e;
  e.worst_case.assign(inst.size(), 0.0);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const std::size_t g = slot(inst.region[i]);
    if (keep[i] && mass[g] > 0.0) e.worst_case[i] = q[g] * inst.prob[i] / mass[g];
  }
  return e;
}

/// Fills scale, contextual weights and cost from e.worst_case. Returns false
/// when the model puts no smoother mass on the neighborhood.
bool finish_from_model(const GroupedInstance& inst, RobustEvaluation& e) {
  double window = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (inst.region[i] != Region::outside) window += inst.weight[i] * e.worst_case[i];
  if (!(window > 0.0)) return false;
  e.scale = 1.0 / window;
  e.contextual_weights.assign(inst.size(), 0.0);
  double cost = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (inst.region[i] == Region::outside) continue;
    e.contextual_weights[i] = inst.weight[i] * e.worst_case[i] * e.scale;
    if (e.contextual_weights[i] > 0.0) cost += e.contextual_weights[i] * inst.loss[i];
  }
  e.cost = cost;
  return true;
}

/// Exponentially tilted region masses a_g(alpha, nu) = log sum_g M e^{(L - alpha) S / nu}
/// for neighborhood regions, with a cheap path when S is constant on a region.
class TiltedRegions {
 public:
  explicit TiltedRegions(const GroupedInstance& inst) : inst_(inst) {
    for (std::size_t i = 0; i < inst.size(); ++i) {
      const Region r = inst.region[i];
      if (forced_zero(inst, r)) continue;
      if (r == Region::outside) {
        out_mass_ += inst.prob[i];
        continue;
      }
      const std::size_t g = slot(r);
      members_[g].push_back(i);
      if (members_[g].size() == 1) const_weight_[g] = inst.weight[i];
      if (inst.weight[i] != const_weight_[g]) constant_[g] = false;
    }
  }

  void set_nu(double nu) {
    nu_ = nu;
    for (std::size_t g = 0; g < 2; ++g) {
      if (!constant_[g] || members_[g].empty()) continue;
      double hi = -kInfinity;
      for (std::size_t i : members_[g]) {
        const double e = std::log(inst_.prob[i]) + inst_.loss[i] * const_weight_[g] / nu;
        if (e > hi) {
          hi = e;
          top_[g] = i;
        }
      }
      double sum = 0.0;
      for (std::size_t i : members_[g])
        sum += std::exp(std::log(inst_.prob[i]) + inst_.loss[i] * const_weight_[g] / nu - hi);
      log_sum_[g] = std::log(sum);
    }
  }

  /// Returns a_g and the tilted mean smoother weight per region.
  void evaluate(double alpha, GroupArray& a, GroupArray& mean_weight) const {
    for (std::size_t g = 0; g < 2; ++g) {
      if (members_[g].empty()) {
        a[g] = -kInfinity;
        mean_weight[g] = 0.0;
        continue;
      }
      if (constant_[g]) {
        a[g] = exponent(top_[g], alpha) + log_sum_[g];  // relative to the top point: no cancellation
        mean_weight[g] = const_weight_[g];
        continue;
      }
      double hi = -kInfinity;
      for (std::size_t i : members_[g]) hi = std::max(hi, exponent(i, alpha));
      double sum = 0.0;
      double ws = 0.0;
      for (std::size_t i : members_[g]) {
        const double w = std::exp(exponent(i, alpha) - hi);
        sum += w;
        ws += w * inst_.weight[i];
      }
      a[g] = hi + std::log(sum);
      mean_weight[g] = ws / sum;
    }
    a[2] = out_mass_ > 0.0 ? std::log(out_mass_) : -kInfinity;
    mean_weight[2] = 0.0;
  }

  double exponent(std::size_t i, double alpha) const {
    return std::log(inst_.prob[i]) + (inst_.loss[i] - alpha) * inst_.weight[i] / nu_;
  }

  double nu() const { return nu_; }
  const std::vector<std::size_t>& members(std::size_t g) const { return members_[g]; }

 private:
  const GroupedInstance& inst_;
  std::array<std::vector<std::size_t>, 2> members_;
  std::array<bool, 2> constant_{true, true};
  std::array<double, 2> const_weight_{0.0, 0.0};
  std::array<std::size_t, 2> top_{0, 0};
  std::array<double, 2> log_sum_{0.0, 0.0};
  double out_mass_ = 0.0;
  double nu_ = 1.0;
};

class DualSolver {
 public:
  DualSolver(const GroupedInstance& inst, double radius, double alpha_lo)
      : inst_(inst), radius_(radius), alpha_lo_(alpha_lo), tilt_(inst) {}

  // phi(alpha) = nu H(a(alpha)) + r nu at the current nu.
  double phi(double alpha, double* dphi) const {
    GroupArray a, ew;
    tilt_.evaluate(alpha, a, ew);
    const GroupChoice c = region_entropy_max(a, inst_.constrained, inst_.upper, inst_.lower);
    if (dphi) {
      double d = 0.0;
      for (std::size_t g = 0; g < kGroups; ++g) d -= c.q[g] * ew[g];
      *dphi = d;
    }
    return tilt_.nu() * (c.value + radius_);
  }

  double alpha_star(double nu) {
    tilt_.set_nu(nu);
    auto f = [this](double alpha, double* d) { return phi(alpha, d); };
    double lo = alpha_lo_;
    double hi = kInfinity;
    if (std::isfinite(warm_) && warm_ > lo) {
      double d = 0.0;
      const double fw = phi(warm_, &d);
      if (fw > 0.0) {
        lo = warm_;
      } else {
        hi = warm_;
        // The tangent at a point right of the root lands left of it.
        const double tangent = d < 0.0 ? warm_ - fw / d : -kInfinity;
        if (tangent > lo && tangent < hi && phi(tangent, nullptr) > 0.0) lo = tangent;
      }
    }
    if (!(phi(lo, nullptr) > 0.0)) return lo;  // only from rounding when r is barely above r*
    // phi is nu times a quantity in nats; 1e-13 nats is below any visible change in alpha.
    const double root = convex_decreasing_root(f, lo, hi, 1e-13, 1e-13 * nu);
    warm_ = root;
    return root;
  }

  RobustEvaluation recover(double nu, double alpha) {
    tilt_.set_nu(nu);
    GroupArray a, ew;
    tilt_.evaluate(alpha, a, ew);
    const GroupChoice c = region_entropy_max(a, inst_.constrained, inst_.upper, inst_.lower);
    RobustEvaluation e;
    e.regime = Regime::dual;
    e.worst_case.assign(inst_.size(), 0.0);
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t i : tilt_.members(g)) e.worst_case[i] = c.q[g] * std::exp(tilt_.exponent(i, alpha) - a[g]);
    if (a[2] > -kInfinity) {
      const double out_mass = std::exp(a[2]);
      for (std::size_t i = 0; i < inst_.size(); ++i)
        if (inst_.region[i] == Region::outside && !forced_zero(inst_, Region::outside))
          e.worst_case[i] = c.q[2] * inst_.prob[i] / out_mass;
    }
    e.dual.alpha = alpha;
    e.dual.nu = nu;
    if (inst_.constrained) {
      // mu_g = log q_g - a_g; the region shifts are nu (mu_bd - mu_out) and nu (mu_bd - mu_in).
      auto mu = [&](std::size_t g) { return c.q[g] > 0.0 ? std::log(c.q[g]) - a[g] : -kInfinity; };
      if (a[2] > -kInfinity) e.dual.eta1 = std::max(0.0, nu * (mu(1) - mu(2)));
      if (a[0] > -kInfinity) e.dual.eta2 = std::max(0.0, nu * (mu(1) - mu(0)));
    }
    return e;
  }

 private:
  const GroupedInstance& inst_;
  double radius_;
  double alpha_lo_;
  TiltedRegions tilt_;
  double warm_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::nominal: return "nominal";
    case Regime::dual: return "dual";
    case Regime::max_loss: return "max_loss";
    case Regime::primal: return "primal";
    case Regime::infeasible: return "infeasible";
  }
  return "?";
}

EmpiricalModel RobustEvaluation::worst_case_model(const EmpiricalModel& training) const {
  if (worst_case.empty()) throw InvalidArgument("robust_prescribe", "no worst-case model for an infeasible cost");
  return training.reweighted(worst_case);
}

RobustConfig RobustConfig::with_radius(double r, DistanceKind d) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("robust_prescribe", "radius must be finite and >= 0");
  if (d == DistanceKind::wasserstein) throw InvalidArgument("robust_prescribe", "wasserstein distance is not supported");
  RobustConfig c;
  c.distance_ = d;
  c.radius_ = r;
  return c;
}

RobustConfig RobustConfig::with_target(double b, DistanceKind d) {
  if (!(b > 0.0 && b <= 1.0)) throw InvalidArgument("robust_prescribe", "target disappointment must lie in (0, 1]");
  if (d != DistanceKind::bootstrap)
    throw InvalidArgument("robust_prescribe", "a target disappointment only calibrates the bootstrap distance");
  RobustConfig c;
  c.distance_ = d;
  c.target_b_ = b;
  return c;
}

double bootstrap_min_distance(const GroupedInstance& inst) {
  inst.validate();
  if (!inst.constrained) return 0.0;
  const GroupArray mass = region_masses(inst);
  // Training masses that already meet the constraints are at distance zero;
  // the entropy sum would only reproduce that up to rounding.
  if (mass[0] <= inst.upper + 1e-12 && mass[0] + mass[1] >= inst.lower - 1e-12) return 0.0;
  const GroupChoice c = region_entropy_max(log_of(mass), true, inst.upper, inst.lower);
  return std::max(0.0, -c.value);
}

RobustEvaluation bootstrap_dual_cost(const GroupedInstance& inst, double radius, double nu_hint) {
  inst.validate();
  if (!(radius >= 0.0)) throw InvalidArgument("robust_prescribe", "radius must be nonnegative");
  const std::size_t size = inst.size();
  std::vector<bool> keep(size);
  for (std::size_t i = 0; i < size; ++i) keep[i] = !forced_zero(inst, inst.region[i]);

  // Loss range over points the learner can weigh.
  double lmax = -kInfinity;
  double lmin = kInfinity;
  double wmax = 0.0;
  double wmin = kInfinity;
  for (std::size_t i = 0; i < size; ++i) {
    if (!keep[i] || inst.region[i] == Region::outside || !(inst.weight[i] > 0.0)) continue;
    lmax = std::max(lmax, inst.loss[i]);
    lmin = std::min(lmin, inst.loss[i]);
    wmax = std::max(wmax, inst.weight[i]);
    wmin = std::min(wmin, inst.weight[i]);
  }
  if (lmax == -kInfinity) return {};  // no smoother mass reachable

  const GroupArray mass = region_masses(inst);
  const double r_star = bootstrap_min_distance(inst);
  if (radius < r_star || (radius == r_star && r_star > 0.0)) return {};

  // Radius at (or within rounding of) the minimum: the only admissible model
  // is the projection of the training masses onto the constraints.
  if (radius - r_star <= 1e-13 * std::max(1.0, radius)) {
    const GroupChoice c = region_entropy_max(log_of(mass), inst.constrained, inst.upper, inst.lower);
    RobustEvaluation e = spread_model(inst, c.q, mass, keep);
    if (!finish_from_model(inst, e)) return {};
    e.regime = Regime::nominal;
    e.dual.alpha = e.cost;
    return e;
  }

  // Can the budget reach models concentrated on the maximal loss (plus points
  // the learner ignores)? Then the supremum is the maximal loss itself.
  std::vector<bool> top(size);
  for (std::size_t i = 0; i < size; ++i) {
    top[i] = keep[i] && (inst.region[i] == Region::outside || !(inst.weight[i] > 0.0) || inst.loss[i] == lmax);
  }
  const GroupArray top_mass = region_masses(inst, &top);
  const GroupChoice top_choice = region_entropy_max(log_of(top_mass), inst.constrained, inst.upper, inst.lower);
  if (-top_choice.value <= radius) {
    RobustEvaluation e = spread_model(inst, top_choice.q, top_mass, top);
    if (finish_from_model(inst, e)) {
      e.regime = Regime::max_loss;
      e.cost = lmax;
      e.dual.alpha = lmax;
      return e;
    }
  }

  DualSolver solver(inst, radius, lmin);
  auto objective = [&](double log_nu) { return solver.alpha_star(std::exp(log_nu)); };
  // When the neighborhood constraints alone pin the supremum the budget is
  // slack and the optimal nu is zero; a floor far below the smallest weighted
  // loss scale reproduces that limit while keeping the tilt finite. Smoother
  // weights far from the context can span hundreds of orders of magnitude.
  const double center = std::log((lmax - lmin) * wmax);
  const double floor = std::max(std::log((lmax - lmin) * wmin) - 23.0, center - 690.0);
  const double ceiling = center + 30.0;
  // alpha*(nu) is convex in nu, hence unimodal in log nu, but it can be
  // numerically flat far from the optimum. Walk outward from the hint with
  // doubling steps, through ties, until each side rises; Brent then refines
  // between the walk points adjacent to the best one.
  const double start = nu_hint > 0.0 && std::isfinite(nu_hint) ? std::clamp(std::log(nu_hint), floor, ceiling)
                                                                 : std::clamp(center, floor, ceiling);
  std::vector<std::pair<double, double>> walk{{start, objective(start)}};
  double best_value = walk[0].second;
  for (const double dir : {1.0, -1.0}) {
    double x = start;
    double step = 0.5;
    while (dir > 0.0 ? x < ceiling : x > floor) {
      x = std::clamp(x + dir * step, floor, ceiling);
      const double v = objective(x);
      walk.emplace_back(x, v);
      if (v > best_value + 1e-10 * (1.0 + std::abs(best_value))) break;
      best_value = std::min(best_value, v);
      step *= 2.0;
    }
  }
  std::sort(walk.begin(), walk.end());
  std::size_t at = 0;
  for (std::size_t w = 1; w < walk.size(); ++w)
    if (walk[w].second < walk[at].second) at = w;
  const double lo = walk[at > 0 ? at - 1 : 0].first;
  const double hi = walk[std::min(at + 1, walk.size() - 1)].first;
  ScalarMinimum best{walk[at].first, walk[at].second, walk.size()};
  if (hi > lo) {
    const ScalarMinimum refined = brent_minimize(objective, lo, hi, 1e-8, 200);
    if (refined.value < best.value) best = refined;
  }

  const double nu = std::exp(best.x);
  const double alpha = solver.alpha_star(nu);
  RobustEvaluation e = solver.recover(nu, alpha);
  if (!finish_from_model(inst, e)) throw SolverError("robust_prescribe", "dual recovery produced an empty window");
  e.cost = alpha;
  return e;
}

RobustEvaluation primal_cost(const FDivergence& gen, const GroupedInstance& inst, double radius) {
  if (radius == 0.0) {
    // The divergences here discriminate, so only the training model remains.
    RobustEvaluation e;
    const double r_star = inst.constrained ? primal_min_distance(gen, inst) : 0.0;
    if (r_star > 1e-12) return e;
    e.worst_case = inst.prob;
    if (!finish_from_model(inst, e)) return {};
    e.regime = Regime::nominal;
    return e;
  }
  const PrimalSolution p = primal_robust_cost(gen, inst, radius);
  RobustEvaluation e;
  if (!p.feasible) return e;
  e.worst_case = p.model;
  if (!finish_from_model(inst, e)) return {};
  e.regime = Regime::primal;
  e.cost = p.cost;
  e.scale = p.scale;
  return e;
}

GroupedInstance neighborhood_instance(const NeighborhoodChain& chain, std::size_t j, std::size_t k, std::size_t n,
                                      const Vector& prob, const Vector& weight, const Vector& loss) {
  if (j == 0 || j > chain.size()) throw InvalidArgument("robust_prescribe", "neighborhood index out of range");
  GroupedInstance g;
  g.weight = weight;
  g.loss = loss;
  g.prob = prob;
  g.region.assign(prob.size(), Region::outside);
  for (std::size_t p = 0; p + 1 < j; ++p) g.region[chain.order[p]] = Region::inner;
  g.region[chain.order[j - 1]] = Region::boundary;
  g.constrained = true;
  g.upper = static_cast<double>(k - 1) / static_cast<double>(n);
  g.lower = static_cast<double>(k) / static_cast<double>(n);
  return g;
}

MinRadii min_radii(std::size_t k, const EmpiricalModel& m, const NeighborhoodChain& chain, DistanceKind distance) {
  if (k == 0 || k > m.n()) throw InvalidArgument("robust_prescribe", "need 1 <= k <= n");
  MinRadii out;
  out.nominal_j = select_neighborhood(chain, k, m.n());
  out.r_star.resize(chain.size());
  const Vector ones(m.size(), 1.0);
  const Vector zeros(m.size(), 0.0);
  std::optional<FDivergence> gen;
  if (distance != DistanceKind::bootstrap) gen = generator_for(distance);
  for (std::size_t j = 1; j <= chain.size(); ++j) {
    if (j == out.nominal_j) {
      out.r_star[j - 1] = 0.0;
      continue;
    }
    const GroupedInstance inst = neighborhood_instance(chain, j, k, m.n(), m.prob(), ones, zeros);
    out.r_star[j - 1] = gen ? std::max(0.0, primal_min_distance(*gen, inst)) : bootstrap_min_distance(inst);
  }
  return out;
}

double calibrate_radius_nw(double target_b, std::size_t n) {
  if (!(target_b > 0.0 && target_b <= 1.0)) throw InvalidArgument("robust_prescribe", "target must lie in (0, 1]");
  if (n == 0) throw InvalidArgument("robust_prescribe", "empty data");
  return std::log(1.0 / target_b) / static_cast<double>(n);
}

double nw_bound(double r, std::size_t n) { return std::exp(-static_cast<double>(n) * r); }

double nn_bound(double r, std::size_t n, const MinRadii& radii) {
  double b = 0.0;
  for (double rs : radii.r_star) b += std::exp(-static_cast<double>(n) * std::max(r, rs));
  return b;
}

double calibrate_radius_nn(double target_b, std::size_t n, const MinRadii& radii) {
  if (!(target_b > 0.0 && target_b <= 1.0)) throw InvalidArgument("robust_prescribe", "target must lie in (0, 1]");
  if (radii.r_star.empty()) throw InvalidArgument("robust_prescribe", "no minimum radii");
  if (nn_bound(0.0, n, radii) <= target_b) return 0.0;
  double lo = 0.0;
  // Every term is at most b/J here up to rounding; widen until it holds exactly.
  double hi = std::log(static_cast<double>(radii.r_star.size()) / target_b) / static_cast<double>(n);
  for (int grow = 0; nn_bound(hi, n, radii) > target_b; ++grow) {
    if (grow == 60) throw SolverError("robust_prescribe", "radius calibration failed to bracket");
    hi = hi * (1.0 + 1e-12) + 1e-300;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (nn_bound(mid, n, radii) <= target_b) hi = mid; else lo = mid;
  }
  return hi;
}

double resolve_radius(const RobustConfig& cfg, const Learner& learner, const EmpiricalModel& m,
                      std::span<const double> xbar) {
  if (cfg.radius()) return *cfg.radius();
  const double b = *cfg.target_b();
  if (std::holds_alternative<NwLearner>(learner)) return calibrate_radius_nw(b, m.n());
  const auto& nn = std::get<NnLearner>(learner);
  const NeighborhoodChain chain = build_neighborhoods(nn.distance, m, xbar);
  return calibrate_radius_nn(b, m.n(), min_radii(nn.k, m, chain));
}

RobustCostEvaluator::RobustCostEvaluator(const RobustConfig& cfg, const Learner& learner, const LossSpec& loss,
                                         const EmpiricalModel& m, std::span<const double> xbar)
    : loss_(loss), model_(m), distance_(cfg.distance()) {
  if (distance_ == DistanceKind::wasserstein)
    throw InvalidArgument("robust_prescribe", "wasserstein distance is not supported");
  if (distance_ == DistanceKind::f_divergence)
    throw InvalidArgument("robust_prescribe", "f_divergence needs an explicit generator; use primal_cost");
  if (const auto* nw = std::get_if<NwLearner>(&learner)) {
    weight_ = smoother_weights(nw->smoother, nw->h, m, xbar);
    double window = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) window += weight_[i] * m.prob()[i];
    if (!(window > 0.0)) (void)nw_contextualize(*nw, m, xbar);  // raises the empty-window error
    radius_ = cfg.radius() ? *cfg.radius() : calibrate_radius_nw(*cfg.target_b(), m.n());
    nu_hint_.assign(1, 0.0);
  } else {
    const auto& nn = std::get<NnLearner>(learner);
    if (nn.k == 0 || nn.k > m.n()) throw InvalidArgument("robust_prescribe", "need 1 <= k <= n");
    nn_ = true;
    k_ = nn.k;
    weight_ = smoother_weights(nn.smoother, nn.h, m, xbar);
    chain_ = build_neighborhoods(nn.distance, m, xbar);
    (void)nn_contextualize_at(nn, m, xbar, chain_, select_neighborhood(chain_, nn.k, m.n()));
    radii_ = min_radii(nn.k, m, chain_, distance_);
    radius_ = cfg.radius() ? *cfg.radius() : calibrate_radius_nn(*cfg.target_b(), m.n(), radii_);
    nu_hint_.assign(chain_.size(), 0.0);
  }
}

Vector RobustCostEvaluator::losses(std::span<const double> z) const {
  Vector l(model_.size());
  for (std::size_t i = 0; i < model_.size(); ++i) l[i] = loss_(z, model_[i].y);
  return l;
}

RobustEvaluation RobustCostEvaluator::solve(const GroupedInstance& inst, std::size_t hint_slot) {
  for (double v : inst.loss)
    if (!std::isfinite(v)) throw SolverError("robust_prescribe", "loss is not finite on the support");
  RobustEvaluation e;
  if (distance_ == DistanceKind::bootstrap) {
    e = bootstrap_dual_cost(inst, radius_, nu_hint_[hint_slot]);
    if (e.regime == Regime::dual) nu_hint_[hint_slot] = e.dual.nu;
  } else {
    e = primal_cost(generator_for(distance_), inst, radius_);
  }
  return e;
}

RobustEvaluation RobustCostEvaluator::evaluate_partial(std::span<const double> z, std::size_t j) {
  if (!nn_) throw InvalidArgument("robust_prescribe", "partial costs exist only for nearest neighbors");
  if (j == 0 || j > chain_.size()) throw InvalidArgument("robust_prescribe", "neighborhood index out of range");
  RobustEvaluation e;
  if (radii_.r_star[j - 1] > radius_) {
    e.active_j = j;
    return e;
  }
  const GroupedInstance inst = neighborhood_instance(chain_, j, k_, model_.n(), model_.prob(), weight_, losses(z));
  e = solve(inst, j - 1);
  e.active_j = j;
  return e;
}

RobustEvaluation RobustCostEvaluator::evaluate(std::span<const double> z) {
  const Vector l = losses(z);
  if (!nn_) {
    RobustEvaluation e = solve(GroupedInstance::kernel(weight_, l, model_.prob()), 0);
    if (e.regime == Regime::infeasible) throw SolverError("robust_prescribe", "empty context window");
    return e;
  }
  RobustEvaluation best;
  for (std::size_t j = 1; j <= chain_.size(); ++j) {
    if (radii_.r_star[j - 1] > radius_) continue;
    const GroupedInstance inst = neighborhood_instance(chain_, j, k_, model_.n(), model_.prob(), weight_, l);
    RobustEvaluation e = solve(inst, j - 1);
    if (e.regime == Regime::infeasible) continue;
    if (!best.active_j || e.cost > best.cost) {
      best = std::move(e);
      best.active_j = j;
    }
  }
  if (!best.active_j) throw SolverError("robust_prescribe", "no neighborhood is reachable within the radius");
  return best;
}

void RobustCostEvaluator::subgradient(std::span<const double> z, const RobustEvaluation& e, std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
  Vector gi(g.size());
  for (std::size_t i = 0; i < e.contextual_weights.size(); ++i) {
    const double w = e.contextual_weights[i];
    if (w == 0.0) continue;
    loss_.subgradient(z, model_[i].y, gi);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] += w * gi[c];
  }
}

RobustEvaluation robust_nw_cost(const RobustConfig& cfg, const NwLearner& learner, const LossSpec& loss,
                                const EmpiricalModel& m, std::span<const double> xbar, std::span<const double> z) {
  RobustCostEvaluator ev(cfg, learner, loss, m, xbar);
  return ev.evaluate(z);
}

RobustEvaluation robust_nn_partial_cost(const RobustConfig& cfg, const NnLearner& learner, const LossSpec& loss,
                                        const EmpiricalModel& m, std::span<const double> xbar, std::size_t j,
                                        std::span<const double> z) {
  RobustCostEvaluator ev(cfg, learner, loss, m, xbar);
  return ev.evaluate_partial(z, j);
}

RobustEvaluation robust_nn_cost(const RobustConfig& cfg, const NnLearner& learner, const LossSpec& loss,
                                const EmpiricalModel& m, std::span<const double> xbar, std::span<const double> z) {
  RobustCostEvaluator ev(cfg, learner, loss, m, xbar);
  return ev.evaluate(z);
}

Prescription robust_prescribe(const RobustConfig& cfg, const Learner& learner, const LossSpec& loss,
                              const EmpiricalModel& m, std::span<const double> xbar, const SolveSettings& settings) {
  RobustCostEvaluator ev(cfg, learner, loss, m, xbar);
  if (ev.radius() == 0.0 && cfg.distance() == DistanceKind::bootstrap) {
    Prescription p = nominal_prescribe(learner, loss, m, xbar, settings);
    p.radius = 0.0;
    return p;
  }
  ObjectiveFn objective = [&ev](std::span<const double> z, std::span<double> g) {
    const RobustEvaluation e = ev.evaluate(z);
    if (!g.empty()) ev.subgradient(z, e, g);
    return e.cost;
  };
  const ProjectionFn project = loss.project ? ProjectionFn(loss.project) : ProjectionFn();
  const MinimizeResult r = minimize_convex(objective, project, loss.initial_point(), settings, loss.coordinate_scale);
  Prescription p;
  p.z = r.x;
  const RobustEvaluation final_eval = ev.evaluate(p.z);
  p.cost = final_eval.cost;
  p.radius = ev.radius();
  p.active_j = final_eval.active_j;
  p.iterations = r.iterations;
  p.final_step = r.final_step;
  p.status = r.status;
  return p;
}

}  // namespace boro
