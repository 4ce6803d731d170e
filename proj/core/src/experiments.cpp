#include "boro/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "boro/bootstrap.hpp"
#include "boro/convex_engine.hpp"
#include "boro/error.hpp"

namespace boro {

LossSpec newsvendor_loss(double backorder, double holding) {
  if (!(backorder > 0.0) || !(holding > 0.0))
    throw InvalidArgument("experiments", "newsvendor costs must be positive");
  LossSpec l;
  l.name = "newsvendor";
  l.dim_z = 1;
  l.loss = [backorder, holding](std::span<const double> z, std::span<const double> y) {
    const double d = y[0] - z[0];
    return d > 0.0 ? backorder * d : -holding * d;
  };
  // Left derivative at the kink.
  l.subgradient = [backorder, holding](std::span<const double> z, std::span<const double> y, std::span<double> g) {
    g[0] = z[0] > y[0] ? holding : -backorder;
  };
  return l;
}

double newsvendor_oracle_quantile(const ContextualDistribution& dist, double backorder, double holding) {
  dist.validate();
  if (dist.weights.empty()) throw InvalidArgument("experiments", "empty distribution");
  std::vector<std::size_t> idx(dist.weights.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist.labels[a][0] < dist.labels[b][0]; });
  const double level = backorder / (backorder + holding);
  double cumulative = 0.0;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    cumulative += dist.weights[idx[p]];
    const bool last_of_value = p + 1 == idx.size() || dist.labels[idx[p + 1]][0] != dist.labels[idx[p]][0];
    if (last_of_value && cumulative >= level - 1e-12) return dist.labels[idx[p]][0];
  }
  return dist.labels[idx.back()][0];
}

LossSpec portfolio_loss(double eps, double lambda, std::size_t assets) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("experiments", "risk level must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw InvalidArgument("experiments", "trade-off must be nonnegative");
  if (assets == 0) throw InvalidArgument("experiments", "need at least one asset");
  LossSpec l;
  l.name = "portfolio";
  l.dim_z = assets + 1;
  l.loss = [eps, lambda, assets](std::span<const double> z, std::span<const double> y) {
    double ret = 0.0;
    for (std::size_t a = 0; a < assets; ++a) ret += z[a] * y[a];
    const double beta = z[assets];
    return beta + std::max(-ret - beta, 0.0) / eps - lambda * ret;
  };
  l.subgradient = [eps, lambda, assets](std::span<const double> z, std::span<const double> y, std::span<double> g) {
    double ret = 0.0;
    for (std::size_t a = 0; a < assets; ++a) ret += z[a] * y[a];
    const bool tail = -ret - z[assets] > 0.0;
    for (std::size_t a = 0; a < assets; ++a) g[a] = (tail ? -y[a] / eps : 0.0) - lambda * y[a];
    g[assets] = tail ? 1.0 - 1.0 / eps : 1.0;
  };
  l.project = [assets](std::span<double> z) { project_simplex_inplace(z.first(assets)); };
  l.start.assign(assets + 1, 1.0 / static_cast<double>(assets));
  l.start[assets] = 0.0;
  l.coordinate_scale.assign(assets + 1, 1.0);
  l.coordinate_scale[assets] = 100.0;
  return l;
}

double cvar(std::span<const double> losses, std::span<const double> weights, double eps) {
  if (losses.size() != weights.size() || losses.empty()) throw InvalidArgument("experiments", "bad distribution");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("experiments", "risk level must lie in (0, 1]");
  std::vector<std::size_t> idx(losses.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
  double remaining = eps;
  double acc = 0.0;
  for (std::size_t i : idx) {
    const double take = std::min(weights[i], remaining);
    acc += take * losses[i];
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return acc / eps;
}

VarianceConvention parse_variance_convention(std::string_view name) {
  if (name == "variance") return VarianceConvention::variance;
  if (name == "std" || name == "std_dev") return VarianceConvention::std_dev;
  throw InvalidArgument("experiments", "variance_convention must be 'variance' or 'std'");
}

std::string_view to_string(VarianceConvention c) {
  return c == VarianceConvention::variance ? "variance" : "std";
}

namespace {

double as_std(double spread, VarianceConvention c) {
  return c == VarianceConvention::variance ? std::sqrt(spread) : spread;
}

}  // namespace

double NewsvendorModel::conditional_mean(double temperature, bool weekend) const {
  return 100.0 + (temperature - 20.0) + (weekend ? 20.0 : 0.0);
}

double NewsvendorModel::demand_std() const { return as_std(demand_spread, convention); }
double NewsvendorModel::temperature_std() const { return as_std(temperature_spread, convention); }

Dataset NewsvendorModel::sample(std::size_t n, std::mt19937_64& rng) const {
  std::normal_distribution<double> temp(temperature_mean, temperature_std());
  std::normal_distribution<double> noise(0.0, demand_std());
  std::uniform_int_distribution<int> day(0, 6);  // 5 and 6 are the weekend
  std::vector<SupervisedSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = temp(rng);
    const bool weekend = day(rng) >= 5;
    out.push_back({{t, weekend ? 1.0 : 0.0}, {conditional_mean(t, weekend) + noise(rng)}});
  }
  return Dataset(std::move(out));
}

std::vector<Vector> NewsvendorModel::conditional_sample(std::span<const double> x, std::size_t n,
                                                        std::mt19937_64& rng) const {
  std::normal_distribution<double> noise(0.0, demand_std());
  const double mean = conditional_mean(x[0], x[1] > 0.5);
  std::vector<Vector> out(n);
  for (auto& y : out) y = {mean + noise(rng)};
  return out;
}

double PortfolioModel::shift(std::span<const double> x) const {
  return 0.1 * (x[0] - 1000.0) + 1000.0 * x[1] + 10.0 * std::log(x[2] + 1.0);
}

std::vector<Vector> PortfolioModel::conditional_sample(std::span<const double> x, std::size_t n,
                                                       std::mt19937_64& rng) const {
  std::normal_distribution<double> std_normal(0.0, 1.0);
  const double s = shift(x);
  const std::size_t d = mu.size();
  std::vector<Vector> out(n, Vector(d));
  std::array<double, 6> xi{};
  for (auto& y : out) {
    for (std::size_t a = 0; a < d; ++a) xi[a] = std_normal(rng);
    for (std::size_t a = 0; a < d; ++a) {
      double v = mu[a] + s;
      for (std::size_t b = 0; b <= a; ++b) v += sqrt_sigma[a][b] * xi[b];
      y[a] = v;
    }
  }
  return out;
}

Dataset PortfolioModel::sample(std::size_t n, std::mt19937_64& rng) const {
  std::normal_distribution<double> sap(sap_mean, as_std(sap_spread, convention));
  std::normal_distribution<double> inflation(inflation_mean, as_std(inflation_spread, convention));
  std::normal_distribution<double> log_war(log_war_mean, as_std(log_war_spread, convention));
  std::vector<SupervisedSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x{sap(rng), inflation(rng), std::exp(log_war(rng))};
    Vector y = conditional_sample(x, 1, rng).front();
    out.push_back({std::move(x), std::move(y)});
  }
  return Dataset(std::move(out));
}

Learner make_learner(const LearnerFamily& family, const Dataset& data, double bandwidth, std::size_t k) {
  if (family.kind == LearnerFamily::Kind::nw) return NwLearner{family.smoother, Bandwidth(bandwidth)};
  return NnLearner{family.smoother, Bandwidth(bandwidth), k, mahalanobis_proximity(data, family.ridge)};
}

Learner rule_of_thumb_learner(const LearnerFamily& family, const Dataset& data) {
  const auto k = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(static_cast<double>(data.size())))));
  return make_learner(family, data, bandwidth_rule_of_thumb(data).value, k);
}

namespace {

Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
  std::vector<SupervisedSample> s;
  s.reserve(idx.size());
  for (std::size_t i : idx) s.push_back(data[i]);
  return Dataset(std::move(s));
}

double squared_error(const ContextualDistribution& dist, const Vector& y) {
  double err = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < dist.weights.size(); ++i) mean += dist.weights[i] * dist.labels[i][c];
    err += (mean - y[c]) * (mean - y[c]);
  }
  return err;
}

}  // namespace

CvResult cross_validate(const LearnerFamily& family, const Dataset& data, std::size_t folds, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (folds < 2) throw InvalidArgument("experiments", "need at least two folds");
  if (folds >= n) throw InvalidArgument("experiments", "folds must be fewer than samples (leave-one-out is not supported)");
  const double h_rot = bandwidth_rule_of_thumb(data).value;
  const bool nn = family.kind == LearnerFamily::Kind::nn;

  std::vector<double> hs;
  if (nn && family.smoother.kind == SmootherKind::naive) {
    hs.push_back(h_rot);
  } else {
    for (double c : family.bandwidth_multipliers) hs.push_back(c * h_rot);
  }
  std::vector<std::size_t> ks{0};
  if (nn) {
    const std::size_t smallest_train = n - (n + folds - 1) / folds;
    const auto base = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(static_cast<double>(n)))));
    std::set<std::size_t> grid{std::min(base, smallest_train)};
    for (double c : family.k_multipliers) {
      const auto k = static_cast<std::size_t>(std::max(1.0, std::round(c * static_cast<double>(base))));
      if (k <= smallest_train) grid.insert(k);
    }
    ks.assign(grid.begin(), grid.end());
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t cells = hs.size() * ks.size();
  Vector total(cells, 0.0);
  std::vector<bool> valid(cells, true);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t p = 0; p < n; ++p) (p % folds == f ? test_idx : train_idx).push_back(perm[p]);
    const Dataset train = subset(data, train_idx);
    const EmpiricalModel m = empirical_model(train);
    const ProximityFn proximity = nn ? mahalanobis_proximity(train, family.ridge) : ProximityFn{};
    for (std::size_t t : test_idx) {
      const auto& sample = data[t];
      const NeighborhoodChain chain = nn ? build_neighborhoods(proximity, m, sample.x) : NeighborhoodChain{};
      for (std::size_t hi = 0; hi < hs.size(); ++hi) {
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
          const std::size_t cell = hi * ks.size() + ki;
          if (!valid[cell]) continue;
          try {
            ContextualDistribution dist;
            if (nn) {
              const NnLearner l{family.smoother, Bandwidth(hs[hi]), ks[ki], proximity};
              dist = nn_contextualize_at(l, m, sample.x, chain, select_neighborhood(chain, ks[ki], m.n()));
            } else {
              dist = nw_contextualize(NwLearner{family.smoother, Bandwidth(hs[hi])}, m, sample.x);
            }
            total[cell] += squared_error(dist, sample.y);
          } catch (const InvalidArgument&) {
            valid[cell] = false;  // empty window somewhere: drop this grid point
          }
        }
      }
    }
  }

  std::optional<std::size_t> best;
  for (std::size_t cell = 0; cell < cells; ++cell)
    if (valid[cell] && (!best || total[cell] < total[*best])) best = cell;
  if (!best) throw SolverError("experiments", "cross-validation: every grid point left a context window empty");
  const double h = hs[*best / ks.size()];
  const std::size_t k = ks[*best % ks.size()];
  return {make_learner(family, data, h, k), h, k, total[*best] / static_cast<double>(n)};
}

OutOfSample out_of_sample_eval(std::span<const double> z, const LearnerFit& fit, const LossSpec& loss,
                               const DataGenerator& generate, std::span<const double> xbar, std::size_t test_sets,
                               std::size_t test_size, std::uint64_t seed) {
  if (test_sets == 0 || test_size == 0) throw InvalidArgument("experiments", "need at least one nonempty test set");
  OutOfSample out;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t t = 0; t < test_sets; ++t) {
    std::mt19937_64 rng(resample_seed(seed, t));
    const Dataset test = generate(test_size, rng);
    double c;
    try {
      c = nominal_cost(fit(test), loss, empirical_model(test), xbar, z);
    } catch (const InvalidArgument&) {
      ++out.skipped;
      continue;
    }
    sum += c;
    sum_sq += c * c;
    ++out.sets;
  }
  if (out.sets == 0) throw SolverError("experiments", "every test set left the context window empty");
  const double count = static_cast<double>(out.sets);
  out.mean = sum / count;
  const double var = out.sets > 1 ? std::max(0.0, (sum_sq - count * out.mean * out.mean) / (count - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / count);
  return out;
}

OutOfSample out_of_sample_eval(std::span<const double> z, const Learner& learner, const LossSpec& loss,
                               const DataGenerator& generate, std::span<const double> xbar, std::size_t test_sets,
                               std::size_t test_size, std::uint64_t seed) {
  return out_of_sample_eval(
      z, [&learner](const Dataset&) { return learner; }, loss, generate, xbar, test_sets, test_size, seed);
}

}  // namespace boro
