#include "boro/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "boro/error.hpp"

namespace boro {

namespace {

[[noreturn]] void throw_empty_window(Bandwidth h) {
  std::ostringstream os;
  os << "empty context window (all smoother weights vanish at the context with bandwidth " << h.value
     << "; increase the bandwidth or use a smoother with unbounded support)";
  throw InvalidArgument("learners", os.str());
}

ContextualDistribution weighted_labels(const EmpiricalModel& m, const Vector& raw, double total) {
  ContextualDistribution out;
  out.labels.reserve(m.size());
  out.weights.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.labels.push_back(m[i].y);
    out.weights[i] = raw[i] / total;
  }
  return out;
}

}  // namespace

Vector smoother_weights(const Smoother& s, Bandwidth h, const EmpiricalModel& m, std::span<const double> xbar) {
  Vector w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& x = m[i].x;
    if (x.size() != xbar.size()) throw InvalidArgument("learners", "context dimension mismatch");
    double sq = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) sq += (x[c] - xbar[c]) * (x[c] - xbar[c]);
    w[i] = evaluate_radial(s.kind, std::sqrt(sq) / h.value);
  }
  return w;
}

ContextualDistribution nw_contextualize(const NwLearner& l, const EmpiricalModel& m, std::span<const double> xbar) {
  const Vector s = smoother_weights(l.smoother, l.h, m, xbar);
  Vector raw(m.size());
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    raw[i] = s[i] * m.prob()[i];
    total += raw[i];
  }
  if (!(total > 0.0)) throw_empty_window(l.h);
  return weighted_labels(m, raw, total);
}

NeighborhoodChain build_neighborhoods(const ProximityFn& d, const EmpiricalModel& m, std::span<const double> xbar) {
  const std::size_t size = m.size();
  Vector dist(size);
  for (std::size_t i = 0; i < size; ++i) dist[i] = d.base(m[i], xbar);

  NeighborhoodChain chain;
  chain.order.resize(size);
  std::iota(chain.order.begin(), chain.order.end(), 0);
  std::sort(chain.order.begin(), chain.order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    if (d.tiebreak_less(m[a], m[b])) return true;
    if (d.tiebreak_less(m[b], m[a])) return false;
    return a < b;  // support points are distinct; keeps the order total regardless
  });
  return rebase_neighborhoods(chain, m.prob());
}

NeighborhoodChain rebase_neighborhoods(const NeighborhoodChain& chain, const Vector& prob) {
  NeighborhoodChain out;
  out.order = chain.order;
  out.cumulative_mass.assign(out.order.size() + 1, 0.0);
  for (std::size_t j = 0; j < out.order.size(); ++j)
    out.cumulative_mass[j + 1] = out.cumulative_mass[j] + prob[out.order[j]];
  return out;
}

std::size_t select_neighborhood(const NeighborhoodChain& chain, std::size_t k, std::size_t n) {
  if (k == 0 || k > n) throw InvalidArgument("learners", "need 1 <= k <= n");
  const double upper = static_cast<double>(k) / static_cast<double>(n);
  const double lower = static_cast<double>(k - 1) / static_cast<double>(n);
  for (std::size_t j = 1; j <= chain.size(); ++j) {
    if (chain.cumulative_mass[j] >= upper - kMassTolerance) {
      if (chain.cumulative_mass[j - 1] > lower + kMassTolerance)
        throw SolverError("learners", "no neighborhood satisfies both mass conditions");
      return j;
    }
  }
  // Rounding can leave the full prefix a hair below k/n.
  return chain.size();
}

ContextualDistribution nn_contextualize_at(const NnLearner& l, const EmpiricalModel& m, std::span<const double> xbar,
                                           const NeighborhoodChain& chain, std::size_t j) {
  if (j == 0 || j > chain.size()) throw InvalidArgument("learners", "neighborhood index out of range");
  const Vector s = smoother_weights(l.smoother, l.h, m, xbar);
  Vector raw(m.size(), 0.0);
  double total = 0.0;
  for (std::size_t i : chain.prefix(j)) {
    raw[i] = s[i] * m.prob()[i];
    total += raw[i];
  }
  if (!(total > 0.0)) throw_empty_window(l.h);
  return weighted_labels(m, raw, total);
}

ContextualDistribution nn_contextualize(const NnLearner& l, const EmpiricalModel& m, std::span<const double> xbar) {
  if (l.k == 0 || l.k > m.n()) throw InvalidArgument("learners", "need 1 <= k <= n");
  const NeighborhoodChain chain = build_neighborhoods(l.distance, m, xbar);
  return nn_contextualize_at(l, m, xbar, chain, select_neighborhood(chain, l.k, m.n()));
}

ContextualDistribution contextualize(const Learner& l, const EmpiricalModel& m, std::span<const double> xbar) {
  return std::visit(
      [&](const auto& learner) -> ContextualDistribution {
        if constexpr (std::is_same_v<std::decay_t<decltype(learner)>, NwLearner>)
          return nw_contextualize(learner, m, xbar);
        else
          return nn_contextualize(learner, m, xbar);
      },
      l);
}

bool label_then_covariate_less(const SupervisedSample& a, const SupervisedSample& b) {
  if (std::lexicographical_compare(a.y.begin(), a.y.end(), b.y.begin(), b.y.end())) return true;
  if (std::lexicographical_compare(b.y.begin(), b.y.end(), a.y.begin(), a.y.end())) return false;
  return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
}

ProximityFn mahalanobis_proximity(const Dataset& data, double ridge) {
  if (data.empty()) throw InvalidArgument("learners", "empty data");
  const auto d = static_cast<Eigen::Index>(data.dim_x());
  const double n = static_cast<double>(data.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : data) mean += Eigen::Map<const Eigen::VectorXd>(s.x.data(), d);
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : data) {
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(s.x.data(), d) - mean;
    cov += c * c.transpose();
  }
  cov /= n;
  cov.diagonal().array() += ridge;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double scale = std::max(cov.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
    throw InvalidArgument("learners",
                          "singular covariate covariance; regularize with a ridge term epsilon * I");
  }
  Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(d, d));

  ProximityFn fn;
  fn.base = [inv = std::move(inv)](const SupervisedSample& m, std::span<const double> xbar) {
    const auto dim = static_cast<Eigen::Index>(xbar.size());
    if (dim != inv.rows()) throw InvalidArgument("learners", "context dimension mismatch");
    Eigen::VectorXd diff(dim);
    for (Eigen::Index c = 0; c < dim; ++c) diff[c] = m.x[static_cast<std::size_t>(c)] - xbar[static_cast<std::size_t>(c)];
    return diff.dot(inv * diff);
  };
  fn.tiebreak_less = label_then_covariate_less;
  return fn;
}

ProximityFn euclidean_proximity() {
  ProximityFn fn;
  fn.base = [](const SupervisedSample& m, std::span<const double> xbar) {
    if (m.x.size() != xbar.size()) throw InvalidArgument("learners", "context dimension mismatch");
    double sq = 0.0;
    for (std::size_t c = 0; c < xbar.size(); ++c) sq += (m.x[c] - xbar[c]) * (m.x[c] - xbar[c]);
    return sq;
  };
  fn.tiebreak_less = label_then_covariate_less;
  return fn;
}

}  // namespace boro
