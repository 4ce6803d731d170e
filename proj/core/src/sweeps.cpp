#include "boro/sweeps.hpp"

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "boro/bootstrap.hpp"
#include "boro/error.hpp"
#include "boro/parallel.hpp"
#include "boro/robust.hpp"

namespace boro {

std::string_view to_string(Formulation f) { return f == Formulation::nw ? "nw" : "nn"; }

Formulation parse_formulation(std::string_view name) {
  if (name == "nw") return Formulation::nw;
  if (name == "nn") return Formulation::nn;
  throw InvalidArgument("experiments", "formulation must be 'nw' or 'nn'");
}

LearnerFamily default_family(Formulation f) {
  LearnerFamily fam;
  if (f == Formulation::nw) {
    fam.kind = LearnerFamily::Kind::nw;
    fam.smoother = Smoother{SmootherKind::gaussian};
  } else {
    fam.kind = LearnerFamily::Kind::nn;
    fam.smoother = Smoother{SmootherKind::naive};
  }
  return fam;
}

namespace {

// Distinct streams for training data, cross-validation and resampling.
std::uint64_t stream(std::uint64_t seed, std::size_t n, std::uint64_t purpose) {
  return splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(n) * 0x100 + purpose));
}

}  // namespace

std::vector<DisappointmentRow> run_newsvendor(const NewsvendorSweep& cfg) {
  struct Cell {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t n : cfg.n_grid)
    for (std::uint64_t s : cfg.seeds) cells.push_back({n, s});

  std::vector<std::vector<DisappointmentRow>> out(cells.size());
  const LossSpec loss = cfg.model.loss();
  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const auto [n, seed] = cells[c];
    std::mt19937_64 rng(stream(seed, n, 1));
    const Dataset data = cfg.model.sample(n, rng);
    const EmpiricalModel m = empirical_model(data);
    for (Formulation f : cfg.formulations) {
      const CvResult cv = cross_validate(default_family(f), data, cfg.folds, stream(seed, n, 2));
      BootstrapPlan plan;
      plan.resamples = cfg.resamples;
      plan.seed = stream(seed, n, 3);

      auto record = [&](const Prescription& p, bool robust, double target) {
        const DisappointmentReport rep = estimate_disappointment(p, cv.learner, loss, data, cfg.model.context, plan);
        DisappointmentRow row;
        row.formulation = f;
        row.robust = robust;
        row.n = n;
        row.r = p.radius;
        row.target_b = target;
        row.empirical_b = rep.empirical_b;
        row.bound_b = rep.bound_b;
        row.m = rep.resamples;
        row.seed = seed;
        row.empty_windows = rep.empty_windows;
        row.train_cost = p.cost;
        row.decision = p.z[0];
        out[c].push_back(row);
      };

      record(nominal_prescribe(cv.learner, loss, m, cfg.model.context, cfg.settings), false, 0.0);
      if (!cfg.r_grid.empty()) {
        for (double r : cfg.r_grid)
          record(robust_prescribe(RobustConfig::with_radius(r), cv.learner, loss, m, cfg.model.context, cfg.settings),
                 true, 0.0);
      } else {
        for (double b : cfg.target_b)
          record(robust_prescribe(RobustConfig::with_target(b), cv.learner, loss, m, cfg.model.context, cfg.settings),
                 true, b);
      }
    }
  });
  std::vector<DisappointmentRow> rows;
  for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<OosRow> run_portfolio(const PortfolioSweep& cfg) {
  struct Cell {
    std::size_t n;
    std::uint64_t seed;
    Formulation f;
  };
  std::vector<Cell> cells;
  for (std::size_t n : cfg.n_grid)
    for (std::uint64_t s : cfg.seeds)
      for (Formulation f : cfg.formulations) cells.push_back({n, s, f});

  const LossSpec loss = cfg.model.loss();
  const PortfolioModel& model = cfg.model;
  const DataGenerator generate = [&model](std::size_t size, std::mt19937_64& rng) { return model.sample(size, rng); };
  std::vector<std::vector<OosRow>> out(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const auto [n, seed, f] = cells[c];
    std::mt19937_64 rng(stream(seed, n, 1));
    const Dataset data = model.sample(n, rng);
    const EmpiricalModel m = empirical_model(data);
    const CvResult cv = cross_validate(default_family(f), data, cfg.folds, stream(seed, n, 2));
    const std::uint64_t test_seed = stream(seed, 0, 4);  // common test sets across n
    const LearnerFamily family = default_family(f);
    const LearnerFit fit = [&family](const Dataset& test) { return rule_of_thumb_learner(family, test); };

    auto record = [&](const Prescription& p, bool robust) {
      const OutOfSample oos =
          out_of_sample_eval(p.z, fit, loss, generate, model.context, cfg.test_sets, cfg.test_size, test_seed);
      out[c].push_back({f, robust, n, seed, p.radius, p.cost, oos.mean, oos.std_error});
    };
    record(nominal_prescribe(cv.learner, loss, m, model.context, cfg.settings), false);
    record(robust_prescribe(RobustConfig::with_target(cfg.target_b), cv.learner, loss, m, model.context, cfg.settings),
           true);
  });
  std::vector<OosRow> rows;
  for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<OosSummary> summarize(const std::vector<OosRow>& rows) {
  std::map<std::tuple<int, bool, std::size_t>, std::vector<const OosRow*>> groups;
  for (const auto& r : rows) groups[{static_cast<int>(r.formulation), r.robust, r.n}].push_back(&r);
  std::vector<OosSummary> out;
  for (const auto& [key, members] : groups) {
    OosSummary s;
    s.formulation = static_cast<Formulation>(std::get<0>(key));
    s.robust = std::get<1>(key);
    s.n = std::get<2>(key);
    s.seeds = members.size();
    double sq = 0.0;
    for (const OosRow* r : members) {
      s.mean_r += r->r;
      s.train_cost += r->train_cost;
      s.oos_cost += r->oos_cost;
      sq += r->oos_cost * r->oos_cost;
    }
    const double k = static_cast<double>(members.size());
    s.mean_r /= k;
    s.train_cost /= k;
    s.oos_cost /= k;
    if (members.size() > 1)
      s.oos_std_error = std::sqrt(std::max(0.0, (sq - k * s.oos_cost * s.oos_cost) / (k - 1.0)) / k);
    out.push_back(s);
  }
  return out;
}

}  // namespace boro
