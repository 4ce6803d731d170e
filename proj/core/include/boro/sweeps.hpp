#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "boro/convex_engine.hpp"
#include "boro/experiments.hpp"

namespace boro {

enum class Formulation { nw, nn };
std::string_view to_string(Formulation f);
Formulation parse_formulation(std::string_view name);

/// Default learner families: Gaussian kernel, and naive-smoother nearest
/// neighbors under the Mahalanobis metric.
LearnerFamily default_family(Formulation f);

struct NewsvendorSweep {
  NewsvendorModel model;
  std::vector<std::size_t> n_grid{50, 100, 200};
  std::vector<double> r_grid;            // explicit radii; when empty, target_b drives the radius
  std::vector<double> target_b{0.1};
  std::vector<Formulation> formulations{Formulation::nw, Formulation::nn};
  std::size_t resamples = 2000;
  std::vector<std::uint64_t> seeds{0};
  std::size_t folds = 10;
  std::size_t threads = 1;
  SolveSettings settings;
};

struct DisappointmentRow {
  Formulation formulation = Formulation::nw;
  bool robust = false;
  std::size_t n = 0;
  double r = 0.0;
  double target_b = 0.0;  // zero when the radius was given directly
  double empirical_b = 0.0;
  double bound_b = 1.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::size_t empty_windows = 0;
  double train_cost = 0.0;
  double decision = 0.0;
};

/// Disappointment of nominal and robust prescriptions at the model's context,
/// one row per (formulation, variant, n, radius, seed).
std::vector<DisappointmentRow> run_newsvendor(const NewsvendorSweep& cfg);

/// Subgradient settings for the seven-dimensional portfolio solves: the
/// out-of-sample comparison is insensitive below this accuracy.
inline SolveSettings portfolio_settings() {
  SolveSettings s;
  s.tol_x = 1e-6;
  s.round_length = 100;
  return s;
}

struct PortfolioSweep {
  PortfolioModel model;
  std::vector<std::size_t> n_grid{20, 50, 100, 200};
  double target_b = 0.01;
  std::vector<Formulation> formulations{Formulation::nw, Formulation::nn};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t test_sets = 200;
  std::size_t test_size = 200;
  std::size_t folds = 10;
  std::size_t threads = 1;
  SolveSettings settings = portfolio_settings();
};

struct OosRow {
  Formulation formulation = Formulation::nw;
  bool robust = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double r = 0.0;
  double train_cost = 0.0;
  double oos_cost = 0.0;
  double oos_std_error = 0.0;
};

std::vector<OosRow> run_portfolio(const PortfolioSweep& cfg);

struct OosSummary {
  Formulation formulation = Formulation::nw;
  bool robust = false;
  std::size_t n = 0;
  std::size_t seeds = 0;
  double mean_r = 0.0;
  double train_cost = 0.0;
  double oos_cost = 0.0;
  double oos_std_error = 0.0;  // across seeds
};

/// Averages rows over seeds per (formulation, variant, n).
std::vector<OosSummary> summarize(const std::vector<OosRow>& rows);

}  // namespace boro
