#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "boro/learners.hpp"
#include "boro/model.hpp"
#include "boro/nominal.hpp"

namespace boro {

/// L(z, y) = b (y - z)+ + h (z - y)+ on scalar decisions and labels.
LossSpec newsvendor_loss(double backorder = 10.0, double holding = 1.0);

/// Smallest label whose cumulative weight reaches b / (b + h).
double newsvendor_oracle_quantile(const ContextualDistribution& dist, double backorder = 10.0, double holding = 1.0);

/// L(z, beta, y) = beta + (1/eps)(-z^T y - beta)+ - lambda z^T y with z on the
/// simplex. Decisions are laid out as (z_1, ..., z_assets, beta).
LossSpec portfolio_loss(double eps = 0.05, double lambda = 1.0, std::size_t assets = 6);

/// Tail mean of `losses` above the (1 - eps) quantile under `weights`:
/// min over beta of beta + E[(loss - beta)+] / eps.
double cvar(std::span<const double> losses, std::span<const double> weights, double eps);

/// How the second parameter of N(mean, .) in the synthetic models is read.
enum class VarianceConvention { variance, std_dev };
VarianceConvention parse_variance_convention(std::string_view name);
std::string_view to_string(VarianceConvention c);

/// Demand for a perishable good given temperature and a weekend flag.
struct NewsvendorModel {
  double backorder = 10.0;
  double holding = 1.0;
  double temperature_mean = 20.0;
  double temperature_spread = 4.0;
  double demand_spread = 16.0;
  VarianceConvention convention = VarianceConvention::variance;
  Vector context{15.0, 0.0};  // 15 degrees on a Friday

  double conditional_mean(double temperature, bool weekend) const;
  double demand_std() const;
  double temperature_std() const;
  /// Draws (temperature, weekend) with the day uniform over the week.
  Dataset sample(std::size_t n, std::mt19937_64& rng) const;
  /// Labels drawn from the conditional law at `x`.
  std::vector<Vector> conditional_sample(std::span<const double> x, std::size_t n, std::mt19937_64& rng) const;
  LossSpec loss() const { return newsvendor_loss(backorder, holding); }
};

/// Returns of six securities shifted by market covariates
/// (S&P 500 level, inflation, #war chatter).
struct PortfolioModel {
  double eps = 0.05;
  double lambda = 1.0;
  Vector mu{86.8625, 71.6059, 75.3759, 97.6258, 52.7854, 84.8973};
  std::array<std::array<double, 6>, 6> sqrt_sigma{{
      {136.687, 0, 0, 0, 0, 0},
      {8.79766, 142.279, 0, 0, 0, 0},
      {16.1504, 15.0637, 122.613, 0, 0, 0},
      {18.4944, 15.6961, 26.344, 139.148, 0, 0},
      {3.41394, 16.5922, 14.8795, 13.9914, 151.732, 0},
      {24.8156, 18.7292, 17.1574, 6.36536, 24.7703, 144.672},
  }};
  double sap_mean = 1000.0;
  double sap_spread = 50.0;
  double inflation_mean = 0.02;
  double inflation_spread = 0.01;
  double log_war_mean = 0.0;
  double log_war_spread = 1.0;
  VarianceConvention convention = VarianceConvention::variance;
  Vector context{970.0, 0.0, 10.0};

  /// Common shift 0.1 (sap - 1000) + 1000 i + 10 log(war + 1).
  double shift(std::span<const double> x) const;
  Dataset sample(std::size_t n, std::mt19937_64& rng) const;
  std::vector<Vector> conditional_sample(std::span<const double> x, std::size_t n, std::mt19937_64& rng) const;
  LossSpec loss() const { return portfolio_loss(eps, lambda, mu.size()); }
};

/// Learner family searched by cross-validation.
struct LearnerFamily {
  enum class Kind { nw, nn } kind = Kind::nw;
  Smoother smoother{SmootherKind::gaussian};
  double ridge = 0.0;  // Mahalanobis regularization for nearest neighbors
  Vector bandwidth_multipliers{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0};
  Vector k_multipliers{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};  // times round(sqrt(n))
};

struct CvResult {
  Learner learner;
  double bandwidth = 0.0;
  std::size_t k = 0;  // zero for the kernel learner
  double score = 0.0;
};

/// Picks bandwidth (and k) minimizing the mean squared error between the
/// contextual mean and held-out labels over `folds` folds.
CvResult cross_validate(const LearnerFamily& family, const Dataset& data, std::size_t folds = 10,
                        std::uint64_t seed = 0);

/// Learner of the family with the given hyperparameters fitted to `data`
/// (the Mahalanobis metric uses the data's covariance).
Learner make_learner(const LearnerFamily& family, const Dataset& data, double bandwidth, std::size_t k);

/// Learner of the family with rule-of-thumb hyperparameters for `data`:
/// h = sigma * n^(-1/(dim_x+1)) and k = round(sqrt(n)).
Learner rule_of_thumb_learner(const LearnerFamily& family, const Dataset& data);

/// Draws labeled data for out-of-sample evaluation.
using DataGenerator = std::function<Dataset(std::size_t n, std::mt19937_64& rng)>;

struct OutOfSample {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t sets = 0;
  std::size_t skipped = 0;  // test sets whose context window was empty
};

/// Mean over fresh test sets of the nominal contextual cost of z evaluated on
/// each test set's empirical model.
OutOfSample out_of_sample_eval(std::span<const double> z, const Learner& learner, const LossSpec& loss,
                               const DataGenerator& generate, std::span<const double> xbar, std::size_t test_sets,
                               std::size_t test_size, std::uint64_t seed);

/// Same, with the learner refitted on every test set, so the yardstick does
/// not depend on how much training data produced z.
using LearnerFit = std::function<Learner(const Dataset& test)>;
OutOfSample out_of_sample_eval(std::span<const double> z, const LearnerFit& fit, const LossSpec& loss,
                               const DataGenerator& generate, std::span<const double> xbar, std::size_t test_sets,
                               std::size_t test_size, std::uint64_t seed);

}  // namespace boro
