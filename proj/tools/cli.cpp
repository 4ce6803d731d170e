#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "boro/bootstrap.hpp"
#include "boro/experiments.hpp"
#include "boro/parallel.hpp"
#include "boro/robust.hpp"
#include "boro/sweeps.hpp"
#include "dataset_io.hpp"

namespace boro::cli {

namespace {

using nlohmann::json;

struct KeyInfo {
  const char* name;
  const char* help;
};

// Every key accepted in a config file; each one also exists as a flag on the
// commands that use it.
constexpr KeyInfo kKeys[] = {
    {"data", "training data CSV ('# dims d k' line, header x1..xd,y1..yk)"},
    {"context", "context covariates, comma separated"},
    {"learner", "nw | nn"},
    {"smoother", "uniform | epanechnikov | tricubic | gaussian | naive (default: gaussian for nw, naive for nn)"},
    {"bandwidth", "number, 'rot' for the rule of thumb, or 'cv' for cross-validation of bandwidth and k"},
    {"k", "nearest neighbors: number or 'rot' for round(sqrt(n))"},
    {"ridge", "ridge added to the Mahalanobis covariance"},
    {"folds", "cross-validation folds"},
    {"distance", "bootstrap | pearson | burg"},
    {"radius", "ambiguity radius r"},
    {"target_b", "target bootstrap disappointment (list for sweeps); calibrates the radius"},
    {"target_disappointment", "alias of target_b"},
    {"r_grid", "comma-separated radii"},
    {"loss", "newsvendor | portfolio"},
    {"backorder", "newsvendor backorder cost"},
    {"holding", "newsvendor holding cost"},
    {"eps", "portfolio CVaR level"},
    {"lambda", "portfolio return weight"},
    {"m", "bootstrap resamples"},
    {"seed", "base seed (default: BORO_SEED or 0)"},
    {"seeds", "training seeds: a count, or a comma-separated list"},
    {"threads", "worker threads (0 = one per core)"},
    {"experiment", "newsvendor | portfolio"},
    {"n_grid", "comma-separated training sizes"},
    {"n", "sample count"},
    {"variance_convention", "variance | std: how the second Gaussian parameter is read"},
    {"formulations", "comma-separated subset of nw,nn"},
    {"test_sets", "out-of-sample test sets"},
    {"test_size", "samples per test set"},
    {"output", "output file (default: standard output)"},
    {"out_dir", "output directory"},
};

bool known_key(const std::string& k) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& i) { return k == i.name; });
}

const char* key_help(const std::string& k) {
  for (const auto& i : kKeys)
    if (k == i.name) return i.help;
  return "";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
  throw InvalidArgument("cli", "key '" + key + "': expected " + want + ", got '" + value + "'");
}

/// Fully resolved key-value configuration with typed accessors.
class Config {
 public:
  std::map<std::string, std::string> values;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  const std::string& str(const std::string& k) const {
    const auto it = values.find(k);
    if (it == values.end()) throw InvalidArgument("cli", "missing required key '" + k + "'");
    return it->second;
  }
  std::string str_or(const std::string& k, const std::string& def) const { return has(k) ? str(k) : def; }

  static double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      bad_value(key, s, "a finite number");
    return v;
  }
  static std::uint64_t parse_uint(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad_value(key, s, "a nonnegative integer");
    return v;
  }
  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
  }

  double num(const std::string& k) const { return parse_double(k, str(k)); }
  double num_or(const std::string& k, double def) const { return has(k) ? num(k) : def; }
  std::uint64_t uint(const std::string& k) const { return parse_uint(k, str(k)); }
  std::uint64_t uint_or(const std::string& k, std::uint64_t def) const { return has(k) ? uint(k) : def; }
  std::size_t positive(const std::string& k, std::size_t def) const {
    const std::uint64_t v = uint_or(k, def);
    if (v == 0) bad_value(k, str(k), "a positive integer");
    return static_cast<std::size_t>(v);
  }
  Vector nums(const std::string& k) const {
    Vector out;
    for (const auto& s : split_list(str(k))) out.push_back(parse_double(k, s));
    if (out.empty()) bad_value(k, str(k), "a nonempty list of numbers");
    return out;
  }
  std::vector<std::size_t> sizes(const std::string& k) const {
    std::vector<std::size_t> out;
    for (const auto& s : split_list(str(k))) {
      const std::uint64_t v = parse_uint(k, s);
      if (v == 0) bad_value(k, s, "positive integers");
      out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) bad_value(k, str(k), "a nonempty list of integers");
    return out;
  }
};

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

struct Command {
  CLI::App* app = nullptr;
  std::vector<std::string> keys;
  std::map<std::string, std::string> flags;
};

void add_keys(Command& c, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    c.keys.emplace_back(k);
    std::string name = "--" + std::string(k);
    std::string dashed = name;
    std::replace(dashed.begin() + 2, dashed.end(), '_', '-');
    if (dashed != name) name += "," + dashed;
    c.app->add_option(name, c.flags[k], key_help(k));
  }
}

std::uint64_t env_seed() {
  const char* s = std::getenv("BORO_SEED");
  if (s == nullptr || *s == '\0') return 0;
  return Config::parse_uint("BORO_SEED", s);
}

Config resolve(const Command& c, const std::map<std::string, std::string>& file) {
  Config cfg;
  cfg.values["seed"] = std::to_string(env_seed());
  cfg.values["threads"] = "0";
  for (const auto& [k, v] : file) cfg.values[k] = v;
  for (const auto& k : c.keys) {
    const auto* opt = c.app->get_option_no_throw("--" + k);
    if (opt != nullptr && opt->count() > 0) cfg.values[k] = c.flags.at(k);
  }
  if (cfg.has("target_disappointment")) {
    if (cfg.has("target_b") && cfg.str("target_b") != cfg.str("target_disappointment"))
      throw InvalidArgument("cli", "target_b and target_disappointment disagree");
    cfg.values["target_b"] = cfg.str("target_disappointment");
    cfg.values.erase("target_disappointment");
  }
  return cfg;
}

std::size_t threads_of(const Config& cfg) { return resolve_threads(static_cast<std::size_t>(cfg.uint("threads"))); }

LossSpec make_loss(const Config& cfg, std::size_t dim_y) {
  const std::string name = cfg.str_or("loss", dim_y == 6 ? "portfolio" : "newsvendor");
  if (name == "newsvendor") {
    if (dim_y != 1) throw InvalidArgument("cli", "the newsvendor loss needs one label column");
    return newsvendor_loss(cfg.num_or("backorder", 10.0), cfg.num_or("holding", 1.0));
  }
  if (name == "portfolio") {
    return portfolio_loss(cfg.num_or("eps", 0.05), cfg.num_or("lambda", 1.0), dim_y);
  }
  bad_value("loss", name, "'newsvendor' or 'portfolio'");
}

SolveSettings settings_for(const LossSpec& loss) {
  return loss.dim_z > 1 ? portfolio_settings() : SolveSettings{};
}

Vector context_of(const Config& cfg, const Dataset& data) {
  const Vector x = cfg.nums("context");
  if (x.size() != data.dim_x())
    throw InvalidArgument("cli", "context has " + std::to_string(x.size()) + " entries but the data has " +
                                     std::to_string(data.dim_x()) + " covariates");
  return x;
}

struct FittedLearner {
  Learner learner;
  std::string kind;
  double bandwidth = 0.0;
  std::size_t k = 0;
};

FittedLearner make_cli_learner(const Config& cfg, const Dataset& data) {
  const std::string kind = cfg.str_or("learner", "nw");
  if (kind != "nw" && kind != "nn") bad_value("learner", kind, "'nw' or 'nn'");
  LearnerFamily fam;
  fam.kind = kind == "nw" ? LearnerFamily::Kind::nw : LearnerFamily::Kind::nn;
  fam.smoother = Smoother{parse_smoother(cfg.str_or("smoother", kind == "nw" ? "gaussian" : "naive"))};
  fam.ridge = cfg.num_or("ridge", 0.0);
  const std::string bw = cfg.str_or("bandwidth", "rot");
  if (bw == "cv") {
    const CvResult cv = cross_validate(fam, data, cfg.positive("folds", 10), cfg.uint("seed"));
    return {cv.learner, kind, cv.bandwidth, cv.k};
  }
  const double h = bw == "rot" ? bandwidth_rule_of_thumb(data).value : Config::parse_double("bandwidth", bw);
  const std::string ks = cfg.str_or("k", "rot");
  std::size_t k = 0;
  if (kind == "nn")
    k = ks == "rot" ? static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(static_cast<double>(data.size())))))
                    : static_cast<std::size_t>(Config::parse_uint("k", ks));
  return {make_learner(fam, data, h, k), kind, h, k};
}

RobustConfig robust_config(const Config& cfg) {
  const DistanceKind d = parse_distance(cfg.str_or("distance", "bootstrap"));
  if (cfg.has("radius") && cfg.has("target_b"))
    throw InvalidArgument("cli", "set exactly one of 'radius' and 'target_b'");
  if (cfg.has("target_b")) {
    const Vector b = cfg.nums("target_b");
    if (b.size() != 1) bad_value("target_b", cfg.str("target_b"), "a single value for this command");
    return RobustConfig::with_target(b[0], d);
  }
  return RobustConfig::with_radius(cfg.num_or("radius", 0.0), d);
}

void log_config(std::ostream& err, const std::string& command, const Config& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.values) j[k] = v;
  err << "boro " << command << ": resolved config " << j.dump() << '\n';
}

/// Writes to the `output` file when configured, else to `out`.
template <class Fn>
void with_output(const Config& cfg, std::ostream& out, Fn&& fn) {
  if (!cfg.has("output") || cfg.str("output") == "-") {
    fn(out);
    return;
  }
  std::ofstream f(cfg.str("output"));
  if (!f) throw Error("cli", "cannot write '" + cfg.str("output") + "'");
  fn(f);
}

// ---- commands --------------------------------------------------------------

int cmd_prescribe(const Config& cfg, std::ostream& out) {
  const Dataset data = read_dataset_file(cfg.str("data"));
  const EmpiricalModel m = empirical_model(data);
  const Vector xbar = context_of(cfg, data);
  const LossSpec loss = make_loss(cfg, data.dim_y());
  const SolveSettings settings = settings_for(loss);
  const FittedLearner fl = make_cli_learner(cfg, data);
  const RobustConfig rc = robust_config(cfg);

  const Prescription nominal = nominal_prescribe(fl.learner, loss, m, xbar, settings);
  const Prescription robust = robust_prescribe(rc, fl.learner, loss, m, xbar, settings);

  json j;
  j["command"] = "prescribe";
  j["n"] = data.size();
  j["learner"] = fl.kind;
  j["bandwidth"] = number(fl.bandwidth);
  if (fl.kind == "nn") j["k"] = fl.k;
  j["loss"] = loss.name;
  j["distance"] = std::string(to_string(rc.distance()));
  j["radius"] = number(robust.radius);
  if (rc.target_b()) j["target_b"] = number(*rc.target_b());
  j["decision"] = vector_json(robust.z);
  j["robust_cost"] = number(robust.cost);
  j["nominal_cost_at_decision"] = number(nominal_cost(fl.learner, loss, m, xbar, robust.z));
  j["nominal_decision"] = vector_json(nominal.z);
  j["nominal_cost"] = number(nominal.cost);
  j["active_j"] = robust.active_j ? json(*robust.active_j) : json(nullptr);
  j["status"] = robust.status;
  with_output(cfg, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  return kOk;
}

const char* kDisappointmentColumns = "n,r,empirical_b,bound_b,m,seed";

void write_disappointment_row(std::ostream& o, std::size_t n, double r, double emp, double bound, std::size_t m,
                              std::uint64_t seed) {
  o << n << ',' << format_number(r) << ',' << format_number(emp) << ',' << format_number(bound) << ',' << m << ','
    << seed << '\n';
}

int cmd_bootstrap(const Config& cfg, std::ostream& out) {
  const Dataset data = read_dataset_file(cfg.str("data"));
  const EmpiricalModel m = empirical_model(data);
  const Vector xbar = context_of(cfg, data);
  const LossSpec loss = make_loss(cfg, data.dim_y());
  const SolveSettings settings = settings_for(loss);
  const FittedLearner fl = make_cli_learner(cfg, data);
  const DistanceKind d = parse_distance(cfg.str_or("distance", "bootstrap"));

  std::vector<RobustConfig> configs;
  if (cfg.has("r_grid") && (cfg.has("target_b") || cfg.has("radius")))
    throw InvalidArgument("cli", "set only one of 'r_grid', 'radius' and 'target_b'");
  if (cfg.has("r_grid")) {
    for (double r : cfg.nums("r_grid")) configs.push_back(RobustConfig::with_radius(r, d));
  } else if (cfg.has("target_b")) {
    if (cfg.has("radius")) throw InvalidArgument("cli", "set exactly one of 'radius' and 'target_b'");
    for (double b : cfg.nums("target_b")) configs.push_back(RobustConfig::with_target(b, d));
  } else {
    configs.push_back(RobustConfig::with_radius(cfg.num_or("radius", 0.0), d));
  }

  BootstrapPlan plan;
  plan.resamples = cfg.positive("m", 2000);
  plan.seed = cfg.uint("seed");
  plan.threads = threads_of(cfg);
  with_output(cfg, out, [&](std::ostream& o) {
    o << kDisappointmentColumns << '\n';
    for (const auto& rc : configs) {
      const Prescription p = robust_prescribe(rc, fl.learner, loss, m, xbar, settings);
      const DisappointmentReport rep = estimate_disappointment(p, fl.learner, loss, data, xbar, plan);
      write_disappointment_row(o, data.size(), p.radius, rep.empirical_b, rep.bound_b, rep.resamples, plan.seed);
    }
  });
  return kOk;
}

std::vector<std::uint64_t> seed_list(const Config& cfg, std::size_t default_count) {
  const std::uint64_t base = cfg.uint("seed");
  std::vector<std::uint64_t> seeds;
  const std::string s = cfg.str_or("seeds", std::to_string(default_count));
  if (s.find(',') == std::string::npos) {
    const std::uint64_t count = Config::parse_uint("seeds", s);
    if (count == 0) bad_value("seeds", s, "a positive count");
    for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(base + i);
  } else {
    for (const auto& item : Config::split_list(s)) seeds.push_back(Config::parse_uint("seeds", item));
  }
  return seeds;
}

std::vector<Formulation> formulations_of(const Config& cfg) {
  std::vector<Formulation> out;
  for (const auto& s : Config::split_list(cfg.str_or("formulations", "nw,nn"))) out.push_back(parse_formulation(s));
  if (out.empty()) bad_value("formulations", cfg.str("formulations"), "a nonempty list");
  return out;
}

std::filesystem::path prepare_dir(const Config& cfg, const std::string& name) {
  const std::filesystem::path dir = cfg.str_or("out_dir", "boro-" + name);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cli", "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cli", "cannot write '" + p.string() + "'");
  return f;
}

int experiment_newsvendor(const Config& cfg, std::ostream& out) {
  NewsvendorSweep sweep;
  sweep.model.convention = parse_variance_convention(cfg.str_or("variance_convention", "variance"));
  if (cfg.has("n_grid")) sweep.n_grid = cfg.sizes("n_grid");
  if (cfg.has("r_grid") && cfg.has("target_b")) throw InvalidArgument("cli", "set only one of 'r_grid' and 'target_b'");
  if (cfg.has("r_grid")) sweep.r_grid = cfg.nums("r_grid");
  if (cfg.has("target_b")) sweep.target_b = cfg.nums("target_b");
  sweep.formulations = formulations_of(cfg);
  sweep.resamples = cfg.positive("m", sweep.resamples);
  sweep.seeds = seed_list(cfg, 1);
  sweep.folds = cfg.positive("folds", sweep.folds);
  sweep.threads = threads_of(cfg);
  const auto rows = run_newsvendor(sweep);

  const auto dir = prepare_dir(cfg, "newsvendor");
  json files = json::object();
  for (Formulation f : sweep.formulations) {
    for (bool robust : {false, true}) {
      const std::string name =
          "disappointment_" + std::string(to_string(f)) + "_" + (robust ? "robust" : "nominal") + ".csv";
      std::ofstream o = open_out(dir / name);
      o << kDisappointmentColumns << '\n';
      for (const auto& r : rows)
        if (r.formulation == f && r.robust == robust) write_disappointment_row(o, r.n, r.r, r.empirical_b, r.bound_b, r.m, r.seed);
      files[name] = {{"columns", Config::split_list(kDisappointmentColumns)},
                     {"description", std::string(robust ? "robust" : "nominal") + " " + std::string(to_string(f)) +
                                         " prescriptions: bootstrap disappointment versus training size"}};
    }
  }
  json seeds = json::array();
  for (auto s : sweep.seeds) seeds.push_back(s);
  json manifest = {{"experiment", "newsvendor"}, {"seeds", seeds}, {"files", files}};
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
  out << dir.string() << '\n';
  return kOk;
}

int experiment_portfolio(const Config& cfg, std::ostream& out) {
  PortfolioSweep sweep;
  sweep.model.convention = parse_variance_convention(cfg.str_or("variance_convention", "variance"));
  if (cfg.has("n_grid")) sweep.n_grid = cfg.sizes("n_grid");
  if (cfg.has("r_grid")) throw InvalidArgument("cli", "the portfolio experiment calibrates its radius from target_b");
  if (cfg.has("target_b")) {
    const Vector b = cfg.nums("target_b");
    if (b.size() != 1) bad_value("target_b", cfg.str("target_b"), "a single value for the portfolio experiment");
    sweep.target_b = b[0];
  }
  sweep.formulations = formulations_of(cfg);
  sweep.seeds = seed_list(cfg, sweep.seeds.size());
  sweep.test_sets = cfg.positive("test_sets", sweep.test_sets);
  sweep.test_size = cfg.positive("test_size", sweep.test_size);
  sweep.folds = cfg.positive("folds", sweep.folds);
  sweep.threads = threads_of(cfg);
  const auto rows = run_portfolio(sweep);
  const auto summary = summarize(rows);

  const auto dir = prepare_dir(cfg, "portfolio");
  const std::string summary_cols = "n,variant,seeds,mean_r,train_cost,oos_cost,oos_std_error";
  const std::string run_cols = "n,variant,seed,r,train_cost,oos_cost,oos_std_error";
  json files = json::object();
  for (Formulation f : sweep.formulations) {
    const std::string name = "oos_" + std::string(to_string(f)) + ".csv";
    std::ofstream o = open_out(dir / name);
    o << summary_cols << '\n';
    for (const auto& s : summary) {
      if (s.formulation != f) continue;
      o << s.n << ',' << (s.robust ? "robust" : "nominal") << ',' << s.seeds << ',' << format_number(s.mean_r) << ','
        << format_number(s.train_cost) << ',' << format_number(s.oos_cost) << ',' << format_number(s.oos_std_error)
        << '\n';
    }
    files[name] = {{"columns", Config::split_list(summary_cols)},
                   {"description", std::string(to_string(f)) +
                                       ": mean out-of-sample cost versus training size, averaged over seeds"}};
    const std::string runs = "oos_" + std::string(to_string(f)) + "_runs.csv";
    std::ofstream r = open_out(dir / runs);
    r << run_cols << '\n';
    for (const auto& row : rows) {
      if (row.formulation != f) continue;
      r << row.n << ',' << (row.robust ? "robust" : "nominal") << ',' << row.seed << ',' << format_number(row.r) << ','
        << format_number(row.train_cost) << ',' << format_number(row.oos_cost) << ','
        << format_number(row.oos_std_error) << '\n';
    }
    files[runs] = {{"columns", Config::split_list(run_cols)},
                   {"description", std::string(to_string(f)) + ": one row per training seed"}};
  }
  json seeds = json::array();
  for (auto s : sweep.seeds) seeds.push_back(s);
  json manifest = {{"experiment", "portfolio"},
                   {"seeds", seeds},
                   {"target_b", number(sweep.target_b)},
                   {"test_sets", sweep.test_sets},
                   {"test_size", sweep.test_size},
                   {"files", files}};
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
  out << dir.string() << '\n';
  return kOk;
}

int cmd_experiment(const Config& cfg, std::ostream& out) {
  const std::string name = cfg.str("experiment");
  if (name == "newsvendor") return experiment_newsvendor(cfg, out);
  if (name == "portfolio") return experiment_portfolio(cfg, out);
  bad_value("experiment", name, "'newsvendor' or 'portfolio'");
}

int cmd_calibrate(const Config& cfg, std::ostream& out) {
  const std::string kind = cfg.str_or("learner", "nw");
  const Vector targets = cfg.nums("target_b");
  json j;
  j["command"] = "calibrate-radius";
  j["learner"] = kind;
  json rows = json::array();
  if (kind == "nw") {
    std::size_t n = 0;
    if (cfg.has("n")) n = cfg.positive("n", 1);
    else if (cfg.has("data")) n = read_dataset_file(cfg.str("data")).size();
    else throw InvalidArgument("cli", "nw calibration needs 'n' or 'data'");
    j["n"] = n;
    for (double b : targets) {
      const double r = calibrate_radius_nw(b, n);
      rows.push_back({{"target_b", number(b)}, {"r", number(r)}, {"bound_b", number(nw_bound(r, n))}});
    }
  } else if (kind == "nn") {
    const Dataset data = read_dataset_file(cfg.str("data"));
    const EmpiricalModel m = empirical_model(data);
    const Vector xbar = context_of(cfg, data);
    const FittedLearner fl = make_cli_learner(cfg, data);
    const auto& nn = std::get<NnLearner>(fl.learner);
    const MinRadii radii = min_radii(nn.k, m, build_neighborhoods(nn.distance, m, xbar));
    j["n"] = data.size();
    j["k"] = nn.k;
    j["min_radii"] = vector_json(radii.r_star);
    for (double b : targets) {
      const double r = calibrate_radius_nn(b, m.n(), radii);
      rows.push_back({{"target_b", number(b)}, {"r", number(r)}, {"bound_b", number(nn_bound(r, m.n(), radii))}});
    }
  } else {
    bad_value("learner", kind, "'nw' or 'nn'");
  }
  j["radii"] = rows;
  with_output(cfg, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  return kOk;
}

int cmd_generate(const Config& cfg, std::ostream& out) {
  const std::string name = cfg.str("experiment");
  const std::size_t n = cfg.positive("n", 100);
  const VarianceConvention conv = parse_variance_convention(cfg.str_or("variance_convention", "variance"));
  std::mt19937_64 rng(cfg.uint("seed"));
  Dataset data;
  if (name == "newsvendor") {
    NewsvendorModel model;
    model.convention = conv;
    data = model.sample(n, rng);
  } else if (name == "portfolio") {
    PortfolioModel model;
    model.convention = conv;
    data = model.sample(n, rng);
  } else {
    bad_value("experiment", name, "'newsvendor' or 'portfolio'");
  }
  with_output(cfg, out, [&](std::ostream& o) { write_dataset(o, data); });
  return kOk;
}

}  // namespace

std::map<std::string, std::string> read_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw InvalidArgument("cli", where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_key(key)) throw InvalidArgument("cli", where + "unknown config key '" + key + "'");
    if (value.empty()) throw InvalidArgument("cli", where + "empty value for '" + key + "'");
    if (!out.emplace(key, value).second) throw InvalidArgument("cli", where + "duplicate key '" + key + "'");
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstrap-robust prescriptive analytics"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 I/O failure, 2 parse or argument error, 3 solver error.\n"
      "Config files hold 'key = value' lines; flags override them. BORO_SEED sets the default seed.");
  std::string config_path;
  app.add_option("--config", config_path, "config file with key = value lines")->check(CLI::ExistingFile);

  std::map<std::string, Command> commands;
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, help);
    return c;
  };
  const auto learner_keys = {"learner", "smoother", "bandwidth", "k", "ridge", "folds"};
  const auto loss_keys = {"loss", "backorder", "holding", "eps", "lambda"};

  Command& prescribe = make("prescribe", "nominal and robust prescription at a context");
  add_keys(prescribe, {"data", "context", "distance", "radius", "target_b", "target_disappointment", "seed", "threads",
                       "output"});
  add_keys(prescribe, learner_keys);
  add_keys(prescribe, loss_keys);

  Command& bootstrap = make("bootstrap", "bootstrap disappointment of robust prescriptions (CSV)");
  add_keys(bootstrap, {"data", "context", "distance", "radius", "r_grid", "target_b", "target_disappointment", "m",
                       "seed", "threads", "output"});
  add_keys(bootstrap, learner_keys);
  add_keys(bootstrap, loss_keys);

  Command& experiment = make("experiment", "reproduce the newsvendor or portfolio study (CSV directory)");
  experiment.app->add_option("name", experiment.flags["experiment"], "newsvendor | portfolio");
  experiment.keys.emplace_back("experiment");
  add_keys(experiment, {"n_grid", "r_grid", "target_b", "target_disappointment", "m", "seeds", "seed",
                        "variance_convention", "formulations", "folds", "test_sets", "test_size", "threads", "out_dir"});

  Command& calibrate = make("calibrate-radius", "radius for a target bootstrap disappointment");
  add_keys(calibrate, {"target_b", "target_disappointment", "n", "data", "context", "seed", "threads", "output"});
  add_keys(calibrate, learner_keys);

  Command& generate = make("generate", "draw a synthetic dataset (CSV)");
  generate.app->add_option("name", generate.flags["experiment"], "newsvendor | portfolio");
  generate.keys.emplace_back("experiment");
  add_keys(generate, {"n", "seed", "variance_convention", "output"});

  std::vector<const char*> argv{"boro"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  std::string name;
  Command* cmd = nullptr;
  for (auto& [n, c] : commands)
    if (c.app->parsed()) {
      name = n;
      cmd = &c;
    }

  try {
    std::map<std::string, std::string> file;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InvalidArgument("cli", "cannot open config '" + config_path + "'");
      file = read_config(in, config_path);
    }
    // The experiment name may come from the positional argument or the file.
    const auto* positional = cmd->app->get_option_no_throw("name");
    Config cfg = resolve(*cmd, file);
    if (positional != nullptr && positional->count() > 0) cfg.values["experiment"] = cmd->flags["experiment"];
    log_config(err, name, cfg);
    if (name == "prescribe") return cmd_prescribe(cfg, out);
    if (name == "bootstrap") return cmd_bootstrap(cfg, out);
    if (name == "experiment") return cmd_experiment(cfg, out);
    if (name == "calibrate-radius") return cmd_calibrate(cfg, out);
    return cmd_generate(cfg, out);
  } catch (const InvalidArgument& e) {
    err << "boro: " << e.what() << '\n';
    return kParseError;
  } catch (const SolverError& e) {
    err << "boro: solver failure: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    err << "boro: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace boro::cli
