#include "iago/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iago {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

std::string unquote(const std::string& tok) {
  if (tok.size() >= 2 && ((tok.front() == '"' && tok.back() == '"') ||
                          (tok.front() == '\'' && tok.back() == '\''))) {
    return tok.substr(1, tok.size() - 2);
  }
  return tok;
}

ConfigMap::Value parse_value(const std::string& raw, int line_no) {
  const std::string tok = trim(raw);
  if (tok.empty()) {
    throw std::invalid_argument("config: empty value at line " +
                                std::to_string(line_no));
  }
  if (tok.front() == '[') {
    if (tok.back() != ']') {
      throw std::invalid_argument("config: unterminated array at line " +
                                  std::to_string(line_no));
    }
    std::vector<double> nums;
    std::vector<std::string> strs;
    bool numeric = true;
    std::stringstream ss(tok.substr(1, tok.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double v;
      if (parse_number(item, v)) {
        nums.push_back(v);
      } else {
        numeric = false;
      }
      strs.push_back(unquote(item));
    }
    if (numeric && !nums.empty()) return nums;
    return strs;
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  double v;
  if (parse_number(tok, v)) return v;
  return unquote(tok);
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    map.values_[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) > 0;
}

double ConfigMap::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
  if (auto* v = std::get_if<double>(&it->second)) return *v;
  throw std::invalid_argument("config: key " + key + " is not a number");
}

double ConfigMap::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

bool ConfigMap::flag_or(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto* v = std::get_if<bool>(&it->second)) return *v;
  throw std::invalid_argument("config: key " + key + " is not a boolean");
}

std::string ConfigMap::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
  if (auto* v = std::get_if<std::string>(&it->second)) return *v;
  throw std::invalid_argument("config: key " + key + " is not a string");
}

std::string ConfigMap::text_or(const std::string& key,
                               const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<double> ConfigMap::numbers(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
  if (auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  if (auto* v = std::get_if<double>(&it->second)) return {*v};
  throw std::invalid_argument("config: key " + key + " is not a number array");
}

std::vector<double> ConfigMap::numbers_or(const std::string& key,
                                          std::vector<double> fallback) const {
  return has(key) ? numbers(key) : std::move(fallback);
}

std::vector<std::string> ConfigMap::texts_or(
    const std::string& key, std::vector<std::string> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
  if (auto* v = std::get_if<std::string>(&it->second)) return {*v};
  throw std::invalid_argument("config: key " + key + " is not a string array");
}

namespace {

CandidateStrategy strategy_from(const std::string& name) {
  if (name == "regular-grid" || name == "regular_grid" || name == "grid") {
    return CandidateStrategy::regular_grid;
  }
  if (name == "latin-hypercube" || name == "latin_hypercube" || name == "lhc") {
    return CandidateStrategy::latin_hypercube;
  }
  throw std::invalid_argument("config: unknown strategy " + name);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace

CliConfig load_cli_config(const ConfigMap& map) {
  CliConfig cfg;
  cfg.function = map.text_or("function.name", "");

  Box domain;
  if (map.has("domain.lower")) {
    domain = Box(to_vector(map.numbers("domain.lower")),
                 to_vector(map.numbers("domain.upper")));
  } else if (!cfg.function.empty()) {
    domain = lookup_function(cfg.function).domain;
  } else {
    throw std::invalid_argument(
        "config: domain.lower/domain.upper required when no function is named");
  }
  cfg.domain = domain;
  cfg.run.domain = domain;

  const int d = domain.dim();
  const std::string kernel = map.text_or("kernel.kernel", "matern");
  if (kernel != "matern" && kernel != "exponential") {
    throw std::invalid_argument("config: unknown kernel " + kernel);
  }
  const double nu = kernel == "exponential" ? 0.5 : map.number_or("kernel.nu", 2.5);
  Eigen::VectorXd rho =
      map.has("kernel.rho") ? to_vector(map.numbers("kernel.rho"))
                            : (domain.edges() / 4.0).eval();
  if (rho.size() == 1 && d > 1) rho = Eigen::VectorXd::Constant(d, rho[0]);
  if (rho.size() != d) throw std::invalid_argument("config: kernel.rho dimension mismatch");
  const double sigma2 = map.number_or("kernel.sigma2", 1.0);
  const double jitter =
      map.number_or("kernel.jitter", kDefaultJitterRel * sigma2);
  cfg.run.spec = CovarianceSpec(sigma2, rho, nu, jitter);
  cfg.run.fit = map.flag_or("kernel.fit", false);
  cfg.run.fit_mode =
      map.text_or("kernel.fit_mode", "reml") == "ml" ? FitMode::ml : FitMode::reml;
  cfg.run.fit_nu = map.flag_or("kernel.fit_nu", false);
  cfg.run.fit_starts = static_cast<int>(map.number_or("kernel.fit_starts", 8));
  if (map.has("kernel.bounds.sigma2") || map.has("kernel.bounds.rho")) {
    ParamBounds b;
    const auto s2 = map.numbers_or("kernel.bounds.sigma2",
                                   {sigma2 * 1e-2, sigma2 * 1e2});
    b.sigma2 = {s2.at(0), s2.at(1)};
    const auto rr = map.numbers_or(
        "kernel.bounds.rho", {domain.edges().minCoeff() / 20.0,
                              domain.edges().maxCoeff() * 2.0});
    b.rho.assign(d, {rr.at(0), rr.at(1)});
    const auto nn = map.numbers_or("kernel.bounds.nu", {0.5, 5.0});
    b.nu = {nn.at(0), nn.at(1)};
    cfg.run.bounds = b;
  }
  const std::string refit = map.text_or("refit.policy", "never-after-init");
  cfg.run.refit = refit == "every-iteration" ? RefitPolicy::every_iteration
                                             : RefitPolicy::never_after_init;
  cfg.run.trend_degree = static_cast<int>(map.number_or("trend.degree", 0));

  cfg.run.grid_count = static_cast<int>(map.number_or("grid.n", 400));
  cfg.run.grid_strategy = strategy_from(map.text_or("grid.strategy", "regular-grid"));
  cfg.run.grid_resample = map.flag_or("grid.resample", false);
  cfg.run.explore = map.number_or("grid.explore", 0.2);
  cfg.run.candidate_count = static_cast<int>(map.number_or("candidates.n", 1000));
  cfg.run.candidate_strategy =
      strategy_from(map.text_or("candidates.strategy", "regular-grid"));

  cfg.run.paths = static_cast<int>(map.number_or("sim.paths", 1000));
  cfg.run.report_paths = static_cast<int>(map.number_or("sim.report_paths", 10000));
  cfg.run.levels = static_cast<int>(map.number_or("sim.levels", 10));
  cfg.run.ei_refine = map.flag_or("ei.refine", true);
  cfg.run.ei_stop_rel = map.number_or("ei.stop_rel", 1e-3);
  cfg.run.seed = static_cast<std::uint64_t>(map.number_or("seed", 0));

  cfg.criterion = map.text_or("criterion", "entropy") == "ei" ? Criterion::ei
                                                              : Criterion::entropy;
  cfg.stop.delta = map.number_or("stop.delta", 0.0);
  cfg.stop.p_stop = map.number_or("stop.p_stop", 0.0);
  cfg.stop.max_evaluations = static_cast<int>(map.number_or("stop.max_evals", 10));

  cfg.eval_noise_std = map.number_or("noise.std", 0.0);
  cfg.init_count = static_cast<int>(map.number_or("init.n", 15));
  cfg.init_strategy =
      strategy_from(map.text_or("init.strategy", "latin-hypercube"));

  cfg.robust = map.flag_or("robust.enabled", false) || map.has("robust.kind");
  if (cfg.robust) {
    const std::string kind = map.text_or("robust.kind", "quantile");
    if (kind == "mean") cfg.cost.kind = CostKind::mean;
    else if (kind == "std") cfg.cost.kind = CostKind::stddev;
    else if (kind == "mean-plus-k-std") cfg.cost.kind = CostKind::mean_plus_k_std;
    else if (kind == "quantile") cfg.cost.kind = CostKind::quantile;
    else throw std::invalid_argument("config: unknown robust.kind " + kind);
    cfg.cost.k = map.number_or("robust.k", 1.0);
    cfg.cost.alpha = map.number_or("robust.alpha", 0.9);
    Eigen::VectorXd fs = to_vector(map.numbers_or("robust.factor_std", {0.0}));
    if (fs.size() == 1 && d > 1) fs = Eigen::VectorXd::Constant(d, fs[0]);
    cfg.factor_noise.std_devs = fs;
    cfg.factor_noise.mc_count =
        static_cast<int>(map.number_or("robust.mc_count", 5000));
    cfg.factor_noise.seed =
        static_cast<std::uint64_t>(map.number_or("robust.seed", cfg.run.seed + 77));
  }
  return cfg;
}

BenchConfig load_bench_config(const ConfigMap& map) {
  BenchConfig bc;
  bc.function = map.text_or("function.name", "branin");
  CliConfig base = [&] {
    ConfigMap m = map;
    return load_cli_config(m);
  }();
  bc.run = base.run;
  bc.criteria = map.texts_or("bench.criteria", {"entropy", "ei"});
  std::vector<double> seeds = map.numbers_or("bench.seeds", {1, 2, 3, 4, 5});
  bc.seeds.clear();
  for (double s : seeds) bc.seeds.push_back(static_cast<std::uint64_t>(s));
  bc.initial_points = static_cast<int>(map.number_or("bench.init_n", 15));
  std::vector<double> cps = map.numbers_or("bench.checkpoints", {15, 35});
  bc.checkpoints.clear();
  for (double c : cps) bc.checkpoints.push_back(static_cast<int>(c));
  bc.estimate_points_per_dim =
      static_cast<int>(map.number_or("bench.estimate_points_per_dim", 101));
  return bc;
}

std::string spec_to_config(const CovarianceSpec& spec) {
  char buf[64];
  std::string out = "[kernel]\nkernel = \"matern\"\n";
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out += "sigma2 = " + num(spec.sigma2) + "\n";
  out += "rho = [";
  for (int j = 0; j < spec.ranges.size(); ++j) {
    if (j) out += ", ";
    out += num(spec.ranges[j]);
  }
  out += "]\n";
  out += "nu = " + num(spec.nu) + "\n";
  out += "jitter = " + num(spec.jitter) + "\n";
  return out;
}

}  // namespace iago
