#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "iago/bench.hpp"
#include "iago/optimizer.hpp"
#include "iago/robust.hpp"

namespace iago {

/// Flat key/value view of a small structured config file:
/// `key = value` lines, `[section]` headers that prefix the keys that follow,
/// `#` comments, numbers, booleans, quoted or bare strings, and
/// `[v1, v2, ...]` arrays.
class ConfigMap {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>,
                             std::vector<std::string>>;

  static ConfigMap parse(const std::string& text);
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers_or(const std::string& key,
                                 std::vector<double> fallback) const;
  std::vector<std::string> texts_or(const std::string& key,
                                    std::vector<std::string> fallback) const;

 private:
  std::map<std::string, Value> values_;
};

/// Everything the CLI derives from one config file.
struct CliConfig {
  RunConfig run;
  Criterion criterion = Criterion::entropy;
  StoppingRule stop;
  std::string function;        // empty when no built-in function is named
  Box domain;                  // explicit or from the function
  double eval_noise_std = 0.0; // harness-added evaluation noise
  int init_count = 15;
  CandidateStrategy init_strategy = CandidateStrategy::latin_hypercube;
  bool robust = false;
  FactorNoise factor_noise;
  CostSpec cost;
};

CliConfig load_cli_config(const ConfigMap& map);
BenchConfig load_bench_config(const ConfigMap& map);

/// Structured-config rendering of a covariance spec, reusable as a
/// [kernel] block.
std::string spec_to_config(const CovarianceSpec& spec);

}  // namespace iago
