#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iago/kriging.hpp"
#include "iago/optim.hpp"
#include "iago/optimizer.hpp"

namespace iago {

double branin(double x1, double x2);
double sine_exp(double x);

struct TestFunction {
  std::string name;
  Box domain;
  std::function<double(const Eigen::VectorXd&)> eval;
  Eigen::MatrixXd minimizers;  // one per row
  double min_value = 0.0;
};

TestFunction branin_function();
TestFunction sine_exp_function();
TestFunction lookup_function(const std::string& name);

struct MinimizerEstimates {
  Eigen::MatrixXd points;  // up to k rows, sorted by predicted value
  bool complete = true;    // false when fewer than k local minima exist
};

/// The k lowest grid-local minima (below all axis neighbors) of the Kriging
/// mean over a dense regular grid.
MinimizerEstimates estimate_minimizers(const KrigingSystem& model,
                                       const Box& domain, int k,
                                       int points_per_dim = 101);

/// Convenience overload working from a run history's final model.
MinimizerEstimates estimate_minimizers(const History& history, int k,
                                       const Box& domain,
                                       int points_per_dim = 101);

struct BenchReport {
  std::string function;
  std::string criterion;  // "entropy" or "ei"
  std::uint64_t seed = 0;
  int checkpoint = 0;  // iterations completed
  Eigen::VectorXd distances;            // per true minimizer, to nearest estimate
  Eigen::VectorXd values_at_estimates;  // true f at the matched estimates
  double wall_seconds = 0.0;            // console only, never serialized
};

struct BenchConfig {
  std::string function = "branin";
  std::vector<std::string> criteria{"entropy", "ei"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int initial_points = 15;
  std::vector<int> checkpoints{15, 35};
  RunConfig run;  // domain filled from the function when empty
  int estimate_points_per_dim = 101;
};

struct BenchResult {
  std::vector<BenchReport> reports;
  std::vector<History> histories;  // one per (criterion, seed) cell
};

/// Runs each (criterion, seed) cell with identical initial designs and
/// reports distances/values at every checkpoint.
BenchResult benchmark(const BenchConfig& config);

/// Distance from each true minimizer to its nearest estimate, plus the true
/// function value at that estimate.
void match_minimizers(const TestFunction& fn, const Eigen::MatrixXd& estimates,
                      Eigen::VectorXd& distances, Eigen::VectorXd& values);

}  // namespace iago
