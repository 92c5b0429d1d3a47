#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "iago/kriging.hpp"
#include "iago/optim.hpp"
#include "iago/optimizer.hpp"

namespace iago {

/// Zero-mean Gaussian noise on the factors, with a fixed Monte Carlo sample
/// size and seed. The same epsilon sample is reused for every query point
/// (common random numbers).
struct FactorNoise {
  Eigen::VectorXd std_devs;
  int mc_count = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class CostKind { mean, stddev, mean_plus_k_std, quantile };

struct CostSpec {
  CostKind kind = CostKind::quantile;
  double k = 1.0;       // for mean_plus_k_std
  double alpha = 0.9;   // for quantile, in (0,1)

  void validate() const;
};

/// The fixed epsilon sample (mc_count x d) implied by the noise spec.
Eigen::MatrixXd factor_noise_sample(const FactorNoise& noise, int dim);

/// Monte Carlo estimate of the requested statistic of f_hat(x + eps), with
/// x + eps clipped to the domain box. Quantiles use the nearest-rank rule.
double surrogate_cost(const KrigingSystem& system, const Eigen::VectorXd& x,
                      const FactorNoise& noise, const CostSpec& cost,
                      const Box& domain);

struct RobustRecord {
  CovarianceSpec f_spec;           // primary model of f at this iteration
  int f_design_size = 0;
  Eigen::VectorXd pseudo_values;   // Q-hat at the design points
  IterationRecord cost;            // the cost-model IAGO record
};

struct RobustHistory {
  History cost_history;  // IAGO history over the pseudo-evaluations
  std::vector<RobustRecord> records;
  Design f_design;                 // final primary design
  CovarianceSpec f_spec;           // final primary spec
};

/// IAGO on a secondary Kriging model fitted to the pseudo-evaluations
/// Q-hat(x_i) derived from the primary model of f. Each new evaluation of f
/// updates the primary model and therefore every pseudo-evaluation.
RobustHistory robust_run(const Evaluator& evaluate, const Design& initial,
                         const FactorNoise& noise, const CostSpec& cost,
                         const StoppingRule& rule, const RunConfig& config);

}  // namespace iago
