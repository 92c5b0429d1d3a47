#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "iago/kriging.hpp"
#include "iago/simulation.hpp"

namespace iago {

/// Improvement expected from one more evaluation given the current best value
/// f_min: sigma*(u*Phi(u) + phi(u)) with u = (f_min - mean)/sigma, and the
/// zero-variance limit max(f_min - mean, 0).
double expected_improvement(double mean, double variance, double f_min);

/// M strictly increasing representatives of the equiprobable Gaussian cells:
/// y_i = mean + sigma * Phi^{-1}((i - 0.5)/M).
struct QuantizerLevels {
  Eigen::VectorXd levels;
};
QuantizerLevels quantization_levels(double mean, double variance, int m);

/// Shannon entropy of the pmf in bits, using exact counts:
/// H = log2(r) - (1/r) * sum c*log2(c).
double entropy_bits(const MinimizerPmf& pmf);

/// Conditional minimizer entropy over one iteration's shared conditioned
/// ensemble. Construction precomputes everything that does not depend on the
/// candidate; score() is then pure per candidate, so candidates can be
/// evaluated in any order (or concurrently) with identical results.
/// The system, location set, and conditioned ensemble must outlive this
/// object.
///
/// A candidate hypothesis (x_c, y) is applied through the one-point Kriging
/// update t(x) + g(x) * (y - t(x_c)), g(x) = cov_post(x, x_c)/var_post(x_c),
/// which reproduces conditioning on the extended design exactly.
class EntropyCriterion {
 public:
  struct Options {
    int levels = 10;
    double zero_variance_rel_tol = 1e-12;  // relative to sigma2
  };

  EntropyCriterion(const KrigingSystem& system, const PathEnsemble& conditioned,
                   const LocationSet& locs, std::uint64_t tie_seed,
                   Options options);

  /// Conditional minimizer entropy (bits) for the location at `column` of
  /// the joint set. Candidates with negligible posterior variance score the
  /// current entropy (no information gain).
  double score(int column) const;

  double current_entropy() const { return current_entropy_; }
  const MinimizerPmf& current_pmf() const { return current_pmf_; }
  double predicted_mean(int column) const { return mean_locs_[column]; }
  double predicted_variance(int column) const { return var_locs_[column]; }

 private:
  const KrigingSystem& system_;
  const LocationSet& locs_;
  Options options_;
  std::uint64_t tie_seed_;
  Eigen::VectorXd mean_locs_, var_locs_;
  Eigen::MatrixXd lambda_, mu_;       // weights at all locations
  Eigen::MatrixXd kcross_;            // N x n covariances vs design
  Eigen::MatrixXd ptarg_;             // N x l trend values
  // Conditioned values on the grid, row-major so the per-path scans in
  // score() read contiguous memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      t_grid_;
  const Eigen::MatrixXd* t_all_;      // r x N conditioned values (not owned)
  MinimizerPmf current_pmf_;
  double current_entropy_ = 0.0;
};

}  // namespace iago
