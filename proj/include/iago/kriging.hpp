#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "iago/covariance.hpp"

namespace iago {

/// Evaluation design: points, observed values, and optional per-point noise
/// variances (absent or all-zero means exact evaluation).
struct Design {
  Eigen::MatrixXd points;     // n x d
  Eigen::VectorXd values;     // n
  Eigen::VectorXd noise_vars; // n, or empty for exact designs

  Design() = default;
  Design(Eigen::MatrixXd pts, Eigen::VectorXd vals);
  Design(Eigen::MatrixXd pts, Eigen::VectorXd vals, Eigen::VectorXd noise);

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  bool has_noise() const { return noise_vars.size() > 0; }
  double noise_var(int i) const { return has_noise() ? noise_vars[i] : 0.0; }
  double spread() const;  // max - min of the observed values

  void append(const Eigen::VectorXd& x, double value,
              std::optional<double> noise = std::nullopt);
  void validate() const;
};

/// Polynomial trend basis: monomials of total degree <= 2 in the factors.
class TrendBasis {
 public:
  static TrendBasis constant(int dim);
  static TrendBasis linear(int dim);
  static TrendBasis quadratic(int dim);

  int size() const { return static_cast<int>(exponents_.size()); }
  int dim() const { return dim_; }
  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd matrix(const Eigen::MatrixXd& points) const;  // n x l

 private:
  TrendBasis(int dim, std::vector<std::vector<int>> exps)
      : dim_(dim), exponents_(std::move(exps)) {}
  int dim_;
  std::vector<std::vector<int>> exponents_;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  Eigen::VectorXd weights;      // lambda(x), one per design point
  Eigen::VectorXd multipliers;  // mu(x), one per trend function
};

/// Factorized augmented system [[K+Se, P], [P', 0]] solved by block
/// elimination: an SPD factor of K+Se and one of the Schur complement
/// P' (K+Se)^{-1} P. Immutable after assembly; predictions are reentrant.
class KrigingSystem {
 public:
  KrigingSystem(Design design, CovarianceSpec spec, TrendBasis trend);

  const Design& design() const { return design_; }
  const CovarianceSpec& spec() const { return spec_; }
  const TrendBasis& trend() const { return trend_; }

  Prediction predict(const Eigen::VectorXd& x) const;

  struct Weights {
    Eigen::MatrixXd lambda;  // N x n
    Eigen::MatrixXd mu;      // N x l
  };
  /// Kriging weights and multipliers for every row of `targets`.
  Weights weights_at(const Eigen::MatrixXd& targets) const;

  /// Batch prediction over the rows of `targets`.
  void predict_at(const Eigen::MatrixXd& targets, Eigen::VectorXd& mean,
                  Eigen::VectorXd& variance) const;
  Eigen::VectorXd mean_at(const Eigen::MatrixXd& targets) const;

  /// Posterior covariance matrix of F at the target points (prediction-error
  /// covariance), symmetrized.
  Eigen::MatrixXd posterior_covariance(const Eigen::MatrixXd& targets) const;


 private:
  Design design_;
  CovarianceSpec spec_;
  TrendBasis trend_;
  Eigen::MatrixXd kmat_;  // K + noise diag + jitter
  Eigen::MatrixXd pmat_;  // n x l
  Eigen::LLT<Eigen::MatrixXd> llt_k_;
  Eigen::MatrixXd kinv_p_;  // K^{-1} P
  Eigen::LLT<Eigen::MatrixXd> llt_schur_;
};

enum class TrendMode { zero_mean, restricted };

/// Negative log-likelihood of the design under the spec. Zero-mean mode is
/// the plain Gaussian likelihood; restricted mode is the likelihood of the
/// contrasts orthogonal to the trend (REML). Throws std::runtime_error when
/// the covariance cannot be factorized (callers treat that as +infinity).
double negative_log_likelihood(const CovarianceSpec& spec, const Design& design,
                               TrendMode mode,
                               const TrendBasis* trend = nullptr);

enum class FitMode { ml, reml };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool collapsed() const { return lo == hi; }
};

struct ParamBounds {
  Interval sigma2;
  std::vector<Interval> rho;  // one per dimension
  Interval nu;
};

struct FitOptions {
  FitMode mode = FitMode::reml;
  bool fit_nu = false;          // nu held at `nu_value` unless requested
  double nu_value = 2.5;
  std::optional<double> fixed_sigma2;
  std::optional<Eigen::VectorXd> fixed_rho;
  int starts = 8;
  std::uint64_t seed = 0;
  double jitter_rel = kDefaultJitterRel;
};

/// Multi-start simplex search over log-parameters within the bounds.
/// Deterministic given the seed. Throws if every start is infeasible.
CovarianceSpec fit_covariance(const Design& design, const ParamBounds& bounds,
                              const FitOptions& options,
                              const TrendBasis& trend);

/// Data-driven default bounds used when a config does not pin them.
ParamBounds default_bounds(const Design& design);

}  // namespace iago
