#pragma once

#include <Eigen/Dense>

namespace iago {

/// Stationary anisotropic Matern kernel: variance sigma2, one correlation
/// range per input dimension, regularity nu, and a diagonal jitter used when
/// assembling covariance matrices.
struct CovarianceSpec {
  double sigma2 = 1.0;
  Eigen::VectorXd ranges;
  double nu = 2.5;
  double jitter = 0.0;

  CovarianceSpec() = default;
  CovarianceSpec(double sigma2_, Eigen::VectorXd ranges_, double nu_);
  CovarianceSpec(double sigma2_, Eigen::VectorXd ranges_, double nu_,
                 double jitter_);

  int dim() const { return static_cast<int>(ranges.size()); }
  void validate() const;

  bool operator==(const CovarianceSpec& o) const;
};

/// Default diagonal jitter, relative to sigma2.
inline constexpr double kDefaultJitterRel = 1e-10;

/// Matern kernel value at scaled lag h. Returns exactly sigma2 at h=0;
/// nu in {0.5, 1.5, 2.5} uses the closed forms, any other nu goes through
/// the modified Bessel function of the second kind.
double matern(double h, double nu, double rho, double sigma2);

namespace detail {
/// General-nu Bessel route, exposed so tests can compare it with the
/// closed forms.
double matern_bessel(double h, double nu, double rho, double sigma2);
}  // namespace detail

/// Kernel value between two points; per-dimension ranges are folded into the
/// scaled distance h = sqrt(sum_d ((x_d-y_d)/rho_d)^2).
double covariance(const CovarianceSpec& spec, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y);

/// n x n kernel matrix over the rows of `points`, jitter added on the
/// diagonal.
Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec,
                                  const Eigen::MatrixXd& points);

/// Cross-covariance matrix between the rows of two point sets (no jitter).
Eigen::MatrixXd cross_covariance(const CovarianceSpec& spec,
                                 const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b);

/// Cholesky factor of an SPD matrix; throws std::runtime_error if the
/// factorization fails (duplicated points or a degenerate spec).
Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& k);

struct SpdFactor {
  Eigen::MatrixXd lower;
  double extra_jitter = 0.0;  // diagonal inflation added on top of the input
};

/// Cholesky with jitter escalation: on failure the diagonal is inflated
/// starting from 10x the base jitter, multiplying by 10 up to 1e-6*sigma2.
SpdFactor cholesky_with_escalation(const Eigen::MatrixXd& k, double sigma2,
                                   double base_jitter);

}  // namespace iago
