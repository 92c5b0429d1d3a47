#include "iago/covariance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iago {

CovarianceSpec::CovarianceSpec(double sigma2_, Eigen::VectorXd ranges_,
                               double nu_)
    : sigma2(sigma2_),
      ranges(std::move(ranges_)),
      nu(nu_),
      jitter(kDefaultJitterRel * sigma2_) {
  validate();
}

CovarianceSpec::CovarianceSpec(double sigma2_, Eigen::VectorXd ranges_,
                               double nu_, double jitter_)
    : sigma2(sigma2_), ranges(std::move(ranges_)), nu(nu_), jitter(jitter_) {
  validate();
}

void CovarianceSpec::validate() const {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("CovarianceSpec: sigma2 must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("CovarianceSpec: nu must be positive");
  if (!(jitter >= 0.0)) throw std::invalid_argument("CovarianceSpec: jitter must be nonnegative");
  if (ranges.size() == 0) throw std::invalid_argument("CovarianceSpec: ranges must be nonempty");
  for (int d = 0; d < ranges.size(); ++d) {
    if (!(ranges[d] > 0.0)) throw std::invalid_argument("CovarianceSpec: every range must be positive");
  }
}

bool CovarianceSpec::operator==(const CovarianceSpec& o) const {
  return sigma2 == o.sigma2 && nu == o.nu && jitter == o.jitter &&
         ranges.size() == o.ranges.size() && ranges == o.ranges;
}

namespace detail {

double matern_bessel(double h, double nu, double rho, double sigma2) {
  const double z = 2.0 * std::sqrt(nu) * h / rho;
  if (z < 1e-10) return sigma2;
  if (z > 700.0) return 0.0;
  const double bessel = std::cyl_bessel_k(nu, z);
  const double coeff =
      sigma2 / (std::pow(2.0, nu - 1.0) * std::tgamma(nu));
  double value = coeff * std::pow(z, nu) * bessel;
  if (!std::isfinite(value)) return 0.0;
  if (value < 0.0) value = 0.0;
  if (value > sigma2) value = sigma2;
  return value;
}

}  // namespace detail

double matern(double h, double nu, double rho, double sigma2) {
  if (!(nu > 0.0) || !(rho > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("matern: nu, rho, sigma2 must be positive");
  }
  if (!(h >= 0.0)) throw std::invalid_argument("matern: h must be nonnegative");
  if (h == 0.0) return sigma2;
  const double z = 2.0 * std::sqrt(nu) * h / rho;
  if (nu == 0.5) return sigma2 * std::exp(-z);
  if (nu == 1.5) return sigma2 * (1.0 + z) * std::exp(-z);
  if (nu == 2.5) return sigma2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
  return detail::matern_bessel(h, nu, rho, sigma2);
}

namespace {

double scaled_sq_distance(const CovarianceSpec& spec, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  double h2 = 0.0;
  for (int d = 0; d < spec.dim(); ++d) {
    const double t = (x[d] - y[d]) / spec.ranges[d];
    h2 += t * t;
  }
  return h2;
}

}  // namespace

double covariance(const CovarianceSpec& spec, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y) {
  if (x.size() != spec.dim() || y.size() != spec.dim()) {
    throw std::invalid_argument("covariance: point dimension mismatch");
  }
  return matern(std::sqrt(scaled_sq_distance(spec, x, y)), spec.nu, 1.0,
                spec.sigma2);
}

Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec,
                                  const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("covariance_matrix: no points");
  if (points.cols() != spec.dim()) {
    throw std::invalid_argument("covariance_matrix: point dimension mismatch");
  }
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec.sigma2 + spec.jitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = covariance(spec, points.row(i), points.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_covariance(const CovarianceSpec& spec,
                                 const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  if (a.cols() != spec.dim() || b.cols() != spec.dim()) {
    throw std::invalid_argument("cross_covariance: point dimension mismatch");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = covariance(spec, a.row(i), b.row(j));
    }
  }
  return k;
}

Eigen::MatrixXd cholesky_spd(const Eigen::MatrixXd& k) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "cholesky_spd: factorization failed (duplicated points or degenerate "
        "spec)");
  }
  return llt.matrixL();
}

SpdFactor cholesky_with_escalation(const Eigen::MatrixXd& k, double sigma2,
                                   double base_jitter) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  double extra = std::max(base_jitter, 1e-12 * sigma2) * 10.0;
  const double cap = 1e-6 * sigma2;
  while (extra <= cap) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += extra;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), extra};
    extra *= 10.0;
  }
  throw std::runtime_error(
      "cholesky_with_escalation: factorization failed even with jitter " +
      std::to_string(cap));
}

}  // namespace iago
