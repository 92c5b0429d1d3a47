#include "iago/kriging.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "iago/math.hpp"
#include "iago/optim.hpp"

namespace iago {

Design::Design(Eigen::MatrixXd pts, Eigen::VectorXd vals)
    : points(std::move(pts)), values(std::move(vals)) {
  validate();
}

Design::Design(Eigen::MatrixXd pts, Eigen::VectorXd vals,
               Eigen::VectorXd noise)
    : points(std::move(pts)),
      values(std::move(vals)),
      noise_vars(std::move(noise)) {
  validate();
}

double Design::spread() const {
  return values.maxCoeff() - values.minCoeff();
}

void Design::append(const Eigen::VectorXd& x, double value,
                    std::optional<double> noise) {
  if (x.size() != dim()) throw std::invalid_argument("Design::append: dimension mismatch");
  const int n = size();
  points.conservativeResize(n + 1, Eigen::NoChange);
  points.row(n) = x.transpose();
  values.conservativeResize(n + 1);
  values[n] = value;
  if (has_noise() || (noise && *noise > 0.0)) {
    if (!has_noise()) noise_vars = Eigen::VectorXd::Zero(n);
    noise_vars.conservativeResize(n + 1);
    noise_vars[n] = noise.value_or(0.0);
  }
  validate();
}

void Design::validate() const {
  const int n = size();
  if (n < 1) throw std::invalid_argument("Design: at least one evaluation required");
  if (values.size() != n) throw std::invalid_argument("Design: points/values length mismatch");
  if (noise_vars.size() != 0 && noise_vars.size() != n) {
    throw std::invalid_argument("Design: noise_vars length mismatch");
  }
  for (int i = 0; i < noise_vars.size(); ++i) {
    if (!(noise_vars[i] >= 0.0)) throw std::invalid_argument("Design: noise variances must be nonnegative");
  }
  if (!has_noise()) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        if (points.row(i) == points.row(j)) {
          throw std::invalid_argument(
              "Design: duplicate points are not allowed for exact designs");
        }
      }
    }
  }
}

TrendBasis TrendBasis::constant(int dim) {
  return TrendBasis(dim, {std::vector<int>(dim, 0)});
}

TrendBasis TrendBasis::linear(int dim) {
  std::vector<std::vector<int>> exps{std::vector<int>(dim, 0)};
  for (int d = 0; d < dim; ++d) {
    std::vector<int> e(dim, 0);
    e[d] = 1;
    exps.push_back(e);
  }
  return TrendBasis(dim, std::move(exps));
}

TrendBasis TrendBasis::quadratic(int dim) {
  std::vector<std::vector<int>> exps{std::vector<int>(dim, 0)};
  for (int d = 0; d < dim; ++d) {
    std::vector<int> e(dim, 0);
    e[d] = 1;
    exps.push_back(e);
  }
  for (int d = 0; d < dim; ++d) {
    for (int e2 = d; e2 < dim; ++e2) {
      std::vector<int> e(dim, 0);
      e[d] += 1;
      e[e2] += 1;
      exps.push_back(e);
    }
  }
  return TrendBasis(dim, std::move(exps));
}

Eigen::VectorXd TrendBasis::eval(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw std::invalid_argument("TrendBasis: dimension mismatch");
  Eigen::VectorXd p(size());
  for (int k = 0; k < size(); ++k) {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) {
      for (int e = 0; e < exponents_[k][d]; ++e) v *= x[d];
    }
    p[k] = v;
  }
  return p;
}

Eigen::MatrixXd TrendBasis::matrix(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd p(points.rows(), size());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    p.row(i) = eval(points.row(i)).transpose();
  }
  return p;
}

KrigingSystem::KrigingSystem(Design design, CovarianceSpec spec,
                             TrendBasis trend)
    : design_(std::move(design)), spec_(std::move(spec)), trend_(std::move(trend)) {
  const int n = design_.size();
  const int l = trend_.size();
  if (design_.dim() != spec_.dim()) {
    throw std::invalid_argument("assemble_system: design/spec dimension mismatch");
  }
  if (trend_.dim() != design_.dim()) {
    throw std::invalid_argument("assemble_system: design/trend dimension mismatch");
  }
  if (n < l) {
    throw std::invalid_argument(
        "assemble_system: rank condition violated, need at least as many "
        "evaluations as trend functions");
  }
  kmat_ = covariance_matrix(spec_, design_.points);
  if (design_.has_noise()) kmat_.diagonal() += design_.noise_vars;
  llt_k_.compute(kmat_);
  if (llt_k_.info() != Eigen::Success) {
    // Near-duplicate evaluation points: escalate the diagonal jitter before
    // giving up, as the sampler does.
    double extra = std::max(spec_.jitter, 1e-12 * spec_.sigma2) * 10.0;
    const double cap = 1e-6 * spec_.sigma2;
    while (llt_k_.info() != Eigen::Success && extra <= cap) {
      Eigen::MatrixXd inflated = kmat_;
      inflated.diagonal().array() += extra;
      llt_k_.compute(inflated);
      if (llt_k_.info() == Eigen::Success) kmat_ = inflated;
      extra *= 10.0;
    }
    if (llt_k_.info() != Eigen::Success) {
      throw std::runtime_error(
          "assemble_system: covariance block is not positive definite "
          "(duplicate or near-duplicate exact points)");
    }
  }
  pmat_ = trend_.matrix(design_.points);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pmat_);
  if (qr.rank() < l) {
    throw std::runtime_error(
        "assemble_system: trend basis matrix is rank deficient on the design");
  }
  kinv_p_ = llt_k_.solve(pmat_);
  llt_schur_.compute(pmat_.transpose() * kinv_p_);
  if (llt_schur_.info() != Eigen::Success) {
    throw std::runtime_error(
        "assemble_system: universality constraints are degenerate");
  }
}

KrigingSystem::Weights KrigingSystem::weights_at(
    const Eigen::MatrixXd& targets) const {
  if (targets.cols() != design_.dim()) {
    throw std::invalid_argument("weights_at: dimension mismatch");
  }
  const Eigen::MatrixXd kcross =
      cross_covariance(spec_, design_.points, targets);        // n x N
  const Eigen::MatrixXd ptarg = trend_.matrix(targets);        // N x l
  const Eigen::MatrixXd alpha = llt_k_.solve(kcross);          // n x N
  // mu solves (P' K^{-1} P) mu = P' K^{-1} k(x) - p(x)
  const Eigen::MatrixXd mu_t =
      llt_schur_.solve(pmat_.transpose() * alpha - ptarg.transpose());  // l x N
  const Eigen::MatrixXd lambda_t = alpha - kinv_p_ * mu_t;              // n x N
  return {lambda_t.transpose(), mu_t.transpose()};
}

void KrigingSystem::predict_at(const Eigen::MatrixXd& targets,
                               Eigen::VectorXd& mean,
                               Eigen::VectorXd& variance) const {
  const Weights w = weights_at(targets);
  const Eigen::MatrixXd kcross =
      cross_covariance(spec_, design_.points, targets);  // n x N
  const Eigen::MatrixXd ptarg = trend_.matrix(targets);
  mean = w.lambda * design_.values;
  variance.resize(targets.rows());
  // Round-off scale: the base tolerance plus the diagonal inflation the
  // jitter itself adds at evaluated points.
  const double clamp_tol = 1e-10 * spec_.sigma2 + 4.0 * spec_.jitter;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    double v = spec_.sigma2 - w.lambda.row(i).dot(kcross.col(i)) -
               w.mu.row(i).dot(ptarg.row(i));
    variance[i] = (v < clamp_tol) ? 0.0 : v;
  }
}

Eigen::VectorXd KrigingSystem::mean_at(const Eigen::MatrixXd& targets) const {
  return weights_at(targets).lambda * design_.values;
}

Prediction KrigingSystem::predict(const Eigen::VectorXd& x) const {
  if (x.size() != design_.dim()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  Eigen::VectorXd mean, var;
  const Weights w = weights_at(x.transpose());
  const Eigen::VectorXd kx =
      cross_covariance(spec_, design_.points, x.transpose()).col(0);
  const Eigen::VectorXd px = trend_.eval(x);
  Prediction out;
  out.weights = w.lambda.row(0).transpose();
  out.multipliers = w.mu.row(0).transpose();
  out.mean = out.weights.dot(design_.values);
  double v = spec_.sigma2 - out.weights.dot(kx) - out.multipliers.dot(px);
  // Round-off scale: the base tolerance plus the diagonal inflation the
  // jitter itself adds at evaluated points.
  const double clamp_tol = 1e-10 * spec_.sigma2 + 4.0 * spec_.jitter;
  out.variance = (v < clamp_tol) ? 0.0 : v;
  return out;
}

Eigen::MatrixXd KrigingSystem::posterior_covariance(
    const Eigen::MatrixXd& targets) const {
  const Weights w = weights_at(targets);
  const Eigen::MatrixXd ktt = cross_covariance(spec_, targets, targets);
  const Eigen::MatrixXd kcross =
      cross_covariance(spec_, targets, design_.points);  // N x n
  const Eigen::MatrixXd ptarg = trend_.matrix(targets);
  Eigen::MatrixXd c = ktt - kcross * w.lambda.transpose() -
                      ptarg * w.mu.transpose();
  c = 0.5 * (c + c.transpose()).eval();
  return c;
}


double negative_log_likelihood(const CovarianceSpec& spec, const Design& design,
                               TrendMode mode, const TrendBasis* trend) {
  const int n = design.size();
  Eigen::MatrixXd k = covariance_matrix(spec, design.points);
  if (design.has_noise()) k.diagonal() += design.noise_vars;

  if (mode == TrendMode::zero_mean) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("negative_log_likelihood: covariance factorization failed");
    }
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double quad = design.values.dot(llt.solve(design.values));
    return 0.5 * (n * std::log(2.0 * kPi) + logdet + quad);
  }

  // Restricted likelihood: project the data onto an orthonormal basis of the
  // null space of P' and evaluate the likelihood of those contrasts.
  TrendBasis basis = trend ? *trend : TrendBasis::constant(design.dim());
  const int l = basis.size();
  if (n <= l) {
    throw std::runtime_error("negative_log_likelihood: no contrasts left for REML");
  }
  const Eigen::MatrixXd p = basis.matrix(design.points);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd w = q.rightCols(n - l);  // n x (n-l)
  const Eigen::MatrixXd kw = w.transpose() * k * w;
  Eigen::LLT<Eigen::MatrixXd> llt(kw);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("negative_log_likelihood: contrast covariance factorization failed");
  }
  const Eigen::VectorXd z = w.transpose() * design.values;
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double quad = z.dot(llt.solve(z));
  return 0.5 * ((n - l) * std::log(2.0 * kPi) + logdet + quad);
}

ParamBounds default_bounds(const Design& design) {
  const int n = design.size();
  const int d = design.dim();
  double var = 0.0;
  const double mean = design.values.mean();
  for (int i = 0; i < n; ++i) {
    var += (design.values[i] - mean) * (design.values[i] - mean);
  }
  var /= std::max(1, n - 1);
  if (!(var > 0.0)) var = 1.0;
  ParamBounds b;
  b.sigma2 = {var * 1e-2, var * 1e2};
  b.rho.resize(d);
  for (int j = 0; j < d; ++j) {
    const double lo = design.points.col(j).minCoeff();
    const double hi = design.points.col(j).maxCoeff();
    double edge = hi - lo;
    if (!(edge > 0.0)) edge = 1.0;
    b.rho[j] = {edge / 20.0, edge * 2.0};
  }
  b.nu = {0.5, 5.0};
  return b;
}

namespace {

struct LogParamSpace {
  // Search coordinates: log sigma2, log rho_d..., log nu; fixed or collapsed
  // parameters are excluded from the coordinates.
  std::vector<double> fixed_values;  // full-length template
  std::vector<int> free_index;       // position in full vector per coordinate
  std::vector<Interval> free_bounds; // in log space
  int dim_factors;

  Eigen::VectorXd full(const Eigen::VectorXd& coords) const {
    Eigen::VectorXd out(fixed_values.size());
    for (size_t i = 0; i < fixed_values.size(); ++i) out[i] = fixed_values[i];
    for (size_t c = 0; c < free_index.size(); ++c) {
      out[free_index[c]] = std::exp(coords[c]);
    }
    return out;
  }
};

}  // namespace

CovarianceSpec fit_covariance(const Design& design, const ParamBounds& bounds,
                              const FitOptions& options,
                              const TrendBasis& trend) {
  if (design.size() < 2) {
    throw std::invalid_argument("fit_covariance: need at least two evaluations");
  }
  const int d = design.dim();
  if (static_cast<int>(bounds.rho.size()) != d) {
    throw std::invalid_argument("fit_covariance: bounds dimension mismatch");
  }

  LogParamSpace space;
  space.dim_factors = d;
  space.fixed_values.assign(d + 2, 0.0);

  auto add_param = [&](int full_idx, const Interval& iv,
                       std::optional<double> fixed) {
    if (fixed) {
      space.fixed_values[full_idx] = *fixed;
      return;
    }
    if (!(iv.lo > 0.0) || iv.hi < iv.lo) {
      throw std::invalid_argument("fit_covariance: bounds must be positive and ordered");
    }
    if (iv.collapsed()) {
      space.fixed_values[full_idx] = iv.lo;
      return;
    }
    space.free_index.push_back(full_idx);
    space.free_bounds.push_back({std::log(iv.lo), std::log(iv.hi)});
  };

  add_param(0, bounds.sigma2, options.fixed_sigma2);
  for (int j = 0; j < d; ++j) {
    std::optional<double> fr;
    if (options.fixed_rho) fr = (*options.fixed_rho)[j];
    add_param(1 + j, bounds.rho[j], fr);
  }
  add_param(1 + d, bounds.nu,
            options.fit_nu ? std::nullopt
                           : std::optional<double>(options.nu_value));

  auto spec_from = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd rho = full.segment(1, d);
    return CovarianceSpec(full[0], rho, full[1 + d],
                          options.jitter_rel * full[0]);
  };

  const TrendMode mode = options.mode == FitMode::ml ? TrendMode::zero_mean
                                                     : TrendMode::restricted;
  auto objective = [&](const Eigen::VectorXd& coords) {
    try {
      return negative_log_likelihood(spec_from(space.full(coords)), design,
                                     mode, &trend);
    } catch (const std::runtime_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const int k = static_cast<int>(space.free_index.size());
  if (k == 0) return spec_from(space.full(Eigen::VectorXd()));

  Eigen::VectorXd log_lo(k), log_hi(k);
  for (int c = 0; c < k; ++c) {
    log_lo[c] = space.free_bounds[c].lo;
    log_hi[c] = space.free_bounds[c].hi;
  }
  const Box log_box(log_lo, log_hi);
  const Eigen::MatrixXd starts =
      latin_hypercube(log_box, options.starts, options.seed);

  bool any_feasible = false;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_coords;
  for (int s = 0; s < options.starts; ++s) {
    const Eigen::VectorXd start = starts.row(s).transpose();
    if (!std::isfinite(objective(start))) continue;
    const SimplexResult res =
        nelder_mead(objective, start, log_box, 0.1, 400 * (k + 1), 1e-10);
    if (!std::isfinite(res.value)) continue;
    any_feasible = true;
    if (res.value < best_value) {
      best_value = res.value;
      best_coords = res.x;
    }
  }
  if (!any_feasible) {
    throw std::runtime_error("fit_covariance: every start was infeasible");
  }
  return spec_from(space.full(best_coords));
}

}  // namespace iago
