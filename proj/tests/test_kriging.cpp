#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "iago/kriging.hpp"
#include "iago/math.hpp"
#include "iago/simulation.hpp"
#include "test_support.hpp"

using namespace iago;
using testing_support::gls_posterior;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(vals.size());
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Design design_1d(std::initializer_list<double> xs,
                 std::initializer_list<double> ys) {
  Eigen::MatrixXd pts(xs.size(), 1);
  int i = 0;
  for (double x : xs) pts(i++, 0) = x;
  return Design(pts, vec(ys));
}

}  // namespace

TEST_CASE("rank condition: quadratic trend needs at least six 2-D points") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0.0, 0.0, 1.0, 1.0, 2.0, 2.0;
  Design d(pts, vec({1.0, 2.0, 3.0}));
  CovarianceSpec spec(1.0, vec({1.0, 1.0}), 2.5);
  CHECK_THROWS_AS(KrigingSystem(d, spec, TrendBasis::quadratic(2)),
                  std::invalid_argument);
}

TEST_CASE("collinear points make a full quadratic trend rank deficient") {
  Eigen::MatrixXd pts(6, 2);
  for (int i = 0; i < 6; ++i) {
    pts(i, 0) = i * 0.5;
    pts(i, 1) = i * 0.5;  // all on the diagonal
  }
  Design d(pts, Eigen::VectorXd::LinSpaced(6, 0.0, 1.0));
  CovarianceSpec spec(1.0, vec({1.0, 1.0}), 2.5);
  CHECK_THROWS_AS(KrigingSystem(d, spec, TrendBasis::quadratic(2)),
                  std::runtime_error);
}

TEST_CASE("single point with constant trend predicts f(x1) everywhere") {
  Design d = design_1d({0.4}, {2.7});
  CovarianceSpec spec(1.0, vec({0.5}), 2.5);
  KrigingSystem sys(d, spec, TrendBasis::constant(1));
  for (double x : {-1.0, 0.0, 0.4, 2.0, 10.0}) {
    const Prediction p = sys.predict(vec({x}));
    CHECK(p.mean == doctest::Approx(2.7).epsilon(1e-12));
    CHECK(p.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(sys.predict(vec({0.4})).variance <= 1e-8 * spec.sigma2);
  CHECK(sys.predict(vec({100.0})).variance > 1.9);  // 2 sigma2 (1 - corr) -> 2
}

TEST_CASE("exact designs interpolate with zero variance") {
  Design d = design_1d({0.0, 0.3, 0.7, 1.0}, {1.0, -0.5, 0.2, 2.0});
  CovarianceSpec spec(2.0, vec({0.4}), 1.5);
  KrigingSystem sys(d, spec, TrendBasis::constant(1));
  for (int i = 0; i < d.size(); ++i) {
    const Prediction p = sys.predict(d.points.row(i).transpose());
    CHECK(p.mean == doctest::Approx(d.values[i]).epsilon(1e-9));
    CHECK(p.variance <= 1e-8 * spec.sigma2);
  }
}

TEST_CASE("noisy designs do not interpolate") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 0.5, 1.0;
  Design d(pts, vec({1.0, 0.0, 1.0}), vec({0.04, 0.04, 0.04}));
  CovarianceSpec spec(1.0, vec({0.5}), 2.5);
  KrigingSystem sys(d, spec, TrendBasis::constant(1));
  for (int i = 0; i < d.size(); ++i) {
    const Prediction p = sys.predict(d.points.row(i).transpose());
    CHECK(p.variance > 0.0);
  }
  // The noisy system matches the GLS oracle with the noise on the diagonal.
  const auto oracle = gls_posterior(spec, d, TrendBasis::constant(1),
                                    vec({0.25}).transpose());
  const Prediction p = sys.predict(vec({0.25}));
  CHECK(p.mean == doctest::Approx(oracle.mean[0]).epsilon(1e-9));
  CHECK(p.variance == doctest::Approx(oracle.cov(0, 0)).epsilon(1e-8));
}

TEST_CASE("prediction agrees with the GLS oracle across random cases") {
  for (int trial = 0; trial < 12; ++trial) {
    const int dim = 1 + trial % 2;
    const int n = 4 + trial % 5;
    Box box{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
    const Eigen::MatrixXd pts = testing_support::separated_points(box, n, 100 + trial);
    Design d(pts, testing_support::smooth_values(pts));
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(dim, 0.4 + 0.1 * (trial % 3));
    CovarianceSpec spec(1.5, rho, trial % 2 ? 1.5 : 2.5);
    const TrendBasis trend = trial % 3 == 2 && n >= 4
                                 ? TrendBasis::linear(dim)
                                 : TrendBasis::constant(dim);
    KrigingSystem sys(d, spec, trend);
    const Eigen::MatrixXd targets =
        testing_support::separated_points(box, 5, 900 + trial, 0.0);
    const auto oracle = gls_posterior(spec, d, trend, targets);
    Eigen::VectorXd mean, var;
    sys.predict_at(targets, mean, var);
    for (int i = 0; i < 5; ++i) {
      CHECK(mean[i] == doctest::Approx(oracle.mean[i]).epsilon(1e-7));
      CHECK(var[i] ==
            doctest::Approx(std::max(oracle.cov(i, i), 0.0)).scale(1.0).epsilon(1e-7));
    }
    // Posterior covariance matrix agrees too.
    const Eigen::MatrixXd cov = sys.posterior_covariance(targets);
    CHECK((cov - oracle.cov).cwiseAbs().maxCoeff() < 1e-7 * spec.sigma2);
  }
}

TEST_CASE("universality constraints hold at prediction points") {
  Box box{vec({0.0, 0.0}), vec({1.0, 1.0})};
  const Eigen::MatrixXd pts = testing_support::separated_points(box, 8, 7);
  Design d(pts, testing_support::smooth_values(pts));
  CovarianceSpec spec(1.0, vec({0.5, 0.5}), 2.5);
  for (const TrendBasis& trend :
       {TrendBasis::constant(2), TrendBasis::linear(2)}) {
    KrigingSystem sys(d, spec, trend);
    const Eigen::MatrixXd p = trend.matrix(d.points);
    const Eigen::MatrixXd targets = testing_support::separated_points(box, 10, 77, 0.0);
    const KrigingSystem::Weights w = sys.weights_at(targets);
    for (int i = 0; i < targets.rows(); ++i) {
      const Eigen::VectorXd px = trend.eval(targets.row(i).transpose());
      const Eigen::VectorXd gap = p.transpose() * w.lambda.row(i).transpose() - px;
      CHECK(gap.cwiseAbs().maxCoeff() <=
            1e-8 * (1.0 + px.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("variance grows along a ray away from the design") {
  Design d = design_1d({0.2, 0.4, 0.6}, {0.0, 1.0, 0.5});
  CovarianceSpec spec(1.0, vec({0.3}), 2.5);
  KrigingSystem sys(d, spec, TrendBasis::constant(1));
  double prev = sys.predict(vec({0.6})).variance;
  for (double x = 0.7; x < 3.0; x += 0.1) {
    const double v = sys.predict(vec({x})).variance;
    CHECK(v >= prev - 1e-10);
    prev = v;
  }
}

TEST_CASE("zero-mean negative log-likelihood closed forms") {
  Design d = design_1d({0.0}, {0.0});
  CovarianceSpec unit(1.0, vec({1.0}), 2.5, 0.0);
  CHECK(negative_log_likelihood(unit, d, TrendMode::zero_mean) ==
        doctest::Approx(0.9189385332046727).epsilon(1e-12));
  CovarianceSpec scaled(4.0, vec({1.0}), 2.5, 0.0);
  CHECK(negative_log_likelihood(scaled, d, TrendMode::zero_mean) ==
        doctest::Approx(0.9189385332046727 + 0.5 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("REML needs contrasts") {
  Design d = design_1d({0.0}, {1.0});
  CovarianceSpec spec(1.0, vec({1.0}), 2.5);
  CHECK_THROWS(negative_log_likelihood(spec, d, TrendMode::restricted));
}

TEST_CASE("true spec beats a doubled range most of the time") {
  const CovarianceSpec truth(1.0, vec({0.5}), 2.5);
  const CovarianceSpec doubled(1.0, vec({1.0}), 2.5);
  Eigen::MatrixXd pts(20, 1);
  for (int i = 0; i < 20; ++i) pts(i, 0) = 3.0 * i / 19.0;
  const LocationSet locs = LocationSet::from_points(pts);
  int wins = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const PathEnsemble path = sample_unconditional(truth, locs, 1, 5000 + rep);
    Design d(pts, path.values.row(0).transpose());
    const double nll_true =
        negative_log_likelihood(truth, d, TrendMode::zero_mean);
    const double nll_doubled =
        negative_log_likelihood(doubled, d, TrendMode::zero_mean);
    if (nll_true <= nll_doubled) ++wins;
  }
  CHECK(wins >= 40);  // at least 80% of 50 replications
}

TEST_CASE("fit recovers the variance scale and beats a validation grid") {
  ParamBounds bounds;
  bounds.sigma2 = {0.1, 10.0};
  bounds.rho = {{0.05, 2.0}};
  bounds.nu = {2.5, 2.5};
  const CovarianceSpec truth(1.0, vec({0.5}), 2.5);
  Eigen::MatrixXd pts(30, 1);
  for (int i = 0; i < 30; ++i) pts(i, 0) = 3.0 * i / 29.0;
  const LocationSet locs = LocationSet::from_points(pts);

  std::vector<double> sigma2_hat;
  for (int seed = 0; seed < 10; ++seed) {
    const PathEnsemble path = sample_unconditional(truth, locs, 1, 9100 + seed);
    Design d(pts, path.values.row(0).transpose());
    FitOptions opts;
    opts.mode = FitMode::ml;
    opts.nu_value = 2.5;
    opts.seed = seed;
    const CovarianceSpec fitted =
        fit_covariance(d, bounds, opts, TrendBasis::constant(1));
    sigma2_hat.push_back(fitted.sigma2);

    // Oracle: dense grid search of the same objective.
    const double fitted_nll =
        negative_log_likelihood(fitted, d, TrendMode::zero_mean);
    for (int a = 0; a < 10; ++a) {
      for (int b = 0; b < 10; ++b) {
        const double s2 = bounds.sigma2.lo *
                          std::pow(bounds.sigma2.hi / bounds.sigma2.lo, a / 9.0);
        const double rho = bounds.rho[0].lo *
                           std::pow(bounds.rho[0].hi / bounds.rho[0].lo, b / 9.0);
        const CovarianceSpec grid_spec(s2, vec({rho}), 2.5);
        const double grid_nll =
            negative_log_likelihood(grid_spec, d, TrendMode::zero_mean);
        CHECK(fitted_nll <= grid_nll + 1e-6);
      }
    }
  }
  std::sort(sigma2_hat.begin(), sigma2_hat.end());
  const double median = 0.5 * (sigma2_hat[4] + sigma2_hat[5]);
  CHECK(median >= 0.5);
  CHECK(median <= 2.0);
}

TEST_CASE("collapsed bounds return that point") {
  Design d = design_1d({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5});
  ParamBounds bounds;
  bounds.sigma2 = {2.0, 2.0};
  bounds.rho = {{0.7, 0.7}};
  bounds.nu = {1.5, 1.5};
  FitOptions opts;
  opts.fit_nu = true;
  const CovarianceSpec fitted =
      fit_covariance(d, bounds, opts, TrendBasis::constant(1));
  CHECK(fitted.sigma2 == 2.0);
  CHECK(fitted.ranges[0] == 0.7);
  CHECK(fitted.nu == 1.5);
}

TEST_CASE("flat data pushes the range to its upper bound") {
  Design d = design_1d({0.0, 1.0}, {3.0, 3.0});
  ParamBounds bounds;
  bounds.sigma2 = {1.0, 1.0};
  bounds.rho = {{0.5, 8.0}};
  bounds.nu = {2.5, 2.5};
  FitOptions opts;
  opts.mode = FitMode::ml;
  const CovarianceSpec fitted =
      fit_covariance(d, bounds, opts, TrendBasis::constant(1));
  CHECK(fitted.ranges[0] == doctest::Approx(8.0).epsilon(0.02));
  // Oracle: the objective is monotone decreasing in rho on a grid.
  double prev = negative_log_likelihood(CovarianceSpec(1.0, vec({0.5}), 2.5), d,
                                        TrendMode::zero_mean);
  for (double rho = 1.0; rho <= 8.0; rho += 0.5) {
    const double nll = negative_log_likelihood(CovarianceSpec(1.0, vec({rho}), 2.5),
                                               d, TrendMode::zero_mean);
    CHECK(nll <= prev + 1e-9);
    prev = nll;
  }
}

TEST_CASE("design validation") {
  Eigen::MatrixXd pts(2, 1);
  pts << 0.5, 0.5;
  CHECK_THROWS(Design(pts, vec({1.0, 2.0})));              // duplicate exact points
  CHECK_NOTHROW(Design(pts, vec({1.0, 2.0}), vec({0.1, 0.1})));  // ok when noisy
  Eigen::MatrixXd p1(1, 1);
  p1 << 0.0;
  CHECK_THROWS(Design(p1, vec({1.0, 2.0})));               // length mismatch
  CHECK_THROWS(Design(p1, vec({1.0}), vec({-0.1})));       // negative noise
}

TEST_CASE("design append keeps noise bookkeeping consistent") {
  Design d = design_1d({0.0, 1.0}, {1.0, 2.0});
  CHECK(!d.has_noise());
  d.append(vec({2.0}), 3.0);
  CHECK(d.size() == 3);
  CHECK(!d.has_noise());
  d.append(vec({3.0}), 4.0, 0.25);
  CHECK(d.has_noise());
  CHECK(d.noise_var(0) == 0.0);
  CHECK(d.noise_var(3) == 0.25);
}
