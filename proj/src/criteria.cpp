#include "iago/criteria.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iago/math.hpp"

namespace iago {

double expected_improvement(double mean, double variance, double f_min) {
  if (!(variance >= 0.0)) {
    throw std::invalid_argument("expected_improvement: variance must be nonnegative");
  }
  if (variance == 0.0) return std::max(f_min - mean, 0.0);
  const double sigma = std::sqrt(variance);
  const double u = (f_min - mean) / sigma;
  const double ei = sigma * (u * normal_cdf(u) + normal_pdf(u));
  return std::max(ei, 0.0);
}

QuantizerLevels quantization_levels(double mean, double variance, int m) {
  if (m < 2) throw std::invalid_argument("quantization_levels: M must be >= 2");
  if (!(variance > 0.0)) {
    throw std::invalid_argument(
        "quantization_levels: variance must be positive (outcome already "
        "determined)");
  }
  const double sigma = std::sqrt(variance);
  QuantizerLevels q;
  q.levels.resize(m);
  for (int i = 0; i < m; ++i) {
    q.levels[i] = mean + sigma * normal_quantile((i + 0.5) / m);
  }
  return q;
}

double entropy_bits(const MinimizerPmf& pmf) {
  if (pmf.total <= 0) throw std::invalid_argument("entropy_bits: empty pmf");
  const double r = static_cast<double>(pmf.total);
  double acc = 0.0;
  for (long long c : pmf.counts) {
    if (c > 0) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
  }
  return std::log2(r) - acc / r;
}

EntropyCriterion::EntropyCriterion(const KrigingSystem& system,
                                   const PathEnsemble& conditioned,
                                   const LocationSet& locs,
                                   std::uint64_t tie_seed, Options options)
    : system_(system), locs_(locs), options_(options), tie_seed_(tie_seed) {
  if (!conditioned.conditioned) {
    throw std::invalid_argument("EntropyCriterion: ensemble must be conditioned");
  }
  if (conditioned.locations() != locs.size()) {
    throw std::invalid_argument("EntropyCriterion: ensemble/location size mismatch");
  }
  const KrigingSystem::Weights w = system.weights_at(locs.points);
  lambda_ = w.lambda;
  mu_ = w.mu;
  kcross_ = cross_covariance(system.spec(), locs.points,
                             system.design().points);  // N x n
  ptarg_ = system.trend().matrix(locs.points);
  system.predict_at(locs.points, mean_locs_, var_locs_);

  const int ng = static_cast<int>(conditioned.grid_cols.size());
  t_grid_.resize(conditioned.paths(), ng);
  for (int j = 0; j < ng; ++j) {
    t_grid_.col(j) = conditioned.values.col(conditioned.grid_cols[j]);
  }
  t_all_ = &conditioned.values;

  current_pmf_ = minimizer_distribution(conditioned, tie_seed);
  current_entropy_ = entropy_bits(current_pmf_);
}

double EntropyCriterion::score(int column) const {
  if (column < 0 || column >= locs_.size()) {
    throw std::invalid_argument("EntropyCriterion: candidate outside sampled locations");
  }
  const double var_c = var_locs_[column];
  if (var_c <= options_.zero_variance_rel_tol * system_.spec().sigma2) {
    return current_entropy_;
  }
  const QuantizerLevels q =
      quantization_levels(mean_locs_[column], var_c, options_.levels);

  // Normalized posterior cross-covariance between every location and the
  // candidate.
  const Eigen::VectorXd kcol =
      cross_covariance(system_.spec(), locs_.points,
                       locs_.points.row(column))
          .col(0);
  Eigen::VectorXd g = kcol - kcross_ * lambda_.row(column).transpose() -
                      ptarg_ * mu_.row(column).transpose();
  g /= var_c;

  const int r = static_cast<int>(t_grid_.rows());
  const int ng = static_cast<int>(t_grid_.cols());
  const int m = options_.levels;
  Eigen::ArrayXd g_grid(ng);
  for (int j = 0; j < ng; ++j) g_grid[j] = g[locs_.grid_rows[j]];
  const Eigen::VectorXd t_c = t_all_->col(column);

  // Per-level argmin counts, filled path by path so each path's grid row
  // stays cache resident across the level loop.
  std::vector<long long> counts(static_cast<size_t>(m) * ng, 0LL);
  std::vector<int> ties;
  Eigen::ArrayXd buf(ng);
  const std::uint64_t cand_seed =
      substream_key(tie_seed_, 0x1000000ULL + static_cast<std::uint64_t>(column));
  for (int p = 0; p < r; ++p) {
    const Eigen::Map<const Eigen::ArrayXd> trow(
        t_grid_.data() + static_cast<std::ptrdiff_t>(p) * ng, ng);
    for (int lev = 0; lev < m; ++lev) {
      const double delta = q.levels[lev] - t_c[p];
      buf = trow + delta * g_grid;
      const double best = buf.minCoeff();
      const int eq = static_cast<int>((buf == best).count());
      int idx = 0;
      if (eq == 1) {
        while (buf[idx] != best) ++idx;
      } else {
        ties.clear();
        for (int j = 0; j < ng; ++j) {
          if (buf[j] == best) ties.push_back(j);
        }
        RandomStream stream(substream_key(cand_seed, lev),
                            static_cast<std::uint64_t>(p));
        idx = ties[stream.next_below(ties.size())];
      }
      ++counts[static_cast<size_t>(lev) * ng + idx];
    }
  }
  double total = 0.0;
  for (int lev = 0; lev < m; ++lev) {
    double acc = 0.0;
    for (int j = 0; j < ng; ++j) {
      const long long c = counts[static_cast<size_t>(lev) * ng + j];
      if (c > 0) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
    total += std::log2(static_cast<double>(r)) - acc / r;
  }
  return total / m;
}

}  // namespace iago
