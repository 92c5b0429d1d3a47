#include "iago/simulation.hpp"

#include <map>
#include <stdexcept>
#include <vector>

#include "iago/math.hpp"

namespace iago {

LocationSet LocationSet::from_points(Eigen::MatrixXd pts) {
  LocationSet ls;
  ls.points = std::move(pts);
  ls.grid_rows.resize(ls.points.rows());
  for (int i = 0; i < ls.size(); ++i) ls.grid_rows[i] = i;
  ls.validate();
  return ls;
}

void LocationSet::validate() const {
  if (size() < 1) throw std::invalid_argument("LocationSet: must be nonempty");
  std::map<std::vector<double>, int> seen;
  for (int i = 0; i < size(); ++i) {
    std::vector<double> key(points.row(i).begin(), points.row(i).end());
    if (!seen.emplace(std::move(key), i).second) {
      throw std::invalid_argument("LocationSet: locations must be pairwise distinct");
    }
  }
  for (int r : grid_rows) {
    if (r < 0 || r >= size()) throw std::invalid_argument("LocationSet: grid index out of range");
  }
}

JointLocations build_joint(const Eigen::MatrixXd& grid,
                           const Eigen::MatrixXd& candidates,
                           const Eigen::MatrixXd& design_points) {
  const int d = static_cast<int>(grid.cols());
  std::map<std::vector<double>, int> index;
  std::vector<Eigen::VectorXd> rows;
  auto intern = [&](const Eigen::VectorXd& x) {
    std::vector<double> key(x.begin(), x.end());
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(rows.size());
    index.emplace(std::move(key), id);
    rows.push_back(x);
    return id;
  };

  JointLocations out;
  out.locs.grid_rows.reserve(grid.rows());
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    out.locs.grid_rows.push_back(intern(grid.row(i).transpose()));
  }
  out.candidate_cols.reserve(candidates.rows());
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    out.candidate_cols.push_back(intern(candidates.row(i).transpose()));
  }
  out.design_cols.reserve(design_points.rows());
  for (Eigen::Index i = 0; i < design_points.rows(); ++i) {
    out.design_cols.push_back(intern(design_points.row(i).transpose()));
  }
  out.locs.points.resize(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    out.locs.points.row(i) = rows[i].transpose();
  }
  out.locs.validate();
  return out;
}

PathEnsemble sample_unconditional(const CovarianceSpec& spec,
                                  const LocationSet& locs, int r,
                                  std::uint64_t seed) {
  if (r < 1) throw std::invalid_argument("sample_unconditional: r must be >= 1");
  locs.validate();
  const int n = locs.size();
  const Eigen::MatrixXd k = covariance_matrix(spec, locs.points);
  const SpdFactor factor = cholesky_with_escalation(k, spec.sigma2, spec.jitter);

  PathEnsemble out;
  out.values.resize(r, n);
  out.seed = seed;
  out.conditioned = false;
  out.spec = spec;
  out.grid_cols = locs.grid_rows;

  Eigen::VectorXd g(n);
  for (int i = 0; i < r; ++i) {
    RandomStream stream(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < n; ++j) g[j] = stream.next_normal();
    out.values.row(i) =
        (factor.lower.triangularView<Eigen::Lower>() * g).transpose();
  }
  return out;
}

namespace {

std::vector<int> locate_design_columns(const KrigingSystem& system,
                                       const LocationSet& locs) {
  const Eigen::MatrixXd& dp = system.design().points;
  std::map<std::vector<double>, int> index;
  for (int i = 0; i < locs.size(); ++i) {
    std::vector<double> key(locs.points.row(i).begin(), locs.points.row(i).end());
    index.emplace(std::move(key), i);
  }
  std::vector<int> cols(dp.rows());
  for (Eigen::Index i = 0; i < dp.rows(); ++i) {
    std::vector<double> key(dp.row(i).begin(), dp.row(i).end());
    auto it = index.find(key);
    if (it == index.end()) {
      throw std::invalid_argument(
          "condition_paths: design point missing from the sampled locations");
    }
    cols[i] = it->second;
  }
  return cols;
}

}  // namespace

PathEnsemble condition_paths_on_anchors(const PathEnsemble& ensemble,
                                        const KrigingSystem& system,
                                        const LocationSet& locs,
                                        const Eigen::MatrixXd& anchors) {
  if (ensemble.conditioned) {
    throw std::invalid_argument("condition_paths: ensemble already conditioned");
  }
  if (!(ensemble.spec == system.spec())) {
    throw std::invalid_argument("condition_paths: design/ensemble spec mismatch");
  }
  if (ensemble.locations() != locs.size()) {
    throw std::invalid_argument("condition_paths: ensemble/location size mismatch");
  }
  const int n = system.design().size();
  if (anchors.rows() != ensemble.paths() || anchors.cols() != n) {
    throw std::invalid_argument("condition_paths: anchor shape mismatch");
  }
  const std::vector<int> cols = locate_design_columns(system, locs);

  // Exact-geometry weights: the interpolation through the anchors uses the
  // noise-free system on the same design points.
  const KrigingSystem* exact = &system;
  std::optional<KrigingSystem> exact_storage;
  if (system.design().has_noise()) {
    Design d(system.design().points, system.design().values);
    exact_storage.emplace(std::move(d), system.spec(), system.trend());
    exact = &*exact_storage;
  }
  const Eigen::MatrixXd lambda = exact->weights_at(locs.points).lambda;  // N x n

  Eigen::MatrixXd z_s(ensemble.paths(), n);
  for (int j = 0; j < n; ++j) z_s.col(j) = ensemble.values.col(cols[j]);

  PathEnsemble out = ensemble;
  out.conditioned = true;
  out.values.noalias() += (anchors - z_s) * lambda.transpose();
  return out;
}

PathEnsemble condition_paths(const PathEnsemble& ensemble,
                             const KrigingSystem& system,
                             const LocationSet& locs) {
  const Eigen::MatrixXd anchors =
      system.design().values.transpose().replicate(ensemble.paths(), 1);
  return condition_paths_on_anchors(ensemble, system, locs, anchors);
}

PathEnsemble condition_paths_noisy(const PathEnsemble& ensemble,
                                   const KrigingSystem& system,
                                   const LocationSet& locs,
                                   std::uint64_t anchor_seed) {
  if (!system.design().has_noise()) {
    throw std::invalid_argument("condition_paths_noisy: system has no noise variances");
  }
  // Noisy designs may re-measure a point; F is sampled once per distinct
  // location, so anchors are drawn over the deduplicated design.
  const Eigen::MatrixXd& dp = system.design().points;
  std::map<std::vector<double>, int> seen;
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < dp.rows(); ++i) {
    std::vector<double> key(dp.row(i).begin(), dp.row(i).end());
    if (seen.emplace(std::move(key), static_cast<int>(i)).second) {
      keep.push_back(static_cast<int>(i));
    }
  }
  const int u = static_cast<int>(keep.size());
  Eigen::MatrixXd unique_pts(u, dp.cols());
  for (int i = 0; i < u; ++i) unique_pts.row(i) = dp.row(keep[i]);

  const Eigen::VectorXd post_mean = system.mean_at(unique_pts);
  const Eigen::MatrixXd post_cov = system.posterior_covariance(unique_pts);
  const SpdFactor factor = cholesky_with_escalation(
      post_cov, system.spec().sigma2, system.spec().jitter);

  Eigen::MatrixXd anchors(ensemble.paths(), u);
  Eigen::VectorXd g(u);
  for (int i = 0; i < ensemble.paths(); ++i) {
    RandomStream stream(anchor_seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < u; ++j) g[j] = stream.next_normal();
    anchors.row(i) =
        (post_mean + factor.lower.triangularView<Eigen::Lower>() * g)
            .transpose();
  }
  const KrigingSystem exact_geometry(Design(unique_pts, post_mean),
                                     system.spec(), system.trend());
  return condition_paths_on_anchors(ensemble, exact_geometry, locs, anchors);
}

Eigen::VectorXd MinimizerPmf::probabilities() const {
  Eigen::VectorXd p(support_size());
  for (int i = 0; i < support_size(); ++i) p[i] = prob(i);
  return p;
}

MinimizerPmf minimizer_distribution(const PathEnsemble& ensemble,
                                    std::uint64_t tie_seed) {
  if (!ensemble.conditioned) {
    throw std::invalid_argument("minimizer_distribution: ensemble must be conditioned");
  }
  const int ng = static_cast<int>(ensemble.grid_cols.size());
  if (ng == 0) throw std::invalid_argument("minimizer_distribution: ensemble has no grid columns");
  MinimizerPmf pmf;
  pmf.counts.assign(ng, 0);
  pmf.total = ensemble.paths();

  std::vector<int> ties;
  for (int p = 0; p < ensemble.paths(); ++p) {
    double best = ensemble.values(p, ensemble.grid_cols[0]);
    int best_idx = 0;
    int eq = 1;
    for (int j = 1; j < ng; ++j) {
      const double v = ensemble.values(p, ensemble.grid_cols[j]);
      if (v < best) {
        best = v;
        best_idx = j;
        eq = 1;
      } else if (v == best) {
        ++eq;
      }
    }
    if (eq > 1) {
      ties.clear();
      for (int j = 0; j < ng; ++j) {
        if (ensemble.values(p, ensemble.grid_cols[j]) == best) ties.push_back(j);
      }
      RandomStream stream(tie_seed, static_cast<std::uint64_t>(p));
      best_idx = ties[stream.next_below(ties.size())];
    }
    ++pmf.counts[best_idx];
  }
  return pmf;
}

}  // namespace iago
