#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "iago/covariance.hpp"
#include "iago/kriging.hpp"

namespace iago {

/// Finite set of simulation locations; `grid_rows` marks the rows that form
/// the grid G over which minimizers are counted (the remaining rows are
/// candidate or design points carried along for conditioning).
struct LocationSet {
  Eigen::MatrixXd points;      // N x d
  std::vector<int> grid_rows;  // indices into `points`

  static LocationSet from_points(Eigen::MatrixXd pts);

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;  // pairwise distinct, nonempty
};

/// Union of grid, candidate, and design points with exact duplicates merged.
/// Row order: grid first, then new candidate rows, then new design rows.
struct JointLocations {
  LocationSet locs;
  std::vector<int> candidate_cols;  // per candidate row
  std::vector<int> design_cols;     // per design point
};
JointLocations build_joint(const Eigen::MatrixXd& grid,
                           const Eigen::MatrixXd& candidates,
                           const Eigen::MatrixXd& design_points);

/// r sample paths over a location set. `grid_cols` is copied from the
/// LocationSet so downstream consumers know which columns form G.
struct PathEnsemble {
  Eigen::MatrixXd values;  // r x N
  std::uint64_t seed = 0;
  bool conditioned = false;
  CovarianceSpec spec;
  std::vector<int> grid_cols;

  int paths() const { return static_cast<int>(values.rows()); }
  int locations() const { return static_cast<int>(values.cols()); }
};

/// r independent zero-mean joint-Gaussian draws with the spec's covariance
/// over the location set. Path i consumes the (seed, i) substream, so the
/// result is bit-identical no matter how paths are scheduled.
PathEnsemble sample_unconditional(const CovarianceSpec& spec,
                                  const LocationSet& locs, int r,
                                  std::uint64_t seed);

/// Conditioning by Kriging: t_i(x) = z_i(x) + lambda(x)'(f_S - z_i(S)).
/// Every design point of the system must be present in `locs`.
PathEnsemble condition_paths(const PathEnsemble& ensemble,
                             const KrigingSystem& system,
                             const LocationSet& locs);

/// Noisy variant: per path, sample F at the design points from its posterior
/// given the noisy observations, then condition on those anchors as if exact.
PathEnsemble condition_paths_noisy(const PathEnsemble& ensemble,
                                   const KrigingSystem& system,
                                   const LocationSet& locs,
                                   std::uint64_t anchor_seed);

/// Same as condition_paths but with explicit anchor values (r x n), one row
/// of F-values at the design points per path. Shared by both variants.
PathEnsemble condition_paths_on_anchors(const PathEnsemble& ensemble,
                                        const KrigingSystem& system,
                                        const LocationSet& locs,
                                        const Eigen::MatrixXd& anchors);

/// Empirical pmf of the grid argmin across paths. Counts are kept as exact
/// integers so probabilities sum to one by construction.
struct MinimizerPmf {
  std::vector<long long> counts;  // one per grid position
  long long total = 0;

  int support_size() const { return static_cast<int>(counts.size()); }
  double prob(int i) const {
    return static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  Eigen::VectorXd probabilities() const;
};

/// Exhaustive argmin scan over the grid columns of a conditioned ensemble;
/// ties are broken uniformly at random from a stream derived from
/// (tie_seed, path index), separate from the path-sampling stream.
MinimizerPmf minimizer_distribution(const PathEnsemble& ensemble,
                                    std::uint64_t tie_seed);

}  // namespace iago
