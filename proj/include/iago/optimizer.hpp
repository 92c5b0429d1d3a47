#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iago/criteria.hpp"
#include "iago/kriging.hpp"
#include "iago/optim.hpp"
#include "iago/simulation.hpp"

namespace iago {

enum class Criterion { entropy, ei };
enum class CandidateStrategy { regular_grid, latin_hypercube };
enum class RefitPolicy { never_after_init, every_iteration };

/// Endpoint-inclusive grid whose per-dimension counts factor `count` in
/// proportion to the box edge lengths.
Eigen::MatrixXd regular_grid(const Box& box, int count);

LocationSet generate_candidates(const Box& box, CandidateStrategy strategy,
                                int count, std::uint64_t seed);

/// Schonlau-style stopping rule: stop once
/// P(F* < f_min^n + delta | data) < p_stop, or after max_evaluations.
struct StoppingRule {
  double delta = 0.0;
  double p_stop = 0.0;  // zero disables the probabilistic rule
  int max_evaluations = 0;
};

struct Observation {
  double value = 0.0;
  double noise_var = 0.0;
};
using Evaluator = std::function<Observation(const Eigen::VectorXd&)>;

struct RunConfig {
  Box domain;
  CovarianceSpec spec;  // initial or a-priori covariance
  bool fit = false;
  FitMode fit_mode = FitMode::reml;
  bool fit_nu = false;
  std::optional<ParamBounds> bounds;  // default_bounds(design) when absent
  int fit_starts = 8;
  RefitPolicy refit = RefitPolicy::never_after_init;
  int trend_degree = 0;

  int grid_count = 400;
  CandidateStrategy grid_strategy = CandidateStrategy::regular_grid;
  bool grid_resample = false;
  double explore = 0.2;
  int candidate_count = 1000;
  CandidateStrategy candidate_strategy = CandidateStrategy::regular_grid;

  int paths = 1000;
  int report_paths = 10000;
  int levels = 10;

  bool ei_refine = true;
  double ei_stop_rel = 1e-3;

  std::uint64_t seed = 0;
};

/// One outer-loop iteration's shared state: the current model, the jointly
/// sampled locations (grid, candidates, and design points), and the
/// conditioned ensemble everything downstream reads from.
class OptimizerState {
 public:
  OptimizerState(Design design, CovarianceSpec spec, TrendBasis trend,
                 Box domain, Eigen::MatrixXd grid, Eigen::MatrixXd candidates,
                 int paths, int levels, std::uint64_t master_seed,
                 int iteration);

  Design design;
  CovarianceSpec spec;
  TrendBasis trend;
  Box domain;
  Eigen::MatrixXd grid;
  Eigen::MatrixXd candidates;
  JointLocations joint;
  std::optional<KrigingSystem> system;
  PathEnsemble unconditional;
  PathEnsemble conditioned;
  MinimizerPmf pmf;
  double entropy = 0.0;
  int iteration = 0;
  std::uint64_t seed = 0;      // master seed
  std::uint64_t tie_seed = 0;  // derived, separate from sampling
  int levels = 10;
};

struct Suggestion {
  Eigen::VectorXd x;
  int candidate_index = -1;
  Eigen::VectorXd scores;  // per candidate: entropy (bits) or EI
};

/// Candidate minimizing the conditional minimizer entropy; ties broken by
/// lowest Kriging mean, then lowest index, with zero-variance candidates
/// deprioritized.
Suggestion iago_suggest(const OptimizerState& state);

/// Candidate maximizing expected improvement, optionally followed by a local
/// simplex refinement inside the domain box.
Suggestion ego_suggest(const OptimizerState& state, bool refine = true);

/// Fraction of conditioned paths whose grid minimum is below
/// f_min^n + delta, where f_min^n is the minimum Kriging mean over the grid.
/// Reads only the existing conditioned ensemble.
double stopping_probability(const OptimizerState& state, double delta);

/// Kernel-perturbed resampling of grid locations from the minimizer pmf,
/// mixed with uniform exploration.
Eigen::MatrixXd resample_grid(const MinimizerPmf& pmf,
                              const Eigen::MatrixXd& grid, const Box& domain,
                              int count, std::uint64_t seed,
                              double explore = 0.2);

struct IterationRecord {
  int index = 0;  // design size is n0 + index when this record was taken
  CovarianceSpec spec;
  std::vector<long long> pmf_counts;
  long long pmf_total = 0;
  double entropy = 0.0;
  double stop_prob = 0.0;
  std::optional<Eigen::VectorXd> suggestion;
  Eigen::VectorXd scores;
  std::optional<Observation> observed;
  std::optional<Eigen::MatrixXd> grid;  // present when resampling is on
  std::string stop_reason;              // set on the terminal record
};

struct History {
  Criterion criterion = Criterion::entropy;
  std::uint64_t seed = 0;
  Design initial_design;
  Design final_design;
  CovarianceSpec initial_spec;
  CovarianceSpec final_spec;
  Eigen::MatrixXd grid;
  std::vector<IterationRecord> records;
  std::vector<long long> final_pmf_counts;  // recomputed with report_paths
  long long final_pmf_total = 0;
  Eigen::MatrixXd final_grid;
  std::string abort_reason;  // nonempty when the evaluator failed
};

/// The IAGO/EGO outer loop: suggest, evaluate, append, optionally refit and
/// resample, until the stopping rule fires.
History run(const Evaluator& evaluate, const Design& initial,
            const StoppingRule& rule, Criterion criterion,
            const RunConfig& config);

namespace lineage {
// Tags for deriving independent random streams from the master seed.
inline constexpr std::uint64_t kSample = 1, kAnchor = 2, kTie = 3,
                               kGridGen = 4, kCandGen = 5, kInitDesign = 6,
                               kResample = 7, kReport = 8, kFit = 9,
                               kNoise = 10;
}  // namespace lineage

/// substream_key(substream_key(master, tag), index)
std::uint64_t derived_seed(std::uint64_t master, std::uint64_t tag,
                           std::uint64_t index = 0);

}  // namespace iago
