#include "iago/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "iago/math.hpp"

namespace iago {

std::uint64_t derived_seed(std::uint64_t master, std::uint64_t tag,
                           std::uint64_t index) {
  return substream_key(substream_key(master, tag), index);
}

namespace {

std::vector<int> grid_shape(const Box& box, int count) {
  const int d = box.dim();
  std::vector<int> m(d, 1);
  if (d == 1) {
    m[0] = count;
    return m;
  }
  double log_prod = 0.0;
  for (int j = 0; j < d; ++j) {
    log_prod += std::log(std::max(box.upper[j] - box.lower[j], 1e-300));
  }
  const double s = std::exp((std::log(static_cast<double>(count)) - log_prod) / d);
  for (int j = 0; j < d; ++j) {
    const double edge = box.upper[j] - box.lower[j];
    m[j] = std::max(1, static_cast<int>(std::llround(edge * s)));
  }
  return m;
}

}  // namespace

Eigen::MatrixXd regular_grid(const Box& box, int count) {
  if (count < 1) throw std::invalid_argument("regular_grid: count must be >= 1");
  const int d = box.dim();
  const std::vector<int> shape = grid_shape(box, count);
  long long total = 1;
  for (int mj : shape) total *= mj;
  Eigen::MatrixXd pts(total, d);
  std::vector<int> idx(d, 0);
  for (long long row = 0; row < total; ++row) {
    for (int j = 0; j < d; ++j) {
      const double lo = box.lower[j], hi = box.upper[j];
      pts(row, j) = shape[j] == 1
                        ? 0.5 * (lo + hi)
                        : lo + (hi - lo) * idx[j] / (shape[j] - 1);
    }
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < shape[j]) break;
      idx[j] = 0;
    }
  }
  return pts;
}

LocationSet generate_candidates(const Box& box, CandidateStrategy strategy,
                                int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_candidates: count must be >= 1");
  if (strategy == CandidateStrategy::regular_grid) {
    return LocationSet::from_points(regular_grid(box, count));
  }
  return LocationSet::from_points(latin_hypercube(box, count, seed));
}

OptimizerState::OptimizerState(Design design_, CovarianceSpec spec_,
                               TrendBasis trend_, Box domain_,
                               Eigen::MatrixXd grid_,
                               Eigen::MatrixXd candidates_, int paths,
                               int levels_, std::uint64_t master_seed,
                               int iteration_)
    : design(std::move(design_)),
      spec(std::move(spec_)),
      trend(std::move(trend_)),
      domain(std::move(domain_)),
      grid(std::move(grid_)),
      candidates(std::move(candidates_)),
      iteration(iteration_),
      seed(master_seed),
      levels(levels_) {
  system.emplace(design, spec, trend);
  joint = build_joint(grid, candidates, design.points);
  const std::uint64_t sample_seed =
      derived_seed(master_seed, lineage::kSample, iteration);
  tie_seed = derived_seed(master_seed, lineage::kTie, iteration);
  unconditional = sample_unconditional(spec, joint.locs, paths, sample_seed);
  if (design.has_noise()) {
    conditioned = condition_paths_noisy(
        unconditional, *system, joint.locs,
        derived_seed(master_seed, lineage::kAnchor, iteration));
  } else {
    conditioned = condition_paths(unconditional, *system, joint.locs);
  }
  pmf = minimizer_distribution(conditioned, tie_seed);
  entropy = entropy_bits(pmf);
}

namespace {

struct TieKey {
  double score;
  bool zero_variance;
  double mean;
  int index;

  bool operator<(const TieKey& o) const {
    if (score != o.score) return score < o.score;
    if (zero_variance != o.zero_variance) return !zero_variance;
    if (mean != o.mean) return mean < o.mean;
    return index < o.index;
  }
};

}  // namespace

Suggestion iago_suggest(const OptimizerState& state) {
  const auto& cols = state.joint.candidate_cols;
  if (cols.empty()) throw std::invalid_argument("iago_suggest: no candidates");
  EntropyCriterion crit(*state.system, state.conditioned, state.joint.locs,
                        state.tie_seed, {state.levels, 1e-12});
  const double var_tol = 1e-12 * state.spec.sigma2;
  Eigen::VectorXd scores(cols.size());
  TieKey best{std::numeric_limits<double>::infinity(), true, 0.0, -1};
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    scores[i] = crit.score(cols[i]);
    TieKey key{scores[i], crit.predicted_variance(cols[i]) <= var_tol,
               crit.predicted_mean(cols[i]), i};
    if (best.index < 0 || key < best) best = key;
  }
  return {state.candidates.row(best.index).transpose(), best.index, scores};
}

Suggestion ego_suggest(const OptimizerState& state, bool refine) {
  const auto& cols = state.joint.candidate_cols;
  if (cols.empty()) throw std::invalid_argument("ego_suggest: no candidates");
  const KrigingSystem& system = *state.system;
  // f_min as the minimum Kriging mean at the design points; for exact
  // designs this equals min f_S.
  const double f_min = system.mean_at(state.design.points).minCoeff();

  Eigen::VectorXd mean, var;
  system.predict_at(state.candidates, mean, var);
  const double var_tol = 1e-12 * state.spec.sigma2;
  Eigen::VectorXd scores(cols.size());
  TieKey best{std::numeric_limits<double>::infinity(), true, 0.0, -1};
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    scores[i] = expected_improvement(mean[i], var[i], f_min);
    TieKey key{-scores[i], var[i] <= var_tol, mean[i], i};
    if (best.index < 0 || key < best) best = key;
  }

  Eigen::VectorXd x = state.candidates.row(best.index).transpose();
  if (refine) {
    const double best_ei = scores[best.index];
    auto neg_ei = [&](const Eigen::VectorXd& p) {
      const Prediction pr = system.predict(p);
      return -expected_improvement(pr.mean, pr.variance, f_min);
    };
    const SimplexResult res =
        nelder_mead(neg_ei, x, state.domain, 0.02, 200 * (state.domain.dim() + 1));
    if (-res.value > best_ei) x = state.domain.clip(res.x);
  }
  return {x, best.index, scores};
}

double stopping_probability(const OptimizerState& state, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("stopping_probability: delta must be nonnegative");
  if (std::isinf(delta)) return 1.0;
  const Eigen::VectorXd grid_mean = state.system->mean_at(state.grid);
  const double f_min_n = grid_mean.minCoeff();
  const auto& cols = state.conditioned.grid_cols;
  int count = 0;
  for (int p = 0; p < state.conditioned.paths(); ++p) {
    double m = std::numeric_limits<double>::infinity();
    for (int c : cols) m = std::min(m, state.conditioned.values(p, c));
    if (m < f_min_n + delta) ++count;
  }
  return static_cast<double>(count) / state.conditioned.paths();
}

Eigen::MatrixXd resample_grid(const MinimizerPmf& pmf,
                              const Eigen::MatrixXd& grid, const Box& domain,
                              int count, std::uint64_t seed, double explore) {
  if (pmf.support_size() != static_cast<int>(grid.rows())) {
    throw std::invalid_argument("resample_grid: pmf/grid size mismatch");
  }
  const int d = domain.dim();
  // Kernel bandwidth: nominal per-dimension spacing of a regular grid of the
  // requested size.
  const std::vector<int> shape = grid_shape(domain, count);
  Eigen::VectorXd bandwidth(d);
  for (int j = 0; j < d; ++j) {
    const double edge = domain.upper[j] - domain.lower[j];
    bandwidth[j] = shape[j] > 1 ? edge / (shape[j] - 1) : edge;
  }

  std::vector<long long> cumulative(pmf.counts.size());
  long long acc = 0;
  for (size_t i = 0; i < pmf.counts.size(); ++i) {
    acc += pmf.counts[i];
    cumulative[i] = acc;
  }

  Eigen::MatrixXd out(count, d);
  std::map<std::vector<double>, int> seen;
  for (int i = 0; i < count; ++i) {
    RandomStream stream(seed, static_cast<std::uint64_t>(i));
    for (;;) {
      Eigen::VectorXd x(d);
      if (stream.next_unit() < explore) {
        for (int j = 0; j < d; ++j) {
          x[j] = domain.lower[j] +
                 (domain.upper[j] - domain.lower[j]) * stream.next_unit();
        }
      } else {
        const long long pick =
            static_cast<long long>(stream.next_below(pmf.total)) + 1;
        const int atom = static_cast<int>(
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
            cumulative.begin());
        for (int j = 0; j < d; ++j) {
          x[j] = grid(atom, j) + bandwidth[j] * stream.next_normal();
        }
        x = domain.clip(x);
      }
      std::vector<double> key(x.begin(), x.end());
      if (seen.emplace(std::move(key), i).second) {
        out.row(i) = x.transpose();
        break;
      }
    }
  }
  return out;
}

namespace {

CovarianceSpec fit_for_run(const Design& design, const RunConfig& config,
                           const TrendBasis& trend) {
  ParamBounds bounds =
      config.bounds ? *config.bounds : default_bounds(design);
  FitOptions opts;
  opts.mode = config.fit_mode;
  opts.fit_nu = config.fit_nu;
  opts.nu_value = config.spec.nu;
  opts.starts = config.fit_starts;
  opts.seed = derived_seed(config.seed, lineage::kFit, design.size());
  return fit_covariance(design, bounds, opts, trend);
}

}  // namespace

History run(const Evaluator& evaluate, const Design& initial,
            const StoppingRule& rule, Criterion criterion,
            const RunConfig& config) {
  if (config.domain.dim() != initial.dim()) {
    throw std::invalid_argument("run: domain/design dimension mismatch");
  }
  History history;
  history.criterion = criterion;
  history.seed = config.seed;
  history.initial_design = initial;

  CovarianceSpec spec = config.spec;
  TrendBasis trend = config.trend_degree >= 2
                         ? TrendBasis::quadratic(initial.dim())
                         : (config.trend_degree == 1
                                ? TrendBasis::linear(initial.dim())
                                : TrendBasis::constant(initial.dim()));
  if (config.fit) spec = fit_for_run(initial, config, trend);
  history.initial_spec = spec;

  Eigen::MatrixXd grid =
      config.grid_strategy == CandidateStrategy::regular_grid
          ? regular_grid(config.domain, config.grid_count)
          : latin_hypercube(config.domain, config.grid_count,
                            derived_seed(config.seed, lineage::kGridGen));
  Eigen::MatrixXd candidates =
      generate_candidates(config.domain, config.candidate_strategy,
                          config.candidate_count,
                          derived_seed(config.seed, lineage::kCandGen))
          .points;
  history.grid = grid;

  Design design = initial;
  int k = 0;
  for (;; ++k) {
    OptimizerState state(design, spec, trend, config.domain, grid, candidates,
                         config.paths, config.levels, config.seed, k);
    IterationRecord record;
    record.index = k;
    record.spec = spec;
    record.pmf_counts = state.pmf.counts;
    record.pmf_total = state.pmf.total;
    record.entropy = state.entropy;
    record.stop_prob = stopping_probability(state, rule.delta);

    if (k >= rule.max_evaluations) {
      record.stop_reason = "max-evaluations";
      history.records.push_back(std::move(record));
      break;
    }
    if (rule.p_stop > 0.0 && record.stop_prob < rule.p_stop) {
      record.stop_reason = "p-stop";
      history.records.push_back(std::move(record));
      break;
    }

    const Suggestion suggestion = criterion == Criterion::entropy
                                      ? iago_suggest(state)
                                      : ego_suggest(state, config.ei_refine);
    record.suggestion = suggestion.x;
    record.scores = suggestion.scores;
    if (criterion == Criterion::ei &&
        suggestion.scores.maxCoeff() <
            config.ei_stop_rel * std::max(design.spread(), 1e-300)) {
      record.stop_reason = "ei-threshold";
      history.records.push_back(std::move(record));
      break;
    }

    Observation obs;
    try {
      obs = evaluate(suggestion.x);
    } catch (const std::exception& e) {
      history.abort_reason = e.what();
      history.records.push_back(std::move(record));
      break;
    }
    record.observed = obs;
    design.append(suggestion.x, obs.value,
                  obs.noise_var > 0.0 ? std::optional<double>(obs.noise_var)
                                      : std::nullopt);

    if (config.fit && config.refit == RefitPolicy::every_iteration) {
      spec = fit_for_run(design, config, trend);
    }
    if (config.grid_resample) {
      grid = resample_grid(state.pmf, grid, config.domain, config.grid_count,
                           derived_seed(config.seed, lineage::kResample, k),
                           config.explore);
      record.grid = grid;
    }
    history.records.push_back(std::move(record));
  }

  history.final_design = design;
  history.final_spec = spec;
  history.final_grid = grid;
  // Final pmf at reporting resolution.
  OptimizerState report_state(design, spec, trend, config.domain, grid,
                              candidates, config.report_paths, config.levels,
                              derived_seed(config.seed, lineage::kReport), 0);
  history.final_pmf_counts = report_state.pmf.counts;
  history.final_pmf_total = report_state.pmf.total;
  return history;
}

}  // namespace iago
