#include "iago/robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iago/math.hpp"

namespace iago {

void FactorNoise::validate() const {
  if (std_devs.size() == 0) throw std::invalid_argument("FactorNoise: std_devs must be nonempty");
  for (int j = 0; j < std_devs.size(); ++j) {
    if (!(std_devs[j] >= 0.0)) throw std::invalid_argument("FactorNoise: std devs must be nonnegative");
  }
  if (mc_count < 1) throw std::invalid_argument("FactorNoise: mc_count must be >= 1");
}

void CostSpec::validate() const {
  if (kind == CostKind::quantile && !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("CostSpec: alpha must lie in (0,1)");
  }
}

Eigen::MatrixXd factor_noise_sample(const FactorNoise& noise, int dim) {
  noise.validate();
  if (noise.std_devs.size() != dim) {
    throw std::invalid_argument("factor_noise_sample: dimension mismatch");
  }
  Eigen::MatrixXd eps(noise.mc_count, dim);
  for (int i = 0; i < noise.mc_count; ++i) {
    RandomStream stream(noise.seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < dim; ++j) {
      eps(i, j) = noise.std_devs[j] * stream.next_normal();
    }
  }
  return eps;
}

double surrogate_cost(const KrigingSystem& system, const Eigen::VectorXd& x,
                      const FactorNoise& noise, const CostSpec& cost,
                      const Box& domain) {
  cost.validate();
  const int d = system.design().dim();
  if (x.size() != d) throw std::invalid_argument("surrogate_cost: dimension mismatch");
  const Eigen::MatrixXd eps = factor_noise_sample(noise, d);
  Eigen::MatrixXd pts(noise.mc_count, d);
  for (int i = 0; i < noise.mc_count; ++i) {
    pts.row(i) = domain.clip(x + eps.row(i).transpose()).transpose();
  }
  Eigen::VectorXd values = system.mean_at(pts);

  switch (cost.kind) {
    case CostKind::mean:
      return values.mean();
    case CostKind::stddev:
    case CostKind::mean_plus_k_std: {
      const double mean = values.mean();
      double var = 0.0;
      for (int i = 0; i < values.size(); ++i) {
        var += (values[i] - mean) * (values[i] - mean);
      }
      var /= std::max<int>(1, values.size() - 1);
      const double sd = std::sqrt(var);
      return cost.kind == CostKind::stddev ? sd : mean + cost.k * sd;
    }
    case CostKind::quantile: {
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      const int m = static_cast<int>(sorted.size());
      int rank = static_cast<int>(std::ceil(cost.alpha * m)) - 1;
      rank = std::clamp(rank, 0, m - 1);
      return sorted[rank];
    }
  }
  throw std::logic_error("surrogate_cost: unknown cost kind");
}

RobustHistory robust_run(const Evaluator& evaluate, const Design& initial,
                         const FactorNoise& noise, const CostSpec& cost,
                         const StoppingRule& rule, const RunConfig& config) {
  noise.validate();
  cost.validate();
  if (config.domain.dim() != initial.dim()) {
    throw std::invalid_argument("robust_run: domain/design dimension mismatch");
  }
  const TrendBasis trend = config.trend_degree >= 2
                               ? TrendBasis::quadratic(initial.dim())
                               : (config.trend_degree == 1
                                      ? TrendBasis::linear(initial.dim())
                                      : TrendBasis::constant(initial.dim()));

  auto fit_spec = [&](const Design& design, std::uint64_t tag) {
    ParamBounds bounds = config.bounds ? *config.bounds : default_bounds(design);
    FitOptions opts;
    opts.mode = config.fit_mode;
    opts.fit_nu = config.fit_nu;
    opts.nu_value = config.spec.nu;
    opts.starts = config.fit_starts;
    opts.seed = derived_seed(config.seed, lineage::kFit,
                             tag * 1000 + design.size());
    return fit_covariance(design, bounds, opts, trend);
  };

  Design f_design = initial;
  CovarianceSpec f_spec = config.fit ? fit_spec(f_design, 1) : config.spec;
  CovarianceSpec cost_spec = config.spec;

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

  RobustHistory history;
  history.cost_history.criterion = Criterion::entropy;
  history.cost_history.seed = config.seed;
  history.cost_history.grid = grid;

  auto pseudo_design = [&]() {
    KrigingSystem primary(f_design, f_spec, trend);
    Eigen::VectorXd pseudo(f_design.size());
    for (int i = 0; i < f_design.size(); ++i) {
      pseudo[i] = surrogate_cost(primary, f_design.points.row(i).transpose(),
                                 noise, cost, config.domain);
    }
    return Design(f_design.points, pseudo);
  };

  Design cost_design = pseudo_design();
  history.cost_history.initial_design = cost_design;
  if (config.fit) cost_spec = fit_spec(cost_design, 2);
  history.cost_history.initial_spec = cost_spec;

  int k = 0;
  for (;; ++k) {
    OptimizerState state(cost_design, cost_spec, trend, config.domain, grid,
                         candidates, config.paths, config.levels, config.seed,
                         k);
    RobustRecord rrec;
    rrec.f_spec = f_spec;
    rrec.f_design_size = f_design.size();
    rrec.pseudo_values = cost_design.values;
    IterationRecord record;
    record.index = k;
    record.spec = cost_spec;
    record.pmf_counts = state.pmf.counts;
    record.pmf_total = state.pmf.total;
    record.entropy = state.entropy;
    record.stop_prob = stopping_probability(state, rule.delta);

    bool stop = false;
    if (k >= rule.max_evaluations) {
      record.stop_reason = "max-evaluations";
      stop = true;
    } else if (rule.p_stop > 0.0 && record.stop_prob < rule.p_stop) {
      record.stop_reason = "p-stop";
      stop = true;
    }
    if (!stop) {
      const Suggestion suggestion = iago_suggest(state);
      record.suggestion = suggestion.x;
      record.scores = suggestion.scores;
      Observation obs;
      try {
        obs = evaluate(suggestion.x);
      } catch (const std::exception& e) {
        history.cost_history.abort_reason = e.what();
        stop = true;
      }
      if (!stop) {
        record.observed = obs;
        f_design.append(suggestion.x, obs.value,
                        obs.noise_var > 0.0
                            ? std::optional<double>(obs.noise_var)
                            : std::nullopt);
        if (config.fit && config.refit == RefitPolicy::every_iteration) {
          f_spec = fit_spec(f_design, 1);
        }
        cost_design = pseudo_design();
        if (config.fit && config.refit == RefitPolicy::every_iteration) {
          cost_spec = fit_spec(cost_design, 2);
        }
      }
    }
    rrec.cost = record;
    history.cost_history.records.push_back(record);
    history.records.push_back(std::move(rrec));
    if (stop || !history.cost_history.abort_reason.empty()) break;
  }

  history.cost_history.final_design = cost_design;
  history.cost_history.final_spec = cost_spec;
  history.cost_history.final_grid = grid;
  OptimizerState report_state(cost_design, cost_spec, trend, config.domain,
                              grid, candidates, config.report_paths,
                              config.levels,
                              derived_seed(config.seed, lineage::kReport), 0);
  history.cost_history.final_pmf_counts = report_state.pmf.counts;
  history.cost_history.final_pmf_total = report_state.pmf.total;
  history.f_design = f_design;
  history.f_spec = f_spec;
  return history;
}

}  // namespace iago
