#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iago/bench.hpp"
#include "iago/config.hpp"
#include "iago/io.hpp"
#include "iago/math.hpp"
#include "iago/optimizer.hpp"
#include "iago/robust.hpp"

namespace {

using namespace iago;

Evaluator make_evaluator(const CliConfig& cfg) {
  if (cfg.function.empty()) {
    throw std::invalid_argument(
        "this command needs a built-in function; for external functions use "
        "`iago suggest` / `iago tell`");
  }
  const TestFunction fn = lookup_function(cfg.function);
  const double noise_std = cfg.eval_noise_std;
  const std::uint64_t noise_seed = derived_seed(cfg.run.seed, lineage::kNoise);
  auto counter = std::make_shared<int>(0);
  return [fn, noise_std, noise_seed, counter](const Eigen::VectorXd& x) {
    double v = fn.eval(x);
    double nv = 0.0;
    if (noise_std > 0.0) {
      RandomStream stream(noise_seed, static_cast<std::uint64_t>((*counter)++));
      v += noise_std * stream.next_normal();
      nv = noise_std * noise_std;
    }
    return Observation{v, nv};
  };
}

Design initial_design(const CliConfig& cfg, const std::string& design_path,
                      const Evaluator* evaluate) {
  if (!design_path.empty()) return read_design_csv(design_path);
  if (!evaluate) {
    throw std::invalid_argument("either --design or a [function] block is required");
  }
  const Eigen::MatrixXd pts =
      cfg.init_strategy == CandidateStrategy::latin_hypercube
          ? latin_hypercube(cfg.domain, cfg.init_count,
                            derived_seed(cfg.run.seed, lineage::kInitDesign))
          : regular_grid(cfg.domain, cfg.init_count);
  Eigen::VectorXd vals(pts.rows());
  Eigen::VectorXd noise(pts.rows());
  bool noisy = false;
  for (int i = 0; i < pts.rows(); ++i) {
    const Observation obs = (*evaluate)(pts.row(i).transpose());
    vals[i] = obs.value;
    noise[i] = obs.noise_var;
    noisy = noisy || obs.noise_var > 0.0;
  }
  return noisy ? Design(pts, vals, noise) : Design(pts, vals);
}

OptimizerState state_from(const CliConfig& cfg, const Design& design) {
  CovarianceSpec spec = cfg.run.spec;
  const TrendBasis trend = TrendBasis::constant(design.dim());
  if (cfg.run.fit) {
    ParamBounds bounds =
        cfg.run.bounds ? *cfg.run.bounds : default_bounds(design);
    FitOptions opts;
    opts.mode = cfg.run.fit_mode;
    opts.fit_nu = cfg.run.fit_nu;
    opts.nu_value = spec.nu;
    opts.starts = cfg.run.fit_starts;
    opts.seed = derived_seed(cfg.run.seed, lineage::kFit, design.size());
    spec = fit_covariance(design, bounds, opts, trend);
  }
  Eigen::MatrixXd grid =
      cfg.run.grid_strategy == CandidateStrategy::regular_grid
          ? regular_grid(cfg.domain, cfg.run.grid_count)
          : latin_hypercube(cfg.domain, cfg.run.grid_count,
                            derived_seed(cfg.run.seed, lineage::kGridGen));
  Eigen::MatrixXd candidates =
      generate_candidates(cfg.domain, cfg.run.candidate_strategy,
                          cfg.run.candidate_count,
                          derived_seed(cfg.run.seed, lineage::kCandGen))
          .points;
  return OptimizerState(design, spec, trend, cfg.domain, std::move(grid),
                        std::move(candidates), cfg.run.paths, cfg.run.levels,
                        cfg.run.seed, 0);
}

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  Eigen::VectorXd x(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) x[i] = vals[i];
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IAGO: informational global optimization on a Kriging model"};
  app.require_subcommand(1);

  std::string config_path, design_path, out_path, candidates_path;
  std::string x_text, emit_spec_path;
  double y_value = 0.0, noise_var = 0.0;
  int paths_override = -1;
  bool unconditional = false, emit_curves = false;

  auto* cmd_run = app.add_subcommand("run", "run the optimization loop");
  cmd_run->add_option("--config", config_path)->required();
  cmd_run->add_option("--design", design_path);
  cmd_run->add_option("--out", out_path);
  cmd_run->add_option("--emit-spec", emit_spec_path);

  auto* cmd_suggest =
      app.add_subcommand("suggest", "print the next evaluation point");
  cmd_suggest->add_option("--config", config_path)->required();
  cmd_suggest->add_option("--design", design_path)->required();
  cmd_suggest->add_option("--emit-spec", emit_spec_path);

  auto* cmd_tell = app.add_subcommand("tell", "append an evaluation to a design");
  cmd_tell->add_option("--design", design_path)->required();
  cmd_tell->add_option("--x", x_text)->required();
  cmd_tell->add_option("--y", y_value)->required();
  cmd_tell->add_option("--noise-var", noise_var);

  auto* cmd_sim = app.add_subcommand("simulate", "emit sample paths as CSV");
  cmd_sim->add_option("--config", config_path)->required();
  cmd_sim->add_option("--design", design_path)->required();
  cmd_sim->add_option("--out", out_path);
  cmd_sim->add_option("--paths", paths_override);
  cmd_sim->add_flag("--unconditional", unconditional);

  auto* cmd_crit =
      app.add_subcommand("criterion", "score candidates with entropy or EI");
  cmd_crit->add_option("--config", config_path)->required();
  cmd_crit->add_option("--design", design_path)->required();
  cmd_crit->add_option("--candidates", candidates_path);
  cmd_crit->add_option("--out", out_path);

  auto* cmd_bench = app.add_subcommand("benchmark", "IAGO vs EGO sweep");
  cmd_bench->add_option("--config", config_path)->required();
  cmd_bench->add_option("--out", out_path);
  cmd_bench->add_flag("--emit-curves", emit_curves);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      const CliConfig cfg = load_cli_config(ConfigMap::parse_file(config_path));
      const Evaluator evaluate = make_evaluator(cfg);
      const Design initial = initial_design(cfg, design_path, &evaluate);
      std::string history_text;
      if (cfg.robust) {
        const RobustHistory rh = robust_run(evaluate, initial, cfg.factor_noise,
                                            cfg.cost, cfg.stop, cfg.run);
        history_text = history_to_jsonl(rh.cost_history);
        if (!emit_spec_path.empty()) write_text(emit_spec_path, spec_to_config(rh.f_spec));
      } else {
        const History h = run(evaluate, initial, cfg.stop, cfg.criterion, cfg.run);
        history_text = history_to_jsonl(h);
        if (!emit_spec_path.empty()) write_text(emit_spec_path, spec_to_config(h.final_spec));
        if (!h.abort_reason.empty()) {
          std::cerr << "aborted: " << h.abort_reason << "\n";
        }
      }
      if (out_path.empty()) out_path = "history.jsonl";
      write_text(out_path, history_text);
      std::cout << "wrote " << out_path << "\n";
    } else if (*cmd_suggest) {
      const CliConfig cfg = load_cli_config(ConfigMap::parse_file(config_path));
      const Design design = read_design_csv(design_path);
      OptimizerState state = state_from(cfg, design);
      const Suggestion s = cfg.criterion == Criterion::ei
                               ? ego_suggest(state, cfg.run.ei_refine)
                               : iago_suggest(state);
      for (int j = 0; j < s.x.size(); ++j) {
        if (j) std::cout << ",";
        std::printf("%.17g", s.x[j]);
      }
      std::cout << "\n";
      if (!emit_spec_path.empty()) write_text(emit_spec_path, spec_to_config(state.spec));
    } else if (*cmd_tell) {
      Design design = read_design_csv(design_path);
      design.append(parse_point(x_text), y_value,
                    noise_var > 0.0 ? std::optional<double>(noise_var)
                                    : std::nullopt);
      write_text(design_path, design_to_csv(design));
      std::cout << "design now has " << design.size() << " evaluations\n";
    } else if (*cmd_sim) {
      const CliConfig cfg = load_cli_config(ConfigMap::parse_file(config_path));
      const Design design = read_design_csv(design_path);
      const int r = paths_override > 0 ? paths_override : cfg.run.paths;
      const TrendBasis trend = TrendBasis::constant(design.dim());
      CovarianceSpec spec = cfg.run.spec;
      if (cfg.run.fit) {
        ParamBounds bounds =
            cfg.run.bounds ? *cfg.run.bounds : default_bounds(design);
        FitOptions opts;
        opts.mode = cfg.run.fit_mode;
        opts.fit_nu = cfg.run.fit_nu;
        opts.nu_value = spec.nu;
        opts.starts = cfg.run.fit_starts;
        opts.seed = derived_seed(cfg.run.seed, lineage::kFit, design.size());
        spec = fit_covariance(design, bounds, opts, trend);
      }
      const KrigingSystem system(design, spec, trend);
      const JointLocations joint =
          build_joint(regular_grid(cfg.domain, cfg.run.grid_count),
                      Eigen::MatrixXd(0, design.dim()), design.points);
      const PathEnsemble base = sample_unconditional(
          spec, joint.locs, r, derived_seed(cfg.run.seed, lineage::kSample));
      PathEnsemble out = base;
      if (!unconditional) {
        out = design.has_noise()
                  ? condition_paths_noisy(
                        base, system, joint.locs,
                        derived_seed(cfg.run.seed, lineage::kAnchor))
                  : condition_paths(base, system, joint.locs);
      }
      const std::string csv = paths_to_csv(out);
      if (out_path.empty()) out_path = "paths.csv";
      write_text(out_path, csv);
      std::cout << "wrote " << out_path << "\n";
    } else if (*cmd_crit) {
      const CliConfig cfg = load_cli_config(ConfigMap::parse_file(config_path));
      const Design design = read_design_csv(design_path);
      OptimizerState state = state_from(cfg, design);
      if (!candidates_path.empty()) {
        const Eigen::MatrixXd cand = read_points_csv(candidates_path);
        state = OptimizerState(design, state.spec,
                               TrendBasis::constant(design.dim()), cfg.domain,
                               state.grid, cand, cfg.run.paths, cfg.run.levels,
                               cfg.run.seed, 0);
      }
      const Suggestion s = cfg.criterion == Criterion::ei
                               ? ego_suggest(state, false)
                               : iago_suggest(state);
      const std::string csv = scores_to_csv(
          state.candidates, s.scores,
          cfg.criterion == Criterion::ei ? "ei" : "entropy_bits");
      if (out_path.empty()) out_path = "scores.csv";
      write_text(out_path, csv);
      std::cout << "wrote " << out_path << "\n";
    } else if (*cmd_bench) {
      const BenchConfig cfg = load_bench_config(ConfigMap::parse_file(config_path));
      const BenchResult result = benchmark(cfg);
      if (out_path.empty()) out_path = "report.csv";
      write_text(out_path, bench_reports_csv(result.reports));
      double wall = 0.0;
      for (const BenchReport& r : result.reports) wall = std::max(wall, r.wall_seconds);
      std::cout << "wrote " << out_path << " (slowest cell " << wall << "s)\n";
      if (emit_curves) {
        for (const History& h : result.histories) {
          const std::string tag =
              (h.criterion == Criterion::ei ? "ei" : "entropy") + std::string("_") +
              std::to_string(h.seed);
          write_text(out_path + "." + tag + ".curves.csv", history_curves_csv(h));
          write_text(out_path + "." + tag + ".pmf.csv", final_pmf_csv(h));
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
