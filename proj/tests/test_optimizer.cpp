#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "iago/bench.hpp"
#include "iago/math.hpp"
#include "iago/optimizer.hpp"

using namespace iago;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(vals.size());
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Eigen::MatrixXd col(std::initializer_list<double> vals) {
  Eigen::MatrixXd m(vals.size(), 1);
  int i = 0;
  for (double x : vals) m(i++, 0) = x;
  return m;
}

Box unit_box(int d) {
  return Box{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

RunConfig small_1d_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.domain = Box{vec({0.0}), vec({6.0})};
  cfg.spec = CovarianceSpec(8.0, vec({0.8}), 2.5);
  cfg.grid_count = 60;
  cfg.candidate_count = 50;
  cfg.paths = 400;
  cfg.report_paths = 800;
  cfg.seed = seed;
  return cfg;
}

OptimizerState small_state(const Design& d, const CovarianceSpec& spec,
                           const Box& box, const Eigen::MatrixXd& grid,
                           const Eigen::MatrixXd& cands, std::uint64_t seed) {
  return OptimizerState(d, spec, TrendBasis::constant(d.dim()), box, grid,
                        cands, 500, 10, seed, 0);
}

}  // namespace

TEST_CASE("regular 1-D grid is endpoint inclusive") {
  const Eigen::MatrixXd g = regular_grid(unit_box(1), 5);
  REQUIRE(g.rows() == 5);
  for (int i = 0; i < 5; ++i) CHECK(g(i, 0) == doctest::Approx(0.25 * i));
}

TEST_CASE("regular 2-D grid counts follow edge proportions") {
  Box box{vec({-5.0, 0.0}), vec({10.0, 15.0})};
  const Eigen::MatrixXd g = regular_grid(box, 1000);
  CHECK(g.rows() == 1024);  // 32 x 32 for equal edges
  Box skewed{vec({0.0, 0.0}), vec({4.0, 1.0})};
  const Eigen::MatrixXd g2 = regular_grid(skewed, 100);
  CHECK(g2.rows() == 100);  // 20 x 5
  CHECK(g2.col(0).maxCoeff() == 4.0);
  CHECK(g2.col(1).maxCoeff() == 1.0);
}

TEST_CASE("latin hypercube has one point per stratum per axis") {
  const int n = 15;
  Box box{vec({0.0, -2.0}), vec({3.0, 2.0})};
  const LocationSet ls =
      generate_candidates(box, CandidateStrategy::latin_hypercube, n, 9);
  for (int j = 0; j < 2; ++j) {
    std::vector<int> hits(n, 0);
    for (int i = 0; i < n; ++i) {
      const double u = (ls.points(i, j) - box.lower[j]) /
                       (box.upper[j] - box.lower[j]);
      const int stratum = std::min(n - 1, static_cast<int>(u * n));
      ++hits[stratum];
    }
    for (int s = 0; s < n; ++s) CHECK(hits[s] == 1);
  }
  const LocationSet again =
      generate_candidates(box, CandidateStrategy::latin_hypercube, n, 9);
  CHECK(ls.points == again.points);
}

TEST_CASE("single candidate is returned as is") {
  Design d(col({0.2, 0.8}), vec({1.0, 0.5}));
  CovarianceSpec spec(1.0, vec({0.4}), 2.5);
  OptimizerState state = small_state(d, spec, unit_box(1),
                                     regular_grid(unit_box(1), 30),
                                     col({0.55}), 4);
  const Suggestion s = iago_suggest(state);
  CHECK(s.candidate_index == 0);
  CHECK(s.x[0] == 0.55);
  CHECK(s.scores.size() == 1);
}

TEST_CASE("all-design candidates fall back to the tie rule") {
  Design d(col({0.2, 0.8}), vec({1.0, 0.5}));
  CovarianceSpec spec(1.0, vec({0.4}), 2.5);
  OptimizerState state = small_state(d, spec, unit_box(1),
                                     regular_grid(unit_box(1), 30),
                                     col({0.2, 0.8}), 4);
  const Suggestion s = iago_suggest(state);
  // Both candidates score the current entropy; the tie rule picks the lower
  // Kriging mean, which is f(0.8) = 0.5.
  CHECK(s.scores[0] == s.scores[1]);
  CHECK(s.scores[0] == doctest::Approx(state.entropy));
  CHECK(s.candidate_index == 1);

  const Suggestion e = ego_suggest(state, false);
  CHECK(e.scores.maxCoeff() == 0.0);
  CHECK(e.candidate_index == 1);
}

TEST_CASE("iago avoids zero-variance duplicates when alternatives exist") {
  Design d(col({0.2, 0.8}), vec({1.0, 0.5}));
  CovarianceSpec spec(1.0, vec({0.4}), 2.5);
  OptimizerState state = small_state(d, spec, unit_box(1),
                                     regular_grid(unit_box(1), 30),
                                     col({0.2, 0.8, 0.5}), 4);
  const Suggestion s = iago_suggest(state);
  CHECK(s.x[0] == 0.5);
}

TEST_CASE("ego suggestion stays inside the box and away from the current best") {
  // A one-dimensional deceptive case: data suggest a basin near 0.9 but the
  // unexplored region keeps EI positive away from the best point.
  Design d(col({0.05, 0.4, 0.9}), vec({2.0, 1.5, 0.2}));
  CovarianceSpec spec(1.0, vec({0.25}), 2.5);
  OptimizerState state = small_state(d, spec, unit_box(1),
                                     regular_grid(unit_box(1), 40),
                                     regular_grid(unit_box(1), 25), 8);
  const Suggestion s = ego_suggest(state, true);
  CHECK(state.domain.contains(s.x));
  CHECK(std::abs(s.x[0] - 0.9) > 0.05);  // not stacked on the best point
  // Refinement only improves EI over the best grid candidate.
  const Prediction p = state.system->predict(s.x);
  const double f_min = state.system->mean_at(d.points).minCoeff();
  CHECK(expected_improvement(p.mean, p.variance, f_min) >=
        s.scores.maxCoeff() - 1e-12);
}

TEST_CASE("stopping probability is monotone in delta and one at infinity") {
  Design d(col({0.1, 0.5, 0.9}), vec({1.0, 0.3, 0.8}));
  CovarianceSpec spec(1.0, vec({0.3}), 2.5);
  OptimizerState state = small_state(d, spec, unit_box(1),
                                     regular_grid(unit_box(1), 50),
                                     col({0.25, 0.75}), 15);
  CHECK(stopping_probability(state, std::numeric_limits<double>::infinity()) == 1.0);
  double prev = 0.0;
  for (double delta : {0.0, 0.05, 0.1, 0.3, 1.0, 5.0}) {
    const double p = stopping_probability(state, delta);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK_THROWS(stopping_probability(state, -0.1));

  // Oracle: direct scan of the conditioned ensemble.
  const double f_min_n = state.system->mean_at(state.grid).minCoeff();
  int count = 0;
  for (int p = 0; p < state.conditioned.paths(); ++p) {
    double m = std::numeric_limits<double>::infinity();
    for (int c : state.conditioned.grid_cols) {
      m = std::min(m, state.conditioned.values(p, c));
    }
    if (m < f_min_n) ++count;
  }
  CHECK(stopping_probability(state, 0.0) ==
        doctest::Approx(double(count) / state.conditioned.paths()));
  // Interpolation pushes path minima below the mean minimum almost always.
  CHECK(stopping_probability(state, 0.0) > 0.9);
}

TEST_CASE("run with zero max evaluations returns the initial state only") {
  RunConfig cfg = small_1d_config(3);
  Evaluator f = [](const Eigen::VectorXd& x) {
    return Observation{sine_exp(x[0]), 0.0};
  };
  Design init(col({1.0, 3.0, 5.0}),
              vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
  StoppingRule rule;
  rule.max_evaluations = 0;
  const History h = run(f, init, rule, Criterion::entropy, cfg);
  CHECK(h.records.size() == 1);
  CHECK(!h.records[0].suggestion.has_value());
  CHECK(h.records[0].stop_reason == "max-evaluations");
  CHECK(h.final_design.size() == 3);
  CHECK(h.final_pmf_total == cfg.report_paths);
}

TEST_CASE("each iteration evaluates once and stays inside the domain") {
  RunConfig cfg = small_1d_config(11);
  int evals = 0;
  Evaluator f = [&](const Eigen::VectorXd& x) {
    ++evals;
    return Observation{sine_exp(x[0]), 0.0};
  };
  Design init(col({1.0, 3.0, 5.0}),
              vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
  StoppingRule rule;
  rule.max_evaluations = 4;
  const History h = run(f, init, rule, Criterion::entropy, cfg);
  CHECK(evals == 4);
  CHECK(h.final_design.size() == 3 + 4);
  CHECK(h.records.size() == 5);
  for (int k = 0; k < 4; ++k) {
    CHECK(h.records[k].suggestion.has_value());
    const Eigen::VectorXd& x = *h.records[k].suggestion;
    CHECK(cfg.domain.contains(x));
    // Never duplicates an exact design point.
    for (int i = 0; i < init.size() + k; ++i) {
      CHECK((h.final_design.points.row(i).transpose() - x).norm() > 0.0);
    }
  }
}

TEST_CASE("entropy criterion reduces entropy over seeded 1-D runs") {
  // Median entropy two iterations later must drop, for k <= 4.
  const int n_seeds = 10, iters = 6;
  std::vector<std::vector<double>> entropy(n_seeds);
  for (int s = 0; s < n_seeds; ++s) {
    RunConfig cfg = small_1d_config(100 + s);
    Evaluator f = [](const Eigen::VectorXd& x) {
      return Observation{sine_exp(x[0]), 0.0};
    };
    const Eigen::MatrixXd pts =
        latin_hypercube(cfg.domain, 3, derived_seed(cfg.seed, lineage::kInitDesign));
    Eigen::VectorXd vals(3);
    for (int i = 0; i < 3; ++i) vals[i] = sine_exp(pts(i, 0));
    StoppingRule rule;
    rule.max_evaluations = iters;
    const History h = run(f, Design(pts, vals), rule, Criterion::entropy, cfg);
    for (const IterationRecord& r : h.records) entropy[s].push_back(r.entropy);
  }
  auto median_at = [&](int k) {
    std::vector<double> v;
    for (int s = 0; s < n_seeds; ++s) v.push_back(entropy[s][k]);
    std::sort(v.begin(), v.end());
    return 0.5 * (v[n_seeds / 2 - 1] + v[n_seeds / 2]);
  };
  for (int k = 0; k + 2 <= iters && k <= 4; ++k) {
    CHECK(median_at(k + 2) < median_at(k));
  }
}

TEST_CASE("evaluator failure aborts with partial history") {
  RunConfig cfg = small_1d_config(5);
  int evals = 0;
  Evaluator f = [&](const Eigen::VectorXd& x) -> Observation {
    if (++evals >= 3) throw std::runtime_error("solver crashed");
    return Observation{sine_exp(x[0]), 0.0};
  };
  Design init(col({1.0, 3.0, 5.0}),
              vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
  StoppingRule rule;
  rule.max_evaluations = 10;
  const History h = run(f, init, rule, Criterion::entropy, cfg);
  CHECK(h.abort_reason == "solver crashed");
  CHECK(h.final_design.size() == 5);  // two successful evaluations
  CHECK(h.records.size() == 3);
}

TEST_CASE("p-stop rule can stop immediately") {
  RunConfig cfg = small_1d_config(6);
  Evaluator f = [](const Eigen::VectorXd& x) {
    return Observation{sine_exp(x[0]), 0.0};
  };
  Design init(col({1.0, 3.0, 5.0}),
              vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
  StoppingRule rule;
  rule.max_evaluations = 10;
  rule.delta = 1e9;  // every path minimum is below f_min + delta
  rule.p_stop = 1.5; // so the rule fires right away (prob 1.0 < 1.5)
  const History h = run(f, init, rule, Criterion::entropy, cfg);
  CHECK(h.records.size() == 1);
  CHECK(h.records[0].stop_reason == "p-stop");
}

TEST_CASE("ego stops when expected improvement collapses") {
  RunConfig cfg = small_1d_config(7);
  cfg.ei_stop_rel = 0.5;  // aggressive threshold to trigger quickly
  Evaluator f = [](const Eigen::VectorXd& x) {
    return Observation{sine_exp(x[0]), 0.0};
  };
  Design init(col({1.0, 3.0, 5.0}),
              vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
  StoppingRule rule;
  rule.max_evaluations = 20;
  const History h = run(f, init, rule, Criterion::ei, cfg);
  CHECK(h.records.back().stop_reason == "ei-threshold");
  CHECK(static_cast<int>(h.records.size()) < 21);
}

TEST_CASE("grid resampling clusters around a point mass") {
  MinimizerPmf pmf;
  pmf.counts = {0, 100, 0};
  pmf.total = 100;
  const Eigen::MatrixXd grid = col({0.1, 0.5, 0.9});
  Box box = unit_box(1);
  const Eigen::MatrixXd out = resample_grid(pmf, grid, box, 200, 21, 0.0);
  const double bw = 1.0 / (200 - 1);
  int within = 0;
  for (int i = 0; i < out.rows(); ++i) {
    CHECK(std::abs(out(i, 0) - 0.5) <= 5.0 * bw);
    if (std::abs(out(i, 0) - 0.5) <= 3.0 * bw) ++within;
  }
  CHECK(within >= 0.99 * out.rows());
  const Eigen::MatrixXd again = resample_grid(pmf, grid, box, 200, 21, 0.0);
  CHECK(out == again);
}

TEST_CASE("uniform pmf resamples close to uniform") {
  const int ng = 50;
  MinimizerPmf pmf;
  pmf.counts.assign(ng, 1);
  pmf.total = ng;
  Eigen::MatrixXd grid(ng, 1);
  for (int i = 0; i < ng; ++i) grid(i, 0) = (i + 0.5) / ng;
  Box box = unit_box(1);
  const int n = 1000;
  const Eigen::MatrixXd out = resample_grid(pmf, grid, box, n, 33, 0.2);
  std::vector<double> xs(out.col(0).begin(), out.col(0).end());
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    ks = std::max(ks, std::abs((i + 1.0) / n - xs[i]));
    ks = std::max(ks, std::abs(xs[i] - double(i) / n));
  }
  CHECK(ks < 0.1);
}

TEST_CASE("histories are reproducible for a fixed seed") {
  auto one = [](std::uint64_t seed) {
    RunConfig cfg = small_1d_config(seed);
    Evaluator f = [](const Eigen::VectorXd& x) {
      return Observation{sine_exp(x[0]), 0.0};
    };
    Design init(col({1.0, 3.0, 5.0}),
                vec({sine_exp(1.0), sine_exp(3.0), sine_exp(5.0)}));
    StoppingRule rule;
    rule.max_evaluations = 3;
    return run(f, init, rule, Criterion::entropy, cfg);
  };
  const History a = one(123), b = one(123), c = one(124);
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.final_design.points == b.final_design.points);
  CHECK(a.final_design.values == b.final_design.values);
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].entropy == b.records[i].entropy);
    CHECK(a.records[i].pmf_counts == b.records[i].pmf_counts);
  }
  CHECK(a.final_design.points != c.final_design.points);
}

TEST_CASE("iago evaluations leave a more peaked pmf than ei evaluations") {
  // Three-point design, smooth prior: evaluate the suggestion of each
  // criterion and compare the resulting minimizer entropies on shared seeds.
  int iago_wins = 0, differs = 0;
  const int n_seeds = 10;
  for (int s = 0; s < n_seeds; ++s) {
    RunConfig cfg = small_1d_config(500 + s);
    const Eigen::MatrixXd pts = latin_hypercube(
        cfg.domain, 3, derived_seed(cfg.seed, lineage::kInitDesign));
    Eigen::VectorXd vals(3);
    for (int i = 0; i < 3; ++i) vals[i] = sine_exp(pts(i, 0));
    const Design d(pts, vals);
    const Eigen::MatrixXd grid = regular_grid(cfg.domain, cfg.grid_count);
    const Eigen::MatrixXd cands = regular_grid(cfg.domain, cfg.candidate_count);

    OptimizerState state(d, cfg.spec, TrendBasis::constant(1), cfg.domain,
                         grid, cands, cfg.paths, 10, cfg.seed, 0);
    const Suggestion iago = iago_suggest(state);
    const Suggestion ego = ego_suggest(state, false);
    if ((iago.x - ego.x).norm() > 1e-12) ++differs;

    auto entropy_after = [&](const Eigen::VectorXd& x) {
      Design next = d;
      next.append(x, sine_exp(x[0]));
      OptimizerState st(next, cfg.spec, TrendBasis::constant(1), cfg.domain,
                        grid, cands, cfg.paths, 10, cfg.seed, 1);
      return st.entropy;
    };
    if (entropy_after(iago.x) < entropy_after(ego.x)) ++iago_wins;
  }
  CHECK(differs >= 7);
  CHECK(iago_wins >= 6);
}
