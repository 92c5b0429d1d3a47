#pragma once

#include <string>
#include <vector>

#include "iago/bench.hpp"
#include "iago/kriging.hpp"
#include "iago/optimizer.hpp"
#include "iago/simulation.hpp"

namespace iago {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

/// Design CSV: header `x1,...,xd,y[,noise_var]`; a missing noise_var column
/// means exact evaluations.
Design read_design_csv(const std::string& path);
std::string design_to_csv(const Design& design);

/// Points CSV: header `x1,...,xd`, trailing columns ignored.
Eigen::MatrixXd read_points_csv(const std::string& path);

/// One row per path, one column per location.
std::string paths_to_csv(const PathEnsemble& ensemble);

/// Per-candidate criterion scores: x1..xd,score.
std::string scores_to_csv(const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& scores,
                          const std::string& score_name);

/// History as JSON lines: a header object, one object per iteration record,
/// and a final object. Parsing the result and re-serializing it reproduces
/// the bytes exactly.
std::string history_to_jsonl(const History& history);
History history_from_jsonl(const std::string& text);

std::string bench_reports_csv(const std::vector<BenchReport>& reports);

/// Per-iteration entropy/stopping curve for plot reproduction.
std::string history_curves_csv(const History& history);

/// Final pmf over the grid: x1..xd,probability.
std::string final_pmf_csv(const History& history);

}  // namespace iago
