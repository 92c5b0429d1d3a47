#include "iago/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace iago {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << content;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const size_t rows = j.size();
  const size_t cols = rows ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json design_to_json(const Design& d) {
  json out;
  out["points"] = matrix_to_json(d.points);
  out["values"] = vector_to_json(d.values);
  if (d.has_noise()) out["noise_vars"] = vector_to_json(d.noise_vars);
  return out;
}

Design design_from_json(const json& j) {
  Eigen::MatrixXd pts = matrix_from_json(j.at("points"));
  Eigen::VectorXd vals = vector_from_json(j.at("values"));
  if (j.contains("noise_vars")) {
    return Design(std::move(pts), std::move(vals),
                  vector_from_json(j.at("noise_vars")));
  }
  return Design(std::move(pts), std::move(vals));
}

json spec_to_json(const CovarianceSpec& s) {
  json out;
  out["sigma2"] = s.sigma2;
  out["rho"] = vector_to_json(s.ranges);
  out["nu"] = s.nu;
  out["jitter"] = s.jitter;
  return out;
}

CovarianceSpec spec_from_json(const json& j) {
  return CovarianceSpec(j.at("sigma2").get<double>(),
                        vector_from_json(j.at("rho")), j.at("nu").get<double>(),
                        j.at("jitter").get<double>());
}

}  // namespace

Design read_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty design file " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int d = 0;
  while (d < static_cast<int>(header.size()) &&
         header[d] == "x" + std::to_string(d + 1)) {
    ++d;
  }
  if (d == 0 || d >= static_cast<int>(header.size()) || header[d] != "y") {
    throw std::invalid_argument("design CSV must have header x1,...,xd,y[,noise_var]");
  }
  const bool noisy = static_cast<int>(header.size()) > d + 1 &&
                     header[d + 1] == "noise_var";

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != d + 1 + (noisy ? 1 : 0)) {
      throw std::invalid_argument("design CSV row has wrong arity: " + line);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd pts(n, d);
  Eigen::VectorXd vals(n), noise(noisy ? n : 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) pts(i, j) = rows[i][j];
    vals[i] = rows[i][d];
    if (noisy) noise[i] = rows[i][d + 1];
  }
  return noisy ? Design(pts, vals, noise) : Design(pts, vals);
}

Eigen::MatrixXd read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty points file " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  int d = 0;
  while (d < static_cast<int>(header.size()) &&
         header[d] == "x" + std::to_string(d + 1)) {
    ++d;
  }
  if (d == 0) throw std::invalid_argument("points CSV must have header x1,...,xd");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',') && static_cast<int>(row.size()) < d) {
      row.push_back(std::stod(cell));
    }
    if (static_cast<int>(row.size()) != d) {
      throw std::invalid_argument("points CSV row has wrong arity: " + line);
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd pts(rows.size(), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) pts(i, j) = rows[i][j];
  }
  return pts;
}

std::string design_to_csv(const Design& design) {
  std::string out;
  for (int j = 0; j < design.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y";
  if (design.has_noise()) out += ",noise_var";
  out += "\n";
  for (int i = 0; i < design.size(); ++i) {
    for (int j = 0; j < design.dim(); ++j) out += fmt(design.points(i, j)) + ",";
    out += fmt(design.values[i]);
    if (design.has_noise()) out += "," + fmt(design.noise_vars[i]);
    out += "\n";
  }
  return out;
}

std::string paths_to_csv(const PathEnsemble& ensemble) {
  std::string out;
  for (int p = 0; p < ensemble.paths(); ++p) {
    for (int j = 0; j < ensemble.locations(); ++j) {
      if (j) out += ",";
      out += fmt(ensemble.values(p, j));
    }
    out += "\n";
  }
  return out;
}

std::string scores_to_csv(const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& scores,
                          const std::string& score_name) {
  std::string out;
  for (int j = 0; j < points.cols(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += score_name + "\n";
  for (int i = 0; i < points.rows(); ++i) {
    for (int j = 0; j < points.cols(); ++j) out += fmt(points(i, j)) + ",";
    out += fmt(scores[i]) + "\n";
  }
  return out;
}

std::string history_to_jsonl(const History& h) {
  std::string out;
  json header;
  header["type"] = "header";
  header["criterion"] = h.criterion == Criterion::ei ? "ei" : "entropy";
  header["seed"] = h.seed;
  header["initial_design"] = design_to_json(h.initial_design);
  header["initial_spec"] = spec_to_json(h.initial_spec);
  header["grid"] = matrix_to_json(h.grid);
  out += header.dump() + "\n";

  for (const IterationRecord& r : h.records) {
    json j;
    j["type"] = "iteration";
    j["index"] = r.index;
    j["spec"] = spec_to_json(r.spec);
    j["pmf_counts"] = r.pmf_counts;
    j["pmf_total"] = r.pmf_total;
    j["entropy"] = r.entropy;
    j["stop_prob"] = r.stop_prob;
    if (r.suggestion) j["suggestion"] = vector_to_json(*r.suggestion);
    if (r.scores.size() > 0) j["scores"] = vector_to_json(r.scores);
    if (r.observed) {
      j["observed"] = {{"value", r.observed->value},
                       {"noise_var", r.observed->noise_var}};
    }
    if (r.grid) j["grid"] = matrix_to_json(*r.grid);
    if (!r.stop_reason.empty()) j["stop_reason"] = r.stop_reason;
    out += j.dump() + "\n";
  }

  json footer;
  footer["type"] = "final";
  footer["design"] = design_to_json(h.final_design);
  footer["spec"] = spec_to_json(h.final_spec);
  footer["final_pmf_counts"] = h.final_pmf_counts;
  footer["final_pmf_total"] = h.final_pmf_total;
  footer["final_grid"] = matrix_to_json(h.final_grid);
  if (!h.abort_reason.empty()) footer["abort_reason"] = h.abort_reason;
  out += footer.dump() + "\n";
  return out;
}

History history_from_jsonl(const std::string& text) {
  History h;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      h.criterion = j.at("criterion").get<std::string>() == "ei"
                        ? Criterion::ei
                        : Criterion::entropy;
      h.seed = j.at("seed").get<std::uint64_t>();
      h.initial_design = design_from_json(j.at("initial_design"));
      h.initial_spec = spec_from_json(j.at("initial_spec"));
      h.grid = matrix_from_json(j.at("grid"));
    } else if (type == "iteration") {
      IterationRecord r;
      r.index = j.at("index").get<int>();
      r.spec = spec_from_json(j.at("spec"));
      r.pmf_counts = j.at("pmf_counts").get<std::vector<long long>>();
      r.pmf_total = j.at("pmf_total").get<long long>();
      r.entropy = j.at("entropy").get<double>();
      r.stop_prob = j.at("stop_prob").get<double>();
      if (j.contains("suggestion")) r.suggestion = vector_from_json(j.at("suggestion"));
      if (j.contains("scores")) r.scores = vector_from_json(j.at("scores"));
      if (j.contains("observed")) {
        r.observed = Observation{j["observed"].at("value").get<double>(),
                                 j["observed"].at("noise_var").get<double>()};
      }
      if (j.contains("grid")) r.grid = matrix_from_json(j.at("grid"));
      if (j.contains("stop_reason")) r.stop_reason = j.at("stop_reason").get<std::string>();
      h.records.push_back(std::move(r));
    } else if (type == "final") {
      h.final_design = design_from_json(j.at("design"));
      h.final_spec = spec_from_json(j.at("spec"));
      h.final_pmf_counts = j.at("final_pmf_counts").get<std::vector<long long>>();
      h.final_pmf_total = j.at("final_pmf_total").get<long long>();
      h.final_grid = matrix_from_json(j.at("final_grid"));
      if (j.contains("abort_reason")) h.abort_reason = j.at("abort_reason").get<std::string>();
    } else {
      throw std::invalid_argument("history: unknown record type " + type);
    }
  }
  return h;
}

std::string bench_reports_csv(const std::vector<BenchReport>& reports) {
  std::string out =
      "function,criterion,seed,checkpoint,minimizer,distance,value_at_estimate\n";
  for (const BenchReport& r : reports) {
    for (int i = 0; i < r.distances.size(); ++i) {
      out += r.function + "," + r.criterion + "," + std::to_string(r.seed) +
             "," + std::to_string(r.checkpoint) + "," + std::to_string(i + 1) +
             "," + fmt(r.distances[i]) + "," + fmt(r.values_at_estimates[i]) +
             "\n";
    }
  }
  return out;
}

std::string history_curves_csv(const History& h) {
  std::string out = "iteration,design_size,entropy,stop_prob\n";
  const int n0 = h.initial_design.size();
  for (const IterationRecord& r : h.records) {
    out += std::to_string(r.index) + "," + std::to_string(n0 + r.index) + "," +
           fmt(r.entropy) + "," + fmt(r.stop_prob) + "\n";
  }
  return out;
}

std::string final_pmf_csv(const History& h) {
  std::string out;
  for (int j = 0; j < h.final_grid.cols(); ++j) {
    out += "x" + std::to_string(j + 1) + ",";
  }
  out += "probability\n";
  for (int i = 0; i < h.final_grid.rows(); ++i) {
    for (int j = 0; j < h.final_grid.cols(); ++j) {
      out += fmt(h.final_grid(i, j)) + ",";
    }
    const double p = static_cast<double>(h.final_pmf_counts[i]) /
                     static_cast<double>(h.final_pmf_total);
    out += fmt(p) + "\n";
  }
  return out;
}

}  // namespace iago
