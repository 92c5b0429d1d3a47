#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

namespace iago {

/// Axis-aligned box in factor space.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd edges() const { return upper - lower; }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clip(const Eigen::VectorXd& x) const;
};

/// Latin hypercube sample: n points, one per stratum per axis, uniform within
/// each stratum. Deterministic given the seed.
Eigen::MatrixXd latin_hypercube(const Box& box, int n, std::uint64_t seed);

struct SimplexResult {
  Eigen::VectorXd x;
  double value;
  int evaluations = 0;
};

/// Derivative-free Nelder-Mead descent, with every trial point clipped to the
/// box. Deterministic.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, const Box& box,
                          double initial_step_rel = 0.05,
                          int max_evaluations = 500, double tol = 1e-10);

}  // namespace iago
