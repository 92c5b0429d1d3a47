#include "iago/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "iago/math.hpp"

namespace iago {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("Box: bound dimension mismatch");
  }
  for (int d = 0; d < dim(); ++d) {
    if (!(lower[d] <= upper[d])) {
      throw std::invalid_argument("Box: lower bound exceeds upper bound");
    }
  }
}

bool Box::contains(const Eigen::VectorXd& x) const {
  for (int d = 0; d < dim(); ++d) {
    if (x[d] < lower[d] || x[d] > upper[d]) return false;
  }
  return true;
}

Eigen::VectorXd Box::clip(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::MatrixXd latin_hypercube(const Box& box, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube: n must be >= 1");
  const int d = box.dim();
  Eigen::MatrixXd pts(n, d);
  for (int j = 0; j < d; ++j) {
    RandomStream perm_stream(seed, 2 * static_cast<std::uint64_t>(j));
    RandomStream unit_stream(seed, 2 * static_cast<std::uint64_t>(j) + 1);
    std::vector<int> strata(n);
    std::iota(strata.begin(), strata.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int k = static_cast<int>(perm_stream.next_below(i + 1));
      std::swap(strata[i], strata[k]);
    }
    const double width = (box.upper[j] - box.lower[j]) / n;
    for (int i = 0; i < n; ++i) {
      pts(i, j) = box.lower[j] + (strata[i] + unit_stream.next_unit()) * width;
    }
  }
  return pts;
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, const Box& box,
                          double initial_step_rel, int max_evaluations,
                          double tol) {
  const int d = box.dim();
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(box.clip(x));
  };

  std::vector<Eigen::VectorXd> xs(d + 1);
  std::vector<double> fs(d + 1);
  xs[0] = box.clip(start);
  fs[0] = eval(xs[0]);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd x = xs[0];
    double step = initial_step_rel * (box.upper[i] - box.lower[i]);
    if (step == 0.0) step = initial_step_rel;
    x[i] += (x[i] + step <= box.upper[i]) ? step : -step;
    xs[i + 1] = box.clip(x);
    fs[i + 1] = eval(xs[i + 1]);
  }

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  while (evals < max_evaluations) {
    std::vector<int> order(d + 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(d + 1);
    std::vector<double> fs2(d + 1);
    for (int i = 0; i <= d; ++i) {
      xs2[i] = xs[order[i]];
      fs2[i] = fs[order[i]];
    }
    xs.swap(xs2);
    fs.swap(fs2);

    if (std::abs(fs[d] - fs[0]) <= tol * (1.0 + std::abs(fs[0]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += xs[i];
    centroid /= d;

    Eigen::VectorXd xr = box.clip(centroid + alpha * (centroid - xs[d]));
    double fr = eval(xr);
    if (fr < fs[0]) {
      Eigen::VectorXd xe = box.clip(centroid + gamma * (centroid - xs[d]));
      double fe = eval(xe);
      if (fe < fr) {
        xs[d] = xe;
        fs[d] = fe;
      } else {
        xs[d] = xr;
        fs[d] = fr;
      }
    } else if (fr < fs[d - 1]) {
      xs[d] = xr;
      fs[d] = fr;
    } else {
      Eigen::VectorXd xc = box.clip(centroid + rho * (xs[d] - centroid));
      double fc = eval(xc);
      if (fc < fs[d]) {
        xs[d] = xc;
        fs[d] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          xs[i] = box.clip(xs[0] + shrink * (xs[i] - xs[0]));
          fs[i] = eval(xs[i]);
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= d; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  return {xs[best], fs[best], evals};
}

}  // namespace iago
