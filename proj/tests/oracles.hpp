#pragma once

// Brute-force reference computations used only by tests. None of these call
// into the solver code they check.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

/// Pairwise top-k transport value recomputed from the midpoint definition
/// w_a (mu_a - m)^2 + w_b (mu_b - m)^2 over 2 sigma2, m the weighted midpoint.
inline double topk_value(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, int k, double sigma2) {
  std::vector<int> order(static_cast<std::size_t>(mu.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu[a] > mu[b]; });
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i)
    for (std::size_t j = static_cast<std::size_t>(k); j < order.size(); ++j) {
      const int a = order[static_cast<std::size_t>(i)];
      const int b = order[j];
      if (w[a] + w[b] == 0.0) {
        best = std::min(best, 0.0);
        continue;
      }
      const double m = (w[a] * mu[a] + w[b] * mu[b]) / (w[a] + w[b]);
      best = std::min(best, (w[a] * (mu[a] - m) * (mu[a] - m) + w[b] * (mu[b] - m) * (mu[b] - m)) /
                                (2.0 * sigma2));
    }
  return best;
}

inline double threshold_value(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, double tau,
                              double sigma2) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    best = std::min(best, w[i] * (mu[i] - tau) * (mu[i] - tau) / (2.0 * sigma2));
  return best;
}

/// 2-arm BAI alternative infimum by brute force over lambda with lambda_2 >= lambda_1.
inline double bai2_lambda_grid(const Eigen::Vector2d& w, const Eigen::Vector2d& mu, double sigma2,
                               double lo, double hi, int steps) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double l1 = lo + (hi - lo) * i / steps;
    // For fixed lambda_1 the best lambda_2 >= lambda_1 is max(mu_2, lambda_1).
    const double l2 = std::max(mu[1], l1);
    const double v = (w[0] * (mu[0] - l1) * (mu[0] - l1) + w[1] * (mu[1] - l2) * (mu[1] - l2)) /
                     (2.0 * sigma2);
    best = std::min(best, v);
  }
  return best;
}

struct GridOptimum {
  double value = 0.0;
  Eigen::VectorXd w;
};

/// Exhaustive grid maximisation over the simplex for K in {2, 3}.
template <typename F>
GridOptimum simplex_grid_max(int num_arms, double step, F&& f) {
  GridOptimum best;
  best.value = -1.0;
  const int n = static_cast<int>(std::lround(1.0 / step));
  Eigen::VectorXd w(num_arms);
  if (num_arms == 2) {
    for (int i = 0; i <= n; ++i) {
      w << double(i) / n, double(n - i) / n;
      const double v = f(w);
      if (v > best.value) best = {v, w};
    }
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        w << double(i) / n, double(j) / n, double(n - i - j) / n;
        const double v = f(w);
        if (v > best.value) best = {v, w};
      }
  }
  return best;
}

/// Wbar(x) by bisection on w - ln w = x over [1, 2x + 2].
inline long double wbar_bisect(long double x) {
  long double lo = 1.0L;
  long double hi = 2.0L * x + 2.0L;
  for (int i = 0; i < 300; ++i) {
    const long double mid = (lo + hi) / 2.0L;
    if (mid - std::log(mid) < x)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2.0L;
}

}  // namespace oracle
