#pragma once

#include "pet/core.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

namespace pet {

/// A sample-complexity value that may be +infinity. Infinity is its own state,
/// never a floating sentinel, so comparisons against budgets are exact.
class Complexity {
 public:
  static Complexity infinite() { return Complexity(); }
  static Complexity finite(double v);

  bool is_finite() const { return value_.has_value(); }
  /// Throws std::bad_optional_access when infinite.
  double value() const { return value_.value(); }

  /// Infinite never fits in a finite budget.
  bool fits_within(double budget) const { return value_ && *value_ <= budget; }

  std::string to_string() const;

  friend bool operator==(const Complexity&, const Complexity&) = default;

 private:
  Complexity() = default;
  explicit Complexity(double v) : value_(v) {}
  std::optional<double> value_;
};

/// A point of the probability simplex.
struct Allocation {
  Vector weights;

  Allocation() = default;
  /// Throws std::invalid_argument unless weights are nonnegative and sum to 1 (1e-9).
  explicit Allocation(Vector w);

  static Allocation uniform(int num_arms) {
    return Allocation(Vector::Constant(num_arms, 1.0 / num_arms));
  }
  int num_arms() const { return static_cast<int>(weights.size()); }
};

struct CharacteristicTime {
  Complexity t_star;
  Allocation w_star;
};

/// Infinity-norm ball.
struct Ball {
  Vector center;
  double radius = 0.0;
};

struct BallComplexity {
  Complexity t_bar;
  Allocation w_bar;
  std::optional<Vector> hardest;
};

/// inf over the alternative set of sum_i w_i (mu_i - lambda_i)^2 / (2 sigma2).
///
/// The weights need not be normalised: the value is positively homogeneous in
/// them, which lets the GLR statistic pass raw pull counts. For top-k this is
/// the minimum over pairs (a in the top set, b outside) of
/// w_a w_b / (w_a + w_b) * (mu_a - mu_b)^2 / (2 sigma2), a pair with no
/// weight contributing 0. For thresholding it is min_i w_i (mu_i - tau)^2 / (2 sigma2).
template <typename WeightDerived, typename MeanDerived>
typename MeanDerived::Scalar transport_cost(const Task& task,
                                            const Eigen::MatrixBase<WeightDerived>& weights,
                                            const Eigen::MatrixBase<MeanDerived>& means,
                                            typename MeanDerived::Scalar sigma2) {
  using Scalar = typename MeanDerived::Scalar;
  const Eigen::Index num_arms = means.size();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  if (const auto* topk = std::get_if<TopK>(&task)) {
    const auto order = descending_order(means.template cast<double>());
    for (int i = 0; i < topk->k; ++i) {
      const int a = order[static_cast<std::size_t>(i)];
      for (Eigen::Index j = topk->k; j < num_arms; ++j) {
        const int b = order[static_cast<std::size_t>(j)];
        const Scalar wa = static_cast<Scalar>(weights[a]);
        const Scalar wb = static_cast<Scalar>(weights[b]);
        Scalar pair = 0;
        if (wa + wb > 0) {
          const Scalar gap = means[a] - means[b];
          pair = wa * wb / (wa + wb) * gap * gap / (2 * sigma2);
        }
        best = std::min(best, pair);
      }
    }
  } else {
    const Scalar tau = static_cast<Scalar>(std::get<Thresholding>(task).tau);
    for (Eigen::Index i = 0; i < num_arms; ++i) {
      const Scalar gap = means[i] - tau;
      best = std::min(best, static_cast<Scalar>(weights[i]) * gap * gap / (2 * sigma2));
    }
  }
  return best;
}

/// transport_cost restricted to simplex allocations.
double alt_inf(const Task& task, const Allocation& w, const Vector& means, double sigma2);

/// Characteristic time T*(mu) and optimal allocation w*(mu). Degenerate
/// instances give an infinite time with a uniform allocation.
CharacteristicTime char_time(const Task& task, const Vector& means, double sigma2);

inline CharacteristicTime char_time(const Task& task, const ProblemInstance& inst) {
  return char_time(task, inst.means, inst.sigma2);
}

/// Same optimum found numerically for every task: the max-min program over
/// the simplex solved by the interior point method, with no closed forms.
CharacteristicTime solve_allocation(const Task& task, const Vector& means, double sigma2);

/// x * mu + (1 - x) * y componentwise.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> scale_instance(
    const Eigen::MatrixBase<Derived>& means, typename Derived::Scalar x,
    typename Derived::Scalar y) {
  if (!(x > 0 && x <= 1)) throw DomainError("scale factor must lie in (0, 1]");
  return (x * means.array() + (1 - x) * y).matrix();
}

/// Corner of the ball that is hardest for the task, or nullopt when the ball
/// touches an answer boundary (worst case complexity is infinite).
std::optional<Vector> hardest_instance(const Task& task, const Ball& ball);

BallComplexity ball_complexity(const Task& task, const Ball& ball, double sigma2);

}  // namespace pet
