#include "pet/complexity.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace pet {

Complexity Complexity::finite(double v) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument("finite complexity must be a positive real");
  return Complexity(v);
}

std::string Complexity::to_string() const {
  if (!value_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << *value_;
  return os.str();
}

Allocation::Allocation(Vector w) : weights(std::move(w)) {
  if (weights.size() == 0) throw std::invalid_argument("empty allocation");
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw std::invalid_argument("allocation weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("allocation weights must sum to 1");
}

double alt_inf(const Task& task, const Allocation& w, const Vector& means, double sigma2) {
  if (w.num_arms() != means.size()) throw std::invalid_argument("allocation size mismatch");
  return transport_cost(task, w.weights, means, sigma2);
}

namespace {

// x_a + x_b <= capacity, or x_a <= capacity when a == b.
struct PairConstraint {
  int a;
  int b;
  double capacity;

  double slack(const Vector& x) const { return capacity - x[a] - (a == b ? 0.0 : x[b]); }
};

// Top-k characteristic time as a convex program over inverse pull counts
// x_i = 1/N_i:
//
//   minimise sum_i 1/x_i  subject to  x_a + x_b <= c_ab  for every (a, b) pair,
//
// where c_ab = (mu_a - mu_b)^2 / (2 sigma2). Thresholding has single-arm caps
// x_i <= (mu_i - tau)^2 / (2 sigma2) instead. The optimum value is T*, and the
// optimal N normalised to the simplex is w*. Solved with a log-barrier
// interior point method; capacities are rescaled to max 1 beforehand.
Vector solve_inverse_counts(int num_arms, const std::vector<PairConstraint>& pairs) {
  const double m = static_cast<double>(pairs.size());
  Vector x = Vector::Constant(num_arms, std::numeric_limits<double>::infinity());
  for (const auto& p : pairs) {
    x[p.a] = std::min(x[p.a], p.capacity / 3.0);
    x[p.b] = std::min(x[p.b], p.capacity / 3.0);
  }

  auto feasible = [&](const Vector& y) {
    if ((y.array() <= 0.0).any()) return false;
    for (const auto& p : pairs)
      if (p.slack(y) <= 0.0) return false;
    return true;
  };

  Eigen::MatrixXd hessian(num_arms, num_arms);
  Vector grad(num_arms);
  double t = 1.0;
  auto barrier = [&](const Vector& y) {
    double v = t * y.array().inverse().sum();
    for (const auto& p : pairs) v -= std::log(p.slack(y));
    return v;
  };
  for (int outer = 0; outer < 200; ++outer) {
    for (int iter = 0; iter < 200; ++iter) {
      grad = -t * x.array().square().inverse();
      hessian.setZero();
      hessian.diagonal() = 2.0 * t * x.array().cube().inverse();
      for (const auto& p : pairs) {
        const double g = 1.0 / p.slack(x);
        const double h = g * g;
        grad[p.a] += g;
        hessian(p.a, p.a) += h;
        if (p.a == p.b) continue;
        grad[p.b] += g;
        hessian(p.b, p.b) += h;
        hessian(p.a, p.b) += h;
        hessian(p.b, p.a) += h;
      }
      const Vector step = -hessian.ldlt().solve(grad);
      const double decrement2 = -grad.dot(step);
      if (!(decrement2 > 1e-20)) break;
      // 1/x is not self-concordant, so backtrack on the barrier itself
      // rather than trusting the damped step.
      const double before = barrier(x);
      double length = 1.0;
      Vector next = x + step;
      while (length > 1e-30 &&
             (!feasible(next) || barrier(next) > before - 0.25 * length * decrement2)) {
        length *= 0.5;
        next = x + length * step;
      }
      if (!feasible(next)) break;
      const double after = barrier(next);
      x = next;
      // gradient terms cancel at large t, so stop once the barrier is flat
      if (before - after <= 1e-13 * std::abs(before) || decrement2 < 1e-10) break;
    }
    const double objective = x.array().inverse().sum();
    if (m / t <= 1e-13 * objective) break;
    t *= 16.0;
  }
  return x;
}

CharacteristicTime topk_char_time(int k, const Vector& means, double sigma2) {
  const int num_arms = static_cast<int>(means.size());
  const auto order = descending_order(means);
  std::vector<PairConstraint> pairs;
  double largest = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = k; j < num_arms; ++j) {
      const int a = order[static_cast<std::size_t>(i)];
      const int b = order[static_cast<std::size_t>(j)];
      const double gap = means[a] - means[b];
      const double capacity = gap * gap / (2.0 * sigma2);
      largest = std::max(largest, capacity);
      pairs.push_back({a, b, capacity});
    }
  }
  for (auto& p : pairs) p.capacity /= largest;

  const Vector inverse = solve_inverse_counts(num_arms, pairs);
  const Vector counts = inverse.array().inverse();
  Allocation w(counts / counts.sum());
  const double value = alt_inf(TopK{k}, w, means, sigma2);
  return {Complexity::finite(1.0 / value), std::move(w)};
}

CharacteristicTime threshold_numeric(double tau, const Vector& means, double sigma2) {
  const int num_arms = static_cast<int>(means.size());
  std::vector<PairConstraint> caps;
  double largest = 0.0;
  for (int i = 0; i < num_arms; ++i) {
    const double gap = means[i] - tau;
    caps.push_back({i, i, gap * gap / (2.0 * sigma2)});
    largest = std::max(largest, caps.back().capacity);
  }
  for (auto& p : caps) p.capacity /= largest;
  const Vector counts = solve_inverse_counts(num_arms, caps).array().inverse();
  Allocation w(counts / counts.sum());
  return {Complexity::finite(1.0 / alt_inf(Thresholding{tau}, w, means, sigma2)), std::move(w)};
}

CharacteristicTime threshold_char_time(double tau, const Vector& means, double sigma2) {
  const Vector inverse_gap2 = (means.array() - tau).square().inverse();
  const double total = inverse_gap2.sum();
  return {Complexity::finite(2.0 * sigma2 * total), Allocation(inverse_gap2 / total)};
}

}  // namespace

CharacteristicTime char_time(const Task& task, const Vector& means, double sigma2) {
  const int num_arms = static_cast<int>(means.size());
  validate_task(task, num_arms);
  if (is_degenerate(task, means))
    return {Complexity::infinite(), Allocation::uniform(num_arms)};
  if (const auto* topk = std::get_if<TopK>(&task)) return topk_char_time(topk->k, means, sigma2);
  return threshold_char_time(std::get<Thresholding>(task).tau, means, sigma2);
}

CharacteristicTime solve_allocation(const Task& task, const Vector& means, double sigma2) {
  const int num_arms = static_cast<int>(means.size());
  validate_task(task, num_arms);
  if (is_degenerate(task, means))
    return {Complexity::infinite(), Allocation::uniform(num_arms)};
  if (const auto* topk = std::get_if<TopK>(&task)) return topk_char_time(topk->k, means, sigma2);
  return threshold_numeric(std::get<Thresholding>(task).tau, means, sigma2);
}

std::optional<Vector> hardest_instance(const Task& task, const Ball& ball) {
  const Vector& mu = ball.center;
  const double eps = ball.radius;
  if (!(eps >= 0.0)) throw DomainError("ball radius must be nonnegative");
  validate_task(task, static_cast<int>(mu.size()));
  Vector corner = mu;
  if (const auto* topk = std::get_if<TopK>(&task)) {
    const auto order = descending_order(mu);
    const double gap = mu[order[topk->k - 1]] - mu[order[topk->k]];
    if (gap <= 2.0 * eps) return std::nullopt;
    for (std::size_t i = 0; i < order.size(); ++i)
      corner[order[i]] += (static_cast<int>(i) < topk->k ? -eps : eps);
  } else {
    const double tau = std::get<Thresholding>(task).tau;
    if (((mu.array() - tau).abs() <= eps).any()) return std::nullopt;
    for (Eigen::Index i = 0; i < mu.size(); ++i) corner[i] += (mu[i] > tau ? -eps : eps);
  }
  return corner;
}

BallComplexity ball_complexity(const Task& task, const Ball& ball, double sigma2) {
  auto corner = hardest_instance(task, ball);
  if (!corner)
    return {Complexity::infinite(), Allocation::uniform(static_cast<int>(ball.center.size())),
            std::nullopt};
  auto ct = char_time(task, *corner, sigma2);
  return {ct.t_star, std::move(ct.w_star), std::move(corner)};
}

}  // namespace pet
