#include "pet/stopping.hpp"

#include <numbers>

namespace pet {

namespace {
const double kLogEPiSquaredOver6 = std::log(std::numbers::e * std::numbers::pi * std::numbers::pi / 6.0);
}  // namespace

ThresholdParams::ThresholdParams(double d, int k) : delta(d), num_arms(k) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (num_arms < 1) throw DomainError("num_arms must be positive");
}

double beta_threshold(double t, const ThresholdParams& params) {
  const double k = params.num_arms;
  if (!(t >= k)) throw DomainError("beta_threshold requires t >= K");
  const double x = 2.0 / k * std::log(1.0 / params.delta) +
                   4.0 * std::log(std::log(std::numbers::e * t / k)) + 2.0 * kLogEPiSquaredOver6;
  return k / 2.0 * lambert_wbar(x);
}

double beta_threshold_per_arm(const CountVector& counts, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (counts.size() == 0 || (counts.array() < 1).any())
    throw DomainError("per-arm threshold needs every count >= 1");
  const double k = static_cast<double>(counts.size());
  double log_product = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    log_product += 2.0 * std::log1p(std::log(static_cast<double>(counts[i])));
  const double x = 2.0 * kLogEPiSquaredOver6 + 2.0 / k * log_product + 2.0 / k * std::log(1.0 / delta);
  return k / 2.0 * lambert_wbar(x);
}

double glr_statistic(const Task& task, const SuffStats& stats, double sigma2) {
  return transport_cost(task, stats.counts.cast<double>(), stats.means(), sigma2);
}

bool should_stop(const Task& task, const SuffStats& stats, double sigma2,
                 const ThresholdParams& params) {
  return glr_statistic(task, stats, sigma2) >
         beta_threshold(static_cast<double>(stats.total()), params);
}

TrackingBudget gamma_r(int r, double T0, const ThresholdParams& params, double l1r,
                       HorizonRule rule) {
  if (!(T0 >= 1.0)) throw DomainError("T0 must be at least 1");
  if (!(l1r > 0.0)) throw DomainError("l1r must be positive");
  if (r < 0) throw DomainError("phase index must be nonnegative");
  const double k = params.num_arms;
  const double scale = std::ldexp(1.0, r);
  const double phase_complexity = scale * T0;
  auto horizon = [&](double gamma) {
    if (rule == HorizonRule::Standard) return std::ceil(k * scale * l1r + gamma * phase_complexity);
    return std::ceil((k * l1r / T0 + 2.0 * gamma) * phase_complexity);
  };

  TrackingBudget out;
  double gamma = beta_threshold(std::ceil(k * scale * l1r + k), params);
  for (int iter = 1; iter <= 10000; ++iter) {
    const double t_bar = horizon(gamma);
    const double next = beta_threshold(t_bar, params);
    if (std::abs(next - gamma) <= 1e-12 * next) {
      out.gamma = next;
      out.t_bar = horizon(next);
      out.iterations = iter;
      return out;
    }
    gamma = next;
  }
  throw NoConvergence("gamma_r fixed point did not converge");
}

}  // namespace pet
