#pragma once

#include "pet/complexity.hpp"
#include "pet/core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace pet {

struct ThresholdParams {
  double delta = 0.05;
  int num_arms = 2;

  ThresholdParams() = default;
  /// Throws DomainError unless 0 < delta < 1 and num_arms >= 1.
  ThresholdParams(double delta, int num_arms);
};

/// Solution w >= 1 of w - ln(w) = x, i.e. -W_{-1}(-exp(-x)).
///
/// Newton iteration from x + ln(x), which sits above the root; the map is
/// convex on the branch so the iterates decrease monotonically. Accepts
/// x >= 1 (the value at 1 is 1); throws DomainError below.
template <typename Scalar>
Scalar lambert_wbar(Scalar x) {
  using std::log;
  if (!(x >= Scalar(1))) throw DomainError("lambert_wbar requires x >= 1");
  if (x == Scalar(1)) return Scalar(1);
  const Scalar floor_value = Scalar(1) + std::numeric_limits<Scalar>::epsilon();
  Scalar w = x + log(x);
  if (w < floor_value) w = floor_value;
  for (int iter = 0; iter < 100; ++iter) {
    const Scalar residual = w - log(w) - x;
    const Scalar slope = Scalar(1) - Scalar(1) / w;
    Scalar next = w - residual / slope;
    if (next < floor_value) next = floor_value;
    if (next == w) break;
    if (next > w && iter > 0) break;  // rounding noise once converged
    w = next;
  }
  return w;
}

/// Time-uniform GLR threshold for sub-Gaussian arms, checked at sample count t >= K:
/// (K/2) Wbar((2/K) ln(1/delta) + 4 ln(ln(e t / K)) + 2 ln(e pi^2 / 6)).
double beta_threshold(double t, const ThresholdParams& params);

/// Threshold driven by per-arm counts (all >= 1):
/// (K/2) Wbar(2 ln(e pi^2/6) + (2/K) sum_k ln((1 + ln N_k)^2) + (2/K) ln(1/delta)).
double beta_threshold_per_arm(const CountVector& counts, double delta);

/// GLR statistic inf_{lambda in Alt(mu_hat)} sum_i N_i (mu_hat_i - lambda_i)^2 / (2 sigma2).
double glr_statistic(const Task& task, const SuffStats& stats, double sigma2);

/// Strict comparison of the GLR statistic with beta(t, delta).
bool should_stop(const Task& task, const SuffStats& stats, double sigma2,
                 const ThresholdParams& params);

/// Which horizon the tracking budget fixed point uses.
enum class HorizonRule {
  /// t_bar = K 2^r l1r + gamma T_r
  Standard,
  /// t_bar = (K l1r / T0 + 2 gamma) T_r, the looser variant used in bound proofs
  Conservative,
};

struct TrackingBudget {
  double gamma = 0.0;
  double t_bar = 0.0;
  int iterations = 0;
};

/// Fixed point gamma = beta(t_bar(gamma), delta), with t_bar rounded up to an
/// integer sample count. Iterates from gamma_0 = beta(ceil(K 2^r l1r + K)).
TrackingBudget gamma_r(int r, double T0, const ThresholdParams& params, double l1r,
                       HorizonRule rule = HorizonRule::Standard);

}  // namespace pet
