#pragma once

#include "pet/core.hpp"

#include <cstdint>

namespace pet {

/// Inputs of the batch-complexity lower bounds. All logarithms are natural.
struct LowerBoundInput {
  double t_star = 1.0;     // T*(mu)
  double t_min = 1.0;      // smallest complexity the algorithm is tuned for
  double delta = 0.05;
  double gamma = 1.0;      // sample-complexity ratio E[tau] / (ln(1/delta) T*)
  double big_delta = 0.0;  // spread of the means around the scaling centre
  double sigma2 = 1.0;

  /// Throws DomainError on t_star < t_min, nonpositive t_min, delta outside
  /// (0,1), nonpositive gamma or sigma2, or negative big_delta.
  void validate() const;
};

/// The three terms whose minimum bounds E[R_delta] from below.
struct BatchLowerBoundTerms {
  double log_ratio_term = 0.0;  // ln(rho) / (2 ln((ln rho)^2 max{e, C_delta}))
  double sixth_log_term = 0.0;  // ln(rho) / 6
  double delta_term = 0.0;      // 1 / (6 delta)
  double c_delta = 0.0;
  double value = 0.0;           // min of the three, clamped at 0
};

/// Lower bound on the expected number of batches of any delta-correct
/// algorithm, with rho = T*/T_min and
/// C_delta = 1 + 4 gamma ln(1/delta) ln(rho) (1 + sqrt(T* Delta^2 / sigma2))^2.
/// T* == T_min gives 0.
BatchLowerBoundTerms batch_lower_bound_terms(const LowerBoundInput& input);

inline double batch_lower_bound(const LowerBoundInput& input) {
  return batch_lower_bound_terms(input).value;
}

/// Largest N guaranteed by floor(ln rho / ln((ln rho)^2 (A + b ln ln rho)))
/// with A = max{e, k + a}; it satisfies (k + N^2 (a + b ln N))^N <= rho.
std::int64_t suff_n(double rho, double a, double b, double k);

/// Real-valued batch count N such that P(R_delta >= N) >= 1/2 when
/// P(tau > gamma ln(1/delta) T*) <= c:
/// min{ ln rho / ln((ln rho)^2 max{e, C}), 1 / (2 delta + c) } with
/// C = 1 + 4 gamma ln(1/delta) (1 + sqrt(T* Delta^2 / (2 sigma2)))^2.
double lemma_bar_bound(const LowerBoundInput& input, double high_prob_c);

/// Floor of lemma_bar_bound.
std::int64_t lemma_bar_n(const LowerBoundInput& input, double high_prob_c);

/// Delta entering the bounds: (max mu - min mu) / 2 for top-k, max |mu_i - tau|
/// for thresholding.
double spread_for_task(const Task& task, const Vector& means);

}  // namespace pet
