#include "pet/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pet {

void LowerBoundInput::validate() const {
  if (!(t_min > 0.0)) throw DomainError("t_min must be positive");
  if (!(t_star >= t_min)) throw DomainError("t_star must be at least t_min");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(big_delta >= 0.0)) throw DomainError("big_delta must be nonnegative");
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be positive");
}

namespace {

// ln(rho) / ln((ln rho)^2 * cap), 0 when rho = 1 and when the denominator is
// nonpositive (the bound is vacuous there).
double log_ratio_quotient(double log_rho, double cap) {
  if (log_rho <= 0.0) return 0.0;
  const double denominator = std::log(log_rho * log_rho * cap);
  if (!(denominator > 0.0)) return 0.0;
  return log_rho / denominator;
}

}  // namespace

BatchLowerBoundTerms batch_lower_bound_terms(const LowerBoundInput& in) {
  in.validate();
  BatchLowerBoundTerms out;
  const double log_rho = std::log(in.t_star / in.t_min);
  const double root = 1.0 + std::sqrt(in.t_star * in.big_delta * in.big_delta / in.sigma2);
  out.c_delta = 1.0 + 4.0 * in.gamma * std::log(1.0 / in.delta) * log_rho * root * root;
  out.log_ratio_term = 0.5 * log_ratio_quotient(log_rho, std::max(std::numbers::e, out.c_delta));
  out.sixth_log_term = log_rho / 6.0;
  out.delta_term = 1.0 / (6.0 * in.delta);
  out.value = std::max(0.0, std::min({out.log_ratio_term, out.sixth_log_term, out.delta_term}));
  return out;
}

std::int64_t suff_n(double rho, double a, double b, double k) {
  if (!(rho >= std::numbers::e)) throw DomainError("suff_n requires rho >= e");
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("suff_n requires a, b >= 0");
  const double big_a = std::max(std::numbers::e, k + a);
  const double log_rho = std::log(rho);
  const double n = log_rho / std::log(log_rho * log_rho * (big_a + b * std::log(log_rho)));
  return static_cast<std::int64_t>(std::floor(n));
}

double lemma_bar_bound(const LowerBoundInput& in, double c) {
  in.validate();
  if (!(c > 0.0 && c < 1.0)) throw DomainError("high-probability constant must lie in (0, 1)");
  const double log_rho = std::log(in.t_star / in.t_min);
  const double root = 1.0 + std::sqrt(in.t_star * in.big_delta * in.big_delta / (2.0 * in.sigma2));
  const double big_c = 1.0 + 4.0 * in.gamma * std::log(1.0 / in.delta) * root * root;
  const double first = log_ratio_quotient(log_rho, std::max(std::numbers::e, big_c));
  return std::min(first, 1.0 / (2.0 * in.delta + c));
}

std::int64_t lemma_bar_n(const LowerBoundInput& in, double c) {
  return static_cast<std::int64_t>(std::floor(lemma_bar_bound(in, c)));
}

double spread_for_task(const Task& task, const Vector& means) {
  if (std::holds_alternative<TopK>(task)) return (means.maxCoeff() - means.minCoeff()) / 2.0;
  return (means.array() - std::get<Thresholding>(task).tau).abs().maxCoeff();
}

}  // namespace pet
