#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pet {

using Vector = Eigen::VectorXd;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// The correct answer of an instance is undefined (tied k-th gap, or an arm
/// sitting exactly on the threshold).
class DegenerateInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian bandit instance: arm means and a common variance.
struct ProblemInstance {
  Vector means;
  double sigma2 = 1.0;

  ProblemInstance() = default;
  /// Throws std::invalid_argument unless K >= 2, means are finite and sigma2 > 0.
  ProblemInstance(Vector means, double sigma2);

  int num_arms() const { return static_cast<int>(means.size()); }
};

/// Identify the k arms with largest means. k = 1 is best arm identification.
struct TopK {
  int k = 1;
};

/// Identify the arms whose mean is strictly above tau.
struct Thresholding {
  double tau = 0.0;
};

using Task = std::variant<TopK, Thresholding>;

/// Throws std::invalid_argument if the task makes no sense for K arms.
void validate_task(const Task& task, int num_arms);

std::string to_string(const Task& task);

/// Parses "topk:<k>", "bai" or "threshold:<tau>".
Task parse_task(const std::string& text);

/// A set of arm indices, kept sorted.
struct Answer {
  std::vector<int> arms;

  friend bool operator==(const Answer&, const Answer&) = default;
};

std::string to_string(const Answer& answer);

/// Per-arm pull counts and reward sums. The only view algorithms have of data.
struct SuffStats {
  CountVector counts;
  Vector sums;

  SuffStats() = default;
  explicit SuffStats(int num_arms)
      : counts(CountVector::Zero(num_arms)), sums(Vector::Zero(num_arms)) {}

  int num_arms() const { return static_cast<int>(counts.size()); }
  std::int64_t total() const { return counts.sum(); }
  bool all_pulled() const { return (counts.array() > 0).all(); }

  /// Empirical means; requires every count to be positive.
  Vector means() const;

  void record(int arm, std::int64_t n, double reward_sum) {
    counts[arm] += n;
    sums[arm] += reward_sum;
  }
};

/// Deterministic reward stream keyed by (master_seed, stream_id).
class RandomSource {
 public:
  RandomSource(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Sum of n independent Normal(means[arm], sigma2) rewards. The sum of n
/// Gaussians is itself Gaussian, so a block costs a single normal draw.
double draw_rewards(RandomSource& source, const ProblemInstance& inst, int arm,
                    std::int64_t n);

/// Arm indices sorted by decreasing mean, lowest index first among ties.
std::vector<int> descending_order(const Vector& means);

/// Answer of the task for a mean vector with deterministic tie-breaking
/// (lowest index wins; a mean equal to tau is not above tau).
Answer answer_for_means(const Task& task, const Vector& means);

/// Returns true when the answer of `means` is not uniquely defined.
bool is_degenerate(const Task& task, const Vector& means);

/// The unique correct answer; throws DegenerateInstance when it is undefined.
Answer correct_answer(const Task& task, const ProblemInstance& inst);

Answer empirical_answer(const Task& task, const SuffStats& stats);

}  // namespace pet
