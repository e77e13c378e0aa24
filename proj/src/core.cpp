#include "pet/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pet {

ProblemInstance::ProblemInstance(Vector m, double s2) : means(std::move(m)), sigma2(s2) {
  if (means.size() < 2) throw std::invalid_argument("instance needs at least 2 arms");
  if (!means.allFinite()) throw std::invalid_argument("instance means must be finite");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("sigma2 must be positive");
}

void validate_task(const Task& task, int num_arms) {
  if (const auto* topk = std::get_if<TopK>(&task)) {
    if (topk->k < 1 || topk->k > num_arms - 1)
      throw std::invalid_argument("top-k requires 1 <= k <= K-1, got k=" +
                                  std::to_string(topk->k));
  } else if (!std::isfinite(std::get<Thresholding>(task).tau)) {
    throw std::invalid_argument("threshold must be finite");
  }
}

std::string to_string(const Task& task) {
  if (const auto* topk = std::get_if<TopK>(&task)) return "topk:" + std::to_string(topk->k);
  // shortest text that parses back to the same double
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::get<Thresholding>(task).tau);
  return "threshold:" + std::string(buf, res.ptr);
}

Task parse_task(const std::string& text) {
  if (text == "bai") return TopK{1};
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("task must look like topk:<k> or threshold:<tau>");
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  std::size_t used = 0;
  try {
    if (kind == "topk") {
      const int k = std::stoi(value, &used);
      if (used == value.size()) return TopK{k};
    } else if (kind == "threshold") {
      const double tau = std::stod(value, &used);
      if (used == value.size()) return Thresholding{tau};
    }
  } catch (const std::logic_error&) {
  }
  throw std::invalid_argument("cannot parse task '" + text + "'");
}

std::string to_string(const Answer& answer) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < answer.arms.size(); ++i) os << (i ? "," : "") << answer.arms[i];
  os << '}';
  return os.str();
}

Vector SuffStats::means() const {
  if (!all_pulled()) throw DomainError("empirical means need every arm pulled at least once");
  return sums.array() / counts.cast<double>().array();
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::uint64_t a = master_seed;
  std::uint64_t b = stream_id ^ 0x5851f42d4c957f2dULL;
  const std::uint64_t x = splitmix64(a);
  const std::uint64_t y = splitmix64(b);
  std::seed_seq seq{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(x >> 32),
                    static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(y >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(make_engine(master_seed, stream_id)) {}

double draw_rewards(RandomSource& source, const ProblemInstance& inst, int arm, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("negative pull count");
  if (n == 0) return 0.0;
  const double count = static_cast<double>(n);
  return count * inst.means[arm] + std::sqrt(count * inst.sigma2) * source.normal();
}

std::vector<int> descending_order(const Vector& means) {
  std::vector<int> order(static_cast<std::size_t>(means.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return means[a] > means[b]; });
  return order;
}

Answer answer_for_means(const Task& task, const Vector& means) {
  Answer answer;
  if (const auto* topk = std::get_if<TopK>(&task)) {
    const auto order = descending_order(means);
    answer.arms.assign(order.begin(), order.begin() + topk->k);
  } else {
    const double tau = std::get<Thresholding>(task).tau;
    for (int i = 0; i < means.size(); ++i)
      if (means[i] > tau) answer.arms.push_back(i);
  }
  std::sort(answer.arms.begin(), answer.arms.end());
  return answer;
}

bool is_degenerate(const Task& task, const Vector& means) {
  if (const auto* topk = std::get_if<TopK>(&task)) {
    const auto order = descending_order(means);
    return means[order[topk->k - 1]] == means[order[topk->k]];
  }
  const double tau = std::get<Thresholding>(task).tau;
  return (means.array() == tau).any();
}

Answer correct_answer(const Task& task, const ProblemInstance& inst) {
  validate_task(task, inst.num_arms());
  if (is_degenerate(task, inst.means))
    throw DegenerateInstance("correct answer undefined for task " + to_string(task));
  return answer_for_means(task, inst.means);
}

Answer empirical_answer(const Task& task, const SuffStats& stats) {
  return answer_for_means(task, stats.means());
}

}  // namespace pet
