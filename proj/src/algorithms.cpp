#include "pet/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pet {

namespace {

// Counts stay exactly representable in the double-precision reward sums.
constexpr double kMaxSamples = 9007199254740992.0;  // 2^53

using Clock = std::chrono::steady_clock;

void pull(SuffStats& stats, const CountVector& pulls, const ProblemInstance& inst,
          RandomSource& source) {
  for (int arm = 0; arm < pulls.size(); ++arm)
    if (pulls[arm] > 0) stats.record(arm, pulls[arm], draw_rewards(source, inst, arm, pulls[arm]));
}

void finish(RunRecord& rec, const Task& task, const ProblemInstance& inst,
            const SuffStats& stats, Clock::time_point start) {
  if (stats.all_pulled()) rec.answer = empirical_answer(task, stats);
  rec.correct = !rec.incomplete && !is_degenerate(task, inst.means) &&
                rec.answer == correct_answer(task, inst);
  rec.samples = stats.total();
  rec.final_counts = stats.counts;
  rec.wall_clock = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
}

CountVector balanced_targets(std::int64_t total, int num_arms) {
  CountVector target(num_arms);
  for (int i = 0; i < num_arms; ++i) target[i] = total / num_arms + (i < total % num_arms ? 1 : 0);
  return target;
}

}  // namespace

void PetConfig::validate() const {
  if (!(T0 >= 1.0) || !std::isfinite(T0)) throw std::invalid_argument("PET requires T0 >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (max_phases < 1) throw std::invalid_argument("max_phases must be positive");
}

PhaseSchedule phase_schedule(int r, double T0, int num_arms, double sigma2) {
  PhaseSchedule s;
  s.r = r;
  const double scale = std::ldexp(1.0, r);
  s.T_r = scale * T0;
  s.l1r = 32.0 * T0 * std::log(2.0 * std::sqrt(2.0 * num_arms) * s.T_r);
  const double next = 2.0 * s.T_r;
  s.p_r = 1.0 / (next * next);
  s.eps_r = std::sqrt(2.0 * sigma2 / (scale * s.l1r) * std::log(2.0 * num_arms / s.p_r));
  return s;
}

CountVector tracking_pulls(const CountVector& counts, const Vector& weights, std::int64_t budget) {
  const int num_arms = static_cast<int>(counts.size());
  CountVector pulls = CountVector::Zero(num_arms);
  if (budget <= 0) return pulls;
  const double target_total = static_cast<double>(counts.sum() + budget);
  Vector deficit(num_arms);
  for (int i = 0; i < num_arms; ++i)
    deficit[i] = std::max(0.0, weights[i] * target_total - static_cast<double>(counts[i]));
  const double total_deficit = deficit.sum();
  if (!(total_deficit > 0.0)) deficit.setOnes();
  const Vector share = deficit * (static_cast<double>(budget) / deficit.sum());

  std::int64_t assigned = 0;
  Vector remainder(num_arms);
  for (int i = 0; i < num_arms; ++i) {
    pulls[i] = static_cast<std::int64_t>(std::floor(share[i]));
    remainder[i] = share[i] - static_cast<double>(pulls[i]);
    assigned += pulls[i];
  }
  std::vector<int> order(static_cast<std::size_t>(num_arms));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  // Floors of shares summing to budget never exceed it.
  for (std::size_t j = 0; assigned < budget; j = (j + 1) % order.size(), ++assigned)
    ++pulls[order[j]];
  return pulls;
}

RunRecord pet_run(const Task& task, const ProblemInstance& inst, const PetConfig& cfg,
                  RandomSource& source) {
  cfg.validate();
  const int num_arms = inst.num_arms();
  validate_task(task, num_arms);
  const auto start = Clock::now();
  const ThresholdParams params(cfg.delta, num_arms);

  RunRecord rec;
  rec.algorithm = "pet";
  SuffStats stats(num_arms);
  bool stopped = false;

  for (int r = 0; r < cfg.max_phases && !stopped; ++r) {
    const PhaseSchedule sched = phase_schedule(r, cfg.T0, num_arms, inst.sigma2);
    PhaseTrace trace;
    trace.r = r;
    trace.T_r = sched.T_r;
    trace.l1r = sched.l1r;
    trace.eps_r = sched.eps_r;
    trace.p_r = sched.p_r;
    trace.counts_before = stats.counts;

    const double explore_target = std::ceil(std::ldexp(1.0, r) * sched.l1r);
    if (explore_target * num_arms > kMaxSamples) {
      rec.incomplete = true;
      break;
    }
    const auto per_arm = static_cast<std::int64_t>(explore_target);
    trace.explore_pulls = (per_arm - stats.counts.array()).max(0).matrix();
    if (trace.explore_pulls.sum() > 0) {
      pull(stats, trace.explore_pulls, inst, source);
      ++rec.batches;
    }
    trace.explore_means = stats.means();

    const BallComplexity ball =
        ball_complexity(task, Ball{trace.explore_means, sched.eps_r}, inst.sigma2);
    trace.t_bar_estimate = ball.t_bar;
    trace.track_pulls = CountVector::Zero(num_arms);
    trace.track_weights = ball.w_bar;
    if (ball.t_bar.fits_within(sched.T_r)) {
      trace.entered_second_batch = true;
      const TrackingBudget budget = gamma_r(r, cfg.T0, params, sched.l1r, cfg.horizon);
      trace.gamma_r = budget.gamma;
      const Vector wanted = (budget.gamma * ball.t_bar.value() * ball.w_bar.weights).array().ceil();
      if (static_cast<double>(stats.total()) + wanted.sum() > kMaxSamples) {
        rec.phases.push_back(std::move(trace));
        rec.incomplete = true;
        break;
      }
      trace.track_pulls = wanted.cast<std::int64_t>();
      if (trace.track_pulls.sum() > 0) {
        pull(stats, trace.track_pulls, inst, source);
        ++rec.batches;
      }
    }

    trace.statistic = glr_statistic(task, stats, inst.sigma2);
    trace.threshold = beta_threshold(static_cast<double>(stats.total()), params);
    stopped = trace.statistic > trace.threshold;
    trace.stopped = stopped;
    trace.samples_after_phase = stats.total();
    rec.phases.push_back(std::move(trace));
  }
  if (!stopped) rec.incomplete = true;
  finish(rec, task, inst, stats, start);
  return rec;
}

namespace {

enum class CheckpointPolicy { Uniform, Tracking };

RunRecord checkpoint_run(const char* name, CheckpointPolicy policy, const Task& task,
                         const ProblemInstance& inst, double delta, std::int64_t checkpoint_base,
                         RandomSource& source, int max_checkpoints) {
  const int num_arms = inst.num_arms();
  validate_task(task, num_arms);
  if (checkpoint_base < num_arms) throw std::invalid_argument("checkpoint_base must be >= K");
  if (max_checkpoints < 1) throw std::invalid_argument("max_checkpoints must be positive");
  const auto start = Clock::now();
  const ThresholdParams params(delta, num_arms);

  RunRecord rec;
  rec.algorithm = name;
  SuffStats stats(num_arms);
  Vector weights = Vector::Constant(num_arms, 1.0 / num_arms);
  bool stopped = false;

  for (int c = 0; c < max_checkpoints && !stopped; ++c) {
    const double target = std::ldexp(static_cast<double>(checkpoint_base), c);
    if (target > kMaxSamples) break;
    const auto total = static_cast<std::int64_t>(target);

    PhaseTrace trace;
    trace.r = c;
    trace.counts_before = stats.counts;
    if (policy == CheckpointPolicy::Uniform || c == 0)
      trace.explore_pulls = balanced_targets(total, num_arms) - stats.counts;
    else
      trace.explore_pulls = tracking_pulls(stats.counts, weights, total - stats.total());
    trace.track_weights = Allocation(weights);
    pull(stats, trace.explore_pulls, inst, source);
    ++rec.batches;
    trace.explore_means = stats.means();

    trace.statistic = glr_statistic(task, stats, inst.sigma2);
    trace.threshold = beta_threshold(static_cast<double>(stats.total()), params);
    stopped = trace.statistic > trace.threshold;
    trace.stopped = stopped;
    trace.samples_after_phase = stats.total();
    rec.phases.push_back(std::move(trace));

    if (!stopped && policy == CheckpointPolicy::Tracking)
      weights = char_time(task, stats.means(), inst.sigma2).w_star.weights;
  }
  if (!stopped) rec.incomplete = true;
  finish(rec, task, inst, stats, start);
  return rec;
}

}  // namespace

RunRecord round_robin_run(const Task& task, const ProblemInstance& inst, double delta,
                          std::int64_t checkpoint_base, RandomSource& source, int max_checkpoints) {
  return checkpoint_run("round_robin", CheckpointPolicy::Uniform, task, inst, delta,
                        checkpoint_base, source, max_checkpoints);
}

RunRecord batched_tas_run(const Task& task, const ProblemInstance& inst, double delta,
                          std::int64_t checkpoint_base, RandomSource& source, int max_checkpoints) {
  return checkpoint_run("batched_tas", CheckpointPolicy::Tracking, task, inst, delta,
                        checkpoint_base, source, max_checkpoints);
}

}  // namespace pet
