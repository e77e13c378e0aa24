#pragma once

#include "pet/complexity.hpp"
#include "pet/core.hpp"
#include "pet/stopping.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pet {

struct PetConfig {
  double T0 = 1.0;
  double delta = 0.05;
  int max_phases = 60;
  HorizonRule horizon = HorizonRule::Standard;

  /// Throws std::invalid_argument on T0 < 1, delta outside (0,1) or max_phases < 1.
  void validate() const;
};

/// Deterministic constants of phase r.
struct PhaseSchedule {
  int r = 0;
  double T_r = 0.0;   // 2^r T0
  double l1r = 0.0;   // 32 T0 ln(2 sqrt(2K) T_r)
  double p_r = 0.0;   // T_{r+1}^{-2}
  double eps_r = 0.0; // sqrt(2 sigma2 / (2^r l1r) ln(2K / p_r))
};

PhaseSchedule phase_schedule(int r, double T0, int num_arms, double sigma2);

struct PhaseTrace {
  int r = 0;
  double T_r = 0.0;
  double l1r = 0.0;
  double eps_r = 0.0;
  double p_r = 0.0;
  bool entered_second_batch = false;
  Complexity t_bar_estimate = Complexity::infinite();
  std::optional<double> gamma_r;
  std::int64_t samples_after_phase = 0;
  bool stopped = false;

  // Replay data: state at the start of each batch and the pulls it issued.
  CountVector counts_before;
  CountVector explore_pulls;
  Vector explore_means;  // cumulative means after the exploration batch
  CountVector track_pulls;
  Allocation track_weights;
  double statistic = 0.0;
  double threshold = 0.0;
};

struct RunRecord {
  std::string algorithm;
  Answer answer;
  bool correct = false;
  bool incomplete = false;
  std::int64_t samples = 0;
  std::int64_t batches = 0;
  std::vector<PhaseTrace> phases;
  CountVector final_counts;
  std::chrono::nanoseconds wall_clock{0};
};

/// Phased Explore then Track. Each phase: uniform exploration to
/// ceil(2^r l1r) pulls per arm, worst-case complexity of the confidence ball
/// around the cumulative means, an optional tracking batch of
/// ceil(gamma_r w_bar_i T_bar) pulls per arm when T_bar <= T_r, then a GLR
/// stopping check on cumulative statistics. Batches issuing no pulls are not
/// counted. Hitting max_phases (or an unrepresentable sample count) returns a
/// record flagged incomplete.
RunRecord pet_run(const Task& task, const ProblemInstance& inst, const PetConfig& cfg,
                  RandomSource& source);

/// Uniform sampling with a stopping check at cumulative t = base * 2^r.
RunRecord round_robin_run(const Task& task, const ProblemInstance& inst, double delta,
                          std::int64_t checkpoint_base, RandomSource& source,
                          int max_checkpoints = 60);

/// Track-and-Stop with allocations refreshed and stopping checked only at
/// cumulative t = base * 2^r.
RunRecord batched_tas_run(const Task& task, const ProblemInstance& inst, double delta,
                          std::int64_t checkpoint_base, RandomSource& source,
                          int max_checkpoints = 60);

/// Splits `budget` new pulls so cumulative counts track `weights * (total + budget)`.
/// Deficits are scaled to the budget and rounded by largest remainder.
CountVector tracking_pulls(const CountVector& counts, const Vector& weights, std::int64_t budget);

}  // namespace pet
