#pragma once

#include "pet/algorithms.hpp"
#include "pet/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pet {

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AlgorithmKind { Pet, RoundRobin, BatchedTas };

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::Pet;
  double T0 = 1.0;
  std::int64_t checkpoint_base = 900;
  int max_phases = 60;
  HorizonRule horizon = HorizonRule::Standard;

  std::string name() const;
};

/// Either explicit means, or the "bai10" generator: arm 0 has mean best_mean
/// and the other num_arms - 1 arms are drawn uniformly in [low, high].
struct InstanceSpec {
  std::optional<Vector> means;
  std::string generator;
  int num_arms = 10;
  double best_mean = 1.0;
  double low = 0.6;
  double high = 0.9;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Task task = TopK{1};
  InstanceSpec instance;
  double sigma2 = 1.0;
  double delta = 0.05;
  std::vector<AlgorithmSpec> algorithms;
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  std::optional<double> t_min;  // defaults to the PET T0
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Stream id of (trial, slot); slot 0 draws the instance, slot 1 + i feeds algorithm i.
std::uint64_t stream_id(std::int64_t trial, std::size_t slot);

/// The instance of a trial; generated instances are redrawn for every trial.
ProblemInstance trial_instance(const ExperimentConfig& cfg, std::int64_t trial);

RunRecord run_algorithm(const AlgorithmSpec& spec, const Task& task, const ProblemInstance& inst,
                        double delta, RandomSource& source);

RunRecord run_trial(const ExperimentConfig& cfg, std::int64_t trial, std::size_t algorithm_index);

struct TrialRow {
  std::int64_t trial = 0;
  std::string algorithm;
  bool correct = false;
  bool incomplete = false;
  std::int64_t samples = 0;
  std::int64_t batches = 0;
  std::int64_t phases = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

struct TrialInstance {
  std::int64_t trial = 0;
  Vector means;
  double t_star = 0.0;  // 0 when the instance is degenerate
};

struct Distribution {
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Distribution summarize(std::vector<double> values);

struct AlgorithmSummary {
  std::string name;
  std::int64_t trials = 0;
  std::int64_t errors = 0;
  std::int64_t incomplete = 0;
  double error_rate = 0.0;
  Distribution samples;
  Distribution batches;
  double mean_wall_seconds = 0.0;
};

struct BenchSummary {
  ExperimentConfig config;
  std::vector<TrialInstance> instances;
  std::vector<TrialRow> rows;  // sorted by (trial, algorithm order)
  std::vector<AlgorithmSummary> algorithms;

  const AlgorithmSummary* find(const std::string& name) const;
  bool any_incomplete() const;
};

/// Runs every trial of the campaign on `workers` threads. Results do not
/// depend on the worker count. Throws DegenerateInstance when a fixed
/// instance has no well-defined answer.
BenchSummary run_campaign(const ExperimentConfig& cfg, int workers = 1);

void write_csv(const BenchSummary& summary, std::ostream& out);
void write_instances_csv(const BenchSummary& summary, std::ostream& out);

struct BoundsReport {
  double t_star = 0.0;
  double t_star_b = 0.0;
  double T0 = 1.0;
  double t_min = 1.0;
  double measured_gamma = 0.0;
  double mean_batches = 0.0;
  double mean_samples = 0.0;
  double upper_batches = 0.0;
  double upper_samples = 0.0;
  double lower_batches = 0.0;
  bool consistent_with_lower = false;
  bool within_upper_batches = false;
  bool within_upper_samples = false;
};

/// Upper batch/sample bounds of PET and the batch lower bound with measured
/// gamma, compared with the PET entry of a fixed-instance campaign.
BoundsReport evaluate_bounds(const BenchSummary& summary, const ProblemInstance& inst,
                             const Task& task, double t_min);

/// T*_b = max{sigma2 / b^2, 2 e T*} with b = sqrt(sigma2 / (8 T*)).
double t_star_b(double t_star, double sigma2);
double pet_upper_batches(double t_star, double sigma2, double T0);
double pet_upper_samples(double t_star, double sigma2, double T0, double delta, int num_arms);

/// Per-trial bounds averaged over a campaign with generated instances.
struct CampaignBounds {
  double measured_gamma = 0.0;
  double mean_upper_batches = 0.0;
  double mean_lower_batches = 0.0;
  double mean_batches = 0.0;
};

CampaignBounds evaluate_campaign_bounds(const BenchSummary& summary, const std::string& algorithm);

nlohmann::json to_json(const RunRecord& record);
nlohmann::json to_json(const BoundsReport& report);
nlohmann::json summary_to_json(const BenchSummary& summary);

}  // namespace pet
