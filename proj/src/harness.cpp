#include "pet/harness.hpp"

#include "pet/complexity.hpp"
#include "pet/lowerbound.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace pet {

using nlohmann::json;

std::string AlgorithmSpec::name() const {
  switch (kind) {
    case AlgorithmKind::Pet: return "pet";
    case AlgorithmKind::RoundRobin: return "round_robin";
    case AlgorithmKind::BatchedTas: return "batched_tas";
  }
  return "unknown";
}

namespace {

// Field access with path-qualified diagnostics.
class Fields {
 public:
  Fields(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : node_.items())
      if (!allowed.contains(key)) fail(path_ + "." + key, "unknown field");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at '" + where + "': " + what);
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string where(const std::string& key) const { return path_ + "." + key; }
  const json& raw(const std::string& key) const {
    if (!has(key)) fail(where(key), "missing required field");
    return node_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(where(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::int64_t integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(where(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::string string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(where(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& node_;
  std::string path_;
};

AlgorithmSpec parse_algorithm(const json& node, const std::string& path) {
  Fields f(node, path, {"name", "T0", "checkpoint_base", "max_phases", "horizon"});
  AlgorithmSpec spec;
  const std::string name = f.string("name");
  if (name == "pet")
    spec.kind = AlgorithmKind::Pet;
  else if (name == "round_robin")
    spec.kind = AlgorithmKind::RoundRobin;
  else if (name == "batched_tas")
    spec.kind = AlgorithmKind::BatchedTas;
  else
    Fields::fail(f.where("name"), "unknown algorithm '" + name + "'");

  spec.T0 = f.number("T0", 1.0);
  if (!(spec.T0 >= 1.0)) Fields::fail(f.where("T0"), "must be >= 1");
  spec.checkpoint_base = f.integer("checkpoint_base", 900);
  spec.max_phases = static_cast<int>(f.integer("max_phases", 60));
  if (spec.max_phases < 1 || spec.max_phases > 1000)
    Fields::fail(f.where("max_phases"), "must lie in [1, 1000]");
  if (f.has("horizon")) {
    const std::string rule = f.string("horizon");
    if (rule == "standard")
      spec.horizon = HorizonRule::Standard;
    else if (rule == "conservative")
      spec.horizon = HorizonRule::Conservative;
    else
      Fields::fail(f.where("horizon"), "expected 'standard' or 'conservative'");
  }
  return spec;
}

InstanceSpec parse_instance(const json& node, int& num_arms) {
  Fields f(node, "$.instance", {"means", "generator", "num_arms", "best_mean", "low", "high"});
  InstanceSpec spec;
  if (f.has("means") == f.has("generator"))
    Fields::fail("$.instance", "give exactly one of 'means' or 'generator'");
  if (f.has("means")) {
    const json& arr = f.raw("means");
    if (!arr.is_array() || arr.size() < 2) Fields::fail(f.where("means"), "expected >= 2 numbers");
    Vector means(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number())
        Fields::fail(f.where("means") + "[" + std::to_string(i) + "]", "expected a number");
      means[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    for (const char* key : {"num_arms", "best_mean", "low", "high"})
      if (f.has(key)) Fields::fail(f.where(key), "only valid with a generator");
    num_arms = static_cast<int>(means.size());
    spec.means = std::move(means);
    return spec;
  }
  spec.generator = f.string("generator");
  if (spec.generator != "bai10")
    Fields::fail(f.where("generator"), "unknown generator '" + spec.generator + "'");
  spec.num_arms = static_cast<int>(f.integer("num_arms", 10));
  if (spec.num_arms < 2) Fields::fail(f.where("num_arms"), "must be >= 2");
  spec.best_mean = f.number("best_mean", 1.0);
  spec.low = f.number("low", 0.6);
  spec.high = f.number("high", 0.9);
  if (!(spec.low <= spec.high)) Fields::fail(f.where("low"), "must not exceed 'high'");
  if (!(spec.high < spec.best_mean)) Fields::fail(f.where("high"), "must be below 'best_mean'");
  num_arms = spec.num_arms;
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Fields f(doc, "$", {"name", "task", "instance", "sigma2", "delta", "algorithms", "trials",
                      "master_seed", "t_min"});
  ExperimentConfig cfg;
  if (f.has("name")) cfg.name = f.string("name");
  try {
    cfg.task = parse_task(f.string("task"));
  } catch (const std::invalid_argument& e) {
    Fields::fail(f.where("task"), e.what());
  }
  int num_arms = 0;
  cfg.instance = parse_instance(f.raw("instance"), num_arms);
  try {
    validate_task(cfg.task, num_arms);
  } catch (const std::invalid_argument& e) {
    Fields::fail(f.where("task"), e.what());
  }
  cfg.sigma2 = f.number("sigma2", 1.0);
  if (!(cfg.sigma2 > 0.0)) Fields::fail(f.where("sigma2"), "must be positive");
  cfg.delta = f.number("delta", 0.05);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) Fields::fail(f.where("delta"), "must lie in (0, 1)");
  cfg.trials = f.integer("trials", 1);
  if (cfg.trials < 1) Fields::fail(f.where("trials"), "must be >= 1");
  if (f.has("master_seed")) {
    const json& seed = f.raw("master_seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
      Fields::fail(f.where("master_seed"), "expected a nonnegative integer");
    cfg.master_seed = seed.get<std::uint64_t>();
  }
  if (f.has("t_min")) {
    cfg.t_min = f.number("t_min");
    if (!(*cfg.t_min > 0.0)) Fields::fail(f.where("t_min"), "must be positive");
  }
  const json& algos = f.raw("algorithms");
  if (!algos.is_array() || algos.empty())
    Fields::fail(f.where("algorithms"), "expected a non-empty array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < algos.size(); ++i) {
    const std::string path = "$.algorithms[" + std::to_string(i) + "]";
    AlgorithmSpec spec = parse_algorithm(algos[i], path);
    if (spec.kind != AlgorithmKind::Pet && spec.checkpoint_base < num_arms)
      Fields::fail(path + ".checkpoint_base", "must be >= number of arms");
    if (!seen.insert(spec.name()).second) Fields::fail(path, "duplicate algorithm");
    cfg.algorithms.push_back(spec);
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::uint64_t stream_id(std::int64_t trial, std::size_t slot) {
  return (static_cast<std::uint64_t>(trial) << 8) | static_cast<std::uint64_t>(slot & 0xff);
}

ProblemInstance trial_instance(const ExperimentConfig& cfg, std::int64_t trial) {
  const InstanceSpec& spec = cfg.instance;
  if (spec.means) return ProblemInstance(*spec.means, cfg.sigma2);
  RandomSource source(cfg.master_seed, stream_id(trial, 0));
  Vector means(spec.num_arms);
  means[0] = spec.best_mean;
  for (int i = 1; i < spec.num_arms; ++i) means[i] = source.uniform(spec.low, spec.high);
  return ProblemInstance(std::move(means), cfg.sigma2);
}

RunRecord run_algorithm(const AlgorithmSpec& spec, const Task& task, const ProblemInstance& inst,
                        double delta, RandomSource& source) {
  switch (spec.kind) {
    case AlgorithmKind::Pet:
      return pet_run(task, inst, PetConfig{spec.T0, delta, spec.max_phases, spec.horizon}, source);
    case AlgorithmKind::RoundRobin:
      return round_robin_run(task, inst, delta, spec.checkpoint_base, source, spec.max_phases);
    case AlgorithmKind::BatchedTas:
      return batched_tas_run(task, inst, delta, spec.checkpoint_base, source, spec.max_phases);
  }
  throw std::logic_error("unhandled algorithm kind");
}

RunRecord run_trial(const ExperimentConfig& cfg, std::int64_t trial, std::size_t algorithm_index) {
  if (trial < 0 || trial >= cfg.trials) throw ConfigError("trial index out of range");
  if (algorithm_index >= cfg.algorithms.size()) throw ConfigError("algorithm index out of range");
  const ProblemInstance inst = trial_instance(cfg, trial);
  correct_answer(cfg.task, inst);  // refuse degenerate instances up front
  RandomSource source(cfg.master_seed, stream_id(trial, algorithm_index + 1));
  return run_algorithm(cfg.algorithms[algorithm_index], cfg.task, inst, cfg.delta, source);
}

Distribution summarize(std::vector<double> values) {
  Distribution d;
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  double total = 0.0;
  for (double v : values) total += v;
  d.mean = total / static_cast<double>(values.size());
  d.median = quantile(0.5);
  d.q25 = quantile(0.25);
  d.q75 = quantile(0.75);
  d.q95 = quantile(0.95);
  d.min = values.front();
  d.max = values.back();
  return d;
}

const AlgorithmSummary* BenchSummary::find(const std::string& name) const {
  for (const auto& a : algorithms)
    if (a.name == name) return &a;
  return nullptr;
}

bool BenchSummary::any_incomplete() const {
  return std::any_of(algorithms.begin(), algorithms.end(),
                     [](const AlgorithmSummary& a) { return a.incomplete > 0; });
}

BenchSummary run_campaign(const ExperimentConfig& cfg, int workers) {
  if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");
  if (cfg.instance.means) correct_answer(cfg.task, ProblemInstance(*cfg.instance.means, cfg.sigma2));

  const auto trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t num_algos = cfg.algorithms.size();
  BenchSummary summary;
  summary.config = cfg;
  summary.instances.resize(trials);
  summary.rows.resize(trials * num_algos);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::size_t trial = next++; trial < trials && !failed; trial = next++) {
        const auto t = static_cast<std::int64_t>(trial);
        const ProblemInstance inst = trial_instance(cfg, t);
        const auto ct = char_time(cfg.task, inst);
        summary.instances[trial] = {t, inst.means, ct.t_star.is_finite() ? ct.t_star.value() : 0.0};
        for (std::size_t a = 0; a < num_algos; ++a) {
          RandomSource source(cfg.master_seed, stream_id(t, a + 1));
          const RunRecord rec = run_algorithm(cfg.algorithms[a], cfg.task, inst, cfg.delta, source);
          TrialRow& row = summary.rows[trial * num_algos + a];
          row.trial = t;
          row.algorithm = rec.algorithm;
          row.correct = rec.correct;
          row.incomplete = rec.incomplete;
          row.samples = rec.samples;
          row.batches = rec.batches;
          row.phases = static_cast<std::int64_t>(rec.phases.size());
          row.seed = source.stream_id();
          row.wall_seconds = std::chrono::duration<double>(rec.wall_clock).count();
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(trials)));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t a = 0; a < num_algos; ++a) {
    AlgorithmSummary s;
    s.name = cfg.algorithms[a].name();
    std::vector<double> samples;
    std::vector<double> batches;
    double wall = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      const TrialRow& row = summary.rows[trial * num_algos + a];
      ++s.trials;
      if (!row.correct) ++s.errors;
      if (row.incomplete) ++s.incomplete;
      samples.push_back(static_cast<double>(row.samples));
      batches.push_back(static_cast<double>(row.batches));
      wall += row.wall_seconds;
    }
    s.error_rate = static_cast<double>(s.errors) / static_cast<double>(s.trials);
    s.samples = summarize(std::move(samples));
    s.batches = summarize(std::move(batches));
    s.mean_wall_seconds = wall / static_cast<double>(s.trials);
    summary.algorithms.push_back(std::move(s));
  }
  return summary;
}

void write_csv(const BenchSummary& summary, std::ostream& out) {
  out << "trial,algorithm,correct,samples,batches,phases,seed\n";
  for (const auto& row : summary.rows)
    out << row.trial << ',' << row.algorithm << ',' << (row.correct ? 1 : 0) << ',' << row.samples
        << ',' << row.batches << ',' << row.phases << ',' << row.seed << '\n';
}

void write_instances_csv(const BenchSummary& summary, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "trial,t_star";
  const Eigen::Index num_arms = summary.instances.empty() ? 0 : summary.instances.front().means.size();
  for (Eigen::Index i = 0; i < num_arms; ++i) out << ",mu" << i;
  out << '\n';
  for (const auto& inst : summary.instances) {
    out << inst.trial << ',' << inst.t_star;
    for (Eigen::Index i = 0; i < inst.means.size(); ++i) out << ',' << inst.means[i];
    out << '\n';
  }
  out.precision(old_precision);
}

double t_star_b(double t_star, double sigma2) {
  const double b = std::sqrt(sigma2 / (8.0 * t_star));
  return std::max(sigma2 / (b * b), 2.0 * std::numbers::e * t_star);
}

double pet_upper_batches(double t_star, double sigma2, double T0) {
  const double tb = t_star_b(t_star, sigma2);
  return std::log2(tb / T0) + std::log2(tb / t_star) + 2.0;
}

double pet_upper_samples(double t_star, double sigma2, double T0, double delta, int num_arms) {
  const double tb = t_star_b(t_star, sigma2);
  const double k = num_arms;
  return 4.0 * std::log(1.0 / delta) * (tb + 1.0 / T0) +
         20.0 * k * (std::log(k) + 4.0) * (tb + 1.0 / T0) +
         48.0 * k * (tb * std::log(tb) + std::log(4.0 * T0) / T0);
}

namespace {

const AlgorithmSpec* find_spec(const ExperimentConfig& cfg, const std::string& name) {
  for (const auto& spec : cfg.algorithms)
    if (spec.name() == name) return &spec;
  return nullptr;
}

}  // namespace

BoundsReport evaluate_bounds(const BenchSummary& summary, const ProblemInstance& inst,
                             const Task& task, double t_min) {
  const AlgorithmSummary* pet = summary.find("pet");
  const AlgorithmSpec* spec = find_spec(summary.config, "pet");
  if (!pet || !spec) throw std::invalid_argument("summary has no PET entry");
  const auto ct = char_time(task, inst);
  if (!ct.t_star.is_finite()) throw DegenerateInstance("bounds need a non-degenerate instance");

  BoundsReport r;
  r.t_star = ct.t_star.value();
  r.t_star_b = t_star_b(r.t_star, inst.sigma2);
  r.T0 = spec->T0;
  r.t_min = t_min;
  r.mean_batches = pet->batches.mean;
  r.mean_samples = pet->samples.mean;
  const double delta = summary.config.delta;
  r.measured_gamma = r.mean_samples / (std::log(1.0 / delta) * r.t_star);
  r.upper_batches = pet_upper_batches(r.t_star, inst.sigma2, r.T0);
  r.upper_samples = pet_upper_samples(r.t_star, inst.sigma2, r.T0, delta, inst.num_arms());
  if (r.t_star >= t_min) {
    r.lower_batches = batch_lower_bound({r.t_star, t_min, delta, r.measured_gamma,
                                         spread_for_task(task, inst.means), inst.sigma2});
  }
  r.consistent_with_lower = r.mean_batches >= r.lower_batches;
  r.within_upper_batches = r.mean_batches <= r.upper_batches;
  r.within_upper_samples = r.mean_samples <= r.upper_samples;
  return r;
}

CampaignBounds evaluate_campaign_bounds(const BenchSummary& summary, const std::string& algorithm) {
  const ExperimentConfig& cfg = summary.config;
  const AlgorithmSpec* spec = find_spec(cfg, algorithm);
  if (!spec) throw std::invalid_argument("no algorithm named " + algorithm);
  const std::size_t num_algos = cfg.algorithms.size();
  const std::size_t index = static_cast<std::size_t>(spec - cfg.algorithms.data());
  const double t_min = cfg.t_min.value_or(spec->T0);
  const double log_inv_delta = std::log(1.0 / cfg.delta);

  CampaignBounds out;
  std::size_t counted = 0;
  for (std::size_t trial = 0; trial < summary.instances.size(); ++trial) {
    const TrialInstance& inst = summary.instances[trial];
    if (inst.t_star <= 0.0) continue;
    const TrialRow& row = summary.rows[trial * num_algos + index];
    out.measured_gamma = std::max(out.measured_gamma,
                                  static_cast<double>(row.samples) / (log_inv_delta * inst.t_star));
  }
  for (std::size_t trial = 0; trial < summary.instances.size(); ++trial) {
    const TrialInstance& inst = summary.instances[trial];
    if (inst.t_star <= 0.0) continue;
    const TrialRow& row = summary.rows[trial * num_algos + index];
    out.mean_upper_batches += pet_upper_batches(inst.t_star, cfg.sigma2, spec->T0);
    if (inst.t_star >= t_min)
      out.mean_lower_batches += batch_lower_bound({inst.t_star, t_min, cfg.delta, out.measured_gamma,
                                                   spread_for_task(cfg.task, inst.means), cfg.sigma2});
    out.mean_batches += static_cast<double>(row.batches);
    ++counted;
  }
  if (counted > 0) {
    out.mean_upper_batches /= static_cast<double>(counted);
    out.mean_lower_batches /= static_cast<double>(counted);
    out.mean_batches /= static_cast<double>(counted);
  }
  return out;
}

namespace {

json complexity_json(const Complexity& c) {
  if (c.is_finite()) return c.value();
  return "inf";
}

json distribution_json(const Distribution& d) {
  return {{"mean", d.mean}, {"median", d.median}, {"q25", d.q25}, {"q75", d.q75},
          {"q95", d.q95},   {"min", d.min},       {"max", d.max}};
}

template <typename V>
json vector_json(const V& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

json to_json(const RunRecord& rec) {
  json phases = json::array();
  for (const auto& p : rec.phases) {
    json entry = {{"r", p.r},
                  {"T_r", p.T_r},
                  {"l1r", p.l1r},
                  {"eps_r", p.eps_r},
                  {"p_r", p.p_r},
                  {"entered_second_batch", p.entered_second_batch},
                  {"t_bar_estimate", complexity_json(p.t_bar_estimate)},
                  {"gamma_r", p.gamma_r ? json(*p.gamma_r) : json(nullptr)},
                  {"samples_after_phase", p.samples_after_phase},
                  {"statistic", p.statistic},
                  {"threshold", p.threshold},
                  {"stopped", p.stopped}};
    phases.push_back(std::move(entry));
  }
  return {{"algorithm", rec.algorithm},
          {"answer", rec.answer.arms},
          {"correct", rec.correct},
          {"incomplete", rec.incomplete},
          {"samples", rec.samples},
          {"batches", rec.batches},
          {"final_counts", vector_json(rec.final_counts)},
          {"wall_clock_seconds", std::chrono::duration<double>(rec.wall_clock).count()},
          {"phases", std::move(phases)}};
}

json to_json(const BoundsReport& r) {
  return {{"t_star", r.t_star},
          {"t_star_b", r.t_star_b},
          {"T0", r.T0},
          {"t_min", r.t_min},
          {"measured_gamma", r.measured_gamma},
          {"mean_batches", r.mean_batches},
          {"mean_samples", r.mean_samples},
          {"upper_batches", r.upper_batches},
          {"upper_samples", r.upper_samples},
          {"lower_batches", r.lower_batches},
          {"lower_batches_floor", std::floor(r.lower_batches)},
          {"consistent_with_lower", r.consistent_with_lower},
          {"within_upper_batches", r.within_upper_batches},
          {"within_upper_samples", r.within_upper_samples}};
}

json summary_to_json(const BenchSummary& summary) {
  const ExperimentConfig& cfg = summary.config;
  json algos = json::array();
  for (const auto& a : summary.algorithms) {
    algos.push_back({{"name", a.name},
                     {"trials", a.trials},
                     {"errors", a.errors},
                     {"incomplete", a.incomplete},
                     {"error_rate", a.error_rate},
                     {"samples", distribution_json(a.samples)},
                     {"batches", distribution_json(a.batches)},
                     {"mean_wall_seconds", a.mean_wall_seconds}});
  }
  json out = {{"name", cfg.name},
              {"task", to_string(cfg.task)},
              {"sigma2", cfg.sigma2},
              {"delta", cfg.delta},
              {"trials", cfg.trials},
              {"master_seed", cfg.master_seed},
              {"algorithms", std::move(algos)}};
  if (summary.find("pet")) {
    const double t_min = cfg.t_min.value_or(find_spec(cfg, "pet")->T0);
    if (cfg.instance.means) {
      const ProblemInstance inst(*cfg.instance.means, cfg.sigma2);
      out["bounds"] = to_json(evaluate_bounds(summary, inst, cfg.task, t_min));
    } else {
      const CampaignBounds b = evaluate_campaign_bounds(summary, "pet");
      out["bounds"] = {{"measured_gamma", b.measured_gamma},
                       {"mean_upper_batches", b.mean_upper_batches},
                       {"mean_lower_batches", b.mean_lower_batches},
                       {"mean_batches", b.mean_batches}};
    }
  }
  return out;
}

}  // namespace pet
