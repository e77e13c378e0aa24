// Command line front end: characteristic times, ball complexities, single
// replayed runs, Monte Carlo campaigns and the batch lower bound.

#include "pet/complexity.hpp"
#include "pet/harness.hpp"
#include "pet/lowerbound.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitPhaseCap = 4;

pet::Vector parse_csv(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    try {
      values.push_back(std::stod(item, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw pet::ConfigError("cannot parse number '" + item + "'");
  }
  return Eigen::Map<pet::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json vec(const pet::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json complexity(const pet::Complexity& c) {
  if (c.is_finite()) return c.value();
  return "inf";
}

pet::Task task_arg(const std::string& text) {
  try {
    return pet::parse_task(text);
  } catch (const std::invalid_argument& e) {
    throw pet::ConfigError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched fixed-confidence pure exploration toolkit"};
  app.require_subcommand(1);

  std::string task_text;
  std::string means_text;
  double sigma2 = 1.0;
  auto* solve = app.add_subcommand("solve", "characteristic time T* and optimal allocation w*");
  solve->add_option("--task", task_text, "topk:<k> | threshold:<tau>")->required();
  solve->add_option("--means", means_text, "comma separated arm means")->required();
  solve->add_option("--sigma2", sigma2, "reward variance");

  std::string center_text;
  double radius = 0.0;
  auto* ball = app.add_subcommand("ball", "hardest instance and worst-case complexity of a ball");
  ball->add_option("--task", task_text)->required();
  ball->add_option("--center", center_text, "comma separated ball center")->required();
  ball->add_option("--radius", radius, "infinity-norm radius")->required();
  ball->add_option("--sigma2", sigma2);

  std::string config_path;
  std::int64_t trial = 0;
  std::string algorithm;
  auto* run = app.add_subcommand("run", "replay one trial and print its RunRecord");
  run->add_option("--config", config_path)->required();
  run->add_option("--trial", trial)->required();
  run->add_option("--algorithm", algorithm, "algorithm name (default: first configured)");

  std::string out_dir;
  int workers = 1;
  auto* bench = app.add_subcommand("bench", "run a campaign, write CSV and JSON summary");
  bench->add_option("--config", config_path)->required();
  bench->add_option("--out", out_dir)->required();
  bench->add_option("--workers", workers)->check(CLI::PositiveNumber);

  pet::LowerBoundInput lb;
  auto* lower = app.add_subcommand("lowerbound", "batch complexity lower bound");
  lower->add_option("--tstar", lb.t_star)->required();
  lower->add_option("--tmin", lb.t_min)->required();
  lower->add_option("--delta", lb.delta)->required();
  lower->add_option("--gamma", lb.gamma)->required();
  lower->add_option("--bigdelta", lb.big_delta)->required();
  lower->add_option("--sigma2", lb.sigma2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*solve) {
      const pet::Task task = task_arg(task_text);
      const pet::ProblemInstance inst(parse_csv(means_text), sigma2);
      pet::validate_task(task, inst.num_arms());
      const auto ct = pet::char_time(task, inst);
      std::cout << nlohmann::json{{"task", pet::to_string(task)},
                                  {"t_star", complexity(ct.t_star)},
                                  {"w_star", vec(ct.w_star.weights)}}
                       .dump(2)
                << '\n';
      return ct.t_star.is_finite() ? 0 : kExitDegenerate;
    }
    if (*ball) {
      const pet::Task task = task_arg(task_text);
      const pet::Vector center = parse_csv(center_text);
      if (center.size() < 2) throw pet::ConfigError("center needs at least 2 arms");
      pet::validate_task(task, static_cast<int>(center.size()));
      const auto bc = pet::ball_complexity(task, pet::Ball{center, radius}, sigma2);
      std::cout << nlohmann::json{{"task", pet::to_string(task)},
                                  {"hardest", bc.hardest ? vec(*bc.hardest) : nlohmann::json(nullptr)},
                                  {"t_bar", complexity(bc.t_bar)},
                                  {"w_bar", vec(bc.w_bar.weights)}}
                       .dump(2)
                << '\n';
      return 0;
    }
    if (*run) {
      const pet::ExperimentConfig cfg = pet::load_config(config_path);
      std::size_t index = 0;
      if (!algorithm.empty()) {
        while (index < cfg.algorithms.size() && cfg.algorithms[index].name() != algorithm) ++index;
        if (index == cfg.algorithms.size())
          throw pet::ConfigError("algorithm '" + algorithm + "' is not configured");
      }
      const pet::RunRecord rec = pet::run_trial(cfg, trial, index);
      const pet::ProblemInstance inst = pet::trial_instance(cfg, trial);
      std::cout << nlohmann::json{{"trial", trial},
                                  {"seed", pet::stream_id(trial, index + 1)},
                                  {"means", vec(inst.means)},
                                  {"record", pet::to_json(rec)}}
                       .dump(2)
                << '\n';
      return rec.incomplete ? kExitPhaseCap : 0;
    }
    if (*bench) {
      const pet::ExperimentConfig cfg = pet::load_config(config_path);
      const pet::BenchSummary summary = pet::run_campaign(cfg, workers);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      std::ofstream csv(dir / "runs.csv");
      pet::write_csv(summary, csv);
      std::ofstream instances(dir / "instances.csv");
      pet::write_instances_csv(summary, instances);
      std::ofstream json(dir / "summary.json");
      json << pet::summary_to_json(summary).dump(2) << '\n';
      for (const auto& a : summary.algorithms)
        std::cout << a.name << ": error_rate=" << a.error_rate << " mean_samples=" << a.samples.mean
                  << " mean_batches=" << a.batches.mean << '\n';
      return summary.any_incomplete() ? kExitPhaseCap : 0;
    }
    if (*lower) {
      const auto terms = pet::batch_lower_bound_terms(lb);
      std::cout << nlohmann::json{{"value", terms.value},
                                  {"floor", std::floor(terms.value)},
                                  {"log_ratio_term", terms.log_ratio_term},
                                  {"sixth_log_term", terms.sixth_log_term},
                                  {"delta_term", terms.delta_term},
                                  {"c_delta", terms.c_delta}}
                       .dump(2)
                << '\n';
      return 0;
    }
  } catch (const pet::DegenerateInstance& e) {
    std::cerr << "degenerate instance: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const pet::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
