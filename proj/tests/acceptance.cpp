// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "pet/algorithms.hpp"
#include "pet/complexity.hpp"
#include "pet/harness.hpp"
#include "pet/lowerbound.hpp"
#include "pet/stopping.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace pet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
  return buf;
}

Vector random_means(RandomSource& rng, int k_arms, double lo = -1.0, double hi = 1.0) {
  Vector m(k_arms);
  for (int i = 0; i < k_arms; ++i) m[i] = rng.uniform(lo, hi);
  return m;
}

Task random_task(RandomSource& rng, int k_arms, int rep) {
  if (rep % 2 == 0) return Thresholding{rng.uniform(-0.5, 0.5)};
  return TopK{1 + static_cast<int>(rng.uniform(0.0, k_arms - 1.0))};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. characteristic time against closed forms and exhaustive grids
Outcome characteristic_time() {
  RandomSource rng(101, 0);
  double worst_two = 0.0;
  for (int i = 0; i < 50; ++i) {
    Vector mu = random_means(rng, 2);
    const double sigma2 = rng.uniform(0.25, 4.0);
    const double gap = mu[0] - mu[1];
    worst_two = std::max(worst_two, rel(char_time(TopK{1}, mu, sigma2).t_star.value(), 8.0 * sigma2 / (gap * gap)));
  }
  double worst_tbp = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vector mu = random_means(rng, 2 + i % 9);
    const double tau = rng.uniform(-0.5, 0.5);
    const double sigma2 = rng.uniform(0.25, 4.0);
    const double closed = 2.0 * sigma2 * (mu.array() - tau).square().inverse().sum();
    const auto numeric = solve_allocation(Thresholding{tau}, mu, sigma2);
    worst_tbp = std::max(worst_tbp, rel(numeric.t_star.value(), closed));
    worst_tbp = std::max(worst_tbp, rel(char_time(Thresholding{tau}, mu, sigma2).t_star.value(), closed));
  }
  double worst_grid = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vector mu = random_means(rng, 3, 0.0, 1.0);
    const int k = 1 + i % 2;
    const auto grid = oracle::simplex_grid_max(
        3, 1e-3, [&](const Eigen::VectorXd& w) { return oracle::topk_value(w, mu, k, 1.0); });
    worst_grid = std::max(worst_grid, rel(char_time(TopK{k}, mu, 1.0).t_star.value(), 1.0 / grid.value));
  }
  return {worst_two <= 1e-6 && worst_tbp <= 1e-6 && worst_grid <= 1e-3,
          fmt("2-arm rel err %.2e, TBP closed vs optimizer %.2e, K=3 grid %.2e", worst_two, worst_tbp,
              worst_grid)};
}

// 2. no instance of a ball is harder than its hardest corner
Outcome hardest_dominance() {
  RandomSource rng(202, 0);
  int balls = 0;
  int violations = 0;
  double worst_ratio = 0.0;
  double min_corner_ratio = 1e300;
  for (int rep = 0; balls < 200; ++rep) {
    const int k_arms = 2 + rep % 5;
    const Vector mu = random_means(rng, k_arms);
    const Task task = random_task(rng, k_arms, rep);
    const double eps = rng.uniform(0.0, 0.2);
    const auto bc = ball_complexity(task, Ball{mu, eps}, 1.0);
    if (!bc.t_bar.is_finite()) continue;
    ++balls;
    const double t_bar = bc.t_bar.value();
    double corner_max = 0.0;
    for (int j = 0; j < 1000; ++j) {
      Vector other = mu;
      const bool corner = j % 2 == 1;
      for (int i = 0; i < k_arms; ++i)
        other[i] += corner ? (rng.uniform(0.0, 1.0) < 0.5 ? -eps : eps) : rng.uniform(-eps, eps);
      const double t = char_time(task, other, 1.0).t_star.value();
      worst_ratio = std::max(worst_ratio, t / t_bar);
      if (t > t_bar * (1.0 + 1e-6)) ++violations;
      if (corner) corner_max = std::max(corner_max, t);
    }
    min_corner_ratio = std::min(min_corner_ratio, corner_max / t_bar);
  }
  return {violations == 0 && min_corner_ratio >= 0.9,
          fmt("%.0f balls, max T*/Tbar %.9f, violations %.0f, worst corner-sampled max/Tbar %.4f", balls,
              worst_ratio, violations, min_corner_ratio)};
}

// 3. shrinking an instance by x multiplies T* by 1/x^2
Outcome scale_invariance() {
  RandomSource rng(303, 0);
  double worst = 0.0;
  for (int task_kind = 0; task_kind < 2; ++task_kind) {
    for (int i = 0; i < 50; ++i) {
      const int k_arms = 2 + i % 7;
      const Vector mu = random_means(rng, k_arms);
      const Task task = task_kind == 0 ? Task{TopK{1 + i % (k_arms - 1)}} : Task{Thresholding{0.1}};
      const double y = task_kind == 0 ? rng.uniform(-1.0, 1.0) : 0.1;
      const double t = char_time(task, mu, 1.0).t_star.value();
      for (double x : {0.1, 0.5, 0.9}) {
        const double scaled = char_time(task, scale_instance(mu, x, y), 1.0).t_star.value();
        worst = std::max(worst, rel(scaled * x * x, t));
      }
    }
  }
  return {worst <= 1e-5, fmt("worst relative deviation %.2e over 300 scaled instances", worst)};
}

// 4. threshold: Wbar residual, beta sandwich and coverage under the null
Outcome threshold() {
  RandomSource rng(404, 0);
  long double worst_residual = 0.0L;
  for (int i = 0; i <= 100000; ++i) {
    const long double x = i == 100000 ? 1e6L : 1.0L + std::pow(10.0L, (long double)rng.uniform(-12.0, 6.0));
    if (x > 1e6L) continue;
    const long double w = lambert_wbar(x);
    worst_residual = std::max(worst_residual, std::abs(w - std::log(w) - x));
  }

  const double log_e_pi2 = std::log(std::numbers::e * std::numbers::pi * std::numbers::pi / 6.0);
  int sandwich_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const int k = 1 + static_cast<int>(rng.uniform(0.0, 20.0));
    const double delta = std::pow(10.0, rng.uniform(-10.0, -0.01));
    const double t = std::ceil(k * std::pow(10.0, rng.uniform(0.0, 9.0)));
    const double x = 2.0 / k * std::log(1.0 / delta) + 4.0 * std::log(std::log(std::numbers::e * t / k)) +
                     2.0 * log_e_pi2;
    const double b = beta_threshold(t, ThresholdParams(delta, k));
    const double lo = k / 2.0 * (x + std::log(x));
    const double hi = k / 2.0 * (x + std::log(x) + 0.5);
    if (b < lo * (1.0 - 1e-14) || b > hi * (1.0 + 1e-14)) ++sandwich_fail;
  }

  // uniform sampling on a fixed instance, statistic at the true means,
  // checked after every round up to t_max = 1e4
  const double delta = 0.1;
  const int k_arms = 3;
  const ProblemInstance inst((Vector(3) << 1.0, 0.5, 0.0).finished(), 1.0);
  const ThresholdParams params(delta, k_arms);
  std::vector<double> beta(10000 / k_arms + 1);
  for (std::size_t n = 1; n < beta.size(); ++n) beta[n] = beta_threshold(double(n * k_arms), params);
  const int trajectories = 2000;
  int crossed = 0;
  for (int j = 0; j < trajectories; ++j) {
    RandomSource src(405, std::uint64_t(j));
    double dev[3] = {0.0, 0.0, 0.0};
    for (std::size_t n = 1; n < beta.size(); ++n) {
      double stat = 0.0;
      for (int i = 0; i < k_arms; ++i) {
        dev[i] += draw_rewards(src, inst, i, 1) - inst.means[i];
        stat += dev[i] * dev[i] / (2.0 * double(n));
      }
      if (stat > beta[n]) {
        ++crossed;
        break;
      }
    }
  }
  const double rate = double(crossed) / trajectories;
  const double bound = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trajectories);
  return {worst_residual <= 1e-12L && sandwich_fail == 0 && rate <= bound,
          fmt("Wbar max residual %.2e, sandwich failures %.0f, null false-stop rate %.4f (limit %.4f)",
              double(worst_residual), sandwich_fail, rate, bound)};
}

// 5. gamma_r fixed point and its upper bound
Outcome gamma_fixed_point() {
  double worst_residual = 0.0;
  double worst_slack = 1e300;
  for (int k : {2, 10})
    for (double delta : {0.1, 0.05, 1e-4})
      for (int r = 0; r <= 20; ++r) {
        const ThresholdParams p(delta, k);
        const PhaseSchedule s = phase_schedule(r, 1.0, k, 1.0);
        const TrackingBudget g = gamma_r(r, 1.0, p, s.l1r);
        worst_residual = std::max(worst_residual, rel(beta_threshold(g.t_bar, p), g.gamma));
        const double bound = 4.0 * std::log(1.0 / delta) + 8.0 * k * std::log(s.T_r) + 4.0 * k * (11.0 + std::log(k));
        worst_slack = std::min(worst_slack, bound - g.gamma);
      }
  return {worst_residual <= 1e-9 && worst_slack >= 0.0,
          fmt("max relative residual %.2e, min (bound - gamma) %.3f over 126 grid points", worst_residual,
              worst_slack)};
}

const AlgorithmSummary& need(const BenchSummary& s, const std::string& name) {
  const AlgorithmSummary* a = s.find(name);
  if (!a) throw std::runtime_error("campaign has no '" + name + "' entry");
  return *a;
}

// 6. random 10-arm BAI campaign
Outcome bai_campaign() {
  const ExperimentConfig cfg = load_config(PET_CONFIG_DIR "/bai10.json");
  const BenchSummary s = run_campaign(cfg, 1);
  const auto& pet = need(s, "pet");
  const auto& rr = need(s, "round_robin");
  const CampaignBounds b = evaluate_campaign_bounds(s, "pet");
  const bool ok = pet.error_rate <= 0.05 && b.mean_batches <= b.mean_upper_batches &&
                  b.mean_lower_batches <= b.mean_batches && pet.samples.mean < rr.samples.mean;
  return {ok, fmt("PET error %.3f, mean batches %.3f within [%.3f, %.3f]", pet.error_rate, b.mean_batches,
                  b.mean_lower_batches, b.mean_upper_batches) +
                  fmt("; mean samples PET %.0f vs round robin %.0f", pet.samples.mean, rr.samples.mean)};
}

// 7. near-threshold TBP instance
Outcome tbp_campaign() {
  const ExperimentConfig cfg = load_config(PET_CONFIG_DIR "/tbp_interpreted.json");
  const BenchSummary s = run_campaign(cfg, 1);
  const auto& pet = need(s, "pet");
  const auto& tas = need(s, "batched_tas");
  return {pet.samples.mean < tas.samples.mean && pet.error_rate <= 0.05 && tas.error_rate <= 0.05,
          fmt("mean samples PET %.0f vs batched TaS %.0f; errors %.3f / %.3f", pet.samples.mean,
              tas.samples.mean, pet.error_rate, tas.error_rate)};
}

// 8. starting at the right complexity needs few batches
Outcome known_complexity() {
  const ExperimentConfig base = load_config(PET_CONFIG_DIR "/known_complexity.json");
  const ProblemInstance inst = trial_instance(base, 0);
  ExperimentConfig cfg = base;
  cfg.algorithms.at(0).T0 = t_star_b(char_time(cfg.task, inst).t_star.value(), inst.sigma2);
  const BenchSummary s = run_campaign(cfg, 1);
  std::int64_t few = 0;
  for (const auto& row : s.rows) few += row.batches <= 5;
  const double share = double(few) / double(s.rows.size());
  return {share >= 0.95 && s.rows.size() == 500,
          fmt("T0 = %.1f, %.1f%% of %.0f runs used <= 5 batches, max %.0f", cfg.algorithms[0].T0,
              100.0 * share, double(s.rows.size()), need(s, "pet").batches.max)};
}

// 9. ln T* is Lipschitz near an instance
Outcome lipschitz() {
  RandomSource rng(909, 0);
  int violations = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const int k_arms = 2 + rep % 6;
    const Vector mu = random_means(rng, k_arms);
    const Task task = random_task(rng, k_arms, rep);
    const double sigma2 = rng.uniform(0.5, 2.0);
    const double t = char_time(task, mu, sigma2).t_star.value();
    const double radius = std::sqrt(sigma2 / (2.0 * t)) * rng.uniform(0.0, 1.0);
    Vector other = mu;
    for (int i = 0; i < k_arms; ++i) other[i] += rng.uniform(-radius, radius);
    const double dist = (other - mu).cwiseAbs().maxCoeff();
    const double lhs = std::abs(std::log(char_time(task, other, sigma2).t_star.value()) - std::log(t));
    const double rhs = std::sqrt(8.0 * t / sigma2) * dist;
    if (lhs > rhs * (1.0 + 1e-9) + 1e-12) ++violations;
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
  }
  return {violations == 0, fmt("500 pairs, violations %.0f, max lhs/rhs %.4f", violations, worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. bench output is a function of the config
Outcome determinism() {
  const std::filesystem::path out = std::filesystem::temp_directory_path() / "pet_acceptance_bench";
  std::filesystem::remove_all(out);
  const std::string config = PET_CONFIG_DIR "/bai10.json";
  auto bench = [&](const std::string& dir, int workers) {
    const std::string cmd = std::string(PET_CLI) + " bench --config " + config + " --out " +
                            (out / dir).string() + " --workers " + std::to_string(workers) + " > /dev/null";
    return std::system(cmd.c_str());
  };
  const int rc = bench("a", 1) | bench("b", 1) | bench("c", 8);
  const std::string a = slurp(out / "a" / "runs.csv");
  const bool repeat = !a.empty() && a == slurp(out / "b" / "runs.csv");
  const bool workers = a == slurp(out / "c" / "runs.csv");
  const bool instances = slurp(out / "a" / "instances.csv") == slurp(out / "c" / "instances.csv");
  std::filesystem::remove_all(out);
  return {rc == 0 && repeat && workers && instances,
          std::string("re-run identical: ") + (repeat ? "yes" : "no") + ", 1 vs 8 workers identical: " +
              (workers && instances ? "yes" : "no") + ", exit status " + std::to_string(rc)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "characteristic-time oracles", 10, characteristic_time},
      {2, "hardest-instance dominance", 60, hardest_dominance},
      {3, "scale invariance", 0, scale_invariance},
      {4, "threshold correctness", 120, threshold},
      {5, "gamma_r fixed point", 0, gamma_fixed_point},
      {6, "random BAI campaign", 600, bai_campaign},
      {7, "near-threshold TBP campaign", 600, tbp_campaign},
      {8, "known-complexity fast stop", 0, known_complexity},
      {9, "Lipschitz property of ln T*", 0, lipschitz},
      {10, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds > c.limit_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.limit_seconds);
    }
    failures += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << " (" << fmt("%.1f s", seconds)
              << "): " << o.detail << std::endl;
  }
  std::cout << (10 - failures) << "/10 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
