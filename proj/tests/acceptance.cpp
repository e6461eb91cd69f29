// Acceptance suite: one PASS/FAIL line per criterion. Long-running; the
// expensive experiment runs are shared between criteria.

#include "emi/envs/env.hpp"
#include "emi/error.hpp"
#include "emi/harness/analysis.hpp"
#include "emi/harness/config.hpp"
#include "emi/harness/experiment.hpp"
#include "emi/mi/mi.hpp"
#include "emi/numcore/allocator.hpp"
#include "emi/objective/objective.hpp"

#include "support.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace fs = std::filesystem;
using namespace emi;
using namespace emi::testing;
using num::Matrix;

namespace {

const double kLog4 = std::log(4.0);

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

envs::EnvSpec small_image_spec(int side, bool continuous) {
  envs::EnvSpec s = image_spec(side, 4);
  if (continuous) {
    s.action = ActionEncoding::continuous(2);
    s.action_low.assign(2, -1.0);
    s.action_high.assign(2, 1.0);
  }
  return s;
}

// ---- criterion 1 -----------------------------------------------------------

Outcome gradient_correctness() {
  const Stopwatch clock;
  std::vector<envs::EnvSpec> specs{envs::make_env_factory("sparsepoint")(0)->spec(),
                                   small_image_spec(5, true), small_image_spec(5, false)};
  std::set<std::string> covered;
  double worst = 0.0;
  std::size_t entries = 0;
  std::string failure;
  for (const auto& spec : specs) {
    for (const NetworkCheck& c : check_network_gradients(spec, 11)) {
      covered.insert(c.name);
      worst = std::max(worst, c.result.max_error);
      entries += c.result.entries;
      if (!c.result.ok && failure.empty()) failure = spec.name + "/" + c.name + ": " + c.result.worst;
    }
  }
  const double t = clock.seconds();
  const bool all_networks = covered.size() == 7;
  Outcome o;
  o.pass = failure.empty() && worst <= 1e-4 && all_networks && t < 60.0;
  o.detail = fmt("%zu networks, %zu entries, max rel error %.2e, %.1f s", covered.size(), entries, worst, t);
  if (!failure.empty()) o.detail += "; " + failure;
  return o;
}

// ---- criterion 2 -----------------------------------------------------------

long double kl_reference(const std::vector<long double>& mu, const std::vector<long double>& var) {
  long double kl = 0.0L;
  for (std::size_t j = 0; j < mu.size(); ++j) kl += 0.5L * (mu[j] * mu[j] + var[j] - std::log(var[j]) - 1.0L);
  return kl;
}

Outcome analytic_identities() {
  std::vector<std::string> failures;

  for (int m : {1, 2, 7, 64}) {
    const std::vector<double> zeros(static_cast<std::size_t>(m), 0.0);
    if (jsd_bound(zeros, zeros) != 0.0) failures.push_back(fmt("jsd_bound(0) m=%d", m));
  }

  double zero_critic_err = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    num::Rng rng(seed);
    const auto spec = seed % 2 ? vector_spec(3, 2) : image_spec(5, 4);
    EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
    model.statistics_net(StatisticsSide::State).set_zero();
    model.statistics_net(StatisticsSide::Action).set_zero();
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(seed);
    const Batch b{random_observations(spec.observation, m, rng), random_actions(spec.action, m, rng),
                  random_observations(spec.observation, m, rng)};
    zero_critic_err = std::max(zero_critic_err, std::abs(l_info(model, b).loss - 4.0 * std::log(2.0)));
  }
  if (zero_critic_err > 1e-10) failures.push_back(fmt("l_info(T=0) off by %.2e", zero_critic_err));

  double identity_err = 0.0;
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    num::Rng rng(seed);
    std::uniform_int_distribution<int> rows(2, 40);
    const auto spec = seed % 3 == 0 ? image_spec(5, 4) : seed % 3 == 1 ? vector_spec(1, 1) : vector_spec(4, 3);
    EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
    const Eigen::Index m = rows(rng);
    const Batch b{random_observations(spec.observation, m, rng), random_actions(spec.action, m, rng),
                  random_observations(spec.observation, m, rng)};
    const InfoReport r = l_info(model, b);
    identity_err = std::max(identity_err, std::abs(r.loss + r.bound_state + r.bound_action - 2.0 * kLog4));
  }
  if (identity_err > 1e-10) failures.push_back(fmt("info identity off by %.2e", identity_err));

  Matrix standard(2, 1);
  standard << 1.0, -1.0;
  if (kl_to_standard_normal(standard) != 0.0) failures.push_back("kl standard");
  Matrix shifted(2, 1);
  shifted << 2.0, 0.0;
  if (kl_to_standard_normal(shifted) != 0.5) failures.push_back("kl shifted");
  // mean (0.5, -0.5), variance (2, 0.25)
  Matrix mixed(2, 2);
  mixed << 0.5 + std::sqrt(2.0), 0.0, 0.5 - std::sqrt(2.0), -1.0;
  const double kl_mixed = kl_to_standard_normal(mixed);
  const long double ref = kl_reference({0.5L, -0.5L}, {2.0L, 0.25L});
  if (std::abs(kl_mixed - static_cast<double>(ref)) > 1e-12) {
    failures.push_back(fmt("kl mixed %.15g vs %.15Lg", kl_mixed, ref));
  }

  Outcome o;
  o.pass = failures.empty();
  o.detail = fmt("l_info(T=0) err %.1e, 100-case identity err %.1e, kl(mixed) %.6f", zero_critic_err,
                 identity_err, kl_mixed);
  for (const auto& f : failures) o.detail += "; " + f;
  return o;
}

// ---- criterion 3 -----------------------------------------------------------

Outcome mi_estimator() {
  const Stopwatch clock;
  int passing = 0;
  std::string detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    harness::MiCheckConfig cfg;
    cfg.seed = seed;
    cfg.rho = 0.0;
    const auto independent = harness::mi_gaussian_check(cfg);
    cfg.rho = 0.9;
    const auto dependent = harness::mi_gaussian_check(cfg);
    const double b0 = independent.final_bound, b9 = dependent.final_bound;
    const bool capped = std::max({b0, b9, independent.initial_bound, dependent.initial_bound}) <= kLog4;
    const bool ok = b0 >= -0.05 && b0 <= 0.10 && b9 - b0 >= 0.2 && capped;
    passing += ok;
    detail += fmt("%sseed %llu: %.4f / %.4f", detail.empty() ? "" : ", ",
                  static_cast<unsigned long long>(seed), b0, b9);
  }
  const double t = clock.seconds();
  return {passing == 3 && t < 120.0, fmt("%d/3 seeds; rho=0 / rho=0.9 bounds: ", passing) + detail +
                                         fmt("; %.1f s", t)};
}

// ---- BoxImage runs (criteria 4, 5, 6, 9) ------------------------------------

struct BoxRun {
  harness::BoxEmbedResult result;
  double seconds = 0.0;
};

class BoxRuns {
 public:
  BoxRuns(fs::path root, int seeds) : root_(std::move(root)), seeds_(seeds) {}

  // kind: "action", "state" or "noinfo" (action regularization, lambda_info = 0).
  const BoxRun& get(const std::string& kind, std::uint64_t seed) {
    const auto key = std::make_pair(kind, seed);
    if (auto it = runs_.find(key); it != runs_.end()) return it->second;
    harness::BoxEmbedConfig cfg;
    cfg.seed = seed;
    cfg.regularize = kind == "state" ? RegularizationTarget::State : RegularizationTarget::Action;
    if (kind == "noinfo") cfg.loss.lambda_info = 0.0;
    cfg.output_dir = root_ / fmt("boximage_%s_seed%llu", kind.c_str(), static_cast<unsigned long long>(seed));
    const Stopwatch clock;
    BoxRun run{harness::boximage_embed(cfg), 0.0};
    run.seconds = clock.seconds();
    std::fprintf(stderr, "  boximage %s seed %llu: state r2 %.4f, action r2 %.4f, %.0f s\n", kind.c_str(),
                 static_cast<unsigned long long>(seed), run.result.state_r2, run.result.action_r2,
                 run.seconds);
    return runs_.emplace(key, std::move(run)).first->second;
  }

  int seeds() const { return seeds_; }

 private:
  fs::path root_;
  int seeds_;
  std::map<std::pair<std::string, std::uint64_t>, BoxRun> runs_;
};

Outcome embedding_recovery(BoxRuns& box) {
  int passing = 0;
  double slowest = 0.0;
  int decreasing = 0, pairs = 0;
  std::string detail;
  for (int s = 1; s <= box.seeds(); ++s) {
    const BoxRun& run = box.get("action", static_cast<std::uint64_t>(s));
    passing += run.result.state_r2 >= 0.8 && run.result.action_r2 >= 0.8;
    slowest = std::max(slowest, run.seconds);
    for (std::size_t e = 1; e < run.result.epochs.size(); ++e, ++pairs) {
      decreasing += run.result.epochs[e].dynamics_loss < run.result.epochs[e - 1].dynamics_loss;
    }
    detail += fmt("%s(%.3f, %.3f)", detail.empty() ? "" : " ", run.result.state_r2, run.result.action_r2);
  }
  const int needed = box.seeds() - box.seeds() / 5;
  return {passing >= needed && slowest < 900.0,
          fmt("%d/%d seeds with state and action R2 >= 0.8: ", passing, box.seeds()) + detail +
              fmt("; slowest seed %.0f s; dynamics loss fell in %d/%d epoch pairs", slowest, decreasing, pairs)};
}

Outcome regularization_target(BoxRuns& box) {
  int passing = 0;
  std::string detail;
  for (int s = 1; s <= box.seeds(); ++s) {
    const double state_reg = box.get("state", static_cast<std::uint64_t>(s)).result.state_r2;
    const double action_reg = box.get("action", static_cast<std::uint64_t>(s)).result.state_r2;
    passing += state_reg < action_reg;
    detail += fmt("%s%.3f<%.3f", detail.empty() ? "" : " ", state_reg, action_reg);
  }
  const int needed = box.seeds() - box.seeds() / 5;
  return {passing >= needed,
          fmt("%d/%d seed pairs with state-regularized R2 below action-regularized: ", passing, box.seeds()) +
              detail};
}

Outcome error_model_boundary(BoxRuns& box) {
  int passing = 0;
  std::string detail;
  for (int s = 1; s <= box.seeds(); ++s) {
    const harness::BoundaryReport& b = box.get("action", static_cast<std::uint64_t>(s)).result.boundary;
    const bool ok = b.mean_clipped && b.mean_interior && *b.mean_clipped > *b.mean_interior;
    passing += ok;
    detail += b.ratio ? fmt("%s%.3f", detail.empty() ? "" : " ", *b.ratio) : std::string(" n/a");
  }
  const int needed = box.seeds() - box.seeds() / 5;
  return {passing >= needed,
          fmt("%d/%d seeds with clipped mean ||S|| above interior; ratios: ", passing, box.seeds()) + detail};
}

Outcome info_ablation(BoxRuns& box) {
  int passing = 0;
  std::string detail;
  for (int s = 1; s <= box.seeds(); ++s) {
    const double ablated = box.get("noinfo", static_cast<std::uint64_t>(s)).result.mean_phi_distance;
    const double full = box.get("action", static_cast<std::uint64_t>(s)).result.mean_phi_distance;
    passing += ablated <= 0.1 * full;
    detail += fmt("%s%.3f/%.3f", detail.empty() ? "" : " ", ablated, full);
  }
  return {passing == box.seeds(),
          fmt("%d/%d matched seeds with ablated phi spread <= 10%% of default; ablated/default: ", passing,
              box.seeds()) +
              detail};
}

// ---- RL runs (criteria 7, 8) -----------------------------------------------

struct RlRun {
  harness::ExperimentSummary summary;
  double seconds = 0.0;
};

class RlRuns {
 public:
  RlRuns(fs::path root, fs::path config_dir, int seeds)
      : root_(std::move(root)), config_dir_(std::move(config_dir)), seeds_(seeds) {}

  // The tuned configuration of `env`, or its eta = 0 ablation.
  const RlRun& get(const std::string& env, bool ablation, std::uint64_t seed) {
    const auto key = std::make_tuple(env, ablation, seed);
    if (auto it = runs_.find(key); it != runs_.end()) return it->second;
    harness::RunConfig cfg = harness::load_config(config_dir_ / (env + ".json"));
    cfg.seed = seed;
    if (ablation) cfg.intrinsic.eta = 0.0;
    cfg.output_dir = (root_ / fmt("%s_%s_seed%llu", env.c_str(), ablation ? "eta0" : "tuned",
                                  static_cast<unsigned long long>(seed)))
                         .string();
    const Stopwatch clock;
    RlRun run{harness::run_experiment(cfg), 0.0};
    run.seconds = clock.seconds();
    std::fprintf(stderr, "  %s %s seed %llu: first goal iteration %d, %.0f s\n", env.c_str(),
                 ablation ? "eta=0" : "tuned", static_cast<unsigned long long>(seed),
                 run.summary.reached_goal() ? run.summary.goal_iterations.front() : 0, run.seconds);
    return runs_.emplace(key, std::move(run)).first->second;
  }

  double eta(const std::string& env) const {
    return harness::load_config(config_dir_ / (env + ".json")).intrinsic.eta;
  }
  int seeds() const { return seeds_; }

 private:
  fs::path root_;
  fs::path config_dir_;
  int seeds_;
  std::map<std::tuple<std::string, bool, std::uint64_t>, RlRun> runs_;
};

Outcome loss_convergence(RlRuns& rl) {
  int passing = 0;
  std::string detail;
  for (int s = 1; s <= rl.seeds(); ++s) {
    const auto& records = rl.get("sparsepoint", false, static_cast<std::uint64_t>(s)).summary.records;
    if (records.size() < 50) {
      detail += " short-run";
      continue;
    }
    const double dyn = records[49].loss.dynamics_loss / records[0].loss.dynamics_loss;
    const double info = records[49].loss.info_loss / records[0].loss.info_loss;
    passing += dyn < 0.5 && info < 0.5;
    detail += fmt("%s(%.3f, %.3f)", detail.empty() ? "" : " ", dyn, info);
  }
  const int needed = rl.seeds() - rl.seeds() / 5;
  return {passing >= needed,
          fmt("%d/%d seeds; iteration-50 / iteration-1 ratios (dynamics, info): ", passing, rl.seeds()) + detail};
}

// Some iteration in which at least half of the finished episodes reached the goal.
bool learned_goal(const harness::ExperimentSummary& summary) {
  return std::any_of(summary.records.begin(), summary.records.end(),
                     [](const harness::IterationRecord& r) { return r.mean_return >= 0.5; });
}

Outcome exploration_benefit(RlRuns& rl) {
  struct Arm {
    std::string env;
    bool ablation;
    int successes = 0;
    int touched = 0;
    double seconds = 0.0;
  };
  std::vector<Arm> arms{{"sparsepoint", false}, {"sparsepoint", true}, {"fourrooms", false}, {"fourrooms", true}};
  double slowest = 0.0;
  for (Arm& arm : arms) {
    for (int s = 1; s <= rl.seeds(); ++s) {
      const RlRun& run = rl.get(arm.env, arm.ablation, static_cast<std::uint64_t>(s));
      arm.successes += learned_goal(run.summary);
      arm.touched += run.summary.reached_goal();
      arm.seconds += run.seconds;
    }
    slowest = std::max(slowest, arm.seconds);
  }
  const int n = rl.seeds();
  const int at_most = n / 5;
  const bool sparse = arms[0].successes >= n - n / 5 && arms[1].successes <= at_most;
  const bool rooms = 5 * arms[2].successes >= 3 * n && arms[3].successes <= at_most;
  return {sparse && rooms && slowest < 1800.0,
          fmt("sparsepoint eta=%g %d/%d vs eta=0 %d/%d; fourrooms eta=%g %d/%d vs eta=0 %d/%d; slowest arm %.0f s",
              rl.eta("sparsepoint"), arms[0].successes, n, arms[1].successes, n, rl.eta("fourrooms"),
              arms[2].successes, n, arms[3].successes, n, slowest) +
              fmt("; seeds with any goal episode: %d %d %d %d", arms[0].touched, arms[1].touched, arms[2].touched,
                  arms[3].touched)};
}

// ---- criterion 10 ----------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& root, const fs::path& config_dir) {
  std::string detail;
  bool ok = true;
  for (const std::string env : {"sparsepoint", "fourrooms"}) {
    harness::RunConfig cfg = harness::load_config(config_dir / (env + ".json"));
    cfg.seed = 2024;
    cfg.iterations = 3;
    cfg.log_wall_clock = false;
    std::string logs[2];
    for (int k = 0; k < 2; ++k) {
      cfg.output_dir = (root / fmt("determinism_%s_%d", env.c_str(), k)).string();
      harness::run_experiment(cfg);
      logs[k] = read_file(fs::path(cfg.output_dir) / "progress.csv");
    }
    const bool same = !logs[0].empty() && logs[0] == logs[1];
    ok = ok && same;
    detail += fmt("%s%s: %s (%zu bytes)", detail.empty() ? "" : ", ", env.c_str(),
                  same ? "identical" : "differs", logs[0].size());
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  emi::num::retain_large_allocations();
  CLI::App app{"EMI acceptance suite"};
  fs::path out = "acceptance_runs";
  fs::path config_dir = EMI_CONFIG_DIR;
  int seeds = 5;
  std::vector<int> only;
  app.add_option("--out", out, "directory for run artifacts");
  app.add_option("--configs", config_dir, "directory holding sparsepoint.json and fourrooms.json");
  app.add_option("--seeds", seeds, "seeds per experiment")->check(CLI::Range(1, 100));
  app.add_option("--only", only, "criteria to evaluate (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  BoxRuns box(out, seeds);
  RlRuns rl(out, config_dir, seeds);
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_correctness},
      {2, analytic_identities},
      {3, mi_estimator},
      {4, [&] { return embedding_recovery(box); }},
      {5, [&] { return regularization_target(box); }},
      {6, [&] { return error_model_boundary(box); }},
      {7, [&] { return loss_convergence(rl); }},
      {8, [&] { return exploration_benefit(rl); }},
      {9, [&] { return info_ablation(box); }},
      {10, [&] { return determinism(out, config_dir); }},
  };

  int failed = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
