#include "emi/error.hpp"
#include "emi/harness/experiment.hpp"
#include "emi/numcore/allocator.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace emi;
using namespace emi::harness;

namespace {

void print_boundary(const BoundaryReport& r) {
  auto show = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("unavailable");
  };
  std::cout << "clipped_count " << r.clipped_count << "\n"
            << "interior_count " << r.interior_count << "\n"
            << "mean_err_clipped " << show(r.mean_clipped) << "\n"
            << "mean_err_interior " << show(r.mean_interior) << "\n"
            << "ratio " << show(r.ratio) << "\n";
}

void write_boundary(const std::filesystem::path& path, const BoundaryReport& r) {
  CsvTable t;
  t.header = {"clipped_count", "interior_count", "mean_err_clipped", "mean_err_interior", "ratio"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t.rows.push_back({static_cast<double>(r.clipped_count), static_cast<double>(r.interior_count),
                    r.mean_clipped.value_or(nan), r.mean_interior.value_or(nan), r.ratio.value_or(nan)});
  write_csv(path, t);
}

}  // namespace

int main(int argc, char** argv) {
  emi::num::retain_large_allocations();
  CLI::App app{"EMI: exploration with mutual-information state and action embeddings"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train an agent with EMI intrinsic rewards");
  std::string config_path, env_name, out_dir;
  std::uint64_t run_seed = 0;
  std::optional<int> iterations;
  std::optional<double> eta;
  run->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  run->add_option("--env", env_name, "environment when no config is given (boximage, sparsepoint, fourrooms)");
  run->add_option("--seed", run_seed, "RNG seed")->required();
  run->add_option("--out", out_dir, "artifact directory")->required();
  run->add_option("--iterations", iterations, "override MAXITER");
  run->add_option("--eta", eta, "override the intrinsic reward weight");

  auto* box = app.add_subcommand("boximage-embed", "train BoxImage embeddings from random-policy samples");
  BoxEmbedConfig box_cfg;
  std::string regularize = "action";
  std::optional<int> box_epochs;
  std::optional<double> box_lambda_info;
  box->add_option("--samples", box_cfg.samples, "number of transitions")->default_val(30000);
  box->add_option("--regularize", regularize, "KL target")
      ->check(CLI::IsMember({"action", "state", "none"}));
  box->add_option("--seed", box_cfg.seed, "RNG seed")->required();
  box->add_option("--out", out_dir, "artifact directory")->required();
  box->add_option("--epochs", box_epochs, "training epochs over the samples");
  box->add_option("--lambda-info", box_lambda_info, "weight of the information term");

  auto* align = app.add_subcommand("eval-align", "affine-fit R^2 of embeddings against true coordinates");
  std::string csv_path;
  align->add_option("--embeddings", csv_path, "CSV with true_x,true_y,phi_1,phi_2 or a_1,a_2,psi_1,psi_2")
      ->required()
      ->check(CLI::ExistingFile);

  auto* mi = app.add_subcommand("mi-check", "JSD bound of a trained critic on correlated Gaussians");
  MiCheckConfig mi_cfg;
  mi->add_option("--rho", mi_cfg.rho, "correlation")->required();
  mi->add_option("--seed", mi_cfg.seed, "RNG seed")->required();
  mi->add_option("--steps", mi_cfg.steps, "training steps")->default_val(mi_cfg.steps);

  auto* boundary = app.add_subcommand("boundary-analysis", "error-model norm at clipped vs interior moves");
  std::string checkpoint;
  int boundary_samples = 10000;
  std::uint64_t boundary_seed = 1;
  boundary->add_option("--checkpoint", checkpoint, "BoxImage model.ckpt")->required()->check(CLI::ExistingFile);
  boundary->add_option("--out", out_dir, "artifact directory")->required();
  boundary->add_option("--samples", boundary_samples, "fresh random-policy transitions")->default_val(10000);
  boundary->add_option("--seed", boundary_seed, "RNG seed for the fresh transitions")->default_val(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (config_path.empty() && env_name.empty()) throw ConfigError("run needs --config or --env");
      RunConfig cfg = config_path.empty() ? RunConfig::defaults_for(env_name) : load_config(config_path);
      cfg.seed = run_seed;
      cfg.output_dir = out_dir;
      if (iterations) cfg.iterations = *iterations;
      if (eta) cfg.intrinsic.eta = *eta;
      const ExperimentSummary s = run_experiment(cfg);
      const IterationRecord& last = s.records.back();
      std::cout << "iterations " << s.records.size() << "\n"
                << "steps " << last.steps << "\n"
                << "final_mean_return " << format_number(last.mean_return) << "\n"
                << "goal_iterations " << s.goal_iterations.size() << "\n";
      if (s.reached_goal()) std::cout << "first_goal_iteration " << s.goal_iterations.front() << "\n";
    } else if (*box) {
      box_cfg.regularize = regularization_from_string(regularize);
      box_cfg.output_dir = out_dir;
      if (box_epochs) box_cfg.loss.epochs = *box_epochs;
      if (box_lambda_info) box_cfg.loss.lambda_info = *box_lambda_info;
      const BoxEmbedResult r = boximage_embed(box_cfg);
      std::cout << "state_r2 " << format_number(r.state_r2) << "\n"
                << "action_r2 " << format_number(r.action_r2) << "\n"
                << "mean_phi_distance " << format_number(r.mean_phi_distance) << "\n";
      print_boundary(r.boundary);
    } else if (*align) {
      const CsvTable t = read_csv(csv_path);
      auto has = [&](const std::string& c) {
        return std::find(t.header.begin(), t.header.end(), c) != t.header.end();
      };
      const bool states = has("true_x");
      const std::vector<std::string> truth = states ? std::vector<std::string>{"true_x", "true_y"}
                                                    : std::vector<std::string>{"a_1", "a_2"};
      const std::vector<std::string> emb = states ? std::vector<std::string>{"phi_1", "phi_2"}
                                                  : std::vector<std::string>{"psi_1", "psi_2"};
      num::Matrix p(static_cast<Eigen::Index>(t.rows.size()), 2), e(p.rows(), 2);
      for (int j = 0; j < 2; ++j) {
        const auto tc = t.column(truth[static_cast<std::size_t>(j)]);
        const auto ec = t.column(emb[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          p(i, j) = tc[static_cast<std::size_t>(i)];
          e(i, j) = ec[static_cast<std::size_t>(i)];
        }
      }
      std::cout << "r2 " << format_number(eval_embedding_alignment(e, p)) << "\n";
    } else if (*mi) {
      const MiCheckResult r = mi_gaussian_check(mi_cfg);
      std::cout << "initial_bound " << format_number(r.initial_bound) << "\n"
                << "bound " << format_number(r.final_bound) << "\n";
    } else if (*boundary) {
      std::string env;
      EmiModel model = load_model(checkpoint, &env);
      if (env != "boximage") throw ConfigError("boundary-analysis needs a boximage model, got " + env);
      num::Rng rng(boundary_seed);
      const agent::RolloutBuffer buf = collect_random_transitions(env, boundary_samples, rng);
      std::vector<bool> clipped;
      for (const auto& t : buf.transitions) clipped.push_back(t.clipped);
      const BoundaryReport r = boundary_error_analysis(model, buf.to_batch(), clipped);
      std::filesystem::create_directories(out_dir);
      write_boundary(std::filesystem::path(out_dir) / "boundary.csv", r);
      print_boundary(r);
    }
  } catch (const std::exception& e) {
    std::cerr << "emi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
