#pragma once

#include "emi/agent/rollout.hpp"
#include "emi/harness/analysis.hpp"
#include "emi/harness/artifacts.hpp"
#include "emi/harness/config.hpp"
#include "emi/model/checkpoint.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emi::harness {

struct ExperimentSummary {
  std::vector<IterationRecord> records;
  // Iterations (1-based) whose rollouts contained at least one goal episode.
  std::vector<int> goal_iterations;
  std::filesystem::path output_dir;

  bool reached_goal() const { return !goal_iterations.empty(); }
};

// The outer loop: collect, score intrinsic rewards with the current model,
// train the embeddings, augment, update the policy. Writes progress.csv,
// config.json, model.ckpt, policy.ckpt, embeddings.csv and embeddings.svg into
// config.output_dir.
ExperimentSummary run_experiment(const RunConfig& config);

// Model checkpoints carry the environment name and embedding size as metadata
// so the architecture can be rebuilt.
void save_model(const std::filesystem::path& path, EmiModel& model, const std::string& env);
EmiModel load_model(const std::filesystem::path& path, std::string* env = nullptr);

// Transitions from a freshly initialized (untrained) policy.
agent::RolloutBuffer collect_random_transitions(const std::string& env, int samples,
                                                num::Rng& rng);

struct BoxEmbedConfig {
  int samples = 30000;
  RegularizationTarget regularize = RegularizationTarget::Action;
  std::uint64_t seed = 0;
  int embedding_dim = 2;
  EmiLossConfig loss{100.0, 0.01, 1.0, RegularizationTarget::Action, 40, 512, 1e-3};
  std::filesystem::path output_dir;  // empty: no files
};

struct BoxEmbedResult {
  double state_r2 = 0.0;   // phi(s) vs true disk position
  double action_r2 = 0.0;  // psi(a) vs applied action
  BoundaryReport boundary;
  double mean_phi_distance = 0.0;  // mean pairwise distance of phi on up to 2000 states
  LossReport final_loss;           // last epoch
  std::vector<LossReport> epochs;   // one report per training epoch
};

// Random-policy BoxImage transitions, embeddings trained with the KL term on
// the selected target. Writes model.ckpt, states.csv (true_x, true_y, phi_1,
// phi_2), actions.csv (a_1, a_2, psi_1, psi_2), states.svg and actions.svg.
BoxEmbedResult boximage_embed(const BoxEmbedConfig& config);

}  // namespace emi::harness
