#pragma once

#include "emi/envs/env.hpp"
#include "emi/model/mlp.hpp"

#include <string>
#include <utility>
#include <vector>

namespace emi::agent {

struct PolicyConfig {
  std::vector<int> hidden{64, 32};
  Activation activation = Activation::Tanh;
  double init_log_std = 0.0;
  // Glorot bound multiplier of the policy head's last layer.
  double head_init_scale = 0.01;
  double lr = 3e-4;
  double baseline_lr = 1e-3;
  double discount = 0.995;
  double clip_ratio = 0.2;
  int epochs = 10;
  int minibatch = 64;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;

  void validate() const;
};

struct ActionSample {
  envs::Action action;
  double log_prob = 0.0;
};

// pi_theta(a | s): a Gaussian with state-independent log-std per dimension
// for continuous spaces, a categorical over logits for discrete ones. Carries
// its own value baseline of the same hidden shape.
class Policy {
 public:
  Policy() = default;
  Policy(const envs::EnvSpec& spec, const PolicyConfig& config, num::Rng& rng);

  bool discrete() const { return action_.discrete; }
  int action_dim() const { return action_.dim; }
  const ObservationEncoding& observation() const { return observation_; }

  ActionSample sample_action(const envs::Observation& obs, num::Rng& rng) const;
  // Deterministic head output: Gaussian mean or categorical probabilities.
  num::Matrix head(const num::Matrix& observations) const;
  double log_prob(const envs::Observation& obs, const envs::Action& action) const;
  num::Matrix values(const num::Matrix& observations) const;  // m x 1

  // Rows of log pi(a | s) for raw actions (m x 1).
  num::Var log_prob(num::Graph& graph, num::Var observations, const num::Matrix& raw_actions);
  // Rows of the distribution entropy (m x 1).
  num::Var entropy(num::Graph& graph, num::Var observations);
  num::Var value(num::Graph& graph, num::Var observations);

  Mlp& network() { return net_; }
  Mlp& baseline() { return baseline_; }
  num::Matrix& log_std() { return log_std_; }
  const num::Matrix& log_std() const { return log_std_; }

  std::vector<num::Matrix*> policy_parameters();
  std::vector<num::Matrix*> baseline_parameters();
  // "policy.w0", ..., "policy.log_std" (continuous), "baseline.w0", ...
  std::vector<std::pair<std::string, num::Matrix*>> named_parameters();

 private:
  ObservationEncoding observation_;
  ActionEncoding action_;
  Mlp net_;
  Mlp baseline_;
  num::Matrix log_std_;
};

num::Matrix stack_rows(const std::vector<envs::Observation>& rows);

}  // namespace emi::agent
