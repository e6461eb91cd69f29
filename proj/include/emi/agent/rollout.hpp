#pragma once

#include "emi/agent/policy.hpp"
#include "emi/envs/env.hpp"
#include "emi/mi/mi.hpp"

#include <vector>

namespace emi::agent {

struct RolloutBuffer {
  // transition.action is the action the environment applied (clipped to the
  // box for continuous spaces); sampled_actions holds the policy's raw draw.
  std::vector<envs::Transition> transitions;
  std::vector<envs::Action> sampled_actions;
  std::vector<double> log_probs;   // log pi(sampled_a_t | s_t)
  std::vector<double> rewards;     // starts as env rewards; replaced by augmented rewards
  std::vector<double> returns;     // filled by the update
  std::vector<double> advantages;  // filled by the update
  // Environment return of every episode that ended (goal or step cap) inside
  // the buffer; the trailing unfinished episode is excluded unless it is the
  // only one.
  std::vector<double> episode_returns;
  std::vector<int> episode_lengths;
  int goal_episodes = 0;  // episodes that ended with done = true

  std::size_t size() const { return transitions.size(); }
  std::vector<double> env_rewards() const;
  Batch to_batch() const;
};

// The sampled action clipped to the spec's continuous bounds.
envs::Action applied_action(const envs::EnvSpec& spec, const envs::Action& sampled);

// Runs episodes of fresh environment instances (seeded from `rng`) until
// `total_steps` transitions are gathered. Episodes end on `done` or at the
// spec's step cap (marked truncated); the final one may be cut by the budget.
RolloutBuffer collect_rollouts(const envs::EnvFactory& factory, const Policy& policy,
                               int total_steps, num::Rng& rng);

}  // namespace emi::agent
