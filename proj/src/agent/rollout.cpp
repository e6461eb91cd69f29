#include "emi/agent/rollout.hpp"

#include "emi/error.hpp"

#include <algorithm>

namespace emi::agent {

std::vector<double> RolloutBuffer::env_rewards() const {
  std::vector<double> out;
  out.reserve(transitions.size());
  for (const auto& t : transitions) out.push_back(t.reward);
  return out;
}

Batch RolloutBuffer::to_batch() const {
  std::vector<envs::Observation> s, a, s_next;
  s.reserve(transitions.size());
  a.reserve(transitions.size());
  s_next.reserve(transitions.size());
  for (const auto& t : transitions) {
    s.push_back(t.state);
    a.push_back(t.action);
    s_next.push_back(t.next_state);
  }
  return {stack_rows(s), stack_rows(a), stack_rows(s_next)};
}

envs::Action applied_action(const envs::EnvSpec& spec, const envs::Action& sampled) {
  if (spec.action.discrete) return sampled;
  envs::Action out = sampled;
  for (std::size_t j = 0; j < out.size() && j < spec.action_low.size(); ++j) {
    out[j] = std::clamp(out[j], spec.action_low[j], spec.action_high[j]);
  }
  return out;
}

RolloutBuffer collect_rollouts(const envs::EnvFactory& factory, const Policy& policy,
                               int total_steps, num::Rng& rng) {
  if (total_steps < 1) throw ConfigError("collect_rollouts: total_steps must be >= 1");
  auto env = factory(rng());
  const int cap = env->spec().max_episode_steps;

  RolloutBuffer buf;
  buf.transitions.reserve(static_cast<std::size_t>(total_steps));
  envs::Observation obs = env->reset();
  int length = 0;
  double ret = 0.0;
  for (int step = 0; step < total_steps; ++step) {
    ActionSample sample = policy.sample_action(obs, rng);
    envs::StepResult r = env->step(sample.action);
    ++length;
    ret += r.reward;

    envs::Transition t;
    t.state = std::move(obs);
    t.action = applied_action(env->spec(), sample.action);
    buf.sampled_actions.push_back(std::move(sample.action));
    t.next_state = r.observation;
    t.reward = r.reward;
    t.done = r.done;
    t.truncated = !r.done && length >= cap;
    t.clipped = r.clipped;
    buf.log_probs.push_back(sample.log_prob);
    buf.rewards.push_back(r.reward);

    const bool ended = t.done || t.truncated;
    buf.transitions.push_back(std::move(t));
    if (ended) {
      buf.episode_returns.push_back(ret);
      buf.episode_lengths.push_back(length);
      buf.goal_episodes += r.done ? 1 : 0;
      obs = env->reset();
      length = 0;
      ret = 0.0;
    } else {
      obs = std::move(r.observation);
    }
  }
  if (buf.episode_returns.empty()) {
    buf.episode_returns.push_back(ret);
    buf.episode_lengths.push_back(length);
  }
  return buf;
}

}  // namespace emi::agent
