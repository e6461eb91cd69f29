#pragma once

#include "emi/agent/policy.hpp"
#include "emi/model/emi_model.hpp"
#include "emi/numcore/gradcheck.hpp"

#include <random>
#include <string>
#include <vector>

namespace emi::testing {

inline num::Matrix random_matrix(Eigen::Index r, Eigen::Index c, num::Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  num::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline envs::EnvSpec vector_spec(int obs_dim, int act_dim) {
  envs::EnvSpec s;
  s.name = "test-vector";
  s.observation = ObservationEncoding::vector(obs_dim);
  s.action = ActionEncoding::continuous(act_dim);
  s.action_low.assign(static_cast<std::size_t>(act_dim), -1.0);
  s.action_high.assign(static_cast<std::size_t>(act_dim), 1.0);
  s.max_episode_steps = 10;
  return s;
}

inline envs::EnvSpec image_spec(int side, int choices) {
  envs::EnvSpec s;
  s.name = "test-image";
  s.observation = ObservationEncoding::image(side, side);
  s.action = ActionEncoding::categorical(choices);
  s.max_episode_steps = 10;
  return s;
}

// Random raw actions for an encoding: indices for discrete, U(-1, 1) otherwise.
inline num::Matrix random_actions(const ActionEncoding& enc, Eigen::Index rows, num::Rng& rng) {
  if (!enc.discrete) return random_matrix(rows, enc.dim, rng);
  std::uniform_int_distribution<int> pick(0, enc.dim - 1);
  num::Matrix a(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) a(i, 0) = pick(rng);
  return a;
}

inline num::Matrix random_observations(const ObservationEncoding& enc, Eigen::Index rows,
                                       num::Rng& rng) {
  if (enc.kind == ObservationKind::Image) return random_matrix(rows, enc.flat_size(), rng, 0.0, 1.0);
  return random_matrix(rows, enc.flat_size(), rng, -2.0, 2.0);
}

struct NetworkCheck {
  std::string name;
  num::GradCheckResult result;
};

// Finite-difference check of every network: phi, psi, the error model, T_S,
// T_A, the policy head (through log pi) and the baseline. The loss is a random
// linear functional of the network output, so no gradient is trivially zero.
inline std::vector<NetworkCheck> check_network_gradients(const envs::EnvSpec& spec,
                                                         std::uint64_t seed) {
  using num::Graph;
  using num::Matrix;
  using num::Var;
  num::Rng rng(seed);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  const Eigen::Index m = 4;
  const Matrix obs = random_observations(spec.observation, m, rng);
  const Matrix raw = random_actions(spec.action, m, rng);
  const Matrix act = spec.action.encode(raw);
  const Matrix mix = random_matrix(m, 2, rng);
  const Matrix mix1 = random_matrix(m, 1, rng);
  const Matrix e1 = random_matrix(m, 2, rng), e2 = random_matrix(m, 2, rng), e3 = random_matrix(m, 2, rng);

  std::vector<NetworkCheck> out;
  auto run = [&](const std::string& name, const std::function<Var(Graph&)>& build,
                 std::vector<Matrix*> params) {
    out.push_back({name, num::check_gradients(build, params)});
  };

  run("phi", [&](Graph& g) { return num::sum(model.embed_states(g, g.constant(obs)) * g.constant(mix)); },
      model.phi().parameters());
  run("psi", [&](Graph& g) { return num::sum(model.embed_actions(g, g.constant(act)) * g.constant(mix)); },
      model.psi().parameters());
  std::vector<Matrix*> err = model.error_trunk().parameters();
  for (Matrix* p : model.error_head().parameters()) err.push_back(p);
  run("error_model",
      [&](Graph& g) {
        return num::sum(model.error_model(g, g.constant(obs), g.constant(act)) * g.constant(mix));
      },
      err);
  for (auto side : {StatisticsSide::State, StatisticsSide::Action}) {
    run(side == StatisticsSide::State ? "T_S" : "T_A",
        [&, side](Graph& g) {
          return num::sum(model.statistics(g, side, g.constant(e1), g.constant(e2), g.constant(e3)) *
                          g.constant(mix1));
        },
        model.statistics_net(side).parameters());
  }

  agent::PolicyConfig pcfg;
  pcfg.init_log_std = -0.3;
  agent::Policy policy(spec, pcfg, rng);
  run("policy",
      [&](Graph& g) { return num::sum(policy.log_prob(g, g.constant(obs), raw) * g.constant(mix1)); },
      policy.policy_parameters());
  run("baseline",
      [&](Graph& g) { return num::sum(policy.value(g, g.constant(obs)) * g.constant(mix1)); },
      policy.baseline_parameters());
  return out;
}

}  // namespace emi::testing
