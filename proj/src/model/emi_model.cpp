#include "emi/model/emi_model.hpp"

#include "emi/error.hpp"

namespace emi {

using num::Matrix;
using num::Var;

EmiModelConfig EmiModelConfig::defaults(const ObservationEncoding& obs, const ActionEncoding& act,
                                        int embedding_dim) {
  EmiModelConfig c;
  c.observation = obs;
  c.action = act;
  c.embedding_dim = embedding_dim;
  if (obs.kind == ObservationKind::Image) {
    c.phi = {{256, 64}, Activation::Relu, embedding_dim};
  } else {
    c.phi = {{64, 32}, Activation::Tanh, embedding_dim};
  }
  c.psi = {{64}, Activation::Relu, embedding_dim};
  c.error_trunk = c.phi;
  c.error_trunk.output = c.phi.hidden.back();
  c.error_trunk.hidden.pop_back();
  if (c.error_trunk.hidden.empty()) c.error_trunk.hidden.push_back(c.error_trunk.output);
  c.error_trunk.activate_output = true;
  c.error_head = {{256}, Activation::Relu, embedding_dim};
  // Critic outputs start near zero.
  c.statistics = {{64, 64}, Activation::Relu, 1, false, 0.01};
  return c;
}

EmiModel::EmiModel(const EmiModelConfig& config, num::Rng& rng) : config_(config) {
  const int d = config.embedding_dim;
  if (d < 1) throw ConfigError("embedding_dim must be >= 1");
  if (config.phi.output != d || config.psi.output != d || config.error_head.output != d) {
    throw ConfigError("phi, psi and error head must output embedding_dim values");
  }
  if (config.statistics.output != 1) throw ConfigError("statistics networks output a scalar");
  phi_ = Mlp(config.observation.flat_size(), config.phi, rng);
  psi_ = Mlp(config.action.encoded_size(), config.psi, rng);
  error_trunk_ = Mlp(config.observation.flat_size(), config.error_trunk, rng);
  error_head_ = Mlp(config.error_trunk.output + config.action.encoded_size(), config.error_head, rng);
  t_state_ = Mlp(3 * d, config.statistics, rng);
  t_action_ = Mlp(3 * d, config.statistics, rng);
}

Matrix EmiModel::embed_states(const Matrix& observations) const {
  config_.observation.validate(observations);
  return phi_.apply(observations);
}

Matrix EmiModel::embed_actions(const Matrix& raw_actions) const {
  return psi_.apply(config_.action.encode(raw_actions));
}

Matrix EmiModel::error_model(const Matrix& observations, const Matrix& raw_actions) const {
  config_.observation.validate(observations);
  if (observations.rows() != raw_actions.rows()) throw ShapeError("error_model: row mismatch");
  const Matrix trunk = error_trunk_.apply(observations);
  Matrix joined(trunk.rows(), trunk.cols() + config_.action.encoded_size());
  joined << trunk, config_.action.encode(raw_actions);
  return error_head_.apply(joined);
}

Matrix EmiModel::statistics(StatisticsSide side, const Matrix& phi, const Matrix& psi,
                            const Matrix& phi_next) const {
  const int d = config_.embedding_dim;
  if (phi.cols() != d || psi.cols() != d || phi_next.cols() != d || phi.rows() != psi.rows() ||
      phi.rows() != phi_next.rows()) {
    throw ShapeError("statistics: expected three aligned m x " + std::to_string(d) + " inputs");
  }
  Matrix joined(phi.rows(), 3 * d);
  joined << phi, psi, phi_next;
  return (side == StatisticsSide::State ? t_state_ : t_action_).apply(joined);
}

Embeddings EmiModel::embed(const Matrix& states, const Matrix& raw_actions,
                           const Matrix& next_states) const {
  return {embed_states(states), embed_actions(raw_actions), embed_states(next_states),
          error_model(states, raw_actions)};
}

Var EmiModel::embed_states(num::Graph& graph, Var observations) {
  return phi_.forward(graph, observations);
}

Var EmiModel::embed_actions(num::Graph& graph, Var encoded_actions) {
  return psi_.forward(graph, encoded_actions);
}

Var EmiModel::error_model(num::Graph& graph, Var observations, Var encoded_actions) {
  const Var trunk = error_trunk_.forward(graph, observations);
  return error_head_.forward(graph, graph.concat_cols({trunk, encoded_actions}));
}

Var EmiModel::statistics(num::Graph& graph, StatisticsSide side, Var phi, Var psi, Var phi_next) {
  const int d = config_.embedding_dim;
  if (phi.cols() != d || psi.cols() != d || phi_next.cols() != d) {
    throw ShapeError("statistics: inputs must have " + std::to_string(d) + " columns");
  }
  return statistics_net(side).forward(graph, graph.concat_cols({phi, psi, phi_next}));
}

std::vector<std::pair<std::string, Matrix*>> EmiModel::named_parameters() {
  std::vector<std::pair<std::string, Matrix*>> out;
  const std::pair<const char*, Mlp*> nets[] = {{"phi", &phi_},           {"psi", &psi_},
                                               {"err_trunk", &error_trunk_},
                                               {"err_head", &error_head_}, {"t_state", &t_state_},
                                               {"t_action", &t_action_}};
  for (const auto& [prefix, net] : nets) {
    for (auto& [name, m] : net->named_parameters()) out.emplace_back(std::string(prefix) + "." + name, m);
  }
  return out;
}

std::vector<Matrix*> EmiModel::parameters() {
  std::vector<Matrix*> out;
  for (auto& entry : named_parameters()) out.push_back(entry.second);
  return out;
}

void EmiModel::set_zero() {
  for (Matrix* m : parameters()) m->setZero();
}

}  // namespace emi
