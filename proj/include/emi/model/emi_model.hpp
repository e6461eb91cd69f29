#pragma once

#include "emi/model/encoding.hpp"
#include "emi/model/mlp.hpp"

#include <string>
#include <utility>
#include <vector>

namespace emi {

// Architecture of the five EMI networks.
struct EmiModelConfig {
  ObservationEncoding observation;
  ActionEncoding action;
  int embedding_dim = 2;
  MlpSpec phi;              // state embedder, output = embedding_dim
  MlpSpec psi;              // action embedder, output = embedding_dim
  MlpSpec error_trunk;      // state branch of the error model
  MlpSpec error_head;       // [trunk(s); a] -> embedding_dim
  MlpSpec statistics;       // [phi(s); psi(a); phi(s')] -> 1, shared by T_S and T_A

  // Image runs: phi (256, 64) relu; vector runs: phi (64, 32) tanh.
  // psi (64) relu; statistics (64, 64) relu; error head (256) relu.
  static EmiModelConfig defaults(const ObservationEncoding& obs, const ActionEncoding& act,
                                 int embedding_dim = 2);
};

enum class StatisticsSide { State, Action };

// Batched outputs of the embedding networks for aligned (s, a, s') rows.
struct Embeddings {
  num::Matrix phi;       // m x d
  num::Matrix psi;       // m x d
  num::Matrix phi_next;  // m x d
  num::Matrix error;     // m x d
};

// phi: S -> R^d, psi: A -> R^d, error model S: S x A -> R^d and the two
// statistics networks T_S, T_A: R^d x R^d x R^d -> R with separate weights.
// Observation and action matrices hold one sample per row (see encoding.hpp).
class EmiModel {
 public:
  EmiModel() = default;
  EmiModel(const EmiModelConfig& config, num::Rng& rng);

  const EmiModelConfig& config() const { return config_; }
  int embedding_dim() const { return config_.embedding_dim; }

  num::Matrix embed_states(const num::Matrix& observations) const;
  num::Matrix embed_actions(const num::Matrix& raw_actions) const;
  num::Matrix error_model(const num::Matrix& observations, const num::Matrix& raw_actions) const;
  // One scalar per row of the three m x d inputs.
  num::Matrix statistics(StatisticsSide side, const num::Matrix& phi, const num::Matrix& psi,
                         const num::Matrix& phi_next) const;
  Embeddings embed(const num::Matrix& states, const num::Matrix& raw_actions,
                   const num::Matrix& next_states) const;

  // Graph-building counterparts; parameters are bound into `graph`.
  num::Var embed_states(num::Graph& graph, num::Var observations);
  num::Var embed_actions(num::Graph& graph, num::Var encoded_actions);
  num::Var error_model(num::Graph& graph, num::Var observations, num::Var encoded_actions);
  num::Var statistics(num::Graph& graph, StatisticsSide side, num::Var phi, num::Var psi,
                      num::Var phi_next);

  Mlp& phi() { return phi_; }
  Mlp& psi() { return psi_; }
  Mlp& error_trunk() { return error_trunk_; }
  Mlp& error_head() { return error_head_; }
  Mlp& statistics_net(StatisticsSide side) {
    return side == StatisticsSide::State ? t_state_ : t_action_;
  }

  std::vector<num::Matrix*> parameters();
  // Names are "<net>.<w|b><layer>", nets: phi, psi, err_trunk, err_head, t_state, t_action.
  std::vector<std::pair<std::string, num::Matrix*>> named_parameters();
  void set_zero();

 private:
  EmiModelConfig config_;
  Mlp phi_;
  Mlp psi_;
  Mlp error_trunk_;
  Mlp error_head_;
  Mlp t_state_;
  Mlp t_action_;
};

}  // namespace emi
