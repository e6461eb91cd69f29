#pragma once

#include "emi/model/emi_model.hpp"
#include "emi/numcore/graph.hpp"

#include <span>

namespace emi {

// m aligned transitions, one per row. Actions are raw (see ActionEncoding).
struct Batch {
  num::Matrix states;
  num::Matrix actions;
  num::Matrix next_states;

  Eigen::Index rows() const { return states.rows(); }
  // ShapeError unless all three have the same row count >= 2.
  void validate() const;
  Batch select(std::span<const Eigen::Index> rows) const;
};

// Joint and product-of-marginals triples built by the half-batch shift with
// h = floor(m / 2):
//   joint            row l: (s_l, a_l, s'_l)
//   state_shuffled   row l: (s_l, a_l, s'_{l+h})
//   action_shuffled  row l: (s_l, a_{l+h}, s'_l)
// for l = 0 .. h-1. With odd m the last row only contributes nothing.
struct ShuffledTriples {
  Batch joint;
  Batch state_shuffled;
  Batch action_shuffled;
};

Eigen::Index half_batch(Eigen::Index m);
ShuffledTriples build_shuffled_triples(const Batch& batch);

// Jensen-Shannon lower bound: mean(-sp(-T_joint)) - mean(sp(T_marginal)) + log 4.
// Un-halved convention, so the supremum is at most log 4.
double jsd_bound(std::span<const double> t_joint, std::span<const double> t_marginal);
// Donsker-Varadhan bound: mean(T_joint) - log mean(exp(T_marginal)),
// with a max-shifted log-mean-exp.
double kl_dv_bound(std::span<const double> t_joint, std::span<const double> t_marginal);

// mean(sp(-T_joint)) + mean(sp(T_marginal)) = log 4 - jsd_bound.
num::Var jsd_loss(num::Var t_joint, num::Var t_marginal);

struct InfoTerms {
  num::Var loss;          // term_state + term_action
  num::Var term_state;
  num::Var term_action;
  double bound_state = 0.0;   // log 4 - term_state
  double bound_action = 0.0;  // log 4 - term_action
};

// The information loss on embeddings of a whole minibatch (m x d each),
// shuffled internally by the half-batch shift.
InfoTerms info_loss(num::Graph& graph, EmiModel& model, num::Var phi, num::Var psi,
                    num::Var phi_next);

struct InfoReport {
  double loss = 0.0;
  double bound_state = 0.0;
  double bound_action = 0.0;
};

InfoReport l_info(EmiModel& model, const Batch& batch);

}  // namespace emi
