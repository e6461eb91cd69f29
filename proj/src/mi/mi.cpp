#include "emi/mi/mi.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emi {

using num::Matrix;
using num::Var;

namespace {

const double kLog4 = std::log(4.0);

void require_non_empty(std::span<const double> joint, std::span<const double> marginal,
                       const char* what) {
  if (joint.empty() || marginal.empty()) {
    throw ShapeError(std::string(what) + ": empty sample set");
  }
}

Matrix take_rows(const Matrix& m, Eigen::Index begin, Eigen::Index count) {
  return m.middleRows(begin, count);
}

}  // namespace

void Batch::validate() const {
  if (actions.rows() != states.rows() || next_states.rows() != states.rows()) {
    throw ShapeError("batch rows misaligned: " + std::to_string(states.rows()) + "/" +
                     std::to_string(actions.rows()) + "/" + std::to_string(next_states.rows()));
  }
  if (states.cols() != next_states.cols()) throw ShapeError("batch state widths differ");
  if (states.rows() < 2) throw ShapeError("batch needs at least 2 rows");
}

Batch Batch::select(std::span<const Eigen::Index> rows) const {
  Batch out;
  out.states.resize(static_cast<Eigen::Index>(rows.size()), states.cols());
  out.actions.resize(static_cast<Eigen::Index>(rows.size()), actions.cols());
  out.next_states.resize(static_cast<Eigen::Index>(rows.size()), next_states.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.states.row(r) = states.row(rows[i]);
    out.actions.row(r) = actions.row(rows[i]);
    out.next_states.row(r) = next_states.row(rows[i]);
  }
  return out;
}

Eigen::Index half_batch(Eigen::Index m) {
  if (m < 2) throw ShapeError("shuffled triples need m >= 2, got " + std::to_string(m));
  return m / 2;
}

ShuffledTriples build_shuffled_triples(const Batch& batch) {
  batch.validate();
  const Eigen::Index h = half_batch(batch.rows());
  const Matrix s = take_rows(batch.states, 0, h);
  const Matrix a = take_rows(batch.actions, 0, h);
  const Matrix s_next = take_rows(batch.next_states, 0, h);
  ShuffledTriples t;
  t.joint = {s, a, s_next};
  t.state_shuffled = {s, a, take_rows(batch.next_states, h, h)};
  t.action_shuffled = {s, take_rows(batch.actions, h, h), s_next};
  return t;
}

double jsd_bound(std::span<const double> t_joint, std::span<const double> t_marginal) {
  require_non_empty(t_joint, t_marginal, "jsd_bound");
  // Means are accumulated as offsets from the first term, so equal critic
  // outputs give exactly equal means.
  auto shifted_mean = [](std::span<const double> ts, double sign) {
    const double first = num::softplus(sign * ts[0]);
    double acc = 0.0;
    for (double t : ts) acc += num::softplus(sign * t) - first;
    return first + acc / static_cast<double>(ts.size());
  };
  return -shifted_mean(t_joint, -1.0) - shifted_mean(t_marginal, 1.0) + kLog4;
}

double kl_dv_bound(std::span<const double> t_joint, std::span<const double> t_marginal) {
  require_non_empty(t_joint, t_marginal, "kl_dv_bound");
  double joint = 0.0;
  for (double t : t_joint) joint += t;
  joint /= static_cast<double>(t_joint.size());
  const double top = *std::max_element(t_marginal.begin(), t_marginal.end());
  double acc = 0.0;
  for (double t : t_marginal) acc += std::exp(t - top);
  const double log_mean_exp = top + std::log(acc / static_cast<double>(t_marginal.size()));
  return joint - log_mean_exp;
}

Var jsd_loss(Var t_joint, Var t_marginal) {
  return mean(softplus(-t_joint)) + mean(softplus(t_marginal));
}

InfoTerms info_loss(num::Graph& graph, EmiModel& model, Var phi, Var psi, Var phi_next) {
  const Eigen::Index h = half_batch(phi.rows());
  if (psi.rows() != phi.rows() || phi_next.rows() != phi.rows()) {
    throw ShapeError("info_loss: embedding rows misaligned");
  }
  const Var s = graph.slice_rows(phi, 0, h);
  const Var a = graph.slice_rows(psi, 0, h);
  const Var s_next = graph.slice_rows(phi_next, 0, h);
  const Var a_shift = graph.slice_rows(psi, h, h);
  const Var s_next_shift = graph.slice_rows(phi_next, h, h);

  InfoTerms out;
  out.term_state = jsd_loss(model.statistics(graph, StatisticsSide::State, s, a, s_next),
                            model.statistics(graph, StatisticsSide::State, s, a, s_next_shift));
  out.term_action = jsd_loss(model.statistics(graph, StatisticsSide::Action, s, a, s_next),
                             model.statistics(graph, StatisticsSide::Action, s, a_shift, s_next));
  out.loss = out.term_state + out.term_action;
  out.bound_state = kLog4 - out.term_state.scalar();
  out.bound_action = kLog4 - out.term_action.scalar();
  return out;
}

InfoReport l_info(EmiModel& model, const Batch& batch) {
  batch.validate();
  num::Graph graph;
  const Var phi = model.embed_states(graph, graph.constant(batch.states));
  const Var psi = model.embed_actions(graph, graph.constant(model.config().action.encode(batch.actions)));
  const Var phi_next = model.embed_states(graph, graph.constant(batch.next_states));
  const InfoTerms t = info_loss(graph, model, phi, psi, phi_next);
  return {t.loss.scalar(), t.bound_state, t.bound_action};
}

}  // namespace emi
