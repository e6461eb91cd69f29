#include "emi/objective/objective.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emi {

using num::Matrix;
using num::Var;

namespace {
constexpr double kVarianceFloor = 1e-8;
}

std::string to_string(RegularizationTarget t) {
  switch (t) {
    case RegularizationTarget::Action: return "action";
    case RegularizationTarget::State: return "state";
    case RegularizationTarget::None: return "none";
  }
  return "none";
}

RegularizationTarget regularization_from_string(const std::string& name) {
  if (name == "action") return RegularizationTarget::Action;
  if (name == "state") return RegularizationTarget::State;
  if (name == "none") return RegularizationTarget::None;
  throw ConfigError("unknown regularization target '" + name + "'");
}

void EmiLossConfig::validate() const {
  if (lambda_error < 0) throw ConfigError("emi.lambda_error must be >= 0");
  if (lambda_info < 0) throw ConfigError("emi.lambda_info must be >= 0");
  if (lambda_kl < 0) throw ConfigError("emi.lambda_kl must be >= 0");
  if (epochs < 1) throw ConfigError("emi.epochs must be >= 1");
  if (minibatch < 2) throw ConfigError("emi.minibatch must be >= 2");
  if (!(lr >= 0)) throw ConfigError("emi.lr must be >= 0");
}

LossReport& LossReport::operator+=(const LossReport& o) {
  dynamics_loss += o.dynamics_loss;
  error_penalty += o.error_penalty;
  info_loss += o.info_loss;
  kl_reg += o.kl_reg;
  total += o.total;
  mean_error_norm += o.mean_error_norm;
  bound_state += o.bound_state;
  bound_action += o.bound_action;
  return *this;
}

LossReport LossReport::scaled(double f) const {
  LossReport r = *this;
  r.dynamics_loss *= f;
  r.error_penalty *= f;
  r.info_loss *= f;
  r.kl_reg *= f;
  r.total *= f;
  r.mean_error_norm *= f;
  r.bound_state *= f;
  r.bound_action *= f;
  return r;
}

Var kl_to_standard_normal(num::Graph& graph, Var rows) {
  if (rows.rows() < 2) throw ShapeError("kl_to_standard_normal needs m >= 2");
  const Var mu = mean_rows(rows);
  const Var var = graph.clamp_min(mean_rows(square(rows - mu)), kVarianceFloor);
  const Var per_dim = square(mu) + var - log(var) - graph.constant(1.0);
  return 0.5 * sum(per_dim);
}

double kl_to_standard_normal(const Matrix& rows) {
  if (rows.rows() < 2) throw ShapeError("kl_to_standard_normal needs m >= 2");
  const num::RowVector mu = rows.colwise().mean();
  double kl = 0.0;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double var =
        std::max((rows.col(j).array() - mu(j)).square().mean(), kVarianceFloor);
    kl += 0.5 * (mu(j) * mu(j) + var - std::log(var) - 1.0);
  }
  return kl;
}

EmiLossTerms emi_loss(num::Graph& graph, EmiModel& model, const Batch& batch,
                      const EmiLossConfig& config) {
  batch.validate();

  model.config().observation.validate(batch.states);
  model.config().observation.validate(batch.next_states);
  const Var obs = graph.constant(batch.states);
  const Var phi = model.embed_states(graph, obs);
  const Var phi_next = model.embed_states(graph, graph.constant(batch.next_states));
  const Var actions = graph.constant(model.config().action.encode(batch.actions));
  const Var psi = model.embed_actions(graph, actions);
  const Var err = model.error_model(graph, obs, actions);

  const Var residual = phi_next - (phi + psi + err);
  const Var dynamics = mean(sum_cols(square(residual)));
  const Var err_sq = sum_cols(square(err));
  const Var error_penalty = mean(err_sq);
  const InfoTerms info = info_loss(graph, model, phi, psi, phi_next);

  Var total = dynamics + config.lambda_error * error_penalty + config.lambda_info * info.loss;
  double kl_value = 0.0;
  if (config.kl_target != RegularizationTarget::None) {
    const Var kl = kl_to_standard_normal(graph, config.kl_target == RegularizationTarget::Action ? psi : phi);
    kl_value = kl.scalar();
    total = total + config.lambda_kl * kl;
  }

  EmiLossTerms out;
  out.total = total;
  out.report.dynamics_loss = dynamics.scalar();
  out.report.error_penalty = error_penalty.scalar();
  out.report.info_loss = info.loss.scalar();
  out.report.kl_reg = kl_value;
  out.report.total = total.scalar();
  out.report.mean_error_norm = err_sq.value().array().sqrt().mean();
  out.report.bound_state = info.bound_state;
  out.report.bound_action = info.bound_action;
  return out;
}

LossReport evaluate_emi_loss(EmiModel& model, const Batch& batch, const EmiLossConfig& config) {
  num::Graph graph;
  return emi_loss(graph, model, batch, config).report;
}

EmbeddingTrainer::EmbeddingTrainer(EmiModel& model, const EmiLossConfig& config)
    : model_(model), config_(config), adam_(model.parameters(), num::AdamConfig{config.lr}) {
  config_.validate();
}

std::vector<LossReport> EmbeddingTrainer::train(const Batch& samples, num::Rng& rng) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index m = config_.minibatch;
  if (n < m) {
    throw ShapeError("train_embeddings: " + std::to_string(n) + " samples < minibatch " +
                     std::to_string(m));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  std::vector<LossReport> epochs;
  const Eigen::Index batches = n / m;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossReport acc;
    for (Eigen::Index k = 0; k < batches; ++k) {
      const Batch mb = samples.select(std::span(order).subspan(static_cast<std::size_t>(k * m),
                                                               static_cast<std::size_t>(m)));
      num::Graph graph;
      const EmiLossTerms terms = emi_loss(graph, model_, mb, config_);
      adam_.step(graph.backward(terms.total));
      acc += terms.report;
    }
    epochs.push_back(acc.scaled(1.0 / static_cast<double>(batches)));
  }
  return epochs;
}

}  // namespace emi
