#include "emi/agent/policy.hpp"

#include "emi/error.hpp"

#include <cmath>
#include <numbers>

namespace emi::agent {

using num::Matrix;
using num::Var;

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

void PolicyConfig::validate() const {
  if (hidden.empty()) throw ConfigError("policy.hidden needs at least one layer");
  if (!(discount >= 0 && discount <= 1)) throw ConfigError("policy.discount must be in [0, 1]");
  if (!(clip_ratio > 0)) throw ConfigError("policy.clip_ratio must be > 0");
  if (epochs < 1) throw ConfigError("policy.epochs must be >= 1");
  if (minibatch < 1) throw ConfigError("policy.minibatch must be >= 1");
  if (!(lr >= 0) || !(baseline_lr >= 0)) throw ConfigError("policy learning rates must be >= 0");
  if (!(head_init_scale > 0)) throw ConfigError("policy.head_init_scale must be > 0");
}

Matrix stack_rows(const std::vector<envs::Observation>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ShapeError("stack_rows: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Policy::Policy(const envs::EnvSpec& spec, const PolicyConfig& config, num::Rng& rng)
    : observation_(spec.observation), action_(spec.action) {
  config.validate();
  const int in = spec.observation.flat_size();
  net_ = Mlp(in, {config.hidden, config.activation, action_.dim, false, config.head_init_scale}, rng);
  baseline_ = Mlp(in, {config.hidden, config.activation, 1}, rng);
  if (!action_.discrete) log_std_ = Matrix::Constant(1, action_.dim, config.init_log_std);
}

Matrix Policy::head(const Matrix& observations) const {
  Matrix out = net_.apply(observations);
  if (!action_.discrete) return out;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double top = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - top).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

ActionSample Policy::sample_action(const envs::Observation& obs, num::Rng& rng) const {
  const Matrix x = stack_rows({obs});
  ActionSample s;
  if (action_.discrete) {
    const Matrix logits = net_.apply(x);
    const double top = logits.maxCoeff();
    const double lse = top + std::log((logits.array() - top).exp().sum());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double draw = u(rng);
    double cumulative = 0.0;
    int choice = action_.dim - 1;
    for (int k = 0; k < action_.dim; ++k) {
      cumulative += std::exp(logits(0, k) - lse);
      if (draw < cumulative) {
        choice = k;
        break;
      }
    }
    s.action = {static_cast<double>(choice)};
    s.log_prob = logits(0, choice) - lse;
    return s;
  }
  const Matrix mean = net_.apply(x);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.action.resize(static_cast<std::size_t>(action_.dim));
  double lp = 0.0;
  for (int j = 0; j < action_.dim; ++j) {
    const double z = normal(rng);
    s.action[static_cast<std::size_t>(j)] = mean(0, j) + std::exp(log_std_(0, j)) * z;
    lp += -0.5 * z * z - log_std_(0, j) - 0.5 * kLog2Pi;
  }
  s.log_prob = lp;
  return s;
}

double Policy::log_prob(const envs::Observation& obs, const envs::Action& action) const {
  const Matrix x = stack_rows({obs});
  const Matrix out = net_.apply(x);
  if (action_.discrete) {
    const Matrix onehot = action_.encode(stack_rows({action}));
    const double top = out.maxCoeff();
    const double lse = top + std::log((out.array() - top).exp().sum());
    return (out.array() * onehot.array()).sum() - lse;
  }
  if (static_cast<int>(action.size()) != action_.dim) throw ShapeError("log_prob: action size");
  double lp = 0.0;
  for (int j = 0; j < action_.dim; ++j) {
    const double z = (action[static_cast<std::size_t>(j)] - out(0, j)) / std::exp(log_std_(0, j));
    lp += -0.5 * z * z - log_std_(0, j) - 0.5 * kLog2Pi;
  }
  return lp;
}

Matrix Policy::values(const Matrix& observations) const { return baseline_.apply(observations); }

Var Policy::log_prob(num::Graph& graph, Var observations, const Matrix& raw_actions) {
  const Var out = net_.forward(graph, observations);
  if (action_.discrete) {
    const Var onehot = graph.constant(action_.encode(raw_actions));
    return sum_cols(graph.log_softmax(out) * onehot);
  }
  if (raw_actions.cols() != action_.dim || raw_actions.rows() != observations.rows()) {
    throw ShapeError("log_prob: actions " + num::shape_string(raw_actions));
  }
  const Var log_std = graph.parameter(log_std_);
  const Var z = (graph.constant(raw_actions) - out) * exp(-log_std);
  const Var per_row = -0.5 * sum_cols(square(z));
  return per_row - sum(log_std) - graph.constant(0.5 * kLog2Pi * action_.dim);
}

Var Policy::entropy(num::Graph& graph, Var observations) {
  if (action_.discrete) {
    const Var logp = graph.log_softmax(net_.forward(graph, observations));
    return -sum_cols(exp(logp) * logp);
  }
  const Var log_std = graph.parameter(log_std_);
  const Var per = sum(log_std) + graph.constant(0.5 * (kLog2Pi + 1.0) * action_.dim);
  const Var ones = graph.constant(Matrix::Ones(observations.rows(), 1));
  return ones * per;
}

Var Policy::value(num::Graph& graph, Var observations) { return baseline_.forward(graph, observations); }

std::vector<Matrix*> Policy::policy_parameters() {
  std::vector<Matrix*> out = net_.parameters();
  if (!action_.discrete) out.push_back(&log_std_);
  return out;
}

std::vector<Matrix*> Policy::baseline_parameters() { return baseline_.parameters(); }

std::vector<std::pair<std::string, Matrix*>> Policy::named_parameters() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (auto& [n, m] : net_.named_parameters()) out.emplace_back("policy." + n, m);
  if (!action_.discrete) out.emplace_back("policy.log_std", &log_std_);
  for (auto& [n, m] : baseline_.named_parameters()) out.emplace_back("baseline." + n, m);
  return out;
}

}  // namespace emi::agent
