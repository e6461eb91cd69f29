#include "emi/objective/rewards.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>

namespace emi {

using num::Matrix;

std::string to_string(IntrinsicMode mode) {
  return mode == IntrinsicMode::PredictionError ? "prediction_error" : "diversity";
}

IntrinsicMode intrinsic_mode_from_string(const std::string& name) {
  if (name == "prediction_error") return IntrinsicMode::PredictionError;
  if (name == "diversity") return IntrinsicMode::Diversity;
  throw ConfigError("unknown intrinsic mode '" + name + "'");
}

void IntrinsicConfig::validate() const {
  if (!(eta >= 0)) throw ConfigError("intrinsic.eta must be >= 0");
  if (!std::isfinite(sigma)) throw ConfigError("intrinsic.sigma must be finite");
}

std::vector<double> prediction_error_reward(const EmiModel& model, const Batch& transitions) {
  if (transitions.actions.rows() != transitions.states.rows() ||
      transitions.next_states.rows() != transitions.states.rows()) {
    throw ShapeError("prediction_error_reward: rows misaligned");
  }
  const Embeddings e = model.embed(transitions.states, transitions.actions, transitions.next_states);
  const Matrix residual = e.phi + e.psi + e.error - e.phi_next;
  std::vector<double> out(static_cast<std::size_t>(residual.rows()));
  for (Eigen::Index i = 0; i < residual.rows(); ++i) out[static_cast<std::size_t>(i)] = residual.row(i).squaredNorm();
  return out;
}

double prediction_error_reward(const EmiModel& model, const Matrix& state, const Matrix& action,
                               const Matrix& next_state) {
  return prediction_error_reward(model, Batch{state, action, next_state}).front();
}

std::vector<double> DiversityReference::density(const Matrix& embedded) const {
  if (embedded.cols() != embeddings.cols()) throw ShapeError("density: embedding width mismatch");
  if (embeddings.rows() < 1) throw ShapeError("density: empty reference set");
  if (!(sigma > 0)) throw ConfigError("density: sigma must be > 0");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> out(static_cast<std::size_t>(embedded.rows()));
  for (Eigen::Index i = 0; i < embedded.rows(); ++i) {
    const double total =
        (embeddings.rowwise() - embedded.row(i)).rowwise().squaredNorm().unaryExpr(
            [inv](double d2) { return std::exp(-d2 * inv); }).sum();
    out[static_cast<std::size_t>(i)] = total / static_cast<double>(embeddings.rows());
  }
  return out;
}

double median_pairwise_distance(const Matrix& embeddings) {
  const Eigen::Index n = embeddings.rows();
  if (n < 2) throw ShapeError("median_pairwise_distance needs >= 2 rows");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((embeddings.row(i) - embeddings.row(j)).norm());
  }
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(d.begin(), mid));
}

DiversityReference make_diversity_reference(const EmiModel& model, const Matrix& reference_states,
                                            double sigma) {
  DiversityReference ref;
  ref.embeddings = model.embed_states(reference_states);
  ref.sigma = sigma > 0 ? sigma : median_pairwise_distance(ref.embeddings);
  // All references coincide: any positive bandwidth gives g == 1 everywhere on them.
  if (!(ref.sigma > 0)) ref.sigma = 1.0;
  return ref;
}

std::vector<double> diversity_reward(const EmiModel& model, const Matrix& states,
                                     const Matrix& next_states, const DiversityReference& reference) {
  if (states.rows() != next_states.rows()) throw ShapeError("diversity_reward: rows misaligned");
  const std::vector<double> g_now = reference.density(model.embed_states(states));
  const std::vector<double> g_next = reference.density(model.embed_states(next_states));
  std::vector<double> out(g_now.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_now[i] - g_next[i];
  return out;
}

std::vector<double> augment_rewards(std::span<const double> env_rewards,
                                    std::span<const double> intrinsic, double eta) {
  if (env_rewards.size() != intrinsic.size()) {
    throw ShapeError("augment_rewards: " + std::to_string(env_rewards.size()) + " env vs " +
                     std::to_string(intrinsic.size()) + " intrinsic");
  }
  std::vector<double> out(env_rewards.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = env_rewards[i] + eta * intrinsic[i];
  return out;
}

}  // namespace emi
