#include "emi/harness/analysis.hpp"

#include "emi/error.hpp"

#include <cmath>

namespace emi::harness {

using num::Matrix;

double eval_embedding_alignment(const Matrix& embeddings, const Matrix& targets) {
  const Eigen::Index m = embeddings.rows();
  if (m < 3) throw ShapeError("alignment needs at least 3 rows");
  if (targets.rows() != m) throw ShapeError("alignment: embeddings and targets differ in rows");

  const num::RowVector target_mean = targets.colwise().mean();
  const Matrix centered = targets.rowwise() - target_mean;
  const double sst = centered.squaredNorm();
  if (targets.cols() >= 2) {
    Eigen::FullPivLU<Matrix> lu(centered);
    lu.setThreshold(1e-10);
    if (lu.rank() < 2) throw DegenerateDesignError("alignment targets are collinear");
  }
  if (!(sst > 0)) throw DegenerateDesignError("alignment targets have zero variance");

  Matrix design(m, embeddings.cols() + 1);
  design << embeddings, Matrix::Ones(m, 1);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < design.cols()) {
    throw DegenerateDesignError("alignment design is rank deficient (rank " +
                                std::to_string(qr.rank()) + " of " +
                                std::to_string(design.cols()) + ")");
  }
  const Matrix coef = qr.solve(targets);
  const double sse = (design * coef - targets).squaredNorm();
  return std::min(1.0, 1.0 - sse / sst);
}

BoundaryReport boundary_error_analysis(const std::vector<double>& error_norms,
                                       const std::vector<bool>& clipped) {
  if (error_norms.size() != clipped.size()) throw ShapeError("boundary analysis: length mismatch");
  BoundaryReport r;
  double sum_clipped = 0.0, sum_interior = 0.0;
  for (std::size_t i = 0; i < error_norms.size(); ++i) {
    if (clipped[i]) {
      sum_clipped += error_norms[i];
      ++r.clipped_count;
    } else {
      sum_interior += error_norms[i];
      ++r.interior_count;
    }
  }
  if (r.clipped_count) r.mean_clipped = sum_clipped / static_cast<double>(r.clipped_count);
  if (r.interior_count) r.mean_interior = sum_interior / static_cast<double>(r.interior_count);
  if (r.mean_clipped && r.mean_interior && *r.mean_interior > 0) {
    r.ratio = *r.mean_clipped / *r.mean_interior;
  }
  return r;
}

BoundaryReport boundary_error_analysis(const EmiModel& model, const Batch& transitions,
                                       const std::vector<bool>& clipped) {
  const Matrix err = model.error_model(transitions.states, transitions.actions);
  std::vector<double> norms(static_cast<std::size_t>(err.rows()));
  for (Eigen::Index i = 0; i < err.rows(); ++i) norms[static_cast<std::size_t>(i)] = err.row(i).norm();
  return boundary_error_analysis(norms, clipped);
}

double mean_pairwise_distance(const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ShapeError("mean_pairwise_distance needs >= 2 rows");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) total += (points.row(i) - points.row(j)).norm();
  }
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

Matrix gaussian_pairs(double rho, Eigen::Index rows, num::Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double tail = std::sqrt(1.0 - rho * rho);
  Matrix out(rows, 2);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = normal(rng);
    const double e = normal(rng);
    out(i, 0) = x;
    out(i, 1) = rho * x + tail * e;
  }
  return out;
}

// Joint rows [0, h) and the pairing (x_l, z_{l+h}).
std::pair<Matrix, Matrix> split_half_shift(const Matrix& pairs) {
  const Eigen::Index h = half_batch(pairs.rows());
  Matrix joint = pairs.topRows(h);
  Matrix marginal(h, 2);
  marginal.col(0) = pairs.col(0).head(h);
  marginal.col(1) = pairs.col(1).segment(h, h);
  return {joint, marginal};
}

double evaluate_bound(const Mlp& critic, const Matrix& pairs) {
  const auto [joint, marginal] = split_half_shift(pairs);
  const Matrix tj = critic.apply(joint);
  const Matrix tm = critic.apply(marginal);
  return jsd_bound(std::span<const double>(tj.data(), static_cast<std::size_t>(tj.size())),
                   std::span<const double>(tm.data(), static_cast<std::size_t>(tm.size())));
}

}  // namespace

MiCheckResult mi_gaussian_check(const MiCheckConfig& config) {
  if (!(std::abs(config.rho) < 1.0)) throw ConfigError("rho must satisfy |rho| < 1");
  if (config.steps < 0 || config.minibatch < 2 || config.eval_samples < 2) {
    throw ConfigError("mi check needs steps >= 0, minibatch >= 2, eval_samples >= 2");
  }
  num::Rng rng(config.seed);
  Mlp critic(2, MlpSpec{{64, 64}, Activation::Relu, 1, false, 0.01}, rng);
  const Matrix eval = gaussian_pairs(config.rho, config.eval_samples, rng);

  MiCheckResult result;
  result.initial_bound = evaluate_bound(critic, eval);

  num::Adam adam(critic.parameters(), num::AdamConfig{config.lr});
  for (int step = 0; step < config.steps; ++step) {
    const auto [joint, marginal] = split_half_shift(gaussian_pairs(config.rho, config.minibatch, rng));
    num::Graph g;
    const num::Var loss = jsd_loss(critic.forward(g, g.constant(joint)), critic.forward(g, g.constant(marginal)));
    adam.step(g.backward(loss));
  }
  result.final_bound = evaluate_bound(critic, eval);
  return result;
}

}  // namespace emi::harness
