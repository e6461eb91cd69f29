#include "emi/error.hpp"
#include "emi/objective/objective.hpp"
#include "emi/objective/rewards.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace emi;
using namespace emi::testing;
using num::Matrix;

namespace {

Batch random_batch(const envs::EnvSpec& spec, Eigen::Index m, num::Rng& rng) {
  return {random_observations(spec.observation, m, rng), random_actions(spec.action, m, rng),
          random_observations(spec.observation, m, rng)};
}

double reference_kl(const Matrix& rows) {
  double kl = 0.0;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    double mu = 0.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) mu += rows(i, j);
    mu /= static_cast<double>(rows.rows());
    double var = 0.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) var += (rows(i, j) - mu) * (rows(i, j) - mu);
    var = std::max(var / static_cast<double>(rows.rows()), 1e-8);
    kl += 0.5 * (mu * mu + var - std::log(var) - 1.0);
  }
  return kl;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("kl_to_standard_normal closed-form cases") {
  Matrix standard(2, 1);
  standard << 1.0, -1.0;
  CHECK(kl_to_standard_normal(standard) == 0.0);

  Matrix shifted(2, 1);
  shifted << 2.0, 0.0;  // mu = 1, var = 1
  CHECK(kl_to_standard_normal(shifted) == 0.5);

  Matrix narrow(2, 1);
  narrow << 0.5, -0.5;  // mu = 0, var = 1/4
  CHECK(kl_to_standard_normal(narrow) == doctest::Approx(0.5 * (0.25 + std::log(4.0) - 1.0)).epsilon(1e-15));

  Matrix both(2, 2);
  both << 2.0, 0.5, 0.0, -0.5;  // dimensions add
  CHECK(kl_to_standard_normal(both) ==
        doctest::Approx(kl_to_standard_normal(shifted) + kl_to_standard_normal(narrow)).epsilon(1e-15));

  const Matrix collapsed = Matrix::Constant(4, 1, 0.0);  // var floored at 1e-8
  CHECK(kl_to_standard_normal(collapsed) == doctest::Approx(0.5 * (1e-8 - std::log(1e-8) - 1.0)));
  CHECK_THROWS_AS(kl_to_standard_normal(Matrix::Ones(1, 2)), ShapeError);

  num::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rows = random_matrix(7, 3, rng, -2.0, 3.0);
    num::Graph g;
    CHECK(kl_to_standard_normal(g, g.constant(rows)).scalar() == doctest::Approx(reference_kl(rows)).epsilon(1e-12));
    CHECK(kl_to_standard_normal(rows) == doctest::Approx(reference_kl(rows)).epsilon(1e-12));
  }
}

TEST_CASE("emi_loss terms match an independent evaluation") {
  num::Rng rng(6);
  for (const auto& spec : {vector_spec(3, 2), image_spec(5, 4)}) {
    EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
    const Batch b = random_batch(spec, 10, rng);
    for (auto target : {RegularizationTarget::Action, RegularizationTarget::State, RegularizationTarget::None}) {
      EmiLossConfig cfg;
      cfg.lambda_error = 3.0;
      cfg.lambda_info = 0.7;
      cfg.lambda_kl = 2.0;
      cfg.kl_target = target;
      const LossReport r = evaluate_emi_loss(model, b, cfg);

      const Embeddings e = model.embed(b.states, b.actions, b.next_states);
      const Matrix residual = e.phi_next - (e.phi + e.psi + e.error);
      const double dyn = residual.rowwise().squaredNorm().mean();
      const double err = e.error.rowwise().squaredNorm().mean();
      const double err_norm = e.error.rowwise().norm().mean();
      const InfoReport info = l_info(model, b);
      double kl = 0.0;
      if (target == RegularizationTarget::Action) kl = reference_kl(e.psi);
      if (target == RegularizationTarget::State) kl = reference_kl(e.phi);

      CHECK(r.dynamics_loss == doctest::Approx(dyn).epsilon(1e-12));
      CHECK(r.error_penalty == doctest::Approx(err).epsilon(1e-12));
      CHECK(r.mean_error_norm == doctest::Approx(err_norm).epsilon(1e-12));
      CHECK(r.info_loss == doctest::Approx(info.loss).epsilon(1e-12));
      CHECK(r.bound_state == doctest::Approx(info.bound_state).epsilon(1e-12));
      CHECK(r.kl_reg == doctest::Approx(kl).epsilon(1e-12));
      CHECK(r.total == doctest::Approx(dyn + 3.0 * err + 0.7 * info.loss + 2.0 * kl).epsilon(1e-12));
    }
  }
}

TEST_CASE("emi_loss gradients match finite differences across all networks") {
  num::Rng rng(14);
  const auto spec = vector_spec(2, 1);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  const Batch b = random_batch(spec, 8, rng);
  EmiLossConfig cfg;
  cfg.lambda_error = 5.0;
  cfg.lambda_info = 1.0;
  for (auto target : {RegularizationTarget::Action, RegularizationTarget::State}) {
    cfg.kl_target = target;
    auto build = [&](num::Graph& g) { return emi_loss(g, model, b, cfg).total; };
    const num::GradCheckResult res = num::check_gradients(build, model.parameters());
    INFO(res.worst);
    CHECK(res.ok);
  }
}

TEST_CASE("a zero error model contributes nothing") {
  num::Rng rng(2);
  const auto spec = vector_spec(2, 2);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  model.error_head().set_zero();
  const Batch b = random_batch(spec, 6, rng);
  const LossReport r = evaluate_emi_loss(model, b, EmiLossConfig{});
  CHECK(r.error_penalty == 0.0);
  CHECK(r.mean_error_norm == 0.0);
}

TEST_CASE("loss config validation and target names") {
  EmiLossConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda_info = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EmiLossConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  for (auto t : {RegularizationTarget::Action, RegularizationTarget::State, RegularizationTarget::None}) {
    CHECK(regularization_from_string(to_string(t)) == t);
  }
  CHECK_THROWS_AS(regularization_from_string("both"), ConfigError);
}

TEST_CASE("trainer takes floor(n / m) steps per epoch and rejects n < m") {
  num::Rng rng(8);
  const auto spec = vector_spec(2, 2);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  EmiLossConfig cfg;
  cfg.epochs = 3;
  cfg.minibatch = 16;
  EmbeddingTrainer trainer(model, cfg);
  const Batch b = random_batch(spec, 50, rng);
  const auto reports = trainer.train(b, rng);
  CHECK(reports.size() == 3);
  CHECK(trainer.steps() == 9);
  CHECK_THROWS_AS(trainer.train(random_batch(spec, 15, rng), rng), ShapeError);
}

TEST_CASE("training fits additive dynamics") {
  // s' = s + a in 2-D: the imposed linear model can explain every transition.
  num::Rng rng(10);
  const auto spec = vector_spec(2, 2);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  const Matrix s = random_matrix(1024, 2, rng, -2.0, 2.0);
  const Matrix a = random_matrix(1024, 2, rng, -0.3, 0.3);
  const Batch b{s, a, s + a};
  EmiLossConfig cfg;
  cfg.lambda_error = 10.0;
  cfg.lambda_info = 0.1;
  cfg.minibatch = 128;
  cfg.epochs = 40;
  EmbeddingTrainer trainer(model, cfg);
  const auto reports = trainer.train(b, rng);
  CHECK(reports.back().total < reports.front().total);
  // Residual small relative to the size of the embedded moves.
  const Embeddings e = model.embed(b.states, b.actions, b.next_states);
  const double moves = (e.phi_next - e.phi).rowwise().squaredNorm().mean();
  CHECK(reports.back().dynamics_loss < 0.05 * moves);
  CHECK(reports.back().bound_action > 0.05);
}

TEST_CASE("prediction-error reward is the per-row dynamics residual") {
  num::Rng rng(4);
  const auto spec = image_spec(4, 3);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  const Batch b = random_batch(spec, 7, rng);
  const auto r = prediction_error_reward(model, b);
  const Embeddings e = model.embed(b.states, b.actions, b.next_states);
  REQUIRE(r.size() == 7);
  for (Eigen::Index i = 0; i < 7; ++i) {
    const double ref = (e.phi.row(i) + e.psi.row(i) + e.error.row(i) - e.phi_next.row(i)).squaredNorm();
    CHECK(r[static_cast<std::size_t>(i)] == doctest::Approx(ref).epsilon(1e-13));
    CHECK(prediction_error_reward(model, b.states.row(i), b.actions.row(i), b.next_states.row(i)) ==
          doctest::Approx(ref).epsilon(1e-13));
    CHECK(r[static_cast<std::size_t>(i)] >= 0.0);
  }
}

TEST_CASE("kernel density and diversity reward") {
  DiversityReference ref;
  ref.embeddings = Matrix::Zero(1, 2);
  ref.sigma = 0.5;
  Matrix q(2, 2);
  q << 0.0, 0.0, 0.5 * std::sqrt(2.0), 0.0;  // squared distance 2 sigma^2
  const auto g = ref.density(q);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(g[0] - g[1] == doctest::Approx(1.0 - std::exp(-1.0)));

  Matrix pts(3, 1);
  pts << 0.0, 1.0, 3.0;
  CHECK(median_pairwise_distance(pts) == 2.0);
  Matrix four(4, 1);
  four << 0.0, 1.0, 3.0, 7.0;  // 1 2 3 4 6 7 -> (3 + 4) / 2
  CHECK(median_pairwise_distance(four) == 3.5);

  num::Rng rng(5);
  const auto spec = vector_spec(2, 1);
  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, 2), rng);
  const Matrix s = random_matrix(6, 2, rng), s2 = random_matrix(6, 2, rng);
  const DiversityReference auto_ref = make_diversity_reference(model, s, 0.0);
  CHECK(auto_ref.sigma == doctest::Approx(median_pairwise_distance(model.embed_states(s))));
  const auto d = diversity_reward(model, s, s2, auto_ref);
  const auto gs = auto_ref.density(model.embed_states(s));
  const auto gs2 = auto_ref.density(model.embed_states(s2));
  for (std::size_t i = 0; i < 6; ++i) CHECK(d[i] == doctest::Approx(gs[i] - gs2[i]).epsilon(1e-14));
}

TEST_CASE("augment_rewards") {
  const std::vector<double> env{0.0, 1.0, 0.0};
  const std::vector<double> intr{2.0, -1.0, 5.0};
  CHECK(augment_rewards(env, intr, 0.0) == env);
  const auto out = augment_rewards(env, intr, 0.1);
  CHECK(out[0] == doctest::Approx(0.2));
  CHECK(out[1] == doctest::Approx(0.9));
  CHECK_THROWS_AS(augment_rewards(env, std::vector<double>{1.0}, 0.1), ShapeError);
  IntrinsicConfig cfg;
  cfg.eta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(intrinsic_mode_from_string("diversity") == IntrinsicMode::Diversity);
  CHECK(to_string(IntrinsicMode::PredictionError) == "prediction_error");
}

}  // TEST_SUITE
