#pragma once

#include "emi/mi/mi.hpp"
#include "emi/model/emi_model.hpp"
#include "emi/numcore/adam.hpp"

#include <string>
#include <vector>

namespace emi {

// Which embedding distribution the KL-to-N(0, I) regularizer is applied to.
enum class RegularizationTarget { Action, State, None };

std::string to_string(RegularizationTarget t);
RegularizationTarget regularization_from_string(const std::string& name);

struct EmiLossConfig {
  double lambda_error = 100.0;
  double lambda_info = 0.1;
  double lambda_kl = 1.0;
  RegularizationTarget kl_target = RegularizationTarget::Action;
  int epochs = 3;
  int minibatch = 512;
  double lr = 1e-3;

  void validate() const;
};

struct LossReport {
  double dynamics_loss = 0.0;   // mean_rows ||phi(s') - (phi(s) + psi(a) + S(s,a))||^2
  double error_penalty = 0.0;   // mean_rows ||S(s,a)||^2
  double info_loss = 0.0;       // L_info (log 4 constants omitted)
  double kl_reg = 0.0;          // KL(N(mu, diag var) || N(0, I)) of the regularized embedding
  double total = 0.0;
  double mean_error_norm = 0.0; // mean_rows ||S(s,a)||
  double bound_state = 0.0;     // JSD bound diagnostics
  double bound_action = 0.0;

  LossReport& operator+=(const LossReport& other);
  LossReport scaled(double factor) const;
};

struct EmiLossTerms {
  num::Var total;
  LossReport report;
};

// Builds total = dynamics + l_err * error + l_info * info + l_kl * kl on `graph`.
// Gradients reach phi, psi, the error model and both statistics networks.
EmiLossTerms emi_loss(num::Graph& graph, EmiModel& model, const Batch& batch,
                      const EmiLossConfig& config);
LossReport evaluate_emi_loss(EmiModel& model, const Batch& batch, const EmiLossConfig& config);

// Moment-matched diagonal Gaussian against N(0, I):
//   sum_j 0.5 (mu_j^2 + var_j - log var_j - 1), var with 1/m normalization,
//   floored at 1e-8.
num::Var kl_to_standard_normal(num::Graph& graph, num::Var rows);
double kl_to_standard_normal(const num::Matrix& rows);

// Runs the inner optimization block: per epoch, reshuffle the samples and take
// one Adam step per full minibatch (floor(n / m) steps). Adam moments persist
// across calls.
class EmbeddingTrainer {
 public:
  EmbeddingTrainer(EmiModel& model, const EmiLossConfig& config);

  // Returns one report per epoch, averaged over its minibatches.
  std::vector<LossReport> train(const Batch& samples, num::Rng& rng);

  const EmiLossConfig& config() const { return config_; }
  std::int64_t steps() const { return adam_.state().step; }

 private:
  EmiModel& model_;
  EmiLossConfig config_;
  num::Adam adam_;
};

}  // namespace emi
