#pragma once

#include "emi/mi/mi.hpp"
#include "emi/model/emi_model.hpp"

#include <span>
#include <string>
#include <vector>

namespace emi {

enum class IntrinsicMode { PredictionError, Diversity };

std::string to_string(IntrinsicMode mode);
IntrinsicMode intrinsic_mode_from_string(const std::string& name);

struct IntrinsicConfig {
  IntrinsicMode mode = IntrinsicMode::PredictionError;
  double eta = 0.001;
  // Kernel bandwidth for the diversity reward; <= 0 selects the median
  // pairwise embedding distance of the reference set.
  double sigma = 0.0;

  void validate() const;
};

// ||phi(s) + psi(a) + S(s, a) - phi(s')||^2 per row.
std::vector<double> prediction_error_reward(const EmiModel& model, const Batch& transitions);
double prediction_error_reward(const EmiModel& model, const num::Matrix& state,
                               const num::Matrix& action, const num::Matrix& next_state);

// Embedded reference states and the kernel bandwidth used by g(s).
struct DiversityReference {
  num::Matrix embeddings;  // n x d
  double sigma = 1.0;

  // g(s) = (1/n) sum_i exp(-||e - e_i||^2 / (2 sigma^2)) for each row e.
  std::vector<double> density(const num::Matrix& embedded) const;
};

// Median of the pairwise Euclidean distances between distinct rows.
double median_pairwise_distance(const num::Matrix& embeddings);

DiversityReference make_diversity_reference(const EmiModel& model,
                                            const num::Matrix& reference_states, double sigma);

// g(s_t) - g(s'_t) per row; may be negative.
std::vector<double> diversity_reward(const EmiModel& model, const num::Matrix& states,
                                     const num::Matrix& next_states,
                                     const DiversityReference& reference);

// r_env + eta * r_int elementwise; ShapeError on a length mismatch.
std::vector<double> augment_rewards(std::span<const double> env_rewards,
                                    std::span<const double> intrinsic, double eta);

}  // namespace emi
