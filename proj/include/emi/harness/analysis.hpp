#pragma once

#include "emi/mi/mi.hpp"
#include "emi/model/emi_model.hpp"
#include "emi/numcore/adam.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace emi::harness {

// Rank-deficient least-squares design or collinear targets.
class DegenerateDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fits targets ~ embeddings * A + b by least squares and returns
// R^2 = 1 - SSE / SST (SST about the target mean, summed over target
// columns), capped at 1. Needs m >= 3 rows.
double eval_embedding_alignment(const num::Matrix& embeddings, const num::Matrix& targets);

struct BoundaryReport {
  std::size_t clipped_count = 0;
  std::size_t interior_count = 0;
  std::optional<double> mean_clipped;   // mean ||S(s,a)|| where clipping was active
  std::optional<double> mean_interior;
  std::optional<double> ratio;          // clipped / interior when both exist and interior > 0
};

BoundaryReport boundary_error_analysis(const std::vector<double>& error_norms,
                                       const std::vector<bool>& clipped);
BoundaryReport boundary_error_analysis(const EmiModel& model, const Batch& transitions,
                                       const std::vector<bool>& clipped);

// Mean Euclidean distance over all pairs of distinct rows.
double mean_pairwise_distance(const num::Matrix& points);

struct MiCheckConfig {
  double rho = 0.0;
  int steps = 3000;
  int minibatch = 512;
  double lr = 1e-3;
  int eval_samples = 20000;
  std::uint64_t seed = 0;
};

struct MiCheckResult {
  double initial_bound = 0.0;  // untrained critic on the evaluation sample
  double final_bound = 0.0;    // trained critic on the evaluation sample
};

// Trains a (64, 64) ReLU critic T(x, z) on a standard bivariate Gaussian pair
// with correlation rho, contrasting joint rows with half-shift shuffled ones,
// and reports the JSD bound on a fresh evaluation sample.
MiCheckResult mi_gaussian_check(const MiCheckConfig& config);

}  // namespace emi::harness
