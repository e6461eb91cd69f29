#pragma once

#include "emi/numcore/graph.hpp"
#include "emi/numcore/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace emi::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments for one ordered list of parameters.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

AdamState make_adam_state(std::span<Matrix* const> params, AdamConfig config = {});

// One bias-corrected Adam update:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
// Throws ShapeError when params, grads and moments disagree.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state);

// Owns the parameter list and state; steps from a Graph's Gradients.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Matrix*> params, AdamConfig config);

  void step(const Gradients& grads);
  void step(std::span<const Matrix> grads);

  const AdamState& state() const { return state_; }
  const std::vector<Matrix*>& params() const { return params_; }
  void set_lr(double lr) { state_.config.lr = lr; }

 private:
  std::vector<Matrix*> params_;
  AdamState state_;
};

}  // namespace emi::num
