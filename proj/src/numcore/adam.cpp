#include "emi/numcore/adam.hpp"

#include "emi/error.hpp"

#include <cmath>

namespace emi::num {

AdamState make_adam_state(std::span<Matrix* const> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const Matrix* p : params) {
    state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
    state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return state;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " params, " +
                     std::to_string(grads.size()) + " grads, " + std::to_string(state.m.size()) +
                     " moments");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], grads[i], "adam_step grad " + std::to_string(i));
    require_same_shape(*params[i], state.m[i], "adam_step moment " + std::to_string(i));
  }

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i].cwiseAbs2();
    if (c.lr == 0.0) continue;
    const auto m_hat = state.m[i].array() / correct1;
    const auto v_hat = state.v[i].array() / correct2;
    params[i]->array() -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
  }
}

Adam::Adam(std::vector<Matrix*> params, AdamConfig config)
    : params_(std::move(params)), state_(make_adam_state(params_, config)) {}

void Adam::step(const Gradients& grads) {
  std::vector<Matrix> ordered;
  ordered.reserve(params_.size());
  for (const Matrix* p : params_) {
    ordered.push_back(grads.contains(*p) ? grads.of(*p) : Matrix::Zero(p->rows(), p->cols()));
  }
  adam_step(params_, ordered, state_);
}

void Adam::step(std::span<const Matrix> grads) { adam_step(params_, grads, state_); }

}  // namespace emi::num
