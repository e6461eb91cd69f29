#include "emi/model/mlp.hpp"

#include "emi/error.hpp"

namespace emi {

using num::Matrix;
using num::Var;

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(int input_dim, const MlpSpec& spec, num::Rng& rng) : input_dim_(input_dim), spec_(spec) {
  if (input_dim < 1 || spec.output < 1) throw ConfigError("mlp dims must be positive");
  if (spec.hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
  int fan_in = input_dim;
  std::vector<int> widths = spec.hidden;
  widths.push_back(spec.output);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < 1) throw ConfigError("mlp layer widths must be positive");
    Matrix w = num::glorot_uniform(fan_in, widths[i], rng);
    if (i + 1 == widths.size()) w *= spec.output_init_scale;
    weights_.push_back(std::move(w));
    biases_.push_back(Matrix::Zero(1, widths[i]));
    fan_in = widths[i];
  }
}

Var Mlp::forward(num::Graph& graph, Var x) {
  if (x.cols() != input_dim_) {
    throw ShapeError("mlp input has " + std::to_string(x.cols()) + " columns, expected " +
                     std::to_string(input_dim_));
  }
  Var h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = matmul(h, graph.parameter(weights_[i])) + graph.parameter(biases_[i]);
    if (i + 1 < weights_.size() || spec_.activate_output) {
      h = spec_.activation == Activation::Tanh ? tanh(h) : relu(h);
    }
  }
  return h;
}

Matrix Mlp::apply(const Matrix& x) const {
  if (x.cols() != input_dim_) {
    throw ShapeError("mlp input has " + std::to_string(x.cols()) + " columns, expected " +
                     std::to_string(input_dim_));
  }
  Matrix h = x;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = num::matmul(h, weights_[i]);
    h.rowwise() += biases_[i].row(0);
    if (i + 1 < weights_.size() || spec_.activate_output) {
      if (spec_.activation == Activation::Tanh) {
        h = h.array().tanh().matrix();
      } else {
        h = h.cwiseMax(0.0);
      }
    }
  }
  return h;
}

std::vector<Matrix*> Mlp::parameters() {
  std::vector<Matrix*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<std::pair<std::string, Matrix*>> Mlp::named_parameters() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.emplace_back("w" + std::to_string(i), &weights_[i]);
    out.emplace_back("b" + std::to_string(i), &biases_[i]);
  }
  return out;
}

void Mlp::set_zero() {
  for (auto& w : weights_) w.setZero();
  for (auto& b : biases_) b.setZero();
}

}  // namespace emi
