#pragma once

#include "emi/numcore/graph.hpp"
#include "emi/numcore/matrix.hpp"

#include <string>
#include <utility>
#include <vector>

namespace emi {

enum class Activation { Tanh, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpSpec {
  std::vector<int> hidden;
  Activation activation = Activation::Relu;
  int output = 2;
  // Apply the activation to the output layer too (used for trunks).
  bool activate_output = false;
  // Multiplies the Glorot bound of the last layer.
  double output_init_scale = 1.0;
};

// Fully connected network: x -> act(x W0 + b0) -> ... -> x Wn + bn.
// Rows of the input are samples.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const MlpSpec& spec, num::Rng& rng);

  num::Var forward(num::Graph& graph, num::Var x);
  num::Matrix apply(const num::Matrix& x) const;

  int input_dim() const { return input_dim_; }
  int output_dim() const { return spec_.output; }
  const MlpSpec& spec() const { return spec_; }
  std::size_t layers() const { return weights_.size(); }

  const num::Matrix& weight(std::size_t layer) const { return weights_.at(layer); }
  const num::Matrix& bias(std::size_t layer) const { return biases_.at(layer); }

  std::vector<num::Matrix*> parameters();
  // ("w0", W0), ("b0", b0), ...
  std::vector<std::pair<std::string, num::Matrix*>> named_parameters();
  void set_zero();

 private:
  int input_dim_ = 0;
  MlpSpec spec_;
  std::vector<num::Matrix> weights_;
  std::vector<num::Matrix> biases_;
};

}  // namespace emi
