#pragma once

#include "emi/numcore/matrix.hpp"

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace emi::num {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;
};

enum class Op {
  Constant,
  Parameter,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  Tanh,
  Relu,
  Softplus,
  Exp,
  Log,
  Square,
  Mean,
  Sum,
  SumCols,
  MeanRows,
  ConcatCols,
  ConcatRows,
  SliceRows,
  SliceCols,
  ClampMin,
  Clamp,
  Minimum,
  LogSoftmax,
};

// Reverse-mode gradients keyed by parameter storage address.
class Gradients {
 public:
  const Matrix& of(const Matrix& param) const;
  bool contains(const Matrix& param) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<const Matrix*, Matrix>>& entries() const { return entries_; }

  void add(const Matrix* param, Matrix grad) { entries_.emplace_back(param, std::move(grad)); }

 private:
  std::vector<std::pair<const Matrix*, Matrix>> entries_;
};

// Tape of matrix-valued operations. Nodes are appended in evaluation order, so
// every operand precedes its consumer and the tape is acyclic by construction.
// Forward values are computed eagerly; each op throws NumericError if it
// produces a non-finite value and ShapeError on incompatible operands.
//
// Binary elementwise ops (add, sub, mul) broadcast the right operand when it
// is 1x1 or 1xC against an RxC left operand.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var constant(double value);
  // Trainable leaf bound to `storage`. Binding the same storage twice returns
  // the same node, so shared subexpressions accumulate their gradients.
  Var parameter(Matrix& storage);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var relu(Var a);
  Var softplus(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var mean(Var a);       // 1x1
  Var sum(Var a);        // 1x1
  Var sum_cols(Var a);   // Rx1, per-row sum
  Var mean_rows(Var a);  // 1xC, per-column mean
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count);
  Var slice_cols(Var a, Eigen::Index begin, Eigen::Index count);
  Var clamp_min(Var a, double lo);
  Var clamp(Var a, double lo, double hi);
  Var minimum(Var a, Var b);
  Var log_softmax(Var a);  // row-wise

  const Matrix& value(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Gradients of the 1x1 node `loss` with respect to every parameter leaf.
  // Leaves the forward values untouched; may be called repeatedly.
  Gradients backward(Var loss) const;

 private:
  struct Node {
    Op op = Op::Constant;
    Matrix value;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    double lo = 0.0;
    double hi = 0.0;
    Eigen::Index begin = 0;
    Matrix* storage = nullptr;
  };

  Var push(Node node, const char* what);
  const Node& node(Var v) const;
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double s, Var a);
Var operator-(Var a);

Var matmul(Var a, Var b);
Var tanh(Var a);
Var relu(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var mean(Var a);
Var sum(Var a);
Var sum_cols(Var a);
Var mean_rows(Var a);

}  // namespace emi::num
