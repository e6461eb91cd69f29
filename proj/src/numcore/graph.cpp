#include "emi/numcore/graph.hpp"

#include "emi/error.hpp"

#include <cmath>
#include <string>

namespace emi::num {

namespace {

enum class Broadcast { None, Row, Scalar };

Broadcast broadcast_kind(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::None;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  throw ShapeError(std::string(what) + ": cannot broadcast " + shape_string(b) + " onto " +
                   shape_string(a));
}

Matrix expand(const Matrix& b, Eigen::Index rows, Eigen::Index cols) {
  if (b.rows() == rows && b.cols() == cols) return b;
  if (b.size() == 1) return Matrix::Constant(rows, cols, b(0, 0));
  return b.replicate(rows, 1);
}

// Sum a gradient of the broadcast shape back to the operand's shape.
Matrix reduce_to(const Matrix& g, const Matrix& like) {
  if (g.rows() == like.rows() && g.cols() == like.cols()) return g;
  if (like.size() == 1) return Matrix::Constant(1, 1, g.sum());
  return g.colwise().sum();
}

void accumulate(std::vector<Matrix>& grads, std::size_t id, const Matrix& g) {
  if (grads[id].size() == 0) {
    grads[id] = g;
  } else {
    grads[id] += g;
  }
}

}  // namespace

const Matrix& Var::value() const { return graph->value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("scalar(): node has shape " + shape_string(v));
  return v(0, 0);
}

const Matrix& Gradients::of(const Matrix& param) const {
  for (const auto& [p, g] : entries_) {
    if (p == &param) return g;
  }
  throw std::out_of_range("Gradients::of: parameter not part of this graph");
}

bool Gradients::contains(const Matrix& param) const {
  for (const auto& entry : entries_) {
    if (entry.first == &param) return true;
  }
  return false;
}

void Graph::check_owner(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) {
    throw std::invalid_argument("Var does not belong to this graph");
  }
}

const Graph::Node& Graph::node(Var v) const {
  check_owner(v);
  return nodes_[v.id];
}

const Matrix& Graph::value(Var v) const { return node(v).value; }

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

Var Graph::push(Node n, const char* what) {
  if (!all_finite(n.value)) throw NumericError(std::string("non-finite output of ") + what);
  for (std::size_t in : n.inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Graph::constant(Matrix value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n), "constant");
}

Var Graph::constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Graph::parameter(Matrix& storage) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::Parameter && nodes_[i].storage == &storage) return Var{this, i};
  }
  Node n;
  n.op = Op::Parameter;
  n.value = storage;
  n.storage = &storage;
  n.requires_grad = true;
  return push(std::move(n), "parameter");
}

Var Graph::matmul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  Node n;
  n.op = Op::MatMul;
  n.value = num::matmul(av, bv);
  n.inputs = {a.id, b.id};
  return push(std::move(n), "matmul");
}

Var Graph::add(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  broadcast_kind(av, bv, "add");
  Node n;
  n.op = Op::Add;
  n.value = av + expand(bv, av.rows(), av.cols());
  n.inputs = {a.id, b.id};
  return push(std::move(n), "add");
}

Var Graph::sub(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  broadcast_kind(av, bv, "sub");
  Node n;
  n.op = Op::Sub;
  n.value = av - expand(bv, av.rows(), av.cols());
  n.inputs = {a.id, b.id};
  return push(std::move(n), "sub");
}

Var Graph::mul(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  broadcast_kind(av, bv, "mul");
  Node n;
  n.op = Op::Mul;
  n.value = av.cwiseProduct(expand(bv, av.rows(), av.cols()));
  n.inputs = {a.id, b.id};
  return push(std::move(n), "mul");
}

Var Graph::scale(Var a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.value = node(a).value * factor;
  n.lo = factor;
  n.inputs = {a.id};
  return push(std::move(n), "scale");
}

Var Graph::tanh(Var a) {
  Node n;
  n.op = Op::Tanh;
  n.value = node(a).value.array().tanh().matrix();
  n.inputs = {a.id};
  return push(std::move(n), "tanh");
}

Var Graph::relu(Var a) {
  Node n;
  n.op = Op::Relu;
  n.value = node(a).value.cwiseMax(0.0);
  n.inputs = {a.id};
  return push(std::move(n), "relu");
}

Var Graph::softplus(Var a) {
  Node n;
  n.op = Op::Softplus;
  n.value = node(a).value.unaryExpr([](double x) { return num::softplus(x); });
  n.inputs = {a.id};
  return push(std::move(n), "softplus");
}

Var Graph::exp(Var a) {
  Node n;
  n.op = Op::Exp;
  n.value = node(a).value.array().exp().matrix();
  n.inputs = {a.id};
  return push(std::move(n), "exp");
}

Var Graph::log(Var a) {
  const Matrix& av = node(a).value;
  if ((av.array() <= 0.0).any()) throw NumericError("log of non-positive value");
  Node n;
  n.op = Op::Log;
  n.value = av.array().log().matrix();
  n.inputs = {a.id};
  return push(std::move(n), "log");
}

Var Graph::square(Var a) {
  Node n;
  n.op = Op::Square;
  n.value = node(a).value.array().square().matrix();
  n.inputs = {a.id};
  return push(std::move(n), "square");
}

Var Graph::mean(Var a) {
  const Matrix& av = node(a).value;
  if (av.size() == 0) throw ShapeError("mean of empty matrix");
  Node n;
  n.op = Op::Mean;
  n.value = Matrix::Constant(1, 1, av.mean());
  n.inputs = {a.id};
  return push(std::move(n), "mean");
}

Var Graph::sum(Var a) {
  Node n;
  n.op = Op::Sum;
  n.value = Matrix::Constant(1, 1, node(a).value.sum());
  n.inputs = {a.id};
  return push(std::move(n), "sum");
}

Var Graph::sum_cols(Var a) {
  Node n;
  n.op = Op::SumCols;
  n.value = node(a).value.rowwise().sum();
  n.inputs = {a.id};
  return push(std::move(n), "sum_cols");
}

Var Graph::mean_rows(Var a) {
  const Matrix& av = node(a).value;
  if (av.rows() == 0) throw ShapeError("mean_rows of empty matrix");
  Node n;
  n.op = Op::MeanRows;
  n.value = av.colwise().mean();
  n.inputs = {a.id};
  return push(std::move(n), "mean_rows");
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const Eigen::Index rows = node(parts.front()).value.rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (node(p).value.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += node(p).value.cols();
  }
  Node n;
  n.op = Op::ConcatCols;
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& pv = node(p).value;
    n.value.middleCols(at, pv.cols()) = pv;
    at += pv.cols();
    n.inputs.push_back(p.id);
  }
  return push(std::move(n), "concat_cols");
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const Eigen::Index cols = node(parts.front()).value.cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    if (node(p).value.cols() != cols) throw ShapeError("concat_rows: column counts differ");
    rows += node(p).value.rows();
  }
  Node n;
  n.op = Op::ConcatRows;
  n.value.resize(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& pv = node(p).value;
    n.value.middleRows(at, pv.rows()) = pv;
    at += pv.rows();
    n.inputs.push_back(p.id);
  }
  return push(std::move(n), "concat_rows");
}

Var Graph::slice_rows(Var a, Eigen::Index begin, Eigen::Index count) {
  const Matrix& av = node(a).value;
  if (begin < 0 || count < 0 || begin + count > av.rows()) {
    throw ShapeError("slice_rows out of range for " + shape_string(av));
  }
  Node n;
  n.op = Op::SliceRows;
  n.value = av.middleRows(begin, count);
  n.begin = begin;
  n.inputs = {a.id};
  return push(std::move(n), "slice_rows");
}

Var Graph::slice_cols(Var a, Eigen::Index begin, Eigen::Index count) {
  const Matrix& av = node(a).value;
  if (begin < 0 || count < 0 || begin + count > av.cols()) {
    throw ShapeError("slice_cols out of range for " + shape_string(av));
  }
  Node n;
  n.op = Op::SliceCols;
  n.value = av.middleCols(begin, count);
  n.begin = begin;
  n.inputs = {a.id};
  return push(std::move(n), "slice_cols");
}

Var Graph::clamp_min(Var a, double lo) {
  Node n;
  n.op = Op::ClampMin;
  n.value = node(a).value.cwiseMax(lo);
  n.lo = lo;
  n.inputs = {a.id};
  return push(std::move(n), "clamp_min");
}

Var Graph::clamp(Var a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
  Node n;
  n.op = Op::Clamp;
  n.value = node(a).value.cwiseMax(lo).cwiseMin(hi);
  n.lo = lo;
  n.hi = hi;
  n.inputs = {a.id};
  return push(std::move(n), "clamp");
}

Var Graph::minimum(Var a, Var b) {
  const Matrix& av = node(a).value;
  const Matrix& bv = node(b).value;
  require_same_shape(av, bv, "minimum");
  Node n;
  n.op = Op::Minimum;
  n.value = av.cwiseMin(bv);
  n.inputs = {a.id, b.id};
  return push(std::move(n), "minimum");
}

Var Graph::log_softmax(Var a) {
  const Matrix& av = node(a).value;
  Node n;
  n.op = Op::LogSoftmax;
  n.value.resize(av.rows(), av.cols());
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const double top = av.row(i).maxCoeff();
    const double lse = top + std::log((av.row(i).array() - top).exp().sum());
    n.value.row(i) = av.row(i).array() - lse;
  }
  n.inputs = {a.id};
  return push(std::move(n), "log_softmax");
}

Gradients Graph::backward(Var loss) const {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + shape_string(root.value));
  }
  std::vector<Matrix> grads(nodes_.size());
  grads[loss.id] = Matrix::Ones(1, 1);

  auto wants = [&](std::size_t id) { return nodes_[id].requires_grad; };

  for (std::size_t k = loss.id + 1; k-- > 0;) {
    const Node& n = nodes_[k];
    if (!n.requires_grad || grads[k].size() == 0) continue;
    const Matrix& g = grads[k];
    switch (n.op) {
      case Op::Constant:
      case Op::Parameter:
        break;
      case Op::MatMul: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        const Matrix& b = nodes_[n.inputs[1]].value;
        if (wants(n.inputs[0])) {
          Matrix ga(g.rows(), b.rows());
          ga.noalias() = g * b.transpose();
          accumulate(grads, n.inputs[0], ga);
        }
        if (wants(n.inputs[1])) accumulate(grads, n.inputs[1], matmul_transpose_left(a, g));
        break;
      }
      case Op::Add:
      case Op::Sub: {
        if (wants(n.inputs[0])) accumulate(grads, n.inputs[0], g);
        if (wants(n.inputs[1])) {
          Matrix gb = reduce_to(g, nodes_[n.inputs[1]].value);
          if (n.op == Op::Sub) gb = -gb;
          accumulate(grads, n.inputs[1], gb);
        }
        break;
      }
      case Op::Mul: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        const Matrix& b = nodes_[n.inputs[1]].value;
        if (wants(n.inputs[0])) {
          accumulate(grads, n.inputs[0], g.cwiseProduct(expand(b, a.rows(), a.cols())));
        }
        if (wants(n.inputs[1])) accumulate(grads, n.inputs[1], reduce_to(g.cwiseProduct(a), b));
        break;
      }
      case Op::Scale:
        accumulate(grads, n.inputs[0], g * n.lo);
        break;
      case Op::Tanh:
        accumulate(grads, n.inputs[0],
                   g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
        break;
      case Op::Relu: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0],
                   (x.array() > 0.0).select(g.array(), 0.0).matrix());
        break;
      }
      case Op::Softplus: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0],
                   g.cwiseProduct(x.unaryExpr([](double v) { return sigmoid(v); })));
        break;
      }
      case Op::Exp:
        accumulate(grads, n.inputs[0], g.cwiseProduct(n.value));
        break;
      case Op::Log:
        accumulate(grads, n.inputs[0], g.cwiseQuotient(nodes_[n.inputs[0]].value));
        break;
      case Op::Square:
        accumulate(grads, n.inputs[0], 2.0 * g.cwiseProduct(nodes_[n.inputs[0]].value));
        break;
      case Op::Mean: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0],
                   Matrix::Constant(x.rows(), x.cols(), g(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case Op::Sum: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0], Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::SumCols: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0], g.replicate(1, x.cols()));
        break;
      }
      case Op::MeanRows: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0], g.replicate(x.rows(), 1) / static_cast<double>(x.rows()));
        break;
      }
      case Op::ConcatCols: {
        Eigen::Index at = 0;
        for (std::size_t in : n.inputs) {
          const Eigen::Index c = nodes_[in].value.cols();
          if (wants(in)) accumulate(grads, in, g.middleCols(at, c));
          at += c;
        }
        break;
      }
      case Op::ConcatRows: {
        Eigen::Index at = 0;
        for (std::size_t in : n.inputs) {
          const Eigen::Index r = nodes_[in].value.rows();
          if (wants(in)) accumulate(grads, in, g.middleRows(at, r));
          at += r;
        }
        break;
      }
      case Op::SliceRows: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        Matrix full = Matrix::Zero(x.rows(), x.cols());
        full.middleRows(n.begin, g.rows()) = g;
        accumulate(grads, n.inputs[0], full);
        break;
      }
      case Op::SliceCols: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        Matrix full = Matrix::Zero(x.rows(), x.cols());
        full.middleCols(n.begin, g.cols()) = g;
        accumulate(grads, n.inputs[0], full);
        break;
      }
      case Op::ClampMin: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0], (x.array() > n.lo).select(g.array(), 0.0).matrix());
        break;
      }
      case Op::Clamp: {
        const Matrix& x = nodes_[n.inputs[0]].value;
        accumulate(grads, n.inputs[0],
                   ((x.array() > n.lo) && (x.array() < n.hi)).select(g.array(), 0.0).matrix());
        break;
      }
      case Op::Minimum: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        const Matrix& b = nodes_[n.inputs[1]].value;
        if (wants(n.inputs[0])) {
          accumulate(grads, n.inputs[0], (a.array() <= b.array()).select(g.array(), 0.0).matrix());
        }
        if (wants(n.inputs[1])) {
          accumulate(grads, n.inputs[1], (a.array() <= b.array()).select(0.0, g.array()).matrix());
        }
        break;
      }
      case Op::LogSoftmax: {
        const Matrix probs = n.value.array().exp().matrix();
        Matrix gx = g - probs.cwiseProduct(g.rowwise().sum().replicate(1, g.cols()));
        accumulate(grads, n.inputs[0], gx);
        break;
      }
    }
  }

  Gradients out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.op != Op::Parameter) continue;
    out.add(n.storage, grads[i].size() == 0 ? Matrix::Zero(n.value.rows(), n.value.cols())
                                            : grads[i]);
  }
  return out;
}

Var operator+(Var a, Var b) { return a.graph->add(a, b); }
Var operator-(Var a, Var b) { return a.graph->sub(a, b); }
Var operator*(Var a, Var b) { return a.graph->mul(a, b); }
Var operator*(double s, Var a) { return a.graph->scale(a, s); }
Var operator-(Var a) { return a.graph->scale(a, -1.0); }

Var matmul(Var a, Var b) { return a.graph->matmul(a, b); }
Var tanh(Var a) { return a.graph->tanh(a); }
Var relu(Var a) { return a.graph->relu(a); }
Var softplus(Var a) { return a.graph->softplus(a); }
Var exp(Var a) { return a.graph->exp(a); }
Var log(Var a) { return a.graph->log(a); }
Var square(Var a) { return a.graph->square(a); }
Var mean(Var a) { return a.graph->mean(a); }
Var sum(Var a) { return a.graph->sum(a); }
Var sum_cols(Var a) { return a.graph->sum_cols(a); }
Var mean_rows(Var a) { return a.graph->mean_rows(a); }

}  // namespace emi::num
