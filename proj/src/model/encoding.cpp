#include "emi/model/encoding.hpp"

#include "emi/error.hpp"

#include <cmath>

namespace emi {

using num::Matrix;

ObservationEncoding ObservationEncoding::vector(int dim) {
  ObservationEncoding e;
  e.kind = ObservationKind::Vector;
  e.dim = dim;
  return e;
}

ObservationEncoding ObservationEncoding::image(int height, int width) {
  ObservationEncoding e;
  e.kind = ObservationKind::Image;
  e.height = height;
  e.width = width;
  e.dim = height * width;
  return e;
}

void ObservationEncoding::validate(const Matrix& rows) const {
  if (rows.cols() != flat_size()) {
    throw ShapeError("observation has " + std::to_string(rows.cols()) + " values, expected " +
                     std::to_string(flat_size()));
  }
  if (kind == ObservationKind::Image && rows.size() > 0 &&
      ((rows.array() < 0.0) || (rows.array() > 1.0)).any()) {
    throw ShapeError("image observation outside [0, 1]");
  }
}

ActionEncoding ActionEncoding::continuous(int dim) {
  ActionEncoding e;
  e.discrete = false;
  e.dim = dim;
  return e;
}

ActionEncoding ActionEncoding::categorical(int choices) {
  ActionEncoding e;
  e.discrete = true;
  e.dim = choices;
  return e;
}

Matrix ActionEncoding::encode(const Matrix& raw) const {
  if (raw.cols() != raw_size()) {
    throw ShapeError("action has " + std::to_string(raw.cols()) + " values, expected " +
                     std::to_string(raw_size()));
  }
  if (!discrete) return raw;
  Matrix out = Matrix::Zero(raw.rows(), dim);
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double v = raw(i, 0);
    const long index = std::lround(v);
    if (v != static_cast<double>(index) || index < 0 || index >= dim) {
      throw ShapeError("discrete action " + std::to_string(v) + " out of range [0, " +
                       std::to_string(dim) + ")");
    }
    out(i, index) = 1.0;
  }
  return out;
}

}  // namespace emi
