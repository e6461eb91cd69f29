#pragma once

#include "emi/numcore/matrix.hpp"

#include <string>

namespace emi {

enum class ObservationKind { Vector, Image };

// How observations are laid out in a batch row. Images are single-channel,
// flattened row-major (pixel (row, col) at index row * width + col), with
// intensities already scaled to [0, 1].
struct ObservationEncoding {
  ObservationKind kind = ObservationKind::Vector;
  int dim = 1;  // vector length; ignored for images
  int height = 0;
  int width = 0;

  static ObservationEncoding vector(int dim);
  static ObservationEncoding image(int height, int width);

  int flat_size() const { return kind == ObservationKind::Image ? height * width : dim; }
  // Throws ShapeError on a column mismatch or (images) out-of-range pixels.
  void validate(const num::Matrix& rows) const;
};

// Raw actions are stored one per row: continuous actions as their vector,
// discrete actions as a single column holding the index.
struct ActionEncoding {
  bool discrete = false;
  int dim = 1;  // continuous dimension or number of discrete choices

  static ActionEncoding continuous(int dim);
  static ActionEncoding categorical(int choices);

  int raw_size() const { return discrete ? 1 : dim; }
  int encoded_size() const { return dim; }
  // One-hot for discrete actions (ShapeError if an index is out of range),
  // pass-through for continuous ones.
  num::Matrix encode(const num::Matrix& raw) const;
};

}  // namespace emi
