#include "emi/numcore/matrix.hpp"

#include "emi/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace emi::num {

namespace {

// Below this density the row-skipping kernels beat the blocked GEMM.
constexpr double kSparseDensity = 0.15;

enum class Kernel { Dense, SkipZeros, SharedRow };

// SharedRow: rows of `a` mostly repeat its first row (a static image
// background), so a = 1 r + D with D sparse and a b = D b + 1 (r b).
// Densities are estimated on a sample of rows; the choice affects speed only.
Kernel choose_kernel(const Matrix& a) {
  if (a.size() < 4096) return Kernel::Dense;
  constexpr Eigen::Index kSampleRows = 32;
  const Eigen::Index stride = std::max<Eigen::Index>(1, a.rows() / kSampleRows);
  const double* ref = a.data();
  Eigen::Index visited = 0, nonzero = 0, differing = 0;
  for (Eigen::Index i = 0; i < a.rows(); i += stride) {
    const double* row = a.data() + i * a.cols();
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      nonzero += row[k] != 0.0;
      differing += row[k] != ref[k];
    }
    visited += a.cols();
  }
  const double zero_density = static_cast<double>(nonzero) / static_cast<double>(visited);
  const double shared_density = static_cast<double>(differing) / static_cast<double>(visited);
  if (std::min(zero_density, shared_density) >= kSparseDensity) return Kernel::Dense;
  if (a.rows() > 1 && shared_density < zero_density) return Kernel::SharedRow;
  return Kernel::SkipZeros;
}

// out += (a - 1 ref) b, or its transposed form, visiting only the entries of
// `a` that differ from `ref` (all-zero when ref is null). Rows are scanned in
// blocks of eight so that unchanged stretches cost one vector compare.
void add_sparse_product(const Matrix& a, const double* ref, const Matrix& b, bool transpose_a,
                        Matrix& out) {
  constexpr Eigen::Index kBlock = 8;
  std::vector<double> zeros;
  if (!ref) {
    zeros.assign(static_cast<std::size_t>(a.cols()), 0.0);
    ref = zeros.data();
  }
  auto visit = [&](Eigen::Index i, Eigen::Index k, double d) {
    if (transpose_a) {
      out.row(k).noalias() += d * b.row(i);
    } else {
      out.row(i).noalias() += d * b.row(k);
    }
  };
  const Eigen::Index blocked = a.cols() - a.cols() % kBlock;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double* row = a.data() + i * a.cols();
    for (Eigen::Index k = 0; k < blocked; k += kBlock) {
      bool differs = false;
      for (Eigen::Index j = 0; j < kBlock; ++j) differs |= row[k + j] != ref[k + j];
      if (!differs) continue;
      for (Eigen::Index j = k; j < k + kBlock; ++j) {
        if (row[j] != ref[j]) visit(i, j, row[j] - ref[j]);
      }
    }
    for (Eigen::Index k = blocked; k < a.cols(); ++k) {
      if (row[k] != ref[k]) visit(i, k, row[k] - ref[k]);
    }
  }
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// x - x is 0 for finite x and NaN otherwise; the sum reduction vectorizes.
bool all_finite(const Matrix& m) { return (m.array() - m.array()).sum() == 0.0; }

void require_finite(const Matrix& m, const std::string& what) {
  if (!all_finite(m)) throw NumericError("non-finite value in " + what);
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(what + ": shape " + shape_string(a) + " vs " + shape_string(b));
  }
}

double zero_fraction(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::Index zeros = 0;
  const double* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) zeros += (p[i] == 0.0);
  return static_cast<double>(zeros) / static_cast<double>(m.size());
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_string(a) + " * " + shape_string(b));
  }
  const Kernel kernel = choose_kernel(a);
  if (kernel == Kernel::Dense) {
    Matrix out(a.rows(), b.cols());
    out.noalias() = a * b;
    return out;
  }
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  if (kernel == Kernel::SkipZeros) {
    add_sparse_product(a, nullptr, b, false, out);
    return out;
  }
  add_sparse_product(a, a.data(), b, false, out);
  const Matrix shared = a.topRows(1) * b;
  out.rowwise() += shared.row(0);
  return out;
}

Matrix matmul_transpose_left(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_transpose_left: " + shape_string(a) + "^T * " + shape_string(b));
  }
  const Kernel kernel = choose_kernel(a);
  if (kernel == Kernel::Dense) {
    Matrix out(a.cols(), b.cols());
    out.noalias() = a.transpose() * b;
    return out;
  }
  Matrix out = Matrix::Zero(a.cols(), b.cols());
  if (kernel == Kernel::SkipZeros) {
    add_sparse_product(a, nullptr, b, true, out);
    return out;
  }
  add_sparse_product(a, a.data(), b, true, out);
  out.noalias() += a.topRows(1).transpose() * b.colwise().sum();
  return out;
}

Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

}  // namespace emi::num
