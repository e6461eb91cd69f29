#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

namespace emi::num {

// Dense row-major 64-bit matrix. Every public operation in the library keeps
// its values finite.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

// log(1 + exp(x)) without overflow: max(x, 0) + log1p(exp(-|x|)).
double softplus(double x);
double sigmoid(double x);

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const std::string& what);
void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what);
std::string shape_string(const Matrix& m);

// Fraction of exactly-zero entries.
double zero_fraction(const Matrix& m);

// a * b. Uses a row-skipping kernel when `a` is mostly zeros or its rows
// mostly repeat the first one (image batches), otherwise the dense GEMM.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b with the same kernel choice applied to `a`.
Matrix matmul_transpose_left(const Matrix& a, const Matrix& b);

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

}  // namespace emi::num
