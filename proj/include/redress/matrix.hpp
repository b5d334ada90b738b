#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "redress/errors.hpp"

namespace redress {

// Row-major dense double matrix. The only raw-math carrier in the project;
// all reductions use a fixed left-to-right summation order so results are
// bitwise reproducible across runs.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  static DenseMatrix zeros(std::size_t r, std::size_t c) { return DenseMatrix(r, c); }
  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.values[i * n + i] = 1.0;
    return m;
  }

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  double* row(std::size_t i) { return values.data() + i * cols; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }

  void fill(double v) { std::fill(values.begin(), values.end(), v); }
};

// Trainable value with a paired gradient accumulator of the same shape.
struct ParamTensor {
  DenseMatrix value;
  DenseMatrix grad;
  std::string name;

  explicit ParamTensor(DenseMatrix v, std::string n = "")
      : value(std::move(v)), grad(value.rows, value.cols), name(std::move(n)) {}

  void zero_grad() { grad.fill(0.0); }
};

// C = A * B. Per output cell the k-sum runs left to right.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// C += A * B into an existing accumulator (same deterministic order).
void matmul_acc(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c);

// C = A^T * B without materializing the transpose.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);

// C = A * B^T.
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

// Elementwise max(0, x).
DenseMatrix relu(const DenseMatrix& x);

// Passes upstream where x > 0, zero elsewhere. Subgradient at x == 0 is 0.
DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& upstream);

// Numerically stable logistic; exact 0.5 at 0, no overflow for any finite x.
double sigmoid(double x);

// One output row per group: the elementwise mean of the member rows.
// Throws ContractError on an empty group (callers route isolated nodes
// through self-inclusion), DimensionError on an out-of-range index.
DenseMatrix mean_rows(const DenseMatrix& x, const std::vector<std::vector<std::size_t>>& groups);

// Column sums (left-to-right over rows), used for bias gradients.
std::vector<double> col_sums(const DenseMatrix& x);

double dot(std::span<const double> a, std::span<const double> b);

// Throws NumericError if any entry is NaN or infinite.
void check_finite(const DenseMatrix& m, const std::string& what);

}  // namespace redress
