#include "redress/matrix.hpp"

#include <cmath>

namespace redress {

namespace {
void require_inner(const DenseMatrix& a, const DenseMatrix& b, std::size_t ak, std::size_t bk,
                   const char* op) {
  if (ak != bk) {
    throw DimensionError(std::string(op) + ": inner dimensions do not match, " + a.shape_str() +
                         " vs " + b.shape_str());
  }
}
}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_inner(a, b, a.cols, b.rows, "matmul");
  DenseMatrix c(a.rows, b.cols);
  matmul_acc(a, b, c);
  return c;
}

void matmul_acc(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& c) {
  require_inner(a, b, a.cols, b.rows, "matmul");
  if (c.rows != a.rows || c.cols != b.cols) {
    throw DimensionError("matmul: accumulator shape " + c.shape_str() + " does not fit " +
                         a.shape_str() + " * " + b.shape_str());
  }
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  // ikj order: cell (i,j) accumulates its k-terms left to right, and the
  // inner j loop vectorizes over contiguous rows of B and C.
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = ai[kk];
      if (aik == 0.0) continue;
      const double* bk = b.row(kk);
      for (std::size_t j = 0; j < m; ++j) ci[j] += aik * bk[j];
    }
  }
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  require_inner(a, b, a.rows, b.rows, "matmul_at_b");
  DenseMatrix c(a.cols, b.cols);
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t r = 0; r < n; ++r) {
    const double* ar = a.row(r);
    const double* br = b.row(r);
    for (std::size_t i = 0; i < k; ++i) {
      const double ari = ar[i];
      if (ari == 0.0) continue;
      double* ci = c.row(i);
      for (std::size_t j = 0; j < m; ++j) ci[j] += ari * br[j];
    }
  }
  return c;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  require_inner(a, b, a.cols, b.cols, "matmul_a_bt");
  DenseMatrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (std::size_t kk = 0; kk < a.cols; ++kk) s += ai[kk] * bj[kk];
      ci[j] = s;
    }
  }
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.values.size(); ++i)
    y.values[i] = x.values[i] > 0.0 ? x.values[i] : 0.0;
  return y;
}

DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& upstream) {
  if (!x.same_shape(upstream)) {
    throw DimensionError("relu_backward: shapes " + x.shape_str() + " vs " +
                         upstream.shape_str());
  }
  DenseMatrix g(x.rows, x.cols);
  for (std::size_t i = 0; i < x.values.size(); ++i)
    g.values[i] = x.values[i] > 0.0 ? upstream.values[i] : 0.0;
  return g;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix mean_rows(const DenseMatrix& x, const std::vector<std::vector<std::size_t>>& groups) {
  DenseMatrix out(groups.size(), x.cols);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.empty()) {
      throw ContractError("mean_rows: group " + std::to_string(g) + " is empty");
    }
    double* og = out.row(g);
    for (std::size_t idx : members) {
      if (idx >= x.rows) {
        throw DimensionError("mean_rows: row index " + std::to_string(idx) + " out of range for " +
                             x.shape_str());
      }
      const double* xr = x.row(idx);
      for (std::size_t j = 0; j < x.cols; ++j) og[j] += xr[j];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t j = 0; j < x.cols; ++j) og[j] *= inv;
  }
  return out;
}

std::vector<double> col_sums(const DenseMatrix& x) {
  std::vector<double> s(x.cols, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* xr = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) s[j] += xr[j];
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_finite(const DenseMatrix& m, const std::string& what) {
  for (double v : m.values) {
    if (!std::isfinite(v)) throw NumericError(what + ": non-finite entry");
  }
}

}  // namespace redress
