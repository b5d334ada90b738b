#include "redress/pca.hpp"

#include <cmath>
#include <vector>

#include <lapacke.h>

namespace redress {

namespace {

// Eigenvectors of a symmetric matrix, descending eigenvalue order.
// Returns (eigenvalues, column-major-free eigenvector matrix with vectors as
// DenseMatrix columns).
std::pair<std::vector<double>, DenseMatrix> sym_eig_desc(DenseMatrix a, std::size_t top) {
  const auto n = static_cast<lapack_int>(a.rows);
  std::vector<double> w(a.rows);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'L', n, a.values.data(), n, w.data());
  if (info != 0) throw NumericError("pca: eigensolver failed, info=" + std::to_string(info));
  // dsyevd returns ascending eigenvalues; take the trailing `top` columns
  // reversed.
  DenseMatrix vecs(a.rows, top);
  std::vector<double> vals(top);
  for (std::size_t j = 0; j < top; ++j) {
    const std::size_t src = a.rows - 1 - j;
    vals[j] = w[src];
    for (std::size_t i = 0; i < a.rows; ++i) vecs.at(i, j) = a.at(i, src);
  }
  return {vals, vecs};
}

void fix_signs(DenseMatrix& loadings, DenseMatrix& scores) {
  for (std::size_t j = 0; j < loadings.cols; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < loadings.rows; ++i) {
      const double m = std::abs(loadings.at(i, j));
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    if (loadings.at(arg, j) < 0.0) {
      for (std::size_t i = 0; i < loadings.rows; ++i) loadings.at(i, j) = -loadings.at(i, j);
      for (std::size_t i = 0; i < scores.rows; ++i) scores.at(i, j) = -scores.at(i, j);
    }
  }
}

}  // namespace

DenseMatrix pca_reduce(const DenseMatrix& x, std::size_t n_components) {
  const std::size_t n = x.rows, d = x.cols;
  if (n_components == 0 || n_components > std::min(n, d)) {
    throw DimensionError("pca: n_components=" + std::to_string(n_components) +
                         " exceeds min(" + std::to_string(n) + "," + std::to_string(d) + ")");
  }

  DenseMatrix xc = x;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += xc.at(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) xc.at(i, j) -= mean;
  }

  DenseMatrix scores, loadings;
  if (d <= n) {
    // Covariance route: eigenvectors of Xc^T Xc are the loadings directly.
    auto [vals, v] = sym_eig_desc(matmul_at_b(xc, xc), n_components);
    loadings = std::move(v);
    scores = matmul(xc, loadings);
  } else {
    // Gram route for wide matrices: Xc Xc^T shares nonzero spectrum; recover
    // loadings as Xc^T u / sigma.
    auto [vals, u] = sym_eig_desc(matmul_a_bt(xc, xc), n_components);
    scores = DenseMatrix(n, n_components);
    loadings = matmul_at_b(xc, u);  // d x k, columns are sigma * v_j
    for (std::size_t j = 0; j < n_components; ++j) {
      const double sigma = std::sqrt(std::max(vals[j], 0.0));
      const double inv = sigma > 1e-12 ? 1.0 / sigma : 0.0;
      for (std::size_t i = 0; i < d; ++i) loadings.at(i, j) *= inv;
      for (std::size_t i = 0; i < n; ++i) scores.at(i, j) = u.at(i, j) * sigma;
    }
  }
  fix_signs(loadings, scores);
  check_finite(scores, "pca scores");
  return scores;
}

}  // namespace redress
