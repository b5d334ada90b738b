#pragma once

#include "redress/matrix.hpp"

namespace redress {

// Mean-centered projection onto the top n_components principal directions.
// No whitening; each component's sign is fixed so that its largest-magnitude
// loading is positive. Throws DimensionError if n_components > min(rows, cols).
//
// The symmetric eigensolve is delegated to LAPACK; the surrounding
// covariance/Gram construction and projection use the deterministic local
// kernels.
DenseMatrix pca_reduce(const DenseMatrix& x, std::size_t n_components);

}  // namespace redress
