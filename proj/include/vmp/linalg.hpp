#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vmp/errors.hpp"

namespace vmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative symmetry test: ||S - S^T||_F <= tol * max(||S||_F, 1e-14).
[[nodiscard]] bool is_symmetric(const Matrix& s, double rel_tol = 1e-12);

/// Throws NonSymmetric / DimensionMismatch when s is not square symmetric.
void require_symmetric(const Matrix& s, const char* where);

/// Principal square root of a symmetric positive semidefinite matrix via
/// symmetric eigendecomposition. Eigenvalues in [-1e-10 * lambda_max, 0)
/// are clamped to zero; anything lower raises IndefiniteMatrix.
[[nodiscard]] Matrix sqrtm_psd(const Matrix& s);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Raises NotPositiveDefinite when the factorization fails.
[[nodiscard]] Matrix cholesky_lower(const Matrix& s);

/// Coordinatewise median of a nonempty set of equally sized vectors.
/// Even counts use the midpoint of the two middle order statistics.
[[nodiscard]] Vector coordinatewise_median(const std::vector<Vector>& vs);

/// x = S^{-1} b for symmetric positive definite S (Cholesky solve).
[[nodiscard]] Vector solve_spd(const Matrix& s, const Vector& b);

/// Inverse of a symmetric positive definite matrix, symmetrized on output.
[[nodiscard]] Matrix inverse_spd(const Matrix& s);

/// log det(S) for symmetric positive definite S.
[[nodiscard]] double log_det_spd(const Matrix& s);

}  // namespace vmp
