#pragma once

#include <Eigen/Core>
#include <string>

#include "alpaca/errors.hpp"

namespace alpaca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Pivots below this fraction of the largest diagonal entry are treated as
/// a loss of positive definiteness.
inline constexpr double kPivotTolerance = 1e-12;

/// Lower-triangular factor L with L L^T = a. Reads only the lower triangle.
/// Throws NotPositiveDefinite when a pivot is <= kPivotTolerance * max diag.
Matrix cholesky(const Matrix& a);

/// Solves L X = b (forward substitution) for lower-triangular L.
Matrix solve_lower(const Matrix& l, const Matrix& b);
/// Solves L^T X = b (back substitution) for lower-triangular L.
Matrix solve_lower_transpose(const Matrix& l, const Matrix& b);

/// X = A^{-1} B given the Cholesky factor of A.
Matrix cholesky_solve(const Matrix& l, const Matrix& b);

/// X = A^{-1} B for symmetric positive definite A.
Matrix solve_psd(const Matrix& a, const Matrix& b);

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
Matrix inverse_psd(const Matrix& a);

/// ln det A = 2 sum ln L_ii.
double log_det_from_cholesky(const Matrix& l);

/// A <- A + alpha v v^T
void symmetric_rank1_update(Matrix& a, const Vector& v, double alpha);

/// A <- (A + A^T) / 2
void symmetrize(Matrix& a);

bool all_finite(const Matrix& a);

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what);

}  // namespace linalg
}  // namespace alpaca
