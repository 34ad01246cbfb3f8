#include "alpaca/linalg.hpp"

#include <cmath>
#include <sstream>

namespace alpaca::linalg {

Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("cholesky expects a square matrix, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  if (n == 0) return l;

  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) {
    throw NotPositiveDefinite("largest diagonal entry is not positive");
  }
  const double threshold = kPivotTolerance * max_diag;

  // Left-looking, one column at a time.
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) {
      std::ostringstream msg;
      msg << "pivot " << j << " = " << pivot << " <= " << threshold;
      throw NotPositiveDefinite(msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    const Eigen::Index below = n - j - 1;
    if (below > 0) {
      l.col(j).tail(below) =
          (a.col(j).tail(below) -
           l.block(j + 1, 0, below, j) * l.row(j).head(j).transpose()) /
          ljj;
    }
  }
  return l;
}

Matrix solve_lower(const Matrix& l, const Matrix& b) {
  if (l.rows() != b.rows()) throw ShapeError("solve_lower: row mismatch");
  return l.triangularView<Eigen::Lower>().solve(b);
}

Matrix solve_lower_transpose(const Matrix& l, const Matrix& b) {
  if (l.rows() != b.rows()) throw ShapeError("solve_lower_transpose: row mismatch");
  return l.transpose().triangularView<Eigen::Upper>().solve(b);
}

Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
  return solve_lower_transpose(l, solve_lower(l, b));
}

Matrix solve_psd(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("solve_psd: A is " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + ", B has " +
                     std::to_string(b.rows()) + " rows");
  }
  return cholesky_solve(cholesky(a), b);
}

Matrix inverse_psd(const Matrix& a) {
  Matrix inv = solve_psd(a, Matrix::Identity(a.rows(), a.cols()));
  symmetrize(inv);
  return inv;
}

double log_det_from_cholesky(const Matrix& l) {
  return 2.0 * l.diagonal().array().log().sum();
}

void symmetric_rank1_update(Matrix& a, const Vector& v, double alpha) {
  if (a.rows() != v.size() || a.cols() != v.size()) {
    throw ShapeError("symmetric_rank1_update: vector length mismatch");
  }
  a.noalias() += alpha * v * v.transpose();
}

void symmetrize(Matrix& a) {
  a = 0.5 * (a + a.transpose()).eval();
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << what << ": expected " << rows << "x" << cols << ", got " << m.rows()
        << "x" << m.cols();
    throw ShapeError(msg.str());
  }
}

}  // namespace alpaca::linalg
