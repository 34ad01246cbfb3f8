#include "alpaca/bayes_linear.hpp"

#include <cmath>
#include <numbers>

namespace alpaca {

NoiseModel::NoiseModel(Matrix sigma_eps) : sigma_(std::move(sigma_eps)) {
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() == 0) {
    throw ShapeError("noise covariance must be square and non-empty");
  }
  if (!sigma_.allFinite()) throw std::invalid_argument("noise covariance has non-finite entries");
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * sigma_.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("noise covariance is not symmetric");
  }
  chol_ = linalg::cholesky(sigma_);
  inverse_ = linalg::cholesky_solve(chol_, Matrix::Identity(dim(), dim()));
  linalg::symmetrize(inverse_);
  log_det_ = linalg::log_det_from_cholesky(chol_);
}

NoiseModel NoiseModel::isotropic(Eigen::Index n_y, double variance) {
  return NoiseModel(variance * Matrix::Identity(n_y, n_y));
}

void PriorParams::validate() const {
  net_config.validate();
  if (!net_weights.conforms_to(net_config)) {
    throw ShapeError("network weights do not match the network configuration");
  }
  const auto n_phi = static_cast<Eigen::Index>(net_config.feature_dim);
  linalg::require_shape(kbar0, n_phi, noise.dim(), "kbar0");
  linalg::require_shape(l0, n_phi, n_phi, "l0");
  for (Eigen::Index i = 0; i < n_phi; ++i) {
    if (!(l0(i, i) > 0.0)) {
      throw std::invalid_argument("l0 diagonal entry " + std::to_string(i) +
                                  " is not strictly positive");
    }
  }
  if (!kbar0.allFinite() || !l0.allFinite()) {
    throw std::invalid_argument("prior has non-finite entries");
  }
}

PosteriorState init_posterior(const Matrix& kbar0, const Matrix& l0) {
  linalg::require_shape(l0, kbar0.rows(), kbar0.rows(), "l0");
  const Matrix lam0 = l0.triangularView<Eigen::Lower>() * l0.transpose();
  PosteriorState state;
  state.lam_inv = linalg::inverse_psd(lam0);
  state.q = lam0 * kbar0;
  state.kbar = kbar0;
  state.t = 0;
  return state;
}

PosteriorState init_posterior(const PriorParams& prior) {
  return init_posterior(prior.kbar0, prior.l0);
}

PosteriorState batch_posterior(const Matrix& kbar0, const Matrix& l0,
                               const Matrix& phi, const Matrix& y) {
  if (phi.rows() != y.rows()) {
    throw ShapeError("batch_posterior: " + std::to_string(phi.rows()) +
                     " feature rows vs " + std::to_string(y.rows()) + " target rows");
  }
  if (phi.rows() > 0) {
    linalg::require_shape(phi, phi.rows(), kbar0.rows(), "batch_posterior features");
    linalg::require_shape(y, y.rows(), kbar0.cols(), "batch_posterior targets");
  }
  linalg::require_shape(l0, kbar0.rows(), kbar0.rows(), "l0");
  const Matrix lam0 = l0.triangularView<Eigen::Lower>() * l0.transpose();
  Matrix lam = lam0;
  Matrix q = lam0 * kbar0;
  if (phi.rows() > 0) {
    lam.noalias() += phi.transpose() * phi;
    q.noalias() += phi.transpose() * y;
  }
  const Matrix chol = linalg::cholesky(lam);
  PosteriorState state;
  state.lam_inv = linalg::cholesky_solve(chol, Matrix::Identity(lam.rows(), lam.cols()));
  linalg::symmetrize(state.lam_inv);
  state.kbar = linalg::cholesky_solve(chol, q);
  state.q = std::move(q);
  state.t = static_cast<std::size_t>(phi.rows());
  return state;
}

PosteriorState batch_posterior(const PriorParams& prior, const Matrix& phi,
                               const Matrix& y) {
  return batch_posterior(prior.kbar0, prior.l0, phi, y);
}

void recursive_update_inplace(PosteriorState& state, const Vector& phi_t,
                              const Vector& y_t) {
  if (phi_t.size() != state.lam_inv.rows() || y_t.size() != state.q.cols()) {
    throw ShapeError("recursive_update: sample dims (" + std::to_string(phi_t.size()) +
                     ", " + std::to_string(y_t.size()) + ") vs state (" +
                     std::to_string(state.lam_inv.rows()) + ", " +
                     std::to_string(state.q.cols()) + ")");
  }
  const Vector v = state.lam_inv * phi_t;
  const double denom = 1.0 + phi_t.dot(v);
  linalg::symmetric_rank1_update(state.lam_inv, v, -1.0 / denom);
  linalg::symmetrize(state.lam_inv);
  state.q.noalias() += phi_t * y_t.transpose();
  state.kbar.noalias() = state.lam_inv * state.q;
  ++state.t;
}

PosteriorState recursive_update(PosteriorState state, const Vector& phi_t,
                                const Vector& y_t) {
  recursive_update_inplace(state, phi_t, y_t);
  return state;
}

double feature_quadratic(const PosteriorState& state, const Vector& phi) {
  if (phi.size() != state.lam_inv.rows()) {
    throw ShapeError("feature vector has length " + std::to_string(phi.size()) +
                     ", expected " + std::to_string(state.lam_inv.rows()));
  }
  return phi.dot(state.lam_inv * phi);
}

PredictiveDensity predict(const PosteriorState& state, const Vector& phi_query,
                          const NoiseModel& noise) {
  if (noise.dim() != state.kbar.cols()) throw ShapeError("predict: noise dimension");
  const double s = feature_quadratic(state, phi_query);
  return {state.kbar.transpose() * phi_query, (1.0 + s) * noise.covariance()};
}

Matrix sample_weights(const PosteriorState& state, const NoiseModel& noise,
                      std::mt19937_64& rng) {
  if (noise.dim() != state.kbar.cols()) throw ShapeError("sample_weights: noise dimension");
  const Matrix row_factor = linalg::cholesky(state.lam_inv);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(state.kbar.rows(), state.kbar.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = normal(rng);
  }
  // Column covariance B^T B = Sigma_eps with B = chol(Sigma_eps)^T.
  return state.kbar + row_factor * z * noise.cholesky().transpose();
}

double gaussian_nll(const PredictiveDensity& pred, const Vector& y) {
  if (y.size() != pred.mean.size()) throw ShapeError("gaussian_nll: target dimension");
  const Matrix chol = linalg::cholesky(pred.cov);
  const Vector white = linalg::solve_lower(chol, y - pred.mean);
  const double n = static_cast<double>(y.size());
  return 0.5 * (n * std::log(2.0 * std::numbers::pi) +
                linalg::log_det_from_cholesky(chol) + white.squaredNorm());
}

}  // namespace alpaca
