#pragma once

#include <cstddef>
#include <random>

#include "alpaca/feature_net.hpp"
#include "alpaca/linalg.hpp"

namespace alpaca {

/// Known additive output noise covariance (n_y x n_y, symmetric PD).
class NoiseModel {
 public:
  NoiseModel() : NoiseModel(Matrix::Identity(1, 1)) {}
  explicit NoiseModel(Matrix sigma_eps);

  static NoiseModel isotropic(Eigen::Index n_y, double variance);

  const Matrix& covariance() const { return sigma_; }
  const Matrix& cholesky() const { return chol_; }
  const Matrix& inverse() const { return inverse_; }
  double log_det() const { return log_det_; }
  Eigen::Index dim() const { return sigma_.rows(); }

 private:
  Matrix sigma_;
  Matrix chol_;
  Matrix inverse_;
  double log_det_ = 0.0;
};

/// Everything meta-training produces: the feature network, the matrix-normal
/// prior MN(kbar0, (l0 l0^T)^{-1}, Sigma_eps) over the last layer, and the
/// fixed noise model.
struct PriorParams {
  NetConfig net_config;
  NetWeights net_weights;
  Matrix kbar0;  // n_phi x n_y
  Matrix l0;     // n_phi x n_phi, lower triangular, positive diagonal
  NoiseModel noise;

  Eigen::Index feature_dim() const { return kbar0.rows(); }
  Eigen::Index output_dim() const { return kbar0.cols(); }
  Matrix precision() const { return l0 * l0.transpose(); }

  /// Throws std::invalid_argument / ShapeError on inconsistent dimensions or
  /// a non-positive l0 diagonal.
  void validate() const;
};

/// Sufficient statistics of the posterior after t samples. kbar = lam_inv * q.
struct PosteriorState {
  Matrix lam_inv;  // n_phi x n_phi
  Matrix q;        // n_phi x n_y
  Matrix kbar;     // n_phi x n_y
  std::size_t t = 0;
};

struct PredictiveDensity {
  Vector mean;
  Matrix cov;
};

PosteriorState init_posterior(const Matrix& kbar0, const Matrix& l0);
PosteriorState init_posterior(const PriorParams& prior);

/// Posterior from a whole block of features `phi` (tau x n_phi) and targets
/// `y` (tau x n_y), factorizing the updated precision once.
PosteriorState batch_posterior(const Matrix& kbar0, const Matrix& l0,
                               const Matrix& phi, const Matrix& y);
PosteriorState batch_posterior(const PriorParams& prior, const Matrix& phi,
                               const Matrix& y);

/// O(n_phi^2) rank-1 update with one sample, in place.
void recursive_update_inplace(PosteriorState& state, const Vector& phi_t,
                              const Vector& y_t);
PosteriorState recursive_update(PosteriorState state, const Vector& phi_t,
                                const Vector& y_t);

/// phi^T Lambda_t^{-1} phi, the factor by which predictive covariance
/// exceeds the noise covariance (minus one).
double feature_quadratic(const PosteriorState& state, const Vector& phi);

PredictiveDensity predict(const PosteriorState& state, const Vector& phi_query,
                          const NoiseModel& noise);

/// One draw K ~ MN(kbar, lam_inv, Sigma_eps).
Matrix sample_weights(const PosteriorState& state, const NoiseModel& noise,
                      std::mt19937_64& rng);

/// Full Gaussian negative log density, including the 2 pi constant.
double gaussian_nll(const PredictiveDensity& pred, const Vector& y);

}  // namespace alpaca
