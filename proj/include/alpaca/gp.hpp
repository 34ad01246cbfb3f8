#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alpaca/bayes_linear.hpp"
#include "alpaca/linalg.hpp"

namespace alpaca::gp {

/// Zero-mean squared-exponential GP hyperparameters. One noise variance per
/// output dimension; outputs are modelled as independent GPs sharing the
/// kernel.
struct SEKernelParams {
  double lengthscale = 1.0;
  double signal_var = 6.25;
  std::vector<double> noise_var = {0.05};

  void validate(std::size_t n_y) const;
  double jitter() const { return 1e-8 * signal_var; }
};

/// sigma_f^2 exp(-|x - x'|^2 / (2 l^2)).
double se_kernel(const Vector& x, const Vector& x_prime, const SEKernelParams& params);

/// Gram matrix between the rows of `a` and the rows of `b`.
Matrix se_gram(const Matrix& a, const Matrix& b, const SEKernelParams& params);

/// Exact GP posterior conditioned once on (X, Y); each query then costs
/// O(n^2) per output dimension.
class GpRegressor {
 public:
  GpRegressor(Matrix x, const Matrix& y, SEKernelParams params);

  /// Diagonal predictive covariance (independent outputs), including the
  /// observation noise.
  PredictiveDensity predict(const Vector& x_query) const;
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }

 private:
  Matrix x_;
  SEKernelParams params_;
  std::vector<Matrix> chol_;  // per output dimension
  std::vector<Vector> alpha_; // (K + s_n^2 I)^{-1} y_d
};

/// One-shot exact prediction; n = 0 returns the prior (0, s_f^2 + s_n^2).
PredictiveDensity gp_predict(const Matrix& x, const Matrix& y, const Vector& x_query,
                             const SEKernelParams& params);

/// Shared schema for the timing comparison CSV.
struct TimingRow {
  std::string method;
  std::size_t context_size = 0;
  std::size_t num_queries = 0;
  double condition_seconds = 0.0;
  double predict_seconds = 0.0;
  double total_seconds = 0.0;
};

struct TimingOptions {
  std::vector<std::size_t> context_sizes = {256, 512, 1024, 2048};
  std::size_t num_queries = 100;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::size_t feature_dim = 16;
  std::vector<std::size_t> hidden_dims = {128, 128};
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
};

/// Wall time of exact GP prediction (Gram matrix + factorization + queries)
/// against ALPaCA inference (feature evaluation + recursive updates +
/// queries) on synthetic data. Reports the fastest of `repeats` runs.
std::vector<TimingRow> timing_probe(const TimingOptions& options);

/// Least-squares slope of log(total_seconds) against log(context_size) for
/// the rows tagged `method`.
double log_log_slope(const std::vector<TimingRow>& rows, const std::string& method);

}  // namespace alpaca::gp
