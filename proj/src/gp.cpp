#include "alpaca/gp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alpaca/feature_net.hpp"

namespace alpaca::gp {

void SEKernelParams::validate(std::size_t n_y) const {
  if (!(lengthscale > 0.0)) throw std::invalid_argument("GP lengthscale must be > 0");
  if (!(signal_var > 0.0)) throw std::invalid_argument("GP signal variance must be > 0");
  if (noise_var.size() != n_y) {
    throw std::invalid_argument("GP needs " + std::to_string(n_y) +
                                " noise variances, got " +
                                std::to_string(noise_var.size()));
  }
  for (double v : noise_var) {
    if (!(v > 0.0)) throw std::invalid_argument("GP noise variance must be > 0");
  }
}

double se_kernel(const Vector& x, const Vector& x_prime, const SEKernelParams& params) {
  if (x.size() != x_prime.size()) throw ShapeError("se_kernel: input dimensions differ");
  const double l = params.lengthscale;
  return params.signal_var * std::exp(-(x - x_prime).squaredNorm() / (2.0 * l * l));
}

Matrix se_gram(const Matrix& a, const Matrix& b, const SEKernelParams& params) {
  if (a.cols() != b.cols()) throw ShapeError("se_gram: input dimensions differ");
  const double inv_two_l2 = 1.0 / (2.0 * params.lengthscale * params.lengthscale);
  // |a_i - b_j|^2 = |a_i|^2 + |b_j|^2 - 2 a_i.b_j
  Matrix d2 = -2.0 * a * b.transpose();
  d2.colwise() += a.rowwise().squaredNorm();
  d2.rowwise() += b.rowwise().squaredNorm().transpose();
  return params.signal_var * (-(d2.array().max(0.0)) * inv_two_l2).exp().matrix();
}

GpRegressor::GpRegressor(Matrix x, const Matrix& y, SEKernelParams params)
    : x_(std::move(x)), params_(std::move(params)) {
  if (x_.rows() != y.rows()) throw ShapeError("GpRegressor: X and Y row counts differ");
  params_.validate(static_cast<std::size_t>(y.cols()));
  const Eigen::Index n = x_.rows();
  if (n == 0) return;
  const Matrix gram = se_gram(x_, x_, params_);
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    Matrix k = gram;
    k.diagonal().array() += params_.noise_var[static_cast<std::size_t>(d)] + params_.jitter();
    Matrix l = linalg::cholesky(k);
    alpha_.push_back(linalg::cholesky_solve(l, y.col(d)));
    chol_.push_back(std::move(l));
  }
}

PredictiveDensity GpRegressor::predict(const Vector& x_query) const {
  const auto n_y = static_cast<Eigen::Index>(params_.noise_var.size());
  PredictiveDensity out{Vector::Zero(n_y), Matrix::Zero(n_y, n_y)};
  if (x_query.size() != x_.cols() && x_.rows() > 0) {
    throw ShapeError("GpRegressor::predict: query dimension");
  }
  if (x_.rows() == 0) {
    for (Eigen::Index d = 0; d < n_y; ++d) {
      out.cov(d, d) = params_.signal_var + params_.noise_var[static_cast<std::size_t>(d)];
    }
    return out;
  }
  const Vector k_star = se_gram(x_, x_query.transpose(), params_).col(0);
  for (Eigen::Index d = 0; d < n_y; ++d) {
    const auto di = static_cast<std::size_t>(d);
    out.mean(d) = k_star.dot(alpha_[di]);
    const Vector v = linalg::solve_lower(chol_[di], k_star);
    const double var = params_.signal_var + params_.noise_var[di] - v.squaredNorm();
    // Roundoff can push the latent variance fractionally negative.
    out.cov(d, d) = std::max(var, params_.noise_var[di]);
  }
  return out;
}

PredictiveDensity gp_predict(const Matrix& x, const Matrix& y, const Vector& x_query,
                             const SEKernelParams& params) {
  return GpRegressor(x, y, params).predict(x_query);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = unif(rng);
  }
  return m;
}

// Keeps results observable so the optimizer cannot drop the work.
volatile double g_sink = 0.0;

}  // namespace

std::vector<TimingRow> timing_probe(const TimingOptions& options) {
  std::mt19937_64 rng(options.seed);
  const auto n_x = static_cast<Eigen::Index>(options.input_dim);
  const auto n_y = static_cast<Eigen::Index>(options.output_dim);
  const auto m = static_cast<Eigen::Index>(options.num_queries);

  NetConfig net_config;
  net_config.input_dim = options.input_dim;
  net_config.hidden_dims = options.hidden_dims;
  net_config.feature_dim = options.feature_dim;
  const NetWeights weights = init_weights(net_config, rng);
  const auto n_phi = static_cast<Eigen::Index>(options.feature_dim);
  const Matrix kbar0 = Matrix::Zero(n_phi, n_y);
  const Matrix l0 = Matrix::Identity(n_phi, n_phi);
  const NoiseModel noise = NoiseModel::isotropic(n_y, 0.05);

  SEKernelParams gp_params;
  gp_params.noise_var.assign(options.output_dim, 0.05);

  const Matrix queries = uniform_matrix(m, n_x, rng);
  const std::size_t repeats = std::max<std::size_t>(1, options.repeats);

  std::vector<TimingRow> rows;
  for (std::size_t n : options.context_sizes) {
    const Matrix xs = uniform_matrix(static_cast<Eigen::Index>(n), n_x, rng);
    const Matrix ys = uniform_matrix(static_cast<Eigen::Index>(n), n_y, rng);

    TimingRow best_alpaca{"alpaca", n, options.num_queries,
                          std::numeric_limits<double>::infinity(), 0.0,
                          std::numeric_limits<double>::infinity()};
    TimingRow best_gp{"gp", n, options.num_queries,
                      std::numeric_limits<double>::infinity(), 0.0,
                      std::numeric_limits<double>::infinity()};
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      {
        auto start = Clock::now();
        PosteriorState state = init_posterior(kbar0, l0);
        const Matrix phi = forward(weights, xs);
        for (Eigen::Index t = 0; t < phi.rows(); ++t) {
          recursive_update_inplace(state, phi.row(t).transpose(), ys.row(t).transpose());
        }
        const double condition = seconds_since(start);
        start = Clock::now();
        const Matrix phi_q = forward(weights, queries);
        double acc = 0.0;
        for (Eigen::Index q = 0; q < m; ++q) {
          acc += predict(state, phi_q.row(q).transpose(), noise).cov(0, 0);
        }
        g_sink = acc;
        const double query = seconds_since(start);
        if (condition + query < best_alpaca.total_seconds) {
          best_alpaca.condition_seconds = condition;
          best_alpaca.predict_seconds = query;
          best_alpaca.total_seconds = condition + query;
        }
      }
      {
        auto start = Clock::now();
        const GpRegressor gp(xs, ys, gp_params);
        const double condition = seconds_since(start);
        start = Clock::now();
        double acc = 0.0;
        for (Eigen::Index q = 0; q < m; ++q) {
          acc += gp.predict(queries.row(q).transpose()).cov(0, 0);
        }
        g_sink = acc;
        const double query = seconds_since(start);
        if (condition + query < best_gp.total_seconds) {
          best_gp.condition_seconds = condition;
          best_gp.predict_seconds = query;
          best_gp.total_seconds = condition + query;
        }
      }
    }
    rows.push_back(best_alpaca);
    rows.push_back(best_gp);
  }
  return rows;
}

double log_log_slope(const std::vector<TimingRow>& rows, const std::string& method) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = 0;
  for (const TimingRow& r : rows) {
    if (r.method != method) continue;
    const double lx = std::log(static_cast<double>(r.context_size));
    const double ly = std::log(r.total_seconds);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    count += 1;
  }
  if (count < 2) throw std::invalid_argument("log_log_slope needs at least two rows for " + method);
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace alpaca::gp
