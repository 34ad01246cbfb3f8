#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "alpaca/bayes_linear.hpp"
#include "support/oracles.hpp"

using namespace alpaca;
using alpaca::testing::random_cholesky_factor;
using alpaca::testing::random_matrix;
using alpaca::testing::reference_inverse;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

PosteriorState fold(const Matrix& kbar0, const Matrix& l0, const Matrix& phi, const Matrix& y) {
  PosteriorState s = init_posterior(kbar0, l0);
  for (Eigen::Index t = 0; t < phi.rows(); ++t) {
    recursive_update_inplace(s, phi.row(t).transpose(), y.row(t).transpose());
  }
  return s;
}

// Reference posterior straight from the definitions, using an LU inverse.
struct Reference {
  Matrix lam;
  Matrix kbar;
};

Reference reference_posterior(const Matrix& kbar0, const Matrix& l0, const Matrix& phi,
                              const Matrix& y) {
  const Matrix lam0 = l0 * l0.transpose();
  Reference r;
  r.lam = phi.transpose() * phi + lam0;
  r.kbar = reference_inverse(r.lam) * (phi.transpose() * y + lam0 * kbar0);
  return r;
}

}  // namespace

TEST_CASE("init_posterior examples") {
  PosteriorState s = init_posterior(Matrix::Zero(3, 2), Matrix::Identity(3, 3));
  CHECK(max_abs(s.lam_inv - Matrix::Identity(3, 3)) == 0.0);
  CHECK(max_abs(s.q) == 0.0);
  CHECK(max_abs(s.kbar) == 0.0);
  CHECK(s.t == 0);

  Matrix kbar0(2, 1);
  kbar0 << 1, 2;
  s = init_posterior(kbar0, 2.0 * Matrix::Identity(2, 2));  // Lambda0 = 4I
  CHECK(max_abs(s.lam_inv - 0.25 * Matrix::Identity(2, 2)) < 1e-15);
  CHECK(s.q(0, 0) == doctest::Approx(4.0));
  CHECK(s.q(1, 0) == doctest::Approx(8.0));
  CHECK(max_abs(s.kbar - kbar0) == 0.0);

  Matrix degenerate = Matrix::Identity(2, 2);
  degenerate(1, 1) = 0.0;
  CHECK_THROWS_AS(init_posterior(kbar0, degenerate), NotPositiveDefinite);
}

TEST_CASE("prior predictive before any data") {
  std::mt19937_64 rng(1);
  const Matrix kbar0 = random_matrix(4, 2, rng);
  const Matrix l0 = random_cholesky_factor(4, rng);
  const PosteriorState s = init_posterior(kbar0, l0);
  const NoiseModel noise = NoiseModel::isotropic(2, 0.3);
  const Vector phi = random_matrix(4, 1, rng);
  const PredictiveDensity p = predict(s, phi, noise);
  const double quad = phi.dot(reference_inverse(l0 * l0.transpose()) * phi);
  CHECK(max_abs(p.mean - kbar0.transpose() * phi) < 1e-14);
  CHECK(max_abs(p.cov - (1.0 + quad) * noise.covariance()) < 1e-12);

  const PosteriorState empty = batch_posterior(kbar0, l0, Matrix(0, 4), Matrix(0, 2));
  CHECK(max_abs(empty.lam_inv - s.lam_inv) < 1e-15);
  CHECK(max_abs(empty.kbar - s.kbar) < 1e-14);
  CHECK(empty.t == 0);
}

TEST_CASE("scalar running example") {
  const Matrix kbar0 = Matrix::Zero(1, 1);
  const Matrix l0 = Matrix::Identity(1, 1);
  const Matrix phi = Matrix::Ones(1, 1);
  const Matrix y = Matrix::Ones(1, 1);
  const NoiseModel noise = NoiseModel::isotropic(1, 0.7);

  const PosteriorState b = batch_posterior(kbar0, l0, phi, y);
  CHECK(1.0 / b.lam_inv(0, 0) == doctest::Approx(2.0));
  CHECK(b.kbar(0, 0) == doctest::Approx(0.5));
  CHECK(b.t == 1);

  const PosteriorState r = recursive_update(init_posterior(kbar0, l0), Vector::Ones(1), Vector::Ones(1));
  const PredictiveDensity p = predict(r, Vector::Ones(1), noise);
  CHECK(p.mean(0) == doctest::Approx(0.5));
  CHECK(p.cov(0, 0) == doctest::Approx(1.5 * 0.7));
  CHECK(r.t == 1);
}

TEST_CASE("batch posterior matches the definitional reference") {
  std::mt19937_64 rng(2);
  const Matrix kbar0 = random_matrix(6, 2, rng);
  const Matrix l0 = random_cholesky_factor(6, rng);
  const Matrix phi = random_matrix(15, 6, rng);
  const Matrix y = random_matrix(15, 2, rng);
  const PosteriorState s = batch_posterior(kbar0, l0, phi, y);
  const Reference ref = reference_posterior(kbar0, l0, phi, y);
  CHECK(max_abs(s.lam_inv - reference_inverse(ref.lam)) < 1e-12);
  CHECK(max_abs(s.kbar - ref.kbar) < 1e-12);
  CHECK(max_abs(s.q - (phi.transpose() * y + l0 * l0.transpose() * kbar0)) < 1e-12);
  CHECK_THROWS_AS(batch_posterior(kbar0, l0, phi, random_matrix(14, 2, rng)), ShapeError);
  CHECK_THROWS_AS(batch_posterior(kbar0, l0, random_matrix(3, 5, rng), random_matrix(3, 2, rng)),
                  ShapeError);
}

TEST_CASE("batch equals folded recursive updates") {
  std::mt19937_64 rng(3);
  {
    const Matrix kbar0 = random_matrix(8, 1, rng);
    const Matrix l0 = random_cholesky_factor(8, rng);
    const Matrix phi = random_matrix(20, 8, rng);
    const Matrix y = random_matrix(20, 1, rng);
    const PosteriorState b = batch_posterior(kbar0, l0, phi, y);
    const PosteriorState r = fold(kbar0, l0, phi, y);
    CHECK(max_abs(b.lam_inv - r.lam_inv) < 1e-8);
    CHECK(max_abs(b.kbar - r.kbar) < 1e-8);
    CHECK(b.t == r.t);
  }
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<int> nphi(1, 32), tau(0, 50), ny(1, 3);
    const int n = nphi(rng), t = tau(rng), m = ny(rng);
    CAPTURE(n);
    CAPTURE(t);
    const Matrix kbar0 = random_matrix(n, m, rng);
    const Matrix l0 = random_cholesky_factor(n, rng);
    const Matrix phi = random_matrix(t, n, rng);
    const Matrix y = random_matrix(t, m, rng, -3.0, 3.0);
    const PosteriorState b = batch_posterior(kbar0, l0, phi, y);
    const PosteriorState r = fold(kbar0, l0, phi, y);
    CHECK(max_abs(b.lam_inv - r.lam_inv) < 1e-8);
    CHECK(max_abs(b.kbar - r.kbar) < 1e-8);
  }
}

TEST_CASE("Woodbury residual and zero feature") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix l0 = random_cholesky_factor(6, rng);
    PosteriorState s = batch_posterior(random_matrix(6, 2, rng), l0, random_matrix(5, 6, rng),
                                       random_matrix(5, 2, rng));
    const Matrix lam_prev = reference_inverse(s.lam_inv);
    const Vector phi = random_matrix(6, 1, rng);
    recursive_update_inplace(s, phi, random_matrix(2, 1, rng));
    const Matrix residual = (lam_prev + phi * phi.transpose()) * s.lam_inv - Matrix::Identity(6, 6);
    CHECK(max_abs(residual) < 1e-10);
    CHECK(max_abs(s.lam_inv - s.lam_inv.transpose()) == 0.0);
    CHECK(max_abs(s.kbar - s.lam_inv * s.q) < 1e-15);
  }

  const PosteriorState s0 = batch_posterior(random_matrix(3, 1, rng), random_cholesky_factor(3, rng),
                                            random_matrix(4, 3, rng), random_matrix(4, 1, rng));
  const PosteriorState s1 = recursive_update(s0, Vector::Zero(3), Vector::Constant(1, 9.0));
  CHECK(max_abs(s1.lam_inv - s0.lam_inv) == 0.0);
  CHECK(max_abs(s1.q - s0.q) == 0.0);
  CHECK(max_abs(s1.kbar - s0.kbar) < 1e-15);
  CHECK_THROWS_AS(recursive_update(s0, Vector::Zero(2), Vector::Zero(1)), ShapeError);
}

TEST_CASE("predict examples") {
  const PosteriorState s = init_posterior(Matrix::Zero(3, 2), Matrix::Identity(3, 3));
  Matrix sigma(2, 2);
  sigma << 0.5, 0.1, 0.1, 0.3;
  const NoiseModel noise(sigma);
  PredictiveDensity p = predict(s, Vector::Zero(3), noise);
  CHECK(max_abs(p.mean) == 0.0);
  CHECK(max_abs(p.cov - sigma) == 0.0);
  p = predict(s, Vector::Unit(3, 1), noise);
  CHECK(max_abs(p.cov - 2.0 * sigma) < 1e-15);
}

TEST_CASE("monotone information, predictive floor, log-det identity") {
  std::mt19937_64 rng(5);
  const Matrix l0 = random_cholesky_factor(5, rng);
  PosteriorState s = init_posterior(random_matrix(5, 2, rng), l0);
  Matrix sigma(2, 2);
  sigma << 0.2, 0.05, 0.05, 0.1;
  const NoiseModel noise(sigma);
  const Vector query = random_matrix(5, 1, rng);
  double prev = feature_quadratic(s, query);
  for (int t = 0; t < 60; ++t) {
    recursive_update_inplace(s, random_matrix(5, 1, rng), random_matrix(2, 1, rng));
    const double q = feature_quadratic(s, query);
    CHECK(q <= prev + 1e-12);
    prev = q;

    const PredictiveDensity p = predict(s, query, noise);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(p.cov - sigma);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-14);
    const double lhs = std::log(p.cov.determinant());
    const double rhs = 2.0 * std::log1p(q) + std::log(sigma.determinant());
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("batch posterior is invariant to row order") {
  std::mt19937_64 rng(6);
  const Matrix kbar0 = random_matrix(4, 2, rng);
  const Matrix l0 = random_cholesky_factor(4, rng);
  const Matrix phi = random_matrix(12, 4, rng);
  const Matrix y = random_matrix(12, 2, rng);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix phi_p(12, 4), y_p(12, 2);
  for (int i = 0; i < 12; ++i) {
    phi_p.row(i) = phi.row(perm[i]);
    y_p.row(i) = y.row(perm[i]);
  }
  const PosteriorState a = batch_posterior(kbar0, l0, phi, y);
  const PosteriorState b = batch_posterior(kbar0, l0, phi_p, y_p);
  CHECK(max_abs(a.lam_inv - b.lam_inv) < 1e-12);
  CHECK(max_abs(a.kbar - b.kbar) < 1e-12);
}

TEST_CASE("sample_weights: Monte Carlo mean and Kronecker covariance") {
  std::mt19937_64 rng(7);
  Matrix kbar0(2, 1);
  kbar0 << 0.3, -1.2;
  Matrix l0(2, 2);
  l0 << 1.3, 0.0, -0.4, 0.8;
  const PosteriorState s = batch_posterior(kbar0, l0, random_matrix(3, 2, rng), random_matrix(3, 1, rng));
  const NoiseModel noise = NoiseModel::isotropic(1, 0.6);

  constexpr int kMean = 10000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < kMean; ++i) sum += sample_weights(s, noise, rng).col(0);
  const Vector mean = sum / kMean;
  const Matrix target_cov = 0.6 * s.lam_inv;  // Sigma_eps (x) Lambda^{-1} for n_y = 1
  for (int i = 0; i < 2; ++i) {
    const double se = std::sqrt(target_cov(i, i) / kMean);
    CHECK(std::abs(mean(i) - s.kbar(i, 0)) < 3.0 * se);
  }

  constexpr int kCov = 100000;
  Matrix second = Matrix::Zero(2, 2);
  for (int i = 0; i < kCov; ++i) {
    const Vector d = sample_weights(s, noise, rng).col(0) - s.kbar.col(0);
    second += d * d.transpose();
  }
  second /= kCov;
  const double scale = target_cov.diagonal().maxCoeff();
  CHECK(max_abs(second - target_cov) < 0.05 * scale);
}

TEST_CASE("sample_weights: two outputs follow Sigma kron Lambda^{-1}") {
  std::mt19937_64 rng(8);
  const PosteriorState s = init_posterior(Matrix::Zero(2, 2), random_cholesky_factor(2, rng));
  Matrix sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 0.5;
  const NoiseModel noise(sigma);
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const Matrix k = sample_weights(s, noise, rng);
    Eigen::Vector4d v;
    v << k(0, 0), k(1, 0), k(0, 1), k(1, 1);  // column-stacked vec(K)
    acc += v * v.transpose();
  }
  acc /= kDraws;
  Eigen::Matrix4d kron;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) kron.block<2, 2>(2 * a, 2 * b) = sigma(a, b) * s.lam_inv;
  }
  CHECK((acc - kron).cwiseAbs().maxCoeff() < 0.05 * kron.diagonal().maxCoeff());
}

TEST_CASE("sample_weights concentrates as the noise vanishes") {
  std::mt19937_64 rng(9);
  const PosteriorState s = init_posterior(random_matrix(3, 1, rng), random_cholesky_factor(3, rng));
  const NoiseModel noise = NoiseModel::isotropic(1, 1e-12);
  for (int i = 0; i < 100; ++i) CHECK(max_abs(sample_weights(s, noise, rng) - s.kbar) < 1e-5);
}

TEST_CASE("gaussian_nll closed forms") {
  PredictiveDensity p{Vector::Zero(1), Matrix::Identity(1, 1)};
  const double base = gaussian_nll(p, Vector::Zero(1));
  CHECK(base == doctest::Approx(0.918939).epsilon(1e-6));
  CHECK(gaussian_nll(p, Vector::Ones(1)) == doctest::Approx(base + 0.5));

  PredictiveDensity q{Vector::Zero(3), Matrix::Identity(3, 3)};
  const double b3 = gaussian_nll(q, Vector::Zero(3));
  q.cov *= 2.5;
  CHECK(gaussian_nll(q, Vector::Zero(3)) - b3 == doctest::Approx(0.5 * 3 * std::log(2.5)));

  PredictiveDensity bad{Vector::Zero(1), Matrix::Constant(1, 1, -1.0)};
  CHECK_THROWS_AS(gaussian_nll(bad, Vector::Zero(1)), NotPositiveDefinite);
}

TEST_CASE("noise model validation") {
  CHECK_THROWS(NoiseModel(Matrix::Zero(2, 3)));
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.1, 1;
  CHECK_THROWS(NoiseModel(asym));
  CHECK_THROWS_AS(NoiseModel(-Matrix::Identity(2, 2)), NotPositiveDefinite);
  const NoiseModel n = NoiseModel::isotropic(2, 0.25);
  CHECK(n.log_det() == doctest::Approx(2.0 * std::log(0.25)));
}
