#include "doctest.h"

#include <cmath>

#include "alpaca/bayes_linear.hpp"
#include "alpaca/feature_net.hpp"
#include "support/oracles.hpp"

using namespace alpaca;
using alpaca::autodiff::Tape;
using alpaca::testing::finite_difference;
using alpaca::testing::max_relative_error;
using alpaca::testing::random_matrix;

namespace {

NetConfig small_config() {
  NetConfig c;
  c.input_dim = 2;
  c.hidden_dims = {5, 4};
  c.feature_dim = 3;
  return c;
}

}  // namespace

TEST_CASE("init: zero biases, Glorot bound, shapes") {
  std::mt19937_64 rng(1);
  const NetConfig config;  // 1 -> 128 -> 128 -> 16
  const NetWeights w = init_weights(config, rng);
  REQUIRE(w.layers.size() == 3);
  CHECK(w.conforms_to(config));
  CHECK(glorot_bound(128, 128) == doctest::Approx(0.15309).epsilon(1e-4));
  const auto widths = config.widths();
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    CHECK(w.layers[i].b.cwiseAbs().maxCoeff() == 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(widths[i] + widths[i + 1]));
    CHECK(w.layers[i].w.cwiseAbs().maxCoeff() <= bound);
    // uniform draws should use most of the interval
    CHECK(w.layers[i].w.cwiseAbs().maxCoeff() > 0.9 * bound);
  }
  CHECK(w.parameter_count() == 1 * 128 + 128 + 128 * 128 + 128 + 128 * 16 + 16);
}

TEST_CASE("init is deterministic in the seed") {
  std::mt19937_64 a(42), b(42), c(43);
  const NetWeights wa = init_weights(small_config(), a);
  const NetWeights wb = init_weights(small_config(), b);
  const NetWeights wc = init_weights(small_config(), c);
  for (std::size_t i = 0; i < wa.layers.size(); ++i) {
    CHECK((wa.layers[i].w.array() == wb.layers[i].w.array()).all());
  }
  CHECK_FALSE((wa.layers[0].w.array() == wc.layers[0].w.array()).all());
}

TEST_CASE("config validation") {
  NetConfig c = small_config();
  c.feature_dim = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.hidden_dims = {4, 0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("forward: zero network and range") {
  std::mt19937_64 rng(2);
  NetWeights w = init_weights(small_config(), rng);
  const Matrix x = random_matrix(50, 2, rng, -5.0, 5.0);
  const Matrix f = forward(w, x);
  CHECK(f.rows() == 50);
  CHECK(f.cols() == 3);
  CHECK((f.array().abs() < 1.0).all());

  for (auto& layer : w.layers) {
    layer.w.setZero();
    layer.b.setZero();
  }
  CHECK(forward(w, x).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(forward(w, Matrix::Zero(3, 5)), ShapeError);
}

TEST_CASE("forward matches a hand-rolled reference and is bit-reproducible") {
  std::mt19937_64 rng(3);
  const NetWeights w = init_weights(small_config(), rng);
  const Matrix x = random_matrix(7, 2, rng);
  Matrix ref(7, 3);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::RowVectorXd h = x.row(r);
    for (const auto& layer : w.layers) {
      Eigen::RowVectorXd next(layer.w.cols());
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
        double s = layer.b(0, j);
        for (Eigen::Index i = 0; i < layer.w.rows(); ++i) s += h(i) * layer.w(i, j);
        next(j) = std::tanh(s);
      }
      h = next;
    }
    ref.row(r) = h;
  }
  const Matrix f = forward(w, x);
  CHECK((f - ref).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((forward(w, x).array() == f.array()).all());
}

TEST_CASE("far inputs saturate the features and the predictive variance levels off") {
  std::mt19937_64 rng(4);
  NetConfig config;
  config.hidden_dims = {32, 32};
  config.feature_dim = 8;
  const NetWeights w = init_weights(config, rng);
  Matrix far(3, 1);
  far << 1e3, 1e4, 1e6;
  const Matrix f = forward(w, far);
  CHECK((f.array().abs() <= 1.0).all());
  CHECK((f.row(1) - f.row(2)).cwiseAbs().maxCoeff() < 1e-12);

  const PosteriorState prior = init_posterior(Matrix::Zero(8, 1), Matrix::Identity(8, 8));
  const NoiseModel noise = NoiseModel::isotropic(1, 0.05);
  const double v1 = predict(prior, f.row(1).transpose(), noise).cov(0, 0);
  const double v2 = predict(prior, f.row(2).transpose(), noise).cov(0, 0);
  CHECK(std::abs(v1 - v2) < 1e-12);
  CHECK(v2 <= 0.05 * (1.0 + 8.0) + 1e-12);
}

TEST_CASE("forward_on_tape agrees with forward and has correct weight gradients") {
  std::mt19937_64 rng(5);
  const NetConfig config = small_config();
  const NetWeights w = init_weights(config, rng);
  NetWeights perturbed = w;
  for (auto& layer : perturbed.layers) layer.b = random_matrix(1, layer.b.cols(), rng, -0.3, 0.3);
  const Matrix x = random_matrix(6, 2, rng);
  const Matrix contract = random_matrix(6, 3, rng);

  Tape tape;
  const NetVars vars = register_leaves(tape, perturbed);
  const auto feat = forward_on_tape(tape, vars, tape.constant(x));
  CHECK((tape.value(feat) - forward(perturbed, x)).cwiseAbs().maxCoeff() == 0.0);
  tape.backward(tape.sum(tape.hadamard(feat, tape.constant(contract))));

  for (std::size_t l = 0; l < perturbed.layers.size(); ++l) {
    CAPTURE(l);
    auto fw = [&](const Matrix& probe) {
      NetWeights p = perturbed;
      p.layers[l].w = probe;
      return forward(p, x).cwiseProduct(contract).sum();
    };
    auto fb = [&](const Matrix& probe) {
      NetWeights p = perturbed;
      p.layers[l].b = probe;
      return forward(p, x).cwiseProduct(contract).sum();
    };
    CHECK(max_relative_error(tape.grad(vars.w[l]), finite_difference(fw, perturbed.layers[l].w),
                             1e-8) < 1e-5);
    CHECK(max_relative_error(tape.grad(vars.b[l]), finite_difference(fb, perturbed.layers[l].b),
                             1e-8) < 1e-5);
  }
}

TEST_CASE("a saturated unit passes essentially no gradient") {
  NetConfig config;
  config.input_dim = 1;
  config.hidden_dims = {1};
  config.feature_dim = 1;
  NetWeights w;
  w.layers.push_back({Matrix::Constant(1, 1, 30.0), Matrix::Zero(1, 1)});
  w.layers.push_back({Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)});
  REQUIRE(w.conforms_to(config));
  Tape tape;
  const NetVars vars = register_leaves(tape, w);
  const auto feat = forward_on_tape(tape, vars, tape.constant(Matrix::Ones(1, 1)));
  tape.backward(tape.sum(feat));
  CHECK(std::abs(tape.grad(vars.w[0])(0, 0)) < 1e-20);
  CHECK(std::abs(tape.grad(vars.b[0])(0, 0)) < 1e-20);
}
