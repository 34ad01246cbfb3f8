#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "alpaca/linalg.hpp"
#include "alpaca/tape.hpp"

namespace alpaca {

/// Fully connected tanh network mapping n_x inputs to n_phi bounded features.
/// Every layer, including the last, is tanh(X W + b).
struct NetConfig {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims = {128, 128};
  std::size_t feature_dim = 16;

  void validate() const;
  /// Layer widths from input to output, e.g. {n_x, 128, 128, n_phi}.
  std::vector<std::size_t> widths() const;
};

struct DenseLayer {
  Matrix w;  // fan_in x fan_out
  Matrix b;  // 1 x fan_out
};

struct NetWeights {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  bool conforms_to(const NetConfig& config) const;
};

/// Glorot-uniform weights, zero biases.
NetWeights init_weights(const NetConfig& config, std::mt19937_64& rng);

inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Features for each row of `x` (batch x n_x) -> batch x n_phi.
Matrix forward(const NetWeights& weights, const Matrix& x);

/// Weights registered as tape leaves, one (w, b) pair per layer.
struct NetVars {
  std::vector<autodiff::Var> w;
  std::vector<autodiff::Var> b;
};

NetVars register_leaves(autodiff::Tape& tape, const NetWeights& weights);

/// Same computation as `forward`, recorded on `tape`.
autodiff::Var forward_on_tape(autodiff::Tape& tape, const NetVars& vars,
                              autodiff::Var x);

}  // namespace alpaca
