#pragma once

#include <string>
#include <vector>

#include "alpaca/feature_net.hpp"
#include "alpaca/meta_trainer.hpp"

namespace alpaca {

/// Training settings read from a flat `key = value` file. Blank lines and
/// `#` comments are ignored; unknown keys are errors.
///
///   hidden_dims = 128,128        feature_dim = 16
///   batch_size = 16              horizon = 20
///   horizon_distribution = uniform | zero
///   learning_rate = 0.001        beta1 = 0.9     beta2 = 0.999
///   adam_epsilon = 1e-8          iterations = 5000
///   eval_every = 0               seed = 0
///   sigma_eps = 0.05             (n_y diagonal entries, or n_y*n_y row-major)
///
/// input_dim is taken from the corpus, not the file.
struct TrainingSetup {
  NetConfig net;
  MetaTrainConfig train;
  std::vector<double> sigma_eps;  // empty: use the task family default
};

TrainingSetup parse_training_config(const std::string& text);
TrainingSetup load_training_config(const std::string& path);

/// Canonical `key = value` rendering (sorted, fully specified).
std::string canonical_config(const TrainingSetup& setup);

/// 64-bit FNV-1a digest as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

/// Builds Sigma_eps from n_y diagonal values or n_y*n_y row-major values.
Matrix sigma_from_values(const std::vector<double>& values, std::size_t n_y);

}  // namespace alpaca
