#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "alpaca/bayes_linear.hpp"
#include "alpaca/feature_net.hpp"
#include "alpaca/tape.hpp"
#include "alpaca/tasks.hpp"

namespace alpaca {

/// Distribution of the context size t_j drawn per minibatch entry.
enum class HorizonDistribution {
  kUniform,  // uniform over {0, ..., horizon - 1}
  kZero,     // always 0: prior-only training (no-meta ablation)
};

struct MetaTrainConfig {
  std::size_t batch_size = 16;  // J
  std::size_t horizon = 20;     // tau; datasets are clipped to their first tau rows
  HorizonDistribution horizon_distribution = HorizonDistribution::kUniform;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t iterations = 5000;
  /// Validation cadence in iterations; 0 disables validation.
  std::size_t eval_every = 0;
  /// Context sizes scored at each validation pass.
  std::vector<std::size_t> eval_context_sizes = {0, 1, 2, 5, 10};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Copy of `config` whose horizon distribution puts all mass on t = 0.
MetaTrainConfig make_ablation_no_meta(MetaTrainConfig config);

struct ValidationPoint {
  std::size_t iteration = 0;
  std::size_t context_size = 0;
  double nll = 0.0;
  double mse = 0.0;
};

struct TrainReport {
  std::vector<double> loss;  // one entry per iteration
  std::vector<ValidationPoint> validation;
};

/// Prior terms registered as tape leaves. `l0` is the Cholesky factor itself;
/// the trainer feeds it through `Tape::softplus_lower` from raw parameters.
struct PriorLeaves {
  autodiff::Var kbar0;
  autodiff::Var l0;
  NetVars net;
};

/// Registers kbar0, l0 and the network weights of `prior` as leaves.
PriorLeaves register_prior(autodiff::Tape& tape, const PriorParams& prior);

/// One minibatch entry: a dataset and how many of its leading rows form the
/// context.
struct LossTerm {
  const TaskDataset* task = nullptr;
  std::size_t context = 0;
};

/// Average over held-out rows context..horizon-1 of
///   n_y ln(1 + s_t) + r_t^T Sigma_eps^{-1} r_t / (1 + s_t)
/// where s_t = phi_t^T Lambda^{-1} phi_t and r_t = y_t - Kbar^T phi_t, with
/// (Lambda, Kbar) the posterior given the first `context` rows. The constant
/// ln det Sigma_eps is omitted.
autodiff::Var task_loss(autodiff::Tape& tape, const PriorLeaves& leaves,
                        const NoiseModel& noise, const LossTerm& term,
                        std::size_t horizon);

/// Mean of task_loss over the batch.
autodiff::Var minibatch_loss(autodiff::Tape& tape, const PriorLeaves& leaves,
                             const NoiseModel& noise,
                             std::span<const LossTerm> batch, std::size_t horizon);

/// Unconstrained parameterization used by the optimizer: the diagonal of
/// l0 is stored through softplus^{-1}.
struct TrainableParams {
  Matrix kbar0;
  Matrix l0_raw;
  NetWeights net;

  static TrainableParams from_prior(const PriorParams& prior);
  /// Fills kbar0 / l0 / net_weights of `out`; other fields are left alone.
  void to_prior(PriorParams& out) const;
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
};

/// K̄0 = 0, L0 = I, Glorot-initialized network.
PriorParams initial_prior(const NetConfig& net_config, const NoiseModel& noise,
                          std::mt19937_64& rng);

/// Loss value and gradient with respect to every trainable tensor (in
/// `TrainableParams::tensors()` order).
struct LossAndGradient {
  double loss = 0.0;
  std::vector<Matrix> gradient;
};

LossAndGradient loss_and_gradient(const TrainableParams& params,
                                  const NoiseModel& noise,
                                  std::span<const LossTerm> batch, std::size_t horizon);

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1, double beta2, double epsilon);
  void step(std::vector<Matrix*> params, const std::vector<Matrix>& grads);
  std::size_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct TrainResult {
  PriorParams prior;
  TrainReport report;
};

/// Meta-trains feature network and prior on `corpus`. When `validation` is
/// non-empty and config.eval_every > 0, records held-out NLL/MSE by context
/// size. Throws NonFiniteLoss if the loss diverges.
TrainResult train(const std::vector<TaskDataset>& corpus, const NetConfig& net_config,
                  const NoiseModel& noise, const MetaTrainConfig& config,
                  const std::vector<TaskDataset>& validation = {});

}  // namespace alpaca
