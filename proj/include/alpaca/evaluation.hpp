#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "alpaca/bayes_linear.hpp"
#include "alpaca/gp.hpp"
#include "alpaca/tasks.hpp"

namespace alpaca {

/// Method tags used in evaluation tables.
inline constexpr const char* kMethodAlpaca = "alpaca";
inline constexpr const char* kMethodNoMeta = "alpaca-no-meta";
inline constexpr const char* kMethodNoUpdate = "alpaca-no-update";
inline constexpr const char* kMethodGp = "gp";

/// Held-out performance after `context_size` online samples, averaged over
/// tasks. Standard errors are across tasks.
struct EvalRow {
  std::string method;
  std::size_t context_size = 0;
  double nll_mean = 0.0;
  double nll_stderr = 0.0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  double pred_var_mean = 0.0;
};

/// For each task the first `max_context` rows are streamed in one at a time
/// through recursive_update; after each t in {0..max_context} the rows
/// [max_context, tau) are scored. With `online_updates == false` the prior is
/// never updated (every row then equals the t = 0 row).
std::vector<EvalRow> evaluate_alpaca(const PriorParams& prior,
                                     const std::vector<TaskDataset>& tasks,
                                     std::size_t max_context, bool online_updates,
                                     const std::string& method);

/// Same protocol with an exact GP refit at each context size.
std::vector<EvalRow> evaluate_gp(const gp::SEKernelParams& params,
                                 const std::vector<TaskDataset>& tasks,
                                 std::size_t max_context);

/// Summary for the rows scored from `context` onwards in each task after
/// conditioning on the first `context` rows (batch posterior).
struct CalibrationResult {
  std::size_t context = 0;
  std::size_t count = 0;   // scalar outputs scored
  std::size_t inside = 0;  // of which inside the central interval
  double coverage = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Fraction of held-out output components inside the central 95% predictive
/// interval. `cov_scale` multiplies the predictive covariance.
CalibrationResult calibration_coverage(const PriorParams& prior,
                                       const std::vector<TaskDataset>& tasks,
                                       std::size_t context, double cov_scale = 1.0);

/// Draws a task from the model's own generative prior: K ~ MN(kbar0,
/// Lambda0^{-1}, Sigma_eps), x ~ U[-5, 5]^{n_x}, y = K^T phi(x) + eps.
TaskDataset sample_from_prior(const PriorParams& prior, std::mt19937_64& rng,
                              std::size_t tau);

/// Posterior-sampled rollouts: per sample draws one K and iterates
/// s' = s + K^T phi([s, 0]) for `horizon` steps. Inputs are the state padded
/// with zero actions up to n_x. Returns one horizon x n_y matrix per sample.
std::vector<Matrix> sample_rollouts(const PriorParams& prior, const PosteriorState& state,
                                    const Vector& initial_state, std::size_t horizon,
                                    std::size_t n_samples, std::mt19937_64& rng);

/// Rollout with the posterior mean weights.
Matrix mean_rollout(const PriorParams& prior, const PosteriorState& state,
                    const Vector& initial_state, std::size_t horizon);

/// Mean over steps of sqrt(trace of the across-sample state covariance).
double rollout_spread(const std::vector<Matrix>& rollouts);

/// Features for every row of `task.xs` and the posterior given its first
/// `context` rows.
PosteriorState condition_on(const PriorParams& prior, const TaskDataset& task,
                            std::size_t context);

}  // namespace alpaca
