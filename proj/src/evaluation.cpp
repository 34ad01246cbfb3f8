#include "alpaca/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace alpaca {
namespace {

struct RunningStats {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double stderr_of_mean() const {
    if (values.size() < 2) return 0.0;
    const double mu = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    const double n = static_cast<double>(values.size());
    return std::sqrt(ss / (n - 1.0) / n);
  }
};

struct ContextAccumulator {
  RunningStats nll, mse;
  double var_sum = 0.0;
  std::size_t var_count = 0;
};

void check_task(const TaskDataset& task, std::size_t max_context, std::size_t index,
                std::size_t n_x, std::size_t n_y) {
  task.validate();
  if (task.length() <= max_context) {
    throw std::invalid_argument("task " + std::to_string(index) + " has " +
                                std::to_string(task.length()) +
                                " rows; need more than max_context = " +
                                std::to_string(max_context));
  }
  if (task.input_dim() != n_x || task.output_dim() != n_y) {
    throw ShapeError("task " + std::to_string(index) + " is " +
                     std::to_string(task.input_dim()) + "->" +
                     std::to_string(task.output_dim()) + ", model is " +
                     std::to_string(n_x) + "->" + std::to_string(n_y));
  }
}

// Scores rows [first, tau) of `task`.
template <typename Predictor>
void score_heldout(const TaskDataset& task, std::size_t first, Predictor&& predictor,
                   ContextAccumulator& acc) {
  double nll = 0.0;
  double mse = 0.0;
  const auto n_y = static_cast<double>(task.output_dim());
  const auto begin = static_cast<Eigen::Index>(first);
  for (Eigen::Index r = begin; r < task.xs.rows(); ++r) {
    const PredictiveDensity pred = predictor(r);
    const Vector y = task.ys.row(r).transpose();
    nll += gaussian_nll(pred, y);
    mse += (y - pred.mean).squaredNorm() / n_y;
    acc.var_sum += pred.cov.trace() / n_y;
    ++acc.var_count;
  }
  const double m = static_cast<double>(task.xs.rows() - begin);
  acc.nll.add(nll / m);
  acc.mse.add(mse / m);
}

std::vector<EvalRow> finish(const std::vector<ContextAccumulator>& accs,
                            const std::string& method) {
  std::vector<EvalRow> rows;
  for (std::size_t t = 0; t < accs.size(); ++t) {
    EvalRow row;
    row.method = method;
    row.context_size = t;
    row.nll_mean = accs[t].nll.mean();
    row.nll_stderr = accs[t].nll.stderr_of_mean();
    row.mse_mean = accs[t].mse.mean();
    row.mse_stderr = accs[t].mse.stderr_of_mean();
    row.pred_var_mean =
        accs[t].var_count ? accs[t].var_sum / static_cast<double>(accs[t].var_count) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

Vector pad_input(const Vector& state, Eigen::Index n_x) {
  Vector x = Vector::Zero(n_x);
  const Eigen::Index k = std::min(n_x, state.size());
  x.head(k) = state.head(k);
  return x;
}

}  // namespace

std::vector<EvalRow> evaluate_alpaca(const PriorParams& prior,
                                     const std::vector<TaskDataset>& tasks,
                                     std::size_t max_context, bool online_updates,
                                     const std::string& method) {
  prior.validate();
  std::vector<ContextAccumulator> accs(max_context + 1);
  const PosteriorState prior_state = init_posterior(prior);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDataset& task = tasks[i];
    check_task(task, max_context, i, prior.net_config.input_dim,
               static_cast<std::size_t>(prior.output_dim()));
    const Matrix phi = forward(prior.net_weights, task.xs);
    PosteriorState state = prior_state;
    for (std::size_t t = 0; t <= max_context; ++t) {
      score_heldout(task, max_context,
                    [&](Eigen::Index r) {
                      return predict(state, phi.row(r).transpose(), prior.noise);
                    },
                    accs[t]);
      if (online_updates && t < max_context) {
        const auto r = static_cast<Eigen::Index>(t);
        recursive_update_inplace(state, phi.row(r).transpose(), task.ys.row(r).transpose());
      }
    }
  }
  return finish(accs, method);
}

std::vector<EvalRow> evaluate_gp(const gp::SEKernelParams& params,
                                 const std::vector<TaskDataset>& tasks,
                                 std::size_t max_context) {
  std::vector<ContextAccumulator> accs(max_context + 1);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDataset& task = tasks[i];
    check_task(task, max_context, i, task.input_dim(), params.noise_var.size());
    for (std::size_t t = 0; t <= max_context; ++t) {
      const auto n = static_cast<Eigen::Index>(t);
      const gp::GpRegressor model(task.xs.topRows(n), task.ys.topRows(n), params);
      score_heldout(task, max_context,
                    [&](Eigen::Index r) { return model.predict(task.xs.row(r).transpose()); },
                    accs[t]);
    }
  }
  return finish(accs, kMethodGp);
}

PosteriorState condition_on(const PriorParams& prior, const TaskDataset& task,
                            std::size_t context) {
  if (context > task.length()) {
    throw std::invalid_argument("context exceeds task length");
  }
  const auto n = static_cast<Eigen::Index>(context);
  const Matrix phi = forward(prior.net_weights, task.xs.topRows(n));
  return batch_posterior(prior, phi, task.ys.topRows(n));
}

CalibrationResult calibration_coverage(const PriorParams& prior,
                                       const std::vector<TaskDataset>& tasks,
                                       std::size_t context, double cov_scale) {
  prior.validate();
  if (!(cov_scale > 0.0)) throw std::invalid_argument("cov_scale must be > 0");
  CalibrationResult result;
  result.context = context;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDataset& task = tasks[i];
    check_task(task, context, i, prior.net_config.input_dim,
               static_cast<std::size_t>(prior.output_dim()));
    const PosteriorState state = condition_on(prior, task, context);
    const Matrix phi = forward(prior.net_weights, task.xs);
    for (Eigen::Index r = static_cast<Eigen::Index>(context); r < task.xs.rows(); ++r) {
      const PredictiveDensity pred = predict(state, phi.row(r).transpose(), prior.noise);
      for (Eigen::Index d = 0; d < pred.mean.size(); ++d) {
        const double half_width = kZ95 * std::sqrt(cov_scale * pred.cov(d, d));
        if (std::abs(task.ys(r, d) - pred.mean(d)) <= half_width) ++result.inside;
        ++result.count;
      }
    }
  }
  result.coverage =
      result.count ? static_cast<double>(result.inside) / static_cast<double>(result.count) : 0.0;
  return result;
}

TaskDataset sample_from_prior(const PriorParams& prior, std::mt19937_64& rng,
                              std::size_t tau) {
  prior.validate();
  if (tau < 1) throw std::invalid_argument("task length must be >= 1");
  const PosteriorState state = init_posterior(prior);
  const Matrix k = sample_weights(state, prior.noise, rng);
  const auto n = static_cast<Eigen::Index>(tau);
  const auto n_x = static_cast<Eigen::Index>(prior.net_config.input_dim);
  std::uniform_real_distribution<double> unif(tasks::kInputLow, tasks::kInputHigh);
  std::normal_distribution<double> normal(0.0, 1.0);
  TaskDataset data;
  data.xs.resize(n, n_x);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n_x; ++c) data.xs(r, c) = unif(rng);
  }
  const Matrix phi = forward(prior.net_weights, data.xs);
  Matrix eps(n, prior.output_dim());
  for (Eigen::Index r = 0; r < eps.rows(); ++r) {
    for (Eigen::Index c = 0; c < eps.cols(); ++c) eps(r, c) = normal(rng);
  }
  // Rows of eps * L^T have covariance L L^T = Sigma_eps.
  data.ys = phi * k + eps * prior.noise.cholesky().transpose();
  return data;
}

namespace {

Matrix rollout_with(const PriorParams& prior, const Matrix& k, const Vector& initial,
                    std::size_t horizon) {
  const auto n_x = static_cast<Eigen::Index>(prior.net_config.input_dim);
  Matrix out(static_cast<Eigen::Index>(horizon), initial.size());
  Vector s = initial;
  for (Eigen::Index step = 0; step < out.rows(); ++step) {
    const Matrix phi = forward(prior.net_weights, pad_input(s, n_x).transpose());
    s += k.transpose() * phi.row(0).transpose();
    out.row(step) = s.transpose();
  }
  return out;
}

}  // namespace

std::vector<Matrix> sample_rollouts(const PriorParams& prior, const PosteriorState& state,
                                    const Vector& initial_state, std::size_t horizon,
                                    std::size_t n_samples, std::mt19937_64& rng) {
  if (initial_state.size() != prior.output_dim()) {
    throw ShapeError("rollout state must have n_y = " + std::to_string(prior.output_dim()) +
                     " components");
  }
  std::vector<Matrix> out;
  out.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Matrix k = sample_weights(state, prior.noise, rng);
    out.push_back(rollout_with(prior, k, initial_state, horizon));
  }
  return out;
}

Matrix mean_rollout(const PriorParams& prior, const PosteriorState& state,
                    const Vector& initial_state, std::size_t horizon) {
  if (initial_state.size() != prior.output_dim()) {
    throw ShapeError("rollout state must have n_y components");
  }
  return rollout_with(prior, state.kbar, initial_state, horizon);
}

double rollout_spread(const std::vector<Matrix>& rollouts) {
  if (rollouts.size() < 2) return 0.0;
  const Eigen::Index steps = rollouts.front().rows();
  const double n = static_cast<double>(rollouts.size());
  double total = 0.0;
  for (Eigen::Index step = 0; step < steps; ++step) {
    Vector mean = Vector::Zero(rollouts.front().cols());
    for (const Matrix& r : rollouts) mean += r.row(step).transpose();
    mean /= n;
    double ss = 0.0;
    for (const Matrix& r : rollouts) ss += (r.row(step).transpose() - mean).squaredNorm();
    total += std::sqrt(ss / (n - 1.0));
  }
  return steps ? total / static_cast<double>(steps) : 0.0;
}

}  // namespace alpaca
