#include "alpaca/meta_trainer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "alpaca/evaluation.hpp"

namespace alpaca {

using autodiff::Tape;
using autodiff::Var;

void MetaTrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("adam_epsilon must be > 0");
}

MetaTrainConfig make_ablation_no_meta(MetaTrainConfig config) {
  config.horizon_distribution = HorizonDistribution::kZero;
  return config;
}

PriorLeaves register_prior(Tape& tape, const PriorParams& prior) {
  PriorLeaves leaves;
  leaves.kbar0 = tape.leaf(prior.kbar0);
  leaves.l0 = tape.leaf(prior.l0);
  leaves.net = register_leaves(tape, prior.net_weights);
  return leaves;
}

Var task_loss(Tape& tape, const PriorLeaves& leaves, const NoiseModel& noise,
              const LossTerm& term, std::size_t horizon) {
  if (term.task == nullptr) throw std::invalid_argument("task_loss: null dataset");
  const TaskDataset& task = *term.task;
  task.validate();
  if (task.length() < horizon) {
    throw std::invalid_argument("task_loss: dataset has " + std::to_string(task.length()) +
                                " rows, horizon is " + std::to_string(horizon));
  }
  if (term.context >= horizon) {
    throw std::invalid_argument("task_loss: context " + std::to_string(term.context) +
                                " must be < horizon " + std::to_string(horizon));
  }
  const auto tau = static_cast<Eigen::Index>(horizon);
  const auto ctx = static_cast<Eigen::Index>(term.context);
  const double n_y = static_cast<double>(task.output_dim());

  const Var x = tape.constant(task.xs.topRows(tau));
  const Var phi = forward_on_tape(tape, leaves.net, x);
  const Var lam0 = tape.matmul(leaves.l0, tape.transpose(leaves.l0));

  Var lam = lam0;
  Var kbar = leaves.kbar0;
  if (ctx > 0) {
    const Var phi_c = tape.slice_rows(phi, 0, ctx);
    const Var phi_ct = tape.transpose(phi_c);
    const Var y_c = tape.constant(task.ys.topRows(ctx));
    lam = tape.add(tape.matmul(phi_ct, phi_c), lam0);
    const Var q = tape.add(tape.matmul(phi_ct, y_c), tape.matmul(lam0, leaves.kbar0));
    kbar = tape.solve_psd(lam, q);
  }

  const Var phi_h = tape.slice_rows(phi, ctx, tau - ctx);
  const Var y_h = tape.constant(task.ys.middleRows(ctx, tau - ctx));
  // s_t = phi_t^T Lambda^{-1} phi_t for every held-out row.
  const Var lam_inv_phi = tape.solve_psd(lam, tape.transpose(phi_h));
  const Var s = tape.row_sum(tape.hadamard(phi_h, tape.transpose(lam_inv_phi)));
  const Var one_plus_s = tape.add_scalar(s, 1.0);

  const Var resid = tape.sub(y_h, tape.matmul(phi_h, kbar));
  const Var mahal = tape.row_sum(
      tape.hadamard(tape.matmul(resid, tape.constant(noise.inverse())), resid));

  const Var per_point =
      tape.add(tape.scale(tape.log(one_plus_s), n_y), tape.divide(mahal, one_plus_s));
  return tape.scale(tape.sum(per_point), 1.0 / static_cast<double>(tau - ctx));
}

Var minibatch_loss(Tape& tape, const PriorLeaves& leaves, const NoiseModel& noise,
                   std::span<const LossTerm> batch, std::size_t horizon) {
  if (batch.empty()) throw std::invalid_argument("minibatch_loss: empty batch");
  Var total = task_loss(tape, leaves, noise, batch[0], horizon);
  for (std::size_t j = 1; j < batch.size(); ++j) {
    total = tape.add(total, task_loss(tape, leaves, noise, batch[j], horizon));
  }
  return tape.scale(total, 1.0 / static_cast<double>(batch.size()));
}

TrainableParams TrainableParams::from_prior(const PriorParams& prior) {
  TrainableParams p;
  p.kbar0 = prior.kbar0;
  p.l0_raw = prior.l0.triangularView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < p.l0_raw.rows(); ++i) {
    p.l0_raw(i, i) = autodiff::softplus_inverse(prior.l0(i, i));
  }
  p.net = prior.net_weights;
  return p;
}

void TrainableParams::to_prior(PriorParams& out) const {
  out.kbar0 = kbar0;
  Matrix l0 = l0_raw.triangularView<Eigen::StrictlyLower>();
  for (Eigen::Index i = 0; i < l0.rows(); ++i) l0(i, i) = autodiff::softplus(l0_raw(i, i));
  out.l0 = std::move(l0);
  out.net_weights = net;
}

std::vector<Matrix*> TrainableParams::tensors() {
  std::vector<Matrix*> out{&kbar0, &l0_raw};
  for (auto& layer : net.layers) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  return out;
}

std::vector<const Matrix*> TrainableParams::tensors() const {
  std::vector<const Matrix*> out{&kbar0, &l0_raw};
  for (const auto& layer : net.layers) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  }
  return out;
}

PriorParams initial_prior(const NetConfig& net_config, const NoiseModel& noise,
                          std::mt19937_64& rng) {
  PriorParams prior;
  prior.net_config = net_config;
  prior.net_weights = init_weights(net_config, rng);
  const auto n_phi = static_cast<Eigen::Index>(net_config.feature_dim);
  prior.kbar0 = Matrix::Zero(n_phi, noise.dim());
  prior.l0 = Matrix::Identity(n_phi, n_phi);
  prior.noise = noise;
  return prior;
}

LossAndGradient loss_and_gradient(const TrainableParams& params, const NoiseModel& noise,
                                  std::span<const LossTerm> batch, std::size_t horizon) {
  Tape tape;
  PriorLeaves leaves;
  leaves.kbar0 = tape.leaf(params.kbar0);
  const Var l0_raw = tape.leaf(params.l0_raw);
  leaves.l0 = tape.softplus_lower(l0_raw);
  leaves.net = register_leaves(tape, params.net);

  const Var loss = minibatch_loss(tape, leaves, noise, batch, horizon);
  tape.backward(loss);

  LossAndGradient out;
  out.loss = tape.value(loss)(0, 0);
  out.gradient.push_back(tape.grad(leaves.kbar0));
  out.gradient.push_back(tape.grad(l0_raw));
  for (std::size_t i = 0; i < leaves.net.w.size(); ++i) {
    out.gradient.push_back(tape.grad(leaves.net.w[i]));
    out.gradient.push_back(tape.grad(leaves.net.b[i]));
  }
  return out;
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

void AdamOptimizer::step(std::vector<Matrix*> params, const std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: gradient count");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseAbs2();
    params[i]->array() -=
        lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
  }
}

TrainResult train(const std::vector<TaskDataset>& corpus, const NetConfig& net_config,
                  const NoiseModel& noise, const MetaTrainConfig& config,
                  const std::vector<TaskDataset>& validation) {
  config.validate();
  net_config.validate();
  if (corpus.empty()) throw std::invalid_argument("train: corpus is empty");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const TaskDataset& task = corpus[i];
    task.validate();
    if (task.length() < config.horizon) {
      throw std::invalid_argument("train: task " + std::to_string(i) + " has " +
                                  std::to_string(task.length()) + " rows < horizon " +
                                  std::to_string(config.horizon));
    }
    if (task.input_dim() != net_config.input_dim ||
        static_cast<Eigen::Index>(task.output_dim()) != noise.dim()) {
      throw ShapeError("train: task " + std::to_string(i) + " dimensions do not match the model");
    }
  }

  std::mt19937_64 rng(config.seed);
  TrainResult result;
  result.prior = initial_prior(net_config, noise, rng);
  TrainableParams params = TrainableParams::from_prior(result.prior);
  AdamOptimizer adam(config.learning_rate, config.beta1, config.beta2, config.adam_epsilon);

  std::uniform_int_distribution<std::size_t> pick_task(0, corpus.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_context(0, config.horizon - 1);
  std::vector<LossTerm> batch(config.batch_size);
  result.report.loss.reserve(config.iterations);

  auto run_validation = [&](std::size_t iteration) {
    params.to_prior(result.prior);
    std::size_t max_ctx = 0;
    for (std::size_t c : config.eval_context_sizes) max_ctx = std::max(max_ctx, c);
    const auto rows = evaluate_alpaca(result.prior, validation, max_ctx, true, kMethodAlpaca);
    for (std::size_t c : config.eval_context_sizes) {
      result.report.validation.push_back({iteration, c, rows[c].nll_mean, rows[c].mse_mean});
    }
  };

  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (LossTerm& term : batch) {
      term.context = config.horizon_distribution == HorizonDistribution::kZero
                         ? 0
                         : pick_context(rng);
      term.task = &corpus[pick_task(rng)];
    }
    LossAndGradient lg = loss_and_gradient(params, noise, batch, config.horizon);
    bool finite = std::isfinite(lg.loss);
    for (const Matrix& g : lg.gradient) finite = finite && g.allFinite();
    if (!finite) {
      std::ostringstream msg;
      msg << "iteration " << it << ", loss " << lg.loss;
      throw NonFiniteLoss(msg.str());
    }
    result.report.loss.push_back(lg.loss);
    adam.step(params.tensors(), lg.gradient);

    if (config.eval_every > 0 && !validation.empty() && (it + 1) % config.eval_every == 0) {
      run_validation(it + 1);
    }
  }
  if (config.iterations > 0) params.to_prior(result.prior);
  return result;
}

}  // namespace alpaca
