#include "alpaca/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace alpaca {

void TaskDataset::validate() const {
  if (xs.rows() != ys.rows()) {
    throw ShapeError("task dataset has " + std::to_string(xs.rows()) +
                     " inputs but " + std::to_string(ys.rows()) + " targets");
  }
  if (xs.rows() < 1) throw std::invalid_argument("task dataset is empty");
}

namespace tasks {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(std::mt19937_64& rng, double variance) {
  return std::sqrt(variance) * std::normal_distribution<double>(0.0, 1.0)(rng);
}

void check_length(std::size_t tau) {
  if (tau < 1) throw std::invalid_argument("task length must be >= 1");
}

template <typename F>
TaskDataset scalar_dataset(F&& f, std::mt19937_64& rng, std::size_t tau,
                           double noise_var) {
  check_length(tau);
  const auto n = static_cast<Eigen::Index>(tau);
  TaskDataset data;
  data.xs.resize(n, 1);
  data.ys.resize(n, 1);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double x = uniform(rng, kInputLow, kInputHigh);
    data.xs(t, 0) = x;
    data.ys(t, 0) = f(x) + gaussian(rng, noise_var);
  }
  return data;
}

}  // namespace

SinusoidTask sample_sinusoid_task(std::mt19937_64& rng) {
  SinusoidTask task;
  task.amplitude = uniform(rng, 0.1, 5.0);
  task.phase = uniform(rng, 0.0, std::numbers::pi);
  return task;
}

double sinusoid_value(const SinusoidTask& task, double x) {
  return task.amplitude * std::sin(x + task.phase);
}

TaskDataset sinusoid_dataset(const SinusoidTask& task, std::mt19937_64& rng,
                             std::size_t tau, double noise_var) {
  TaskDataset data = scalar_dataset(
      [&](double x) { return sinusoid_value(task, x); }, rng, tau, noise_var);
  data.latent = {task.amplitude, task.phase};
  return data;
}

TaskDataset sample_sinusoid_dataset(std::mt19937_64& rng, std::size_t tau,
                                    double noise_var) {
  const SinusoidTask task = sample_sinusoid_task(rng);
  return sinusoid_dataset(task, rng, tau, noise_var);
}

StepTask sample_step_task(std::mt19937_64& rng) {
  StepTask task;
  for (double& s : task.switches) s = uniform(rng, -2.5, 2.5);
  std::sort(task.switches.begin(), task.switches.end());
  return task;
}

double step_value(const StepTask& task, double x) {
  int crossed = 0;
  for (double s : task.switches) crossed += (s < x) ? 1 : 0;
  return (crossed % 2 == 0) ? -1.0 : 1.0;
}

TaskDataset step_dataset(const StepTask& task, std::mt19937_64& rng,
                         std::size_t tau, double noise_var) {
  TaskDataset data = scalar_dataset(
      [&](double x) { return step_value(task, x); }, rng, tau, noise_var);
  data.latent.assign(task.switches.begin(), task.switches.end());
  return data;
}

TaskDataset sample_step_dataset(std::mt19937_64& rng, std::size_t tau,
                                double noise_var) {
  const StepTask task = sample_step_task(rng);
  return step_dataset(task, rng, tau, noise_var);
}

PendulumTask sample_pendulum_task(std::mt19937_64& rng) {
  PendulumTask task;
  task.mass = uniform(rng, 0.5, 1.5);
  task.length = uniform(rng, 0.5, 1.5);
  return task;
}

PendulumState pendulum_step(const PendulumState& s, double torque,
                            const PendulumTask& task) {
  const double m = task.mass;
  const double l = task.length;
  const double accel = 3.0 * kGravity / (2.0 * l) * std::sin(s.theta) +
                       3.0 * torque / (m * l * l);
  PendulumState next;
  next.theta_dot = std::clamp(s.theta_dot + accel * kPendulumDt, -kMaxSpeed, kMaxSpeed);
  next.theta = s.theta + next.theta_dot * kPendulumDt;
  return next;
}

TaskDataset pendulum_dataset_from(const PendulumTask& task,
                                  const PendulumState& initial, std::mt19937_64& rng,
                                  std::size_t tau, double noise_var) {
  check_length(tau);
  const auto n = static_cast<Eigen::Index>(tau);
  TaskDataset data;
  data.xs.resize(n, 3);
  data.ys.resize(n, 2);
  PendulumState s = initial;
  for (Eigen::Index t = 0; t < n; ++t) {
    const PendulumState next = pendulum_step(s, 0.0, task);
    data.xs(t, 0) = s.theta;
    data.xs(t, 1) = s.theta_dot;
    data.xs(t, 2) = 0.0;
    data.ys(t, 0) = next.theta - s.theta + gaussian(rng, noise_var);
    data.ys(t, 1) = next.theta_dot - s.theta_dot + gaussian(rng, noise_var);
    s = next;
  }
  data.latent = {task.mass, task.length};
  return data;
}

TaskDataset pendulum_dataset(const PendulumTask& task, std::mt19937_64& rng,
                             std::size_t tau, double noise_var) {
  PendulumState initial;
  initial.theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  initial.theta_dot = uniform(rng, -kMaxSpeed, kMaxSpeed);
  return pendulum_dataset_from(task, initial, rng, tau, noise_var);
}

TaskDataset sample_pendulum_dataset(std::mt19937_64& rng, std::size_t tau,
                                    double noise_var) {
  const PendulumTask task = sample_pendulum_task(rng);
  return pendulum_dataset(task, rng, tau, noise_var);
}

Family parse_family(const std::string& name) {
  if (name == "sinusoid") return Family::kSinusoid;
  if (name == "step") return Family::kStep;
  if (name == "pendulum") return Family::kPendulum;
  throw std::invalid_argument("unknown task family '" + name +
                              "' (expected sinusoid, step or pendulum)");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::kSinusoid: return "sinusoid";
    case Family::kStep: return "step";
    case Family::kPendulum: return "pendulum";
  }
  return "unknown";
}

std::size_t family_input_dim(Family family) {
  return family == Family::kPendulum ? 3 : 1;
}

std::size_t family_output_dim(Family family) {
  return family == Family::kPendulum ? 2 : 1;
}

double family_noise_var(Family family) {
  return family == Family::kPendulum ? kPendulumNoiseVar : kToyNoiseVar;
}

TaskDataset sample_dataset(Family family, std::mt19937_64& rng, std::size_t tau) {
  switch (family) {
    case Family::kSinusoid: return sample_sinusoid_dataset(rng, tau);
    case Family::kStep: return sample_step_dataset(rng, tau);
    case Family::kPendulum: return sample_pendulum_dataset(rng, tau);
  }
  throw std::invalid_argument("unknown task family");
}

std::vector<TaskDataset> generate_corpus(Family family, std::size_t count,
                                         std::size_t tau, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TaskDataset> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) corpus.push_back(sample_dataset(family, rng, tau));
  return corpus;
}

}  // namespace tasks
}  // namespace alpaca
