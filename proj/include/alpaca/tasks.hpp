#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "alpaca/linalg.hpp"

namespace alpaca {

/// One function draw: tau input/output pairs plus the latent parameters that
/// generated them (diagnostics only, never used for fitting).
struct TaskDataset {
  Matrix xs;  // tau x n_x
  Matrix ys;  // tau x n_y
  std::vector<double> latent;

  std::size_t length() const { return static_cast<std::size_t>(xs.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(xs.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(ys.cols()); }
  void validate() const;
};

namespace tasks {

inline constexpr double kInputLow = -5.0;
inline constexpr double kInputHigh = 5.0;
inline constexpr double kToyNoiseVar = 0.05;
inline constexpr double kPendulumNoiseVar = 0.001;

// ---- sinusoid: y = A sin(x + phase) -------------------------------------

struct SinusoidTask {
  double amplitude = 1.0;  // [0.1, 5.0]
  double phase = 0.0;      // [0, pi]
};

SinusoidTask sample_sinusoid_task(std::mt19937_64& rng);
double sinusoid_value(const SinusoidTask& task, double x);
TaskDataset sinusoid_dataset(const SinusoidTask& task, std::mt19937_64& rng,
                             std::size_t tau, double noise_var = kToyNoiseVar);
TaskDataset sample_sinusoid_dataset(std::mt19937_64& rng, std::size_t tau,
                                    double noise_var = kToyNoiseVar);

// ---- step: -1 left of s1, alternating at each switch, +1 right of s3 ------

struct StepTask {
  std::array<double, 3> switches{-1.0, 0.0, 1.0};  // sorted, in [-2.5, 2.5]
};

StepTask sample_step_task(std::mt19937_64& rng);
double step_value(const StepTask& task, double x);
TaskDataset step_dataset(const StepTask& task, std::mt19937_64& rng,
                         std::size_t tau, double noise_var = kToyNoiseVar);
TaskDataset sample_step_dataset(std::mt19937_64& rng, std::size_t tau,
                                double noise_var = kToyNoiseVar);

// ---- pendulum (gym Pendulum-v0 dynamics) ----------------------------------

inline constexpr double kGravity = 10.0;
inline constexpr double kPendulumDt = 0.05;
inline constexpr double kMaxSpeed = 8.0;

struct PendulumTask {
  double mass = 1.0;    // kg, [0.5, 1.5]
  double length = 1.0;  // m, [0.5, 1.5]
};

struct PendulumState {
  double theta = 0.0;      // rad, unwrapped
  double theta_dot = 0.0;  // rad/s
};

PendulumTask sample_pendulum_task(std::mt19937_64& rng);
PendulumState pendulum_step(const PendulumState& s, double torque,
                            const PendulumTask& task);
/// Open-loop (zero torque) rollout from a random initial state. Inputs are
/// (theta, theta_dot, u), targets the state delta plus N(0, noise_var I).
TaskDataset pendulum_dataset(const PendulumTask& task, std::mt19937_64& rng,
                             std::size_t tau, double noise_var = kPendulumNoiseVar);
TaskDataset pendulum_dataset_from(const PendulumTask& task,
                                  const PendulumState& initial, std::mt19937_64& rng,
                                  std::size_t tau, double noise_var = kPendulumNoiseVar);
TaskDataset sample_pendulum_dataset(std::mt19937_64& rng, std::size_t tau,
                                    double noise_var = kPendulumNoiseVar);

// ---- families -------------------------------------------------------------

enum class Family { kSinusoid, kStep, kPendulum };

Family parse_family(const std::string& name);
std::string family_name(Family family);
std::size_t family_input_dim(Family family);
std::size_t family_output_dim(Family family);
double family_noise_var(Family family);

TaskDataset sample_dataset(Family family, std::mt19937_64& rng, std::size_t tau);
std::vector<TaskDataset> generate_corpus(Family family, std::size_t count,
                                         std::size_t tau, std::uint64_t seed);

}  // namespace tasks
}  // namespace alpaca
