#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "alpaca/evaluation.hpp"
#include "alpaca/gp.hpp"

namespace alpaca::cli {

struct GenerateOptions {
  std::string task = "sinusoid";
  std::size_t count = 1000;
  std::size_t length = 50;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainOptions {
  std::string corpus;
  std::string config;
  std::string out;
  std::string report;      // default: <out>.report.csv
  std::string validation;  // optional corpus for periodic validation
};

struct EvalOptions {
  std::string model;
  std::string corpus;
  std::size_t max_context = 10;
  std::size_t num_tasks = 100;
  std::vector<std::string> methods = {"alpaca"};
  double gp_lengthscale = 1.0;
  double gp_signal_var = 6.25;
  std::string out;
};

struct RolloutOptions {
  std::string model;
  double mass = 1.0;
  double length = 1.0;
  double theta0 = 1.0;
  double theta_dot0 = 0.0;
  std::size_t horizon = 50;
  std::size_t samples = 20;
  std::size_t context = 0;  // transitions simulated from the task
  std::string context_csv;  // alternative: explicit x..., y... rows
  std::uint64_t seed = 0;
  std::string out;
  std::string truth_out;
};

struct TimingOptionsCli {
  gp::TimingOptions probe;
  std::string out;
};

struct CalibrationOptions {
  std::string model;
  std::string corpus;
  std::size_t context = 5;
  std::size_t num_tasks = 100;
  double cov_scale = 1.0;
  std::string out;
};

// CSV schemas. Each file starts with a `# schema: <name>/<version>` line.
inline constexpr const char* kEvalSchema = "alpaca-eval/1";
inline constexpr const char* kTrainReportSchema = "alpaca-train-report/1";
inline constexpr const char* kValidationSchema = "alpaca-validation/1";
inline constexpr const char* kRolloutSchema = "alpaca-rollout/1";
inline constexpr const char* kTimingSchema = "alpaca-timing/1";
inline constexpr const char* kCalibrationSchema = "alpaca-calibration/1";

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);
void write_timing_csv(std::ostream& out, const std::vector<gp::TimingRow>& rows);

/// Reads a CSV whose header names columns x0..x{n_x-1}, y0..y{n_y-1}.
TaskDataset read_context_csv(const std::string& path, std::size_t n_x, std::size_t n_y);

void cmd_generate(const GenerateOptions& opts);
void cmd_train(const TrainOptions& opts, std::ostream& log);
std::vector<EvalRow> cmd_eval(const EvalOptions& opts);
std::vector<Matrix> cmd_rollout(const RolloutOptions& opts);
std::vector<gp::TimingRow> cmd_timing(const TimingOptionsCli& opts);
CalibrationResult cmd_calibration(const CalibrationOptions& opts);

/// Parses "task=...;key=value" corpus metadata; returns "" when absent.
std::string metadata_value(const std::string& metadata, const std::string& key);

}  // namespace alpaca::cli
