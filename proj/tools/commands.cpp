#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "alpaca/config.hpp"
#include "alpaca/corpus_io.hpp"
#include "alpaca/meta_trainer.hpp"
#include "alpaca/model_io.hpp"
#include "alpaca/tasks.hpp"

namespace alpaca::cli {
namespace {

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw std::invalid_argument("missing --out path");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

std::vector<TaskDataset> first_tasks(std::vector<TaskDataset> tasks, std::size_t limit) {
  if (limit > 0 && tasks.size() > limit) tasks.resize(limit);
  return tasks;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::string metadata_value(const std::string& metadata, const std::string& key) {
  std::istringstream in(metadata);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq != std::string::npos && item.substr(0, eq) == key) return item.substr(eq + 1);
  }
  return "";
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "# schema: " << kEvalSchema << "\n"
      << "method,context_size,nll_mean,nll_stderr,mse_mean,mse_stderr,pred_var_mean\n";
  for (const EvalRow& r : rows) {
    out << r.method << ',' << r.context_size << ',' << r.nll_mean << ',' << r.nll_stderr
        << ',' << r.mse_mean << ',' << r.mse_stderr << ',' << r.pred_var_mean << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<gp::TimingRow>& rows) {
  out << "# schema: " << kTimingSchema << "\n"
      << "method,context_size,num_queries,condition_seconds,predict_seconds,total_seconds\n";
  for (const gp::TimingRow& r : rows) {
    out << r.method << ',' << r.context_size << ',' << r.num_queries << ','
        << r.condition_seconds << ',' << r.predict_seconds << ',' << r.total_seconds << '\n';
  }
}

TaskDataset read_context_csv(const std::string& path, std::size_t n_x, std::size_t n_y) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open context file " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (header.empty()) {
      header = cells;
      if (header.size() != n_x + n_y) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(n_x + n_y) + " columns (x0.., y0..), got " +
                         std::to_string(header.size()));
      }
      for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string want = i < n_x ? "x" + std::to_string(i) : "y" + std::to_string(i - n_x);
        if (header[i] != want) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": column " +
                           std::to_string(i) + " should be '" + want + "', got '" +
                           header[i] + "'");
        }
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " values, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw ParseError(path + ": missing header");
  TaskDataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.xs.resize(n, static_cast<Eigen::Index>(n_x));
  data.ys.resize(n, static_cast<Eigen::Index>(n_y));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < n_x; ++c) data.xs(r, static_cast<Eigen::Index>(c)) = row[c];
    for (std::size_t c = 0; c < n_y; ++c) data.ys(r, static_cast<Eigen::Index>(c)) = row[n_x + c];
  }
  return data;
}

void cmd_generate(const GenerateOptions& opts) {
  const tasks::Family family = tasks::parse_family(opts.task);
  if (opts.length < 1) throw std::invalid_argument("--length must be >= 1");
  Corpus corpus;
  std::ostringstream meta;
  meta << "task=" << tasks::family_name(family) << ";count=" << opts.count
       << ";length=" << opts.length << ";seed=" << opts.seed
       << ";noise_var=" << tasks::family_noise_var(family);
  corpus.metadata = meta.str();
  corpus.tasks = tasks::generate_corpus(family, opts.count, opts.length, opts.seed);
  if (opts.out.empty()) throw std::invalid_argument("missing --out path");
  save_corpus(opts.out, corpus);
}

void cmd_train(const TrainOptions& opts, std::ostream& log) {
  const Corpus corpus = load_corpus(opts.corpus);
  if (corpus.tasks.empty()) throw std::invalid_argument("training corpus is empty");
  TrainingSetup setup = load_training_config(opts.config);
  const TaskDataset& first = corpus.tasks.front();
  setup.net.input_dim = first.input_dim();
  const std::size_t n_y = first.output_dim();

  const std::string task = metadata_value(corpus.metadata, "task");
  std::vector<double> sigma_values = setup.sigma_eps;
  if (sigma_values.empty()) {
    if (task.empty()) {
      throw std::invalid_argument("config has no sigma_eps and the corpus names no task family");
    }
    sigma_values.assign(n_y, tasks::family_noise_var(tasks::parse_family(task)));
  }
  const NoiseModel noise(sigma_from_values(sigma_values, n_y));

  std::vector<TaskDataset> validation;
  if (!opts.validation.empty()) validation = load_corpus(opts.validation).tasks;

  log << "training on " << corpus.tasks.size() << " tasks for "
      << setup.train.iterations << " iterations\n";
  const TrainResult result = train(corpus.tasks, setup.net, noise, setup.train, validation);

  Model model;
  model.prior = result.prior;
  model.metadata.method = setup.train.horizon_distribution == HorizonDistribution::kZero
                              ? kMethodNoMeta
                              : kMethodAlpaca;
  model.metadata.task = task;
  model.metadata.seed = setup.train.seed;
  model.metadata.config_hash = fnv1a_hex(canonical_config(setup));
  model.metadata.iterations = setup.train.iterations;
  if (opts.out.empty()) throw std::invalid_argument("missing --out path");
  save_model(opts.out, model);

  std::ofstream report = open_out(opts.report.empty() ? opts.out + ".report.csv" : opts.report);
  report << "# schema: " << kTrainReportSchema << "\n" << "iteration,loss\n";
  for (std::size_t i = 0; i < result.report.loss.size(); ++i) {
    report << i << ',' << result.report.loss[i] << '\n';
  }
  if (!result.report.validation.empty()) {
    std::ofstream val = open_out(opts.out + ".validation.csv");
    val << "# schema: " << kValidationSchema << "\n" << "iteration,context_size,nll,mse\n";
    for (const ValidationPoint& v : result.report.validation) {
      val << v.iteration << ',' << v.context_size << ',' << v.nll << ',' << v.mse << '\n';
    }
  }
  if (!result.report.loss.empty()) log << "final loss " << result.report.loss.back() << "\n";
}

std::vector<EvalRow> cmd_eval(const EvalOptions& opts) {
  const Model model = load_model(opts.model);
  const std::vector<TaskDataset> test = first_tasks(load_corpus(opts.corpus).tasks, opts.num_tasks);
  std::vector<EvalRow> rows;
  for (const std::string& method : opts.methods) {
    std::vector<EvalRow> part;
    if (method == kMethodAlpaca || method == kMethodNoMeta) {
      // The tag follows how the model was trained.
      part = evaluate_alpaca(model.prior, test, opts.max_context, true, model.metadata.method);
    } else if (method == kMethodNoUpdate) {
      part = evaluate_alpaca(model.prior, test, opts.max_context, false, kMethodNoUpdate);
    } else if (method == kMethodGp) {
      gp::SEKernelParams params;
      params.lengthscale = opts.gp_lengthscale;
      params.signal_var = opts.gp_signal_var;
      params.noise_var.clear();
      for (Eigen::Index d = 0; d < model.prior.noise.dim(); ++d) {
        params.noise_var.push_back(model.prior.noise.covariance()(d, d));
      }
      part = evaluate_gp(params, test, opts.max_context);
    } else {
      throw std::invalid_argument("unknown method '" + method +
                                  "' (expected alpaca, alpaca-no-update or gp)");
    }
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::ofstream out = open_out(opts.out);
  write_eval_csv(out, rows);
  return rows;
}

std::vector<Matrix> cmd_rollout(const RolloutOptions& opts) {
  const Model model = load_model(opts.model);
  const PriorParams& prior = model.prior;
  if (prior.output_dim() != 2 || prior.net_config.input_dim < 2) {
    throw ShapeError("rollout needs a pendulum model (2 outputs, >= 2 inputs)");
  }
  std::mt19937_64 rng(opts.seed);
  const tasks::PendulumTask task{opts.mass, opts.length};

  PosteriorState state = init_posterior(prior);
  if (!opts.context_csv.empty()) {
    const TaskDataset ctx =
        read_context_csv(opts.context_csv, prior.net_config.input_dim, 2);
    state = condition_on(prior, ctx, ctx.length());
  } else if (opts.context > 0) {
    const TaskDataset ctx = tasks::pendulum_dataset(task, rng, opts.context);
    state = condition_on(prior, ctx, ctx.length());
  }

  const Vector initial = Eigen::Vector2d(opts.theta0, opts.theta_dot0);
  const std::vector<Matrix> rollouts =
      sample_rollouts(prior, state, initial, opts.horizon, opts.samples, rng);

  std::ofstream out = open_out(opts.out);
  out << "# schema: " << kRolloutSchema << "\n" << "sample,step,theta,theta_dot\n";
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    for (Eigen::Index s = 0; s < rollouts[i].rows(); ++s) {
      out << i << ',' << s + 1 << ',' << rollouts[i](s, 0) << ',' << rollouts[i](s, 1) << '\n';
    }
  }
  if (!opts.truth_out.empty()) {
    std::ofstream truth = open_out(opts.truth_out);
    truth << "# schema: " << kRolloutSchema << "\n" << "sample,step,theta,theta_dot\n";
    tasks::PendulumState s{opts.theta0, opts.theta_dot0};
    for (std::size_t step = 1; step <= opts.horizon; ++step) {
      s = tasks::pendulum_step(s, 0.0, task);
      truth << "-1," << step << ',' << s.theta << ',' << s.theta_dot << '\n';
    }
  }
  return rollouts;
}

std::vector<gp::TimingRow> cmd_timing(const TimingOptionsCli& opts) {
  const std::vector<gp::TimingRow> rows = gp::timing_probe(opts.probe);
  std::ofstream out = open_out(opts.out);
  write_timing_csv(out, rows);
  return rows;
}

CalibrationResult cmd_calibration(const CalibrationOptions& opts) {
  const Model model = load_model(opts.model);
  const std::vector<TaskDataset> test = first_tasks(load_corpus(opts.corpus).tasks, opts.num_tasks);
  const CalibrationResult result =
      calibration_coverage(model.prior, test, opts.context, opts.cov_scale);
  std::ofstream out = open_out(opts.out);
  out << "# schema: " << kCalibrationSchema << "\n"
      << "context_size,cov_scale,count,inside,coverage\n"
      << result.context << ',' << opts.cov_scale << ',' << result.count << ','
      << result.inside << ',' << result.coverage << '\n';
  return result;
}

}  // namespace alpaca::cli
