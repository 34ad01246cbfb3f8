// Command-line front end: corpus generation, meta-training, evaluation
// sweeps, posterior rollouts, timing and calibration.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace alpaca::cli;

  CLI::App app{"alpaca: meta-learned Bayesian regression"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a corpus of sampled tasks");
  generate->add_option("--task", gen.task, "sinusoid | step | pendulum")->required();
  generate->add_option("--count,-M", gen.count, "Number of tasks");
  generate->add_option("--length,--tau", gen.length, "Samples per task");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out)->required();

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Meta-train a model on a corpus");
  train->add_option("--corpus", tr.corpus)->required();
  train->add_option("--config", tr.config, "key = value training config")->required();
  train->add_option("--out", tr.out, "Model file (JSON)")->required();
  train->add_option("--report", tr.report, "Per-iteration loss CSV");
  train->add_option("--validation", tr.validation, "Corpus scored every eval_every steps");

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "NLL / MSE against context size");
  eval->add_option("--model", ev.model)->required();
  eval->add_option("--corpus", ev.corpus, "Test corpus")->required();
  eval->add_option("--max-context", ev.max_context);
  eval->add_option("--tasks", ev.num_tasks, "Number of test tasks used (0 = all)");
  eval->add_option("--method", ev.methods, "alpaca, alpaca-no-update, gp")->delimiter(',');
  eval->add_option("--gp-lengthscale", ev.gp_lengthscale);
  eval->add_option("--gp-signal-var", ev.gp_signal_var);
  eval->add_option("--out", ev.out)->required();

  RolloutOptions ro;
  auto* rollout = app.add_subcommand("rollout", "Posterior-sampled pendulum rollouts");
  rollout->add_option("--model", ro.model)->required();
  rollout->add_option("--mass", ro.mass);
  rollout->add_option("--length", ro.length);
  rollout->add_option("--theta0", ro.theta0);
  rollout->add_option("--theta-dot0", ro.theta_dot0);
  rollout->add_option("--horizon", ro.horizon);
  rollout->add_option("--samples", ro.samples);
  auto* ctx_count = rollout->add_option("--context", ro.context,
                                        "Transitions simulated from the task");
  rollout->add_option("--context-csv", ro.context_csv, "Context rows x0..,y0..")
      ->excludes(ctx_count);
  rollout->add_option("--seed", ro.seed);
  rollout->add_option("--out", ro.out)->required();
  rollout->add_option("--truth-out", ro.truth_out, "True noiseless trajectory");

  TimingOptionsCli tm;
  auto* timing = app.add_subcommand("timing", "Inference time: ALPaCA vs exact GP");
  timing->add_option("--grid", tm.probe.context_sizes, "Context sizes")->delimiter(',');
  timing->add_option("--queries", tm.probe.num_queries);
  timing->add_option("--input-dim", tm.probe.input_dim);
  timing->add_option("--output-dim", tm.probe.output_dim);
  timing->add_option("--features", tm.probe.feature_dim);
  timing->add_option("--repeats", tm.probe.repeats);
  timing->add_option("--seed", tm.probe.seed);
  timing->add_option("--out", tm.out)->required();

  CalibrationOptions ca;
  auto* calibration = app.add_subcommand("calibration", "Empirical 95% interval coverage");
  calibration->add_option("--model", ca.model)->required();
  calibration->add_option("--corpus", ca.corpus)->required();
  calibration->add_option("--context", ca.context);
  calibration->add_option("--tasks", ca.num_tasks, "Number of test tasks used (0 = all)");
  calibration->add_option("--cov-scale", ca.cov_scale, "Multiplies predictive covariance");
  calibration->add_option("--out", ca.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      cmd_generate(gen);
    } else if (*train) {
      cmd_train(tr, std::cerr);
    } else if (*eval) {
      cmd_eval(ev);
    } else if (*rollout) {
      cmd_rollout(ro);
    } else if (*timing) {
      cmd_timing(tm);
    } else if (*calibration) {
      const auto result = cmd_calibration(ca);
      std::cout << "coverage " << result.coverage << " over " << result.count << " outputs\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "alpaca: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
