#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "alpaca/bayes_linear.hpp"
#include "alpaca/corpus_io.hpp"
#include "alpaca/errors.hpp"
#include "alpaca/evaluation.hpp"
#include "alpaca/feature_net.hpp"
#include "alpaca/gp.hpp"
#include "alpaca/meta_trainer.hpp"
#include "alpaca/model_io.hpp"
#include "alpaca/tasks.hpp"

namespace py = pybind11;
using namespace alpaca;

namespace {

tasks::Family family_of(const std::string& name) { return tasks::parse_family(name); }

py::dict row_dict(const EvalRow& r) {
  py::dict d;
  d["method"] = r.method;
  d["context_size"] = r.context_size;
  d["nll_mean"] = r.nll_mean;
  d["nll_stderr"] = r.nll_stderr;
  d["mse_mean"] = r.mse_mean;
  d["mse_stderr"] = r.mse_stderr;
  d["pred_var_mean"] = r.pred_var_mean;
  return d;
}

py::list rows_list(const std::vector<EvalRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(row_dict(r));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Meta-learned Bayesian last-layer regression (C++ core).";

  auto base = py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ArithmeticError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", PyExc_ArithmeticError);
  (void)base;

  py::class_<NetConfig>(m, "NetConfig")
      .def(py::init<>())
      .def(py::init([](std::size_t input_dim, std::vector<std::size_t> hidden,
                       std::size_t feature_dim) {
             NetConfig c;
             c.input_dim = input_dim;
             c.hidden_dims = std::move(hidden);
             c.feature_dim = feature_dim;
             c.validate();
             return c;
           }),
           py::arg("input_dim") = 1, py::arg("hidden_dims") = std::vector<std::size_t>{128, 128},
           py::arg("feature_dim") = 16)
      .def_readwrite("input_dim", &NetConfig::input_dim)
      .def_readwrite("hidden_dims", &NetConfig::hidden_dims)
      .def_readwrite("feature_dim", &NetConfig::feature_dim)
      .def("widths", &NetConfig::widths);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<Matrix>(), py::arg("sigma_eps"))
      .def_static("isotropic", &NoiseModel::isotropic, py::arg("n_y"), py::arg("variance"))
      .def_property_readonly("covariance", &NoiseModel::covariance)
      .def_property_readonly("dim", &NoiseModel::dim);

  py::class_<PriorParams>(m, "PriorParams")
      .def_readonly("net_config", &PriorParams::net_config)
      .def_readwrite("kbar0", &PriorParams::kbar0)
      .def_readwrite("l0", &PriorParams::l0)
      .def_readwrite("noise", &PriorParams::noise)
      .def_property_readonly("feature_dim", &PriorParams::feature_dim)
      .def_property_readonly("output_dim", &PriorParams::output_dim)
      .def("precision", &PriorParams::precision)
      .def("features", [](const PriorParams& p, const Matrix& x) {
        return forward(p.net_weights, x);
      }, py::arg("x"), "Basis functions for each row of x.")
      .def("validate", &PriorParams::validate);

  m.def("initial_prior", [](const NetConfig& net, const NoiseModel& noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return initial_prior(net, noise, rng);
  }, py::arg("net_config"), py::arg("noise"), py::arg("seed") = 0);

  py::class_<PosteriorState>(m, "PosteriorState")
      .def_readonly("lam_inv", &PosteriorState::lam_inv)
      .def_readonly("q", &PosteriorState::q)
      .def_readonly("kbar", &PosteriorState::kbar)
      .def_readonly("t", &PosteriorState::t);

  py::class_<PredictiveDensity>(m, "PredictiveDensity")
      .def_readonly("mean", &PredictiveDensity::mean)
      .def_readonly("cov", &PredictiveDensity::cov);

  m.def("init_posterior", py::overload_cast<const Matrix&, const Matrix&>(&init_posterior),
        py::arg("kbar0"), py::arg("l0"));
  m.def("init_posterior", py::overload_cast<const PriorParams&>(&init_posterior), py::arg("prior"));
  m.def("batch_posterior",
        py::overload_cast<const Matrix&, const Matrix&, const Matrix&, const Matrix&>(&batch_posterior),
        py::arg("kbar0"), py::arg("l0"), py::arg("phi"), py::arg("y"));
  m.def("batch_posterior",
        py::overload_cast<const PriorParams&, const Matrix&, const Matrix&>(&batch_posterior),
        py::arg("prior"), py::arg("phi"), py::arg("y"));
  m.def("recursive_update", &recursive_update, py::arg("state"), py::arg("phi"), py::arg("y"));
  m.def("predict", &predict, py::arg("state"), py::arg("phi"), py::arg("noise"));
  m.def("feature_quadratic", &feature_quadratic, py::arg("state"), py::arg("phi"));
  m.def("sample_weights", [](const PosteriorState& s, const NoiseModel& noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_weights(s, noise, rng);
  }, py::arg("state"), py::arg("noise"), py::arg("seed") = 0);
  m.def("gaussian_nll", &gaussian_nll, py::arg("pred"), py::arg("y"));

  py::class_<TaskDataset>(m, "TaskDataset")
      .def(py::init([](Matrix xs, Matrix ys) {
             TaskDataset d{std::move(xs), std::move(ys), {}};
             d.validate();
             return d;
           }),
           py::arg("xs"), py::arg("ys"))
      .def_readwrite("xs", &TaskDataset::xs)
      .def_readwrite("ys", &TaskDataset::ys)
      .def_readwrite("latent", &TaskDataset::latent)
      .def("__len__", &TaskDataset::length);

  m.def("generate_corpus", [](const std::string& family, std::size_t count, std::size_t tau,
                              std::uint64_t seed) {
    return tasks::generate_corpus(family_of(family), count, tau, seed);
  }, py::arg("family"), py::arg("count"), py::arg("tau"), py::arg("seed") = 0);
  m.def("family_noise_var", [](const std::string& f) { return tasks::family_noise_var(family_of(f)); });
  m.def("pendulum_step", [](double theta, double theta_dot, double torque, double mass, double length) {
    const auto s = tasks::pendulum_step({theta, theta_dot}, torque, {mass, length});
    return py::make_tuple(s.theta, s.theta_dot);
  }, py::arg("theta"), py::arg("theta_dot"), py::arg("torque") = 0.0, py::arg("mass") = 1.0,
     py::arg("length") = 1.0);

  m.def("save_corpus", [](const std::filesystem::path& path, std::vector<TaskDataset> tasks,
                          std::string metadata) {
    save_corpus(path, Corpus{std::move(metadata), std::move(tasks)});
  }, py::arg("path"), py::arg("tasks"), py::arg("metadata") = "");
  m.def("load_corpus", [](const std::filesystem::path& path) {
    Corpus c = load_corpus(path);
    return py::make_tuple(std::move(c.tasks), c.metadata);
  }, py::arg("path"), "Returns (tasks, metadata).");

  py::enum_<HorizonDistribution>(m, "HorizonDistribution")
      .value("uniform", HorizonDistribution::kUniform)
      .value("zero", HorizonDistribution::kZero);

  py::class_<MetaTrainConfig>(m, "MetaTrainConfig")
      .def(py::init<>())
      .def_readwrite("batch_size", &MetaTrainConfig::batch_size)
      .def_readwrite("horizon", &MetaTrainConfig::horizon)
      .def_readwrite("horizon_distribution", &MetaTrainConfig::horizon_distribution)
      .def_readwrite("learning_rate", &MetaTrainConfig::learning_rate)
      .def_readwrite("beta1", &MetaTrainConfig::beta1)
      .def_readwrite("beta2", &MetaTrainConfig::beta2)
      .def_readwrite("adam_epsilon", &MetaTrainConfig::adam_epsilon)
      .def_readwrite("iterations", &MetaTrainConfig::iterations)
      .def_readwrite("eval_every", &MetaTrainConfig::eval_every)
      .def_readwrite("eval_context_sizes", &MetaTrainConfig::eval_context_sizes)
      .def_readwrite("seed", &MetaTrainConfig::seed);
  m.def("make_ablation_no_meta", &make_ablation_no_meta, py::arg("config"));

  m.def("train", [](const std::vector<TaskDataset>& corpus, const NetConfig& net,
                    const NoiseModel& noise, const MetaTrainConfig& config) {
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train(corpus, net, noise, config);
    }
    return py::make_tuple(std::move(r.prior), std::move(r.report.loss));
  }, py::arg("corpus"), py::arg("net_config"), py::arg("noise"), py::arg("config"),
     "Meta-train; returns (prior, per-iteration losses).");

  m.def("evaluate", [](const PriorParams& prior, const std::vector<TaskDataset>& tasks,
                       std::size_t max_context, bool online_updates) {
    return rows_list(evaluate_alpaca(prior, tasks, max_context, online_updates,
                                     online_updates ? kMethodAlpaca : kMethodNoUpdate));
  }, py::arg("prior"), py::arg("tasks"), py::arg("max_context") = 10,
     py::arg("online_updates") = true);
  m.def("evaluate_gp", [](const std::vector<TaskDataset>& tasks, std::size_t max_context,
                          double lengthscale, double signal_var, std::vector<double> noise_var) {
    gp::SEKernelParams p{lengthscale, signal_var, std::move(noise_var)};
    return rows_list(evaluate_gp(p, tasks, max_context));
  }, py::arg("tasks"), py::arg("max_context") = 10, py::arg("lengthscale") = 1.0,
     py::arg("signal_var") = 6.25, py::arg("noise_var") = std::vector<double>{0.05});
  m.def("calibration_coverage", [](const PriorParams& prior, const std::vector<TaskDataset>& tasks,
                                   std::size_t context, double cov_scale) {
    return calibration_coverage(prior, tasks, context, cov_scale).coverage;
  }, py::arg("prior"), py::arg("tasks"), py::arg("context"), py::arg("cov_scale") = 1.0);
  m.def("sample_from_prior", [](const PriorParams& prior, std::size_t tau, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_from_prior(prior, rng, tau);
  }, py::arg("prior"), py::arg("tau"), py::arg("seed") = 0);

  m.def("gp_predict", [](const Matrix& x, const Matrix& y, const Vector& q, double lengthscale,
                         double signal_var, std::vector<double> noise_var) {
    return gp::gp_predict(x, y, q, gp::SEKernelParams{lengthscale, signal_var, std::move(noise_var)});
  }, py::arg("x"), py::arg("y"), py::arg("x_query"), py::arg("lengthscale") = 1.0,
     py::arg("signal_var") = 6.25, py::arg("noise_var") = std::vector<double>{0.05});

  m.def("save_model", [](const std::filesystem::path& path, const PriorParams& prior,
                         const std::string& task) {
    Model model{prior, {}};
    model.metadata.task = task;
    save_model(path, model);
  }, py::arg("path"), py::arg("prior"), py::arg("task") = "");
  m.def("load_model", [](const std::filesystem::path& path) { return load_model(path).prior; },
        py::arg("path"));
}
