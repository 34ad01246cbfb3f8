#include "alpaca/model_io.hpp"

#include <fstream>
#include <iterator>

#include "json.hpp"

namespace alpaca {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError(what + ": data length does not match " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

}  // namespace

std::string model_to_json(const Model& model) {
  const PriorParams& p = model.prior;
  json layers = json::array();
  for (const DenseLayer& layer : p.net_weights.layers) {
    layers.push_back({{"w", matrix_to_json(layer.w)}, {"b", matrix_to_json(layer.b)}});
  }
  json doc = {
      {"format", "alpaca-model"},
      {"version", kModelFormatVersion},
      {"net",
       {{"input_dim", p.net_config.input_dim},
        {"hidden_dims", p.net_config.hidden_dims},
        {"feature_dim", p.net_config.feature_dim},
        {"activation", "tanh"}}},
      {"weights", std::move(layers)},
      {"kbar0", matrix_to_json(p.kbar0)},
      {"l0", matrix_to_json(p.l0)},
      {"sigma_eps", matrix_to_json(p.noise.covariance())},
      {"metadata",
       {{"method", model.metadata.method},
        {"task", model.metadata.task},
        {"seed", model.metadata.seed},
        {"config_hash", model.metadata.config_hash},
        {"iterations", model.metadata.iterations}}},
  };
  return doc.dump(1) + "\n";
}

Model model_from_json(const std::string& text) {
  Model model;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "alpaca-model") {
      throw ParseError("not an alpaca model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("unsupported model version " + std::to_string(version));
    }
    const json& net = doc.at("net");
    if (net.value("activation", "tanh") != "tanh") throw ParseError("only tanh networks are supported");
    PriorParams& p = model.prior;
    p.net_config.input_dim = net.at("input_dim").get<std::size_t>();
    p.net_config.hidden_dims = net.at("hidden_dims").get<std::vector<std::size_t>>();
    p.net_config.feature_dim = net.at("feature_dim").get<std::size_t>();
    const json& layers = doc.at("weights");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string tag = "weights[" + std::to_string(i) + "]";
      p.net_weights.layers.push_back({matrix_from_json(layers[i].at("w"), tag + ".w"),
                                      matrix_from_json(layers[i].at("b"), tag + ".b")});
    }
    p.kbar0 = matrix_from_json(doc.at("kbar0"), "kbar0");
    p.l0 = matrix_from_json(doc.at("l0"), "l0");
    p.noise = NoiseModel(matrix_from_json(doc.at("sigma_eps"), "sigma_eps"));
    if (doc.contains("metadata")) {
      const json& meta = doc.at("metadata");
      model.metadata.method = meta.value("method", std::string("alpaca"));
      model.metadata.task = meta.value("task", std::string());
      model.metadata.seed = meta.value("seed", std::uint64_t{0});
      model.metadata.config_hash = meta.value("config_hash", std::string());
      model.metadata.iterations = meta.value("iterations", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  try {
    model.prior.validate();
  } catch (const std::exception& e) {
    throw ParseError(std::string("model file is inconsistent: ") + e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << model_to_json(model);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return model_from_json(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace alpaca
