#include "alpaca/feature_net.hpp"

#include <string>

namespace alpaca {

void NetConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("NetConfig: input_dim must be >= 1");
  if (feature_dim == 0) throw std::invalid_argument("NetConfig: feature_dim must be >= 1");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw std::invalid_argument("NetConfig: hidden widths must be >= 1");
  }
}

std::vector<std::size_t> NetConfig::widths() const {
  std::vector<std::size_t> out;
  out.reserve(hidden_dims.size() + 2);
  out.push_back(input_dim);
  out.insert(out.end(), hidden_dims.begin(), hidden_dims.end());
  out.push_back(feature_dim);
  return out;
}

std::size_t NetWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
  return n;
}

bool NetWeights::conforms_to(const NetConfig& config) const {
  const auto widths = config.widths();
  if (layers.size() + 1 != widths.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(widths[i]);
    const auto out = static_cast<Eigen::Index>(widths[i + 1]);
    if (layers[i].w.rows() != in || layers[i].w.cols() != out) return false;
    if (layers[i].b.rows() != 1 || layers[i].b.cols() != out) return false;
  }
  return true;
}

NetWeights init_weights(const NetConfig& config, std::mt19937_64& rng) {
  config.validate();
  const auto widths = config.widths();
  NetWeights weights;
  weights.layers.reserve(widths.size() - 1);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const double bound = glorot_bound(widths[i], widths[i + 1]);
    std::uniform_real_distribution<double> unif(-bound, bound);
    DenseLayer layer;
    layer.w.resize(static_cast<Eigen::Index>(widths[i]),
                   static_cast<Eigen::Index>(widths[i + 1]));
    // Row-major fill so the draw order does not depend on storage order.
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = unif(rng);
    }
    layer.b = Matrix::Zero(1, layer.w.cols());
    weights.layers.push_back(std::move(layer));
  }
  return weights;
}

Matrix forward(const NetWeights& weights, const Matrix& x) {
  if (weights.layers.empty()) throw std::invalid_argument("forward: network has no layers");
  if (x.cols() != weights.layers.front().w.rows()) {
    throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                     " columns, network expects " +
                     std::to_string(weights.layers.front().w.rows()));
  }
  Matrix h = x;
  for (const auto& layer : weights.layers) {
    Matrix pre = h * layer.w;
    pre.rowwise() += layer.b.row(0);
    h = pre.array().tanh();
  }
  return h;
}

NetVars register_leaves(autodiff::Tape& tape, const NetWeights& weights) {
  NetVars vars;
  for (const auto& layer : weights.layers) {
    vars.w.push_back(tape.leaf(layer.w));
    vars.b.push_back(tape.leaf(layer.b));
  }
  return vars;
}

autodiff::Var forward_on_tape(autodiff::Tape& tape, const NetVars& vars,
                              autodiff::Var x) {
  if (vars.w.empty()) throw std::invalid_argument("forward_on_tape: network has no layers");
  autodiff::Var h = x;
  for (std::size_t i = 0; i < vars.w.size(); ++i) {
    h = tape.tanh(tape.add_row_broadcast(tape.matmul(h, vars.w[i]), vars.b[i]));
  }
  return h;
}

}  // namespace alpaca
