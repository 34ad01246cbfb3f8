#include "alpaca/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace alpaca {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

struct LineContext {
  std::size_t line;
  std::string key;
  std::string where() const {
    return "config line " + std::to_string(line) + " (" + key + ")";
  }
};

std::size_t parse_count(const std::string& v, const LineContext& ctx) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(ctx.where() + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& v, const LineContext& ctx) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ParseError(ctx.where() + ": expected a number, got '" + v + "'");
  }
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string real_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainingSetup parse_training_config(const std::string& text) {
  TrainingSetup setup;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineContext ctx{line_no, key};
    if (value.empty()) throw ParseError(ctx.where() + ": empty value");

    if (key == "hidden_dims") {
      setup.net.hidden_dims.clear();
      for (const auto& part : split(value, ',')) {
        setup.net.hidden_dims.push_back(parse_count(part, ctx));
      }
    } else if (key == "feature_dim") {
      setup.net.feature_dim = parse_count(value, ctx);
    } else if (key == "batch_size") {
      setup.train.batch_size = parse_count(value, ctx);
    } else if (key == "horizon") {
      setup.train.horizon = parse_count(value, ctx);
    } else if (key == "horizon_distribution") {
      if (value == "uniform") {
        setup.train.horizon_distribution = HorizonDistribution::kUniform;
      } else if (value == "zero") {
        setup.train.horizon_distribution = HorizonDistribution::kZero;
      } else {
        throw ParseError(ctx.where() + ": expected uniform or zero, got '" + value + "'");
      }
    } else if (key == "learning_rate") {
      setup.train.learning_rate = parse_real(value, ctx);
    } else if (key == "beta1") {
      setup.train.beta1 = parse_real(value, ctx);
    } else if (key == "beta2") {
      setup.train.beta2 = parse_real(value, ctx);
    } else if (key == "adam_epsilon") {
      setup.train.adam_epsilon = parse_real(value, ctx);
    } else if (key == "iterations") {
      setup.train.iterations = parse_count(value, ctx);
    } else if (key == "eval_every") {
      setup.train.eval_every = parse_count(value, ctx);
    } else if (key == "seed") {
      setup.train.seed = parse_count(value, ctx);
    } else if (key == "sigma_eps") {
      setup.sigma_eps.clear();
      for (const auto& part : split(value, ',')) setup.sigma_eps.push_back(parse_real(part, ctx));
    } else {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  try {
    setup.train.validate();
    NetConfig probe = setup.net;
    probe.input_dim = 1;
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return setup;
}

TrainingSetup load_training_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_training_config(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string canonical_config(const TrainingSetup& s) {
  std::ostringstream out;
  const MetaTrainConfig& t = s.train;
  out << "adam_epsilon = " << real_str(t.adam_epsilon) << "\n"
      << "batch_size = " << t.batch_size << "\n"
      << "beta1 = " << real_str(t.beta1) << "\n"
      << "beta2 = " << real_str(t.beta2) << "\n"
      << "eval_every = " << t.eval_every << "\n"
      << "feature_dim = " << s.net.feature_dim << "\n"
      << "hidden_dims = " << join(s.net.hidden_dims) << "\n"
      << "horizon = " << t.horizon << "\n"
      << "horizon_distribution = "
      << (t.horizon_distribution == HorizonDistribution::kZero ? "zero" : "uniform") << "\n"
      << "iterations = " << t.iterations << "\n"
      << "learning_rate = " << real_str(t.learning_rate) << "\n"
      << "seed = " << t.seed << "\n";
  if (!s.sigma_eps.empty()) {
    out << "sigma_eps = ";
    for (std::size_t i = 0; i < s.sigma_eps.size(); ++i) {
      out << (i ? "," : "") << real_str(s.sigma_eps[i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Matrix sigma_from_values(const std::vector<double>& values, std::size_t n_y) {
  const auto n = static_cast<Eigen::Index>(n_y);
  if (values.size() == n_y) {
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
    return m;
  }
  if (values.size() == n_y * n_y) {
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) m(r, c) = values[static_cast<std::size_t>(r * n + c)];
    }
    return m;
  }
  throw ParseError("sigma_eps needs " + std::to_string(n_y) + " or " +
                   std::to_string(n_y * n_y) + " values, got " +
                   std::to_string(values.size()));
}

}  // namespace alpaca
