#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "alpaca/bayes_linear.hpp"

namespace alpaca {

inline constexpr int kModelFormatVersion = 1;

struct ModelMetadata {
  std::string method = "alpaca";  // or "alpaca-no-meta"
  std::string task;               // generator family, if known
  std::uint64_t seed = 0;
  std::string config_hash;        // FNV-1a of the canonical training config
  std::uint64_t iterations = 0;
};

struct Model {
  PriorParams prior;
  ModelMetadata metadata;
};

/// JSON document; doubles are written in shortest round-trip form so a
/// save/load cycle is lossless.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace alpaca
