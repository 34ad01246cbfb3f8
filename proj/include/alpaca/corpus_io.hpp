#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alpaca/tasks.hpp"

namespace alpaca {

/// Binary corpus file, all integers and doubles little-endian:
///
///   "ALPACORP"            8-byte magic
///   u32 version           currently 1
///   u32 meta_len, bytes   free-form generator metadata (UTF-8)
///   u64 record_count
///   record_count x {
///     u32 tag "TASK"  u32 n_x  u32 n_y  u32 n_latent  u64 tau
///     f64[tau*n_x] xs  f64[tau*n_y] ys  (row-major)
///     f64[n_latent] latent
///   }
inline constexpr std::uint32_t kCorpusVersion = 1;

struct Corpus {
  std::string metadata;
  std::vector<TaskDataset> tasks;
};

std::string encode_corpus(const Corpus& corpus);
/// Throws ParseError naming the record index on malformed input.
Corpus decode_corpus(const std::string& bytes);

void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace alpaca
