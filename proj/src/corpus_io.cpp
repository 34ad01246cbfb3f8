#include "alpaca/corpus_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace alpaca {
namespace {

constexpr char kMagic[8] = {'A', 'L', 'P', 'A', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kRecordTag = 0x4B534154;  // "TASK" little-endian

// Guards against absurd allocations from corrupted length fields.
constexpr std::uint64_t kMaxRecordValues = std::uint64_t{1} << 32;

template <typename UInt>
void put_uint(std::string& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_double(std::string& out, double v) {
  put_uint(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename UInt>
  UInt uint(const std::string& context) {
    need(sizeof(UInt), context);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      v |= static_cast<UInt>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return v;
  }

  double real(const std::string& context) {
    return std::bit_cast<double>(uint<std::uint64_t>(context));
  }

  std::string raw(std::size_t n, const std::string& context) {
    need(n, context);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const std::string& context) const {
    if (remaining() < n) {
      throw ParseError(context + ": truncated (need " + std::to_string(n) +
                       " bytes at offset " + std::to_string(pos_) + ", have " +
                       std::to_string(remaining()) + ")");
    }
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

Matrix read_block(Reader& in, std::uint64_t rows, std::uint64_t cols,
                  const std::string& context) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = in.real(context);
      if (!std::isfinite(v)) {
        throw ParseError(context + ": non-finite value at row " + std::to_string(r) +
                         ", column " + std::to_string(c));
      }
      m(r, c) = v;
    }
  }
  return m;
}

}  // namespace

std::string encode_corpus(const Corpus& corpus) {
  std::string out(kMagic, sizeof(kMagic));
  put_uint<std::uint32_t>(out, kCorpusVersion);
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(corpus.metadata.size()));
  out += corpus.metadata;
  put_uint<std::uint64_t>(out, corpus.tasks.size());
  for (const TaskDataset& task : corpus.tasks) {
    task.validate();
    put_uint<std::uint32_t>(out, kRecordTag);
    put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(task.xs.cols()));
    put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(task.ys.cols()));
    put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(task.latent.size()));
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(task.xs.rows()));
    for (const Matrix* m : {&task.xs, &task.ys}) {
      for (Eigen::Index r = 0; r < m->rows(); ++r) {
        for (Eigen::Index c = 0; c < m->cols(); ++c) put_double(out, (*m)(r, c));
      }
    }
    for (double v : task.latent) put_double(out, v);
  }
  return out;
}

Corpus decode_corpus(const std::string& bytes) {
  Reader in(bytes);
  if (in.raw(sizeof(kMagic), "header") != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError("header: bad magic, not a corpus file");
  }
  const auto version = in.uint<std::uint32_t>("header");
  if (version != kCorpusVersion) {
    throw ParseError("header: unsupported corpus version " + std::to_string(version));
  }
  Corpus corpus;
  const auto meta_len = in.uint<std::uint32_t>("header");
  corpus.metadata = in.raw(meta_len, "header metadata");
  const auto count = in.uint<std::uint64_t>("header");
  // Each record occupies at least 24 bytes.
  if (count > in.remaining() / 24) {
    throw ParseError("header: record count " + std::to_string(count) +
                     " exceeds file size");
  }
  corpus.tasks.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string ctx = "record " + std::to_string(i);
    if (in.uint<std::uint32_t>(ctx) != kRecordTag) throw ParseError(ctx + ": bad record tag");
    const auto n_x = in.uint<std::uint32_t>(ctx);
    const auto n_y = in.uint<std::uint32_t>(ctx);
    const auto n_latent = in.uint<std::uint32_t>(ctx);
    const auto tau = in.uint<std::uint64_t>(ctx);
    if (tau < 1 || n_x < 1 || n_y < 1) {
      throw ParseError(ctx + ": invalid dimensions (tau=" + std::to_string(tau) +
                       ", n_x=" + std::to_string(n_x) + ", n_y=" + std::to_string(n_y) + ")");
    }
    const std::uint64_t values = tau * (n_x + n_y) + n_latent;
    if (tau > kMaxRecordValues || values > kMaxRecordValues ||
        values * 8 > in.remaining()) {
      throw ParseError(ctx + ": truncated or oversized payload");
    }
    TaskDataset task;
    task.xs = read_block(in, tau, n_x, ctx + " xs");
    task.ys = read_block(in, tau, n_y, ctx + " ys");
    task.latent.resize(n_latent);
    for (double& v : task.latent) v = in.real(ctx + " latent");
    corpus.tasks.push_back(std::move(task));
  }
  if (in.remaining() != 0) {
    throw ParseError("trailing " + std::to_string(in.remaining()) +
                     " bytes after record " + std::to_string(count));
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  const std::string bytes = encode_corpus(corpus);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_corpus(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace alpaca
