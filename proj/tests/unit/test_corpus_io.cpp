#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <limits>

#include "alpaca/corpus_io.hpp"
#include "alpaca/errors.hpp"

using namespace alpaca;

namespace {

Corpus sample_corpus() {
  Corpus c;
  c.metadata = "task=pendulum;count=3";
  c.tasks = tasks::generate_corpus(tasks::Family::kPendulum, 3, 7, 5);
  // values with no short decimal form
  c.tasks[0].xs(0, 0) = 0.1 + 0.2;
  c.tasks[0].ys(0, 1) = std::numeric_limits<double>::denorm_min();
  return c;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  const Corpus c = sample_corpus();
  const std::string bytes = encode_corpus(c);
  const Corpus back = decode_corpus(bytes);
  CHECK(back.metadata == c.metadata);
  REQUIRE(back.tasks.size() == c.tasks.size());
  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    CHECK(bit_equal(back.tasks[i].xs, c.tasks[i].xs));
    CHECK(bit_equal(back.tasks[i].ys, c.tasks[i].ys));
    CHECK(back.tasks[i].latent == c.tasks[i].latent);
  }
  CHECK(encode_corpus(back) == bytes);
}

TEST_CASE("file round trip and empty corpus") {
  const auto dir = std::filesystem::temp_directory_path() / "alpaca_corpus_test";
  std::filesystem::create_directories(dir);
  const Corpus c = sample_corpus();
  save_corpus(dir / "c.bin", c);
  const Corpus back = load_corpus(dir / "c.bin");
  CHECK(bit_equal(back.tasks[2].ys, c.tasks[2].ys));

  save_corpus(dir / "empty.bin", Corpus{});
  const Corpus empty = load_corpus(dir / "empty.bin");
  CHECK(empty.tasks.empty());
  CHECK(empty.metadata.empty());
  CHECK_THROWS_AS(load_corpus(dir / "missing.bin"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupted input names the failing record") {
  const Corpus c = sample_corpus();
  const std::string good = encode_corpus(c);
  const std::size_t header = 8 + 4 + 4 + c.metadata.size() + 8;
  const std::size_t record = 4 * 4 + 8 + 8 * (7 * 3 + 7 * 2 + 2);

  std::string bad_tag = good;
  bad_tag[header + record] = 'X';
  try {
    decode_corpus(bad_tag);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }

  std::string nan_value = good;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(&nan_value[header + 2 * record + 24], &nan, sizeof nan);
  try {
    decode_corpus(nan_value);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("record 2") != std::string::npos);
  }

  const std::string truncated = good.substr(0, good.size() - 5);
  try {
    decode_corpus(truncated);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("record 2") != std::string::npos);
  }

  CHECK_THROWS_AS(decode_corpus("NOTACORPUS"), ParseError);
  CHECK_THROWS_AS(decode_corpus(good + "x"), ParseError);
}
