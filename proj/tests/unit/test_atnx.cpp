#include "attnlex/atnx.hpp"
#include "attnlex/error.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace attnlex;
namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    R"({"text_id":"t1","label":"positive","tokens":["[CLS]","good","[SEP]"],"word_ids":[null,0,null],)"
    R"("words":["good"],"attention":{"encoding":"json","shape":[1,1,3,3],)"
    R"("data":[[[[0.2,0.3,0.5],[0.1,0.6,0.3],[0.4,0.4,0.2]]]]}})";

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "attnlex_test_atnx";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_corpus(in, "fixture");
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("minimal well-formed record loads") {
  std::istringstream in(kMinimal);
  const auto corpus = read_corpus(in);
  REQUIRE(corpus.size() == 1);
  const auto& r = corpus.records()[0];
  CHECK(r.text_id == "t1");
  CHECK(r.label == std::optional<std::string>("positive"));
  CHECK(r.word_ids[0] == std::nullopt);
  CHECK(r.word_ids[1] == std::optional<std::size_t>(0));
  CHECK(corpus.layers() == 1);
  CHECK(corpus.heads() == 1);
}

TEST_CASE("payload of 8 floats for a 3x3 head is a shape mismatch") {
  std::string text = kMinimal;
  text.replace(text.find("[0.4,0.4,0.2]"), 13, "[0.4,0.6]");
  const auto msg = error_of(text);
  CHECK(msg.find("shape mismatch") != std::string::npos);
  CHECK(msg.find("'t1'") != std::string::npos);
}

TEST_CASE("row scaled to 0.95 is rejected with its coordinates") {
  std::string text = kMinimal;
  // row 1 [0.1,0.6,0.3] * 0.95
  text.replace(text.find("[0.1,0.6,0.3]"), 13, "[0.095,0.57,0.285]");
  const auto msg = error_of(text);
  CHECK(msg.find("row sum") != std::string::npos);
  CHECK(msg.find("layer 0, head 0, row 1") != std::string::npos);
  CHECK(msg.find("'t1'") != std::string::npos);
}

TEST_CASE("small row drift is renormalized to exact stochasticity") {
  std::string text = kMinimal;
  text.replace(text.find("[0.2,0.3,0.5]"), 13, "[0.2004,0.3,0.5]");
  std::istringstream in(text);
  const auto corpus = read_corpus(in);
  const auto m = corpus.records()[0].matrix(0, 0);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(m[3 * i] + m[3 * i + 1] + m[3 * i + 2] - 1.0) < 1e-12);
}

TEST_CASE("schema violations name the record and field") {
  SUBCASE("word index out of range") {
    std::string text = kMinimal;
    text.replace(text.find("[null,0,null]"), 13, "[null,1,null]");
    CHECK(error_of(text).find("word_ids") != std::string::npos);
  }
  SUBCASE("non-contiguous word run") {
    const char* t =
        R"({"text_id":"nc","tokens":["a","[X]","b"],"word_ids":[0,null,0],"words":["a"],)"
        R"("attention":{"encoding":"json","shape":[1,1,3,3],"data":[[1,0,0],[0,1,0],[0,0,1]]}})";
    const auto msg = error_of(t);
    CHECK(msg.find("contiguous") != std::string::npos);
    CHECK(msg.find("'nc'") != std::string::npos);
  }
  SUBCASE("words count disagrees with alignment") {
    std::string text = kMinimal;
    text.replace(text.find(R"(["good"])"), 8, R"(["good","extra"])");
    CHECK(error_of(text).find("'words'") != std::string::npos);
  }
  SUBCASE("tokens missing") {
    std::string text = kMinimal;
    text.replace(text.find("\"tokens\""), 8, "\"tokenz\"");
    CHECK(error_of(text).find("'tokens'") != std::string::npos);
  }
  SUBCASE("unknown encoding") {
    std::string text = kMinimal;
    text.replace(text.find("\"json\""), 6, "\"f16\"");
    CHECK(error_of(text).find("encoding") != std::string::npos);
  }
  SUBCASE("negative value") {
    std::string text = kMinimal;
    text.replace(text.find("[0.2,0.3,0.5]"), 13, "[-0.2,0.7,0.5]");
    CHECK(error_of(text).find("out of [0, 1]") != std::string::npos);
  }
  SUBCASE("duplicate text_id across lines") {
    CHECK(error_of(std::string(kMinimal) + "\n" + kMinimal).find("duplicate") != std::string::npos);
  }
  SUBCASE("malformed JSON reports the line") {
    CHECK(error_of(std::string(kMinimal) + "\n{oops").find("fixture:2") != std::string::npos);
  }
}

TEST_CASE("records with different head counts cannot share a corpus") {
  Rng rng(3);
  Corpus c;
  c.add(fixture::random_record(rng, "a", 1, 2, 4));
  CHECK_THROWS_AS(c.add(fixture::random_record(rng, "b", 1, 3, 4)), DataError);
}

TEST_CASE("write then read reproduces every field") {
  Rng rng(11);
  std::vector<AttentionRecord> recs = {fixture::random_record(rng, "first", 2, 3, 5),
                                       fixture::random_record(rng, "second", 2, 3, 7)};
  const auto path = temp_file("roundtrip.atnx");
  write_corpus(recs, path);
  const auto back = read_corpus(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = recs[i];
    const auto& b = back.records()[i];
    CHECK(a.text_id == b.text_id);
    CHECK(a.label == b.label);
    CHECK(a.tokens == b.tokens);
    CHECK(a.word_ids == b.word_ids);
    CHECK(a.words == b.words);
    CHECK(a.shape == b.shape);
    CHECK(std::memcmp(a.raw.data(), b.raw.data(), a.raw.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("round-trip property over random corpora, both encodings") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<AttentionRecord> recs;
    const auto layers = 1 + rng.below(3), heads = 1 + rng.below(4);
    const auto n = 1 + rng.below(4);
    for (std::size_t k = 0; k < n; ++k)
      recs.push_back(fixture::random_record(rng, "r" + std::to_string(k), layers, heads,
                                            1 + rng.below(9)));
    const auto enc = trial % 2 ? AttentionEncoding::Json : AttentionEncoding::F32Base64;
    const auto path = temp_file("prop.atnx");
    write_corpus(recs, path, enc);
    const auto back = read_corpus(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t k = 0; k < n; ++k) {
      const auto& b = back.records()[k];
      CHECK(b.word_ids == recs[k].word_ids);
      CHECK(b.raw == recs[k].raw); // float equality, elementwise
      const std::size_t T = b.shape.tokens;
      for (std::size_t row = 0; row < b.attention.size() / T; ++row) {
        double s = 0;
        for (std::size_t j = 0; j < T; ++j)
          s += b.attention[row * T + j];
        CHECK(std::abs(s - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("special token survives the round trip as null") {
  const auto rec = fixture::make_record(
      "s", {"[CLS]", "x"}, {std::nullopt, 0}, {"x"},
      {fixture::Matrix{{0.5, 0.5}, {0.25, 0.75}}});
  const auto path = temp_file("special.atnx");
  write_corpus(std::vector<AttentionRecord>{rec}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.find(R"("word_ids":[null,0])") != std::string::npos);
  CHECK(read_corpus(path).records()[0].word_ids[0] == std::nullopt);
}

TEST_CASE("duplicate text_id fails before any byte is written") {
  Rng rng(5);
  std::vector<AttentionRecord> recs = {fixture::random_record(rng, "dup", 1, 1, 3),
                                       fixture::random_record(rng, "dup", 1, 1, 3)};
  const auto path = temp_file("dup.atnx");
  fs::remove(path);
  CHECK_THROWS_AS(write_corpus(recs, path), DataError);
  CHECK_FALSE(fs::exists(path));
}

TEST_CASE("write to an unwritable path reports the path") {
  Rng rng(5);
  std::vector<AttentionRecord> recs = {fixture::random_record(rng, "a", 1, 1, 3)};
  try {
    write_corpus(recs, "/nonexistent-dir/x.atnx");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.atnx") != std::string::npos);
  }
}

TEST_CASE("base64 codec round-trips arbitrary bytes") {
  Rng rng(1);
  for (std::size_t n = 0; n < 40; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes)
      b = static_cast<std::uint8_t>(rng.below(256));
    CHECK(detail::base64_decode(detail::base64_encode(bytes)) == bytes);
  }
  CHECK(detail::base64_encode(std::vector<std::uint8_t>{'M', 'a', 'n'}) == "TWFu");
  CHECK(detail::base64_encode(std::vector<std::uint8_t>{'M'}) == "TQ==");
  CHECK_THROWS_AS(detail::base64_decode("TQ="), DataError);
  CHECK_THROWS_AS(detail::base64_decode("T!=="), DataError);
}
