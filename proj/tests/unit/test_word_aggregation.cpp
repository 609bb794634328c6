#include "attnlex/error.hpp"
#include "attnlex/word_aggregation.hpp"

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace attnlex;

namespace {

const fixture::Matrix kWorked = {{0.2, 0.3, 0.5}, {0.1, 0.6, 0.3}, {0.4, 0.4, 0.2}};
const std::vector<WordId> kWorkedIds = {0, 1, 1};

} // namespace

TEST_CASE("identity alignment leaves the matrix unchanged") {
  Rng rng(4);
  const auto m = fixture::random_stochastic(rng, 5);
  const std::vector<WordId> ids = {0, 1, 2, 3, 4};
  const auto wm = collapse_tokens(fixture::flatten(m), ids);
  REQUIRE(wm.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(wm(i, j) == doctest::Approx(m[i][j]).epsilon(1e-15));
}

TEST_CASE("worked sum-then-average example") {
  const auto wm = collapse_tokens(fixture::flatten(kWorked), kWorkedIds);
  REQUIRE(wm.size() == 2);
  CHECK(std::abs(wm(0, 0) - 0.2) < 1e-12);
  CHECK(std::abs(wm(0, 1) - 0.8) < 1e-12);
  CHECK(std::abs(wm(1, 0) - 0.25) < 1e-12);
  CHECK(std::abs(wm(1, 1) - 0.75) < 1e-12);

  const auto ra = received_attention(wm);
  REQUIRE(ra.size() == 2);
  CHECK(std::abs(ra[0].weight - 0.225) < 1e-12);
  CHECK(std::abs(ra[1].weight - 0.775) < 1e-12);
}

TEST_CASE("alignment length must match the matrix") {
  const std::vector<WordId> ids = {0, 1};
  CHECK_THROWS_AS(collapse_tokens(fixture::flatten(kWorked), ids), DataError);
}

TEST_CASE("collapse preserves row sums and matches the naive oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t T = 1 + rng.below(8);
    std::size_t words = 0;
    const auto ids = fixture::random_alignment(rng, T, words);
    const auto m = fixture::random_stochastic(rng, T);
    const auto wm = collapse_tokens(fixture::flatten(m), ids);
    const auto naive = oracle::naive_collapse(m, ids);
    const auto rows_first = oracle::rows_first_collapse(m, ids);
    REQUIRE(wm.size() == naive.size());
    for (std::size_t a = 0; a < wm.size(); ++a) {
      double s = 0;
      for (std::size_t b = 0; b < wm.size(); ++b) {
        s += wm(a, b);
        CHECK(std::abs(wm(a, b) - naive[a][b]) < 1e-12);
        CHECK(std::abs(naive[a][b] - rows_first[a][b]) < 1e-12);
        CHECK(wm(a, b) >= 0.0);
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("received attention edge cases") {
  SUBCASE("uniform matrix gives 1/W everywhere") {
    WordAttentionMatrix wm;
    for (std::size_t k = 0; k < 4; ++k)
      wm.groups.push_back({k, 1, k});
    wm.values.assign(16, 0.25);
    for (const auto& ra : received_attention(wm))
      CHECK(ra.weight == doctest::Approx(0.25));
  }
  SUBCASE("single word text receives everything") {
    const std::vector<WordId> ids = {0};
    const auto ra = received_attention(collapse_tokens(std::vector<double>{1.0}, ids));
    REQUIRE(ra.size() == 1);
    CHECK(ra[0].weight == 1.0);
  }
  SUBCASE("special columns are not reported; special rows optional") {
    const fixture::Matrix m = {{0.5, 0.5}, {0.2, 0.8}};
    const std::vector<WordId> ids = {std::nullopt, 0};
    const auto wm = collapse_tokens(fixture::flatten(m), ids);
    const auto with = received_attention(wm, false);
    const auto without = received_attention(wm, true);
    REQUIRE(with.size() == 1);
    CHECK(with[0].weight == doctest::Approx(0.65));
    REQUIRE(without.size() == 1);
    CHECK(without[0].weight == doctest::Approx(0.8));
  }
}

TEST_CASE("aggregate_corpus counting and ordering") {
  Rng rng(8);
  Corpus corpus;
  // 3 words and 2 words, H = 2
  corpus.add(fixture::make_record(
      "a", {"[CLS]", "x", "y", "z"}, {std::nullopt, 0, 1, 2}, {"x", "y", "z"},
      {fixture::random_stochastic(rng, 4), fixture::random_stochastic(rng, 4)}));
  corpus.add(fixture::make_record("b", {"u", "v"}, {0, 1}, {"u", "v"},
                                  {fixture::random_stochastic(rng, 2),
                                   fixture::random_stochastic(rng, 2)}));
  const auto samples = aggregate_corpus(corpus, 0);
  CHECK(samples.size() == 10);
  CHECK(samples[0].record == 0);
  CHECK(samples[0].head == 0);
  CHECK(samples[0].lemma == "x");
  CHECK(samples[3].head == 1);
  CHECK(samples[6].record == 1);
  CHECK(samples[9].lemma == "v");

  CHECK_THROWS_AS(aggregate_corpus(corpus, 1), UsageError);
}

TEST_CASE("special-only text contributes no samples") {
  Corpus corpus;
  corpus.add(fixture::make_record("sp", {"[CLS]", "[SEP]"}, {std::nullopt, std::nullopt}, {},
                                  {fixture::Matrix{{0.5, 0.5}, {0.5, 0.5}}}));
  CHECK(aggregate_corpus(corpus, 0).empty());
}

TEST_CASE("aggregation composes the worked examples") {
  Corpus corpus;
  corpus.add(fixture::make_record("w", {"a", "b1", "b2"}, kWorkedIds, {"word0", "word1"},
                                  {kWorked}));
  const auto samples = aggregate_corpus(corpus, 0);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].lemma == "word0");
  // float32 storage of the fixture limits agreement to ~1e-7
  CHECK(samples[0].weight == doctest::Approx(0.225).epsilon(1e-6));
  CHECK(samples[1].weight == doctest::Approx(0.775).epsilon(1e-6));
}

TEST_CASE("sample count equals heads times words summed over records") {
  Rng rng(77);
  Corpus corpus;
  std::size_t expected = 0;
  for (int k = 0; k < 20; ++k) {
    auto rec = fixture::random_record(rng, "r" + std::to_string(k), 2, 3, 1 + rng.below(10));
    expected += 3 * rec.words.size();
    corpus.add(std::move(rec));
  }
  CHECK(aggregate_corpus(corpus, 1).size() == expected);
}
