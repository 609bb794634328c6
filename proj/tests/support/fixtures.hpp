#pragma once

#include "attnlex/atnx.hpp"
#include "attnlex/lexicon.hpp"
#include "attnlex/rng.hpp"
#include "attnlex/verdict.hpp"

#include <array>
#include <cstdio>
#include <string>
#include <vector>

namespace fixture {

using Matrix = std::vector<std::vector<double>>;

inline Matrix random_stochastic(attnlex::Rng& rng, std::size_t T) {
  Matrix m(T, std::vector<double>(T));
  for (auto& row : m) {
    double s = 0;
    for (auto& v : row) {
      v = rng.exponential();
      s += v;
    }
    for (auto& v : row)
      v /= s;
  }
  return m;
}

inline std::vector<double> flatten(const Matrix& m) {
  std::vector<double> out;
  for (const auto& row : m)
    out.insert(out.end(), row.begin(), row.end());
  return out;
}

/// Random valid alignment: contiguous word runs of 1-3 tokens, with special
/// tokens sprinkled in (never inside a run). Returns word count via `words`.
inline std::vector<attnlex::WordId> random_alignment(attnlex::Rng& rng, std::size_t T,
                                                     std::size_t& words) {
  std::vector<attnlex::WordId> ids;
  words = 0;
  while (ids.size() < T) {
    if (rng.bernoulli(0.2)) {
      ids.emplace_back(std::nullopt);
      continue;
    }
    const auto run = std::min<std::size_t>(T - ids.size(), 1 + rng.below(3));
    for (std::size_t k = 0; k < run; ++k)
      ids.emplace_back(words);
    ++words;
  }
  return ids;
}

/// Finalized single-layer record from explicit per-head matrices.
inline attnlex::AttentionRecord make_record(std::string id, std::vector<std::string> tokens,
                                            std::vector<attnlex::WordId> word_ids,
                                            std::vector<std::string> words,
                                            const std::vector<Matrix>& heads) {
  attnlex::AttentionRecord r;
  r.text_id = std::move(id);
  r.tokens = std::move(tokens);
  r.word_ids = std::move(word_ids);
  r.words = std::move(words);
  r.shape = {1, heads.size(), r.tokens.size()};
  for (const auto& m : heads)
    for (const auto& row : m)
      for (double v : row)
        r.raw.push_back(static_cast<float>(v));
  attnlex::finalize_record(r);
  return r;
}

/// Random multi-layer record with random alignment and lemmas from `vocab`.
inline attnlex::AttentionRecord random_record(attnlex::Rng& rng, std::string id,
                                              std::size_t layers, std::size_t heads,
                                              std::size_t T, std::size_t vocab = 10) {
  attnlex::AttentionRecord r;
  r.text_id = std::move(id);
  std::size_t words = 0;
  r.word_ids = random_alignment(rng, T, words);
  for (std::size_t t = 0; t < T; ++t)
    r.tokens.push_back(r.word_ids[t] ? "tok" + std::to_string(t) : "[SPECIAL]");
  for (std::size_t w = 0; w < words; ++w)
    r.words.push_back("lemma" + std::to_string(rng.below(vocab)));
  if (rng.bernoulli(0.5))
    r.label = rng.bernoulli(0.5) ? "positive" : "negative";
  r.shape = {layers, heads, T};
  for (std::size_t k = 0; k < layers * heads; ++k)
    for (const auto& row : random_stochastic(rng, T))
      for (double v : row)
        r.raw.push_back(static_cast<float>(v));
  attnlex::finalize_record(r);
  return r;
}

/// Reference sign table for three corpora and twelve heads
/// (sent, pos, neg per corpus).
inline const std::array<std::array<const char*, 9>, 12> kReferenceSigns = {{
    {"++", "++", "-+", "+-", "+-", "--", "++", "++", "++"},
    {"++", "-+", "++", "++", "-+", "++", "++", "++", "-+"},
    {"-+", "++", "++", "-+", "++", "++", "++", "++", "++"},
    {"++", "++", "++", "++", "++", "++", "++", "++", "-+"},
    {"++", "++", "++", "++", "++", "++", "-+", "++", "-+"},
    {"++", "++", "++", "++", "++", "++", "++", "-+", "++"},
    {"-+", "++", "++", "-+", "++", "++", "++", "++", "++"},
    {"++", "++", "++", "++", "++", "++", "++", "++", "++"},
    {"-+", "++", "++", "-+", "++", "++", "++", "++", "-+"},
    {"++", "-+", "++", "++", "-+", "++", "++", "++", "++"},
    {"++", "++", "++", "++", "++", "++", "++", "++", "-+"},
    {"++", "-+", "-+", "++", "-+", "-+", "++", "-+", "-+"},
}};

inline const std::array<const char*, 3> kReferenceCorpora = {"ROMIP 2012 News",
                                                          "SentiRuEval-2015 Banks", "RuSentiment"};

inline std::vector<attnlex::CorpusVerdicts> reference_verdicts() {
  std::vector<attnlex::CorpusVerdicts> out;
  for (std::size_t c = 0; c < 3; ++c) {
    attnlex::CorpusVerdicts cv;
    cv.corpus = kReferenceCorpora[c];
    for (std::size_t h = 0; h < 12; ++h) {
      attnlex::HeadVerdict hv;
      hv.head = h;
      for (std::size_t s = 0; s < 3; ++s) {
        const std::string cell = kReferenceSigns[h][c * 3 + s];
        auto& v = hv.sets[s];
        v.available = true;
        v.significant = cell[0] == '+';
        v.greater = cell[1] == '+';
      }
      cv.heads.push_back(hv);
    }
    out.push_back(std::move(cv));
  }
  return out;
}

/// Nine source lexicons whose N=4 merge holds exactly `positive` positive and
/// `negative` negative lemmas. Kept lemmas appear in 4-9 sources with a strict
/// majority; distractors appear in 1-3 sources or tie 2-2 / 3-3.
inline std::vector<attnlex::SourceLexicon> nine_sources(std::size_t positive, std::size_t negative,
                                                        std::uint64_t seed = 2313) {
  using attnlex::Polarity;
  attnlex::Rng rng(seed);
  std::vector<attnlex::SourceLexicon> sources(9);
  for (std::size_t i = 0; i < 9; ++i)
    sources[i].name = "source" + std::to_string(i);

  auto place = [&](const std::string& lemma, std::size_t k, std::size_t pos_votes) {
    std::array<std::size_t, 9> order{0, 1, 2, 3, 4, 5, 6, 7, 8};
    for (std::size_t i = 0; i < 9; ++i)
      std::swap(order[i], order[i + rng.below(9 - i)]);
    for (std::size_t i = 0; i < k; ++i)
      sources[order[i]].entries[lemma] = i < pos_votes ? Polarity::Positive : Polarity::Negative;
  };
  char buf[32];
  for (std::size_t i = 0; i < positive; ++i) {
    std::snprintf(buf, sizeof buf, "pos%05zu", i);
    const auto k = static_cast<std::size_t>(rng.between(4, 9));
    place(buf, k, k / 2 + 1 + rng.below(k - k / 2)); // strict positive majority
  }
  for (std::size_t i = 0; i < negative; ++i) {
    std::snprintf(buf, sizeof buf, "neg%05zu", i);
    const auto k = static_cast<std::size_t>(rng.between(4, 9));
    place(buf, k, rng.below((k + 1) / 2)); // positive votes < k/2
  }
  for (std::size_t i = 0; i < 700; ++i) {
    std::snprintf(buf, sizeof buf, "rare%05zu", i);
    const auto k = static_cast<std::size_t>(rng.between(1, 3));
    place(buf, k, rng.below(k + 1));
  }
  for (std::size_t i = 0; i < 40; ++i) {
    std::snprintf(buf, sizeof buf, "tie%05zu", i);
    const std::size_t k = i % 2 ? 4 : 6;
    place(buf, k, k / 2);
  }
  return sources;
}

} // namespace fixture
