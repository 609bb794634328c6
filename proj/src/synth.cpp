#include "attnlex/synth.hpp"

#include "attnlex/error.hpp"
#include "attnlex/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace attnlex {

void validate(const SynthSpec& s) {
  if (s.vocabulary == 0)
    throw UsageError("vocabulary size must be >= 1");
  if (s.marked >= s.vocabulary)
    throw UsageError("marked word count must be smaller than the vocabulary size");
  if (s.texts == 0)
    throw UsageError("text count must be >= 1");
  if (s.min_tokens < 2)
    throw UsageError("minimum tokens per text must be >= 2");
  if (s.max_tokens < s.min_tokens)
    throw UsageError("maximum tokens per text must be >= the minimum");
  if (s.heads == 0 || s.layers == 0)
    throw UsageError("heads and layers must be >= 1");
  if (!(s.bias >= 0.0 && s.bias < 1.0))
    throw UsageError("bias must lie in [0, 1)");
  if (!(s.split_probability >= 0.0 && s.split_probability <= 1.0))
    throw UsageError("split probability must lie in [0, 1]");
  if (s.biased_heads)
    for (auto h : *s.biased_heads)
      if (h >= s.heads)
        throw UsageError("biased head " + std::to_string(h) + " out of range");
}

std::string vocabulary_lemma(std::size_t index, std::size_t vocabulary) {
  const int width = static_cast<int>(std::to_string(vocabulary - 1).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%0*zu", width, index);
  return buf;
}

SynthCorpus generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SynthCorpus out;

  for (std::size_t v = 0; v < spec.marked; ++v) {
    out.marked_lemmas.push_back(vocabulary_lemma(v, spec.vocabulary));
    out.lexicon.entries.emplace(out.marked_lemmas.back(), MergedEntry{Polarity::Positive, 1});
  }
  if (spec.bias > 0.0) {
    if (spec.biased_heads) {
      out.biased_heads = *spec.biased_heads;
      std::sort(out.biased_heads.begin(), out.biased_heads.end());
      out.biased_heads.erase(std::unique(out.biased_heads.begin(), out.biased_heads.end()),
                             out.biased_heads.end());
    } else {
      for (std::size_t h = 0; h < spec.heads; ++h)
        out.biased_heads.push_back(h);
    }
  }
  std::vector<bool> head_biased(spec.heads, false);
  for (auto h : out.biased_heads)
    head_biased[h] = true;

  const int id_width = static_cast<int>(std::to_string(spec.texts - 1).size());
  for (std::size_t c = 0; c < spec.texts; ++c) {
    AttentionRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%0*zu", id_width, c);
    rec.text_id = id;

    const auto T = static_cast<std::size_t>(static_cast<std::int64_t>(
        rng.between(static_cast<std::int64_t>(spec.min_tokens),
                    static_cast<std::int64_t>(spec.max_tokens))));
    std::vector<bool> marked_column(T, false);
    rec.tokens.push_back("[CLS]");
    rec.word_ids.emplace_back(std::nullopt);
    std::size_t budget = T - 2;
    while (budget > 0) {
      const auto v = static_cast<std::size_t>(rng.below(spec.vocabulary));
      std::size_t pieces = 1;
      if (rng.bernoulli(spec.split_probability))
        pieces = static_cast<std::size_t>(rng.between(2, 3));
      pieces = std::min(pieces, budget);
      const std::string lemma = vocabulary_lemma(v, spec.vocabulary);
      const std::size_t word = rec.words.size();
      rec.words.push_back(lemma);
      for (std::size_t k = 0; k < pieces; ++k) {
        marked_column[rec.tokens.size()] = v < spec.marked;
        rec.tokens.push_back(k == 0 ? lemma : "##" + std::to_string(k));
        rec.word_ids.emplace_back(word);
      }
      budget -= pieces;
    }
    rec.tokens.push_back("[SEP]");
    rec.word_ids.emplace_back(std::nullopt);

    rec.shape = {spec.layers, spec.heads, T};
    rec.raw.reserve(rec.shape.size());
    std::vector<double> row(T);
    for (std::size_t l = 0; l < spec.layers; ++l)
      for (std::size_t h = 0; h < spec.heads; ++h)
        for (std::size_t i = 0; i < T; ++i) {
          double sum = 0.0;
          for (auto& x : row) {
            x = rng.exponential();
            sum += x;
          }
          for (auto& x : row)
            x /= sum;
          if (head_biased[h]) {
            sum = 0.0;
            for (std::size_t j = 0; j < T; ++j) {
              if (marked_column[j])
                row[j] += spec.bias;
              sum += row[j];
            }
            for (auto& x : row)
              x /= sum;
          }
          for (double x : row)
            rec.raw.push_back(static_cast<float>(x));
        }
    finalize_record(rec);
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string manifest_json(const SynthSpec& spec, const SynthCorpus& corpus) {
  nlohmann::ordered_json spec_json;
  spec_json["vocabulary"] = spec.vocabulary;
  spec_json["marked"] = spec.marked;
  spec_json["texts"] = spec.texts;
  spec_json["min_tokens"] = spec.min_tokens;
  spec_json["max_tokens"] = spec.max_tokens;
  spec_json["heads"] = spec.heads;
  spec_json["layers"] = spec.layers;
  spec_json["bias"] = spec.bias;
  spec_json["split_probability"] = spec.split_probability;
  spec_json["seed"] = spec.seed;

  nlohmann::ordered_json m;
  m["biased_heads"] = corpus.biased_heads;
  m["bias"] = spec.bias;
  m["marked_lemmas"] = corpus.marked_lemmas;
  m["spec"] = std::move(spec_json);
  return m.dump(2) + "\n";
}

SynthPaths write_synth(const SynthSpec& spec, const SynthCorpus& corpus,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SynthPaths paths{dir / "corpus.atnx", dir / "lexicon.tsv", dir / "manifest.json"};
  write_corpus(corpus.records, paths.corpus);
  write_merged_lexicon(corpus.lexicon, paths.lexicon);
  std::ofstream out(paths.manifest, std::ios::trunc);
  if (!out)
    throw DataError("cannot open " + paths.manifest.string() + " for writing");
  out << manifest_json(spec, corpus);
  if (!out)
    throw DataError("write failure on " + paths.manifest.string());
  return paths;
}

} // namespace attnlex
