#pragma once

#include "attnlex/atnx.hpp"
#include "attnlex/lexicon.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace attnlex {

/// Parameters of a synthetic corpus with a planted attention bias toward a
/// set of marked words.
struct SynthSpec {
  std::size_t vocabulary = 200;
  std::size_t marked = 20;
  std::size_t texts = 200;
  std::size_t min_tokens = 8;  // includes the two boundary special tokens
  std::size_t max_tokens = 24;
  std::size_t heads = 12;
  std::size_t layers = 1;
  double bias = 0.05;          // mass added to each marked-word column
  double split_probability = 0.3;
  std::uint64_t seed = 1;
  /// Heads receiving the bias; all heads when unset. Ignored when bias is 0.
  std::optional<std::vector<std::size_t>> biased_heads;
};

/// Throws UsageError when a parameter is out of range.
void validate(const SynthSpec& spec);

struct SynthCorpus {
  std::vector<AttentionRecord> records;
  MergedLexicon lexicon;                   // marked lemmas, all positive
  std::vector<std::string> marked_lemmas;
  std::vector<std::size_t> biased_heads;
};

/// Texts are uniform draws from the vocabulary between "[CLS]" and "[SEP]";
/// each word is split into 2-3 subword tokens with probability
/// `split_probability`. Attention rows are normalized standard exponentials;
/// on biased heads every marked-word column gets `bias` added before the row
/// is renormalized.
SynthCorpus generate(const SynthSpec& spec);

std::string vocabulary_lemma(std::size_t index, std::size_t vocabulary);

/// Manifest JSON: biased heads, bias, marked lemmas and the full spec.
std::string manifest_json(const SynthSpec& spec, const SynthCorpus& corpus);

struct SynthPaths {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path manifest;
};

/// Writes corpus.atnx, lexicon.tsv and manifest.json into `dir`.
SynthPaths write_synth(const SynthSpec& spec, const SynthCorpus& corpus,
                       const std::filesystem::path& dir);

} // namespace attnlex
