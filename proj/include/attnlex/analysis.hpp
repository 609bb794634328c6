#pragma once

#include "attnlex/atnx.hpp"
#include "attnlex/distributions.hpp"
#include "attnlex/divergence.hpp"
#include "attnlex/lexicon.hpp"
#include "attnlex/verdict.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace attnlex {

inline constexpr std::size_t kDefaultTrials = 10;
inline constexpr std::size_t kDefaultMinSources = 4;
/// Below this many trials a two-sided p < 0.05 is unreachable.
inline constexpr std::size_t kMinUsefulTrials = 6;

struct AnalysisConfig {
  std::optional<std::size_t> layer; // last layer when unset
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 0;
  double alpha = kDefaultAlpha;
  double smoothing = kDefaultSmoothing;
  bool drop_special_rows = false;
  std::string corpus_name = "corpus";
};

struct AnalysisResult {
  std::size_t layer = 0;
  std::size_t sample_count = 0;
  WordSetPartition partition;
  TrialPlan plan;
  HistogramSet histograms{0, 0};
  std::vector<DistanceSet> distances;
  std::vector<HeadDistanceSummary> summaries;
  std::vector<HeadAttentionMeans> means;
  CorpusVerdicts verdicts;
  std::vector<std::string> warnings;
};

/// Lemmas of all non-special words in the corpus.
std::set<std::string> corpus_vocabulary(const Corpus& corpus);

/// Aggregation, partition, trial plan, histograms, distances and verdicts.
AnalysisResult analyze(const Corpus& corpus, const MergedLexicon& lexicon,
                       const AnalysisConfig& config);

} // namespace attnlex
