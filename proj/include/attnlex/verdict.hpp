#pragma once

#include "attnlex/distributions.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attnlex {

inline constexpr double kDefaultAlpha = 0.05;

/// KL distances of one (head, trial), all measured from the complement set
/// W_o. NaN marks a comparison set without samples (e.g. no negative words).
struct DistanceSet {
  std::size_t head = 0;
  std::size_t trial = 0;
  double os = 0.0; // D(P_o || P_s)
  double op = 0.0; // D(P_o || P_p)
  double on = 0.0; // D(P_o || P_n)
  double oe = 0.0; // D(P_o || P_e)
};

/// Exactly heads × trials entries, ordered by head then trial.
std::vector<DistanceSet> trial_distances(const HistogramSet& hists, double smoothing);

struct HeadDistanceSummary {
  std::size_t head = 0;
  double os = 0.0;
  double op = 0.0;
  double on = 0.0;
  double oe = 0.0;
};

/// Per-head trial means; throws DataError when heads have unequal trial counts.
std::vector<HeadDistanceSummary> average_distances(std::span<const DistanceSet> distances);

/// Exact (not binned) mean attention of the sentiment sets and of the neutral
/// subsets pooled over trials. NaN for a set without samples.
struct HeadAttentionMeans {
  std::size_t head = 0;
  double sent = 0.0;
  double pos = 0.0;
  double neg = 0.0;
  double equal = 0.0;
};

std::vector<HeadAttentionMeans> exact_means(const HistogramSet& hists);

enum class SentimentSet { Sent = 0, Pos = 1, Neg = 2 };
inline constexpr std::array<SentimentSet, 3> kSentimentSets{SentimentSet::Sent, SentimentSet::Pos,
                                                            SentimentSet::Neg};

std::string_view to_string(SentimentSet s);
SentimentSet parse_sentiment_set(std::string_view text);

struct SetVerdict {
  bool available = false;   // false when the set had no samples
  bool significant = false; // p < alpha
  bool greater = false;     // mean attention of the set exceeds the neutral subsets'
  double d_mean_set = 0.0;
  double d_mean_e = 0.0;
  double p_value = 1.0;
  double mean_attn_set = 0.0;
  double mean_attn_e = 0.0;

  /// "++", "+-", "-+", "--" or "NA".
  std::string signs() const;
  bool plus_plus() const { return available && significant && greater; }
};

struct HeadVerdict {
  std::size_t head = 0;
  std::array<SetVerdict, 3> sets; // indexed by SentimentSet

  const SetVerdict& operator[](SentimentSet s) const { return sets[static_cast<int>(s)]; }
  SetVerdict& operator[](SentimentSet s) { return sets[static_cast<int>(s)]; }
};

/// Paired Wilcoxon test per head and sentiment set over the trial distances
/// (D_o,x,i vs D_o,e,i); the mean sign compares exact mean attention weights.
/// Requires at least 2 trials. A head whose differences are all zero is
/// reported with p = 1.
std::vector<HeadVerdict> assemble_verdicts(std::span<const HeadDistanceSummary> summaries,
                                           std::span<const DistanceSet> distances,
                                           std::span<const HeadAttentionMeans> means,
                                           double alpha = kDefaultAlpha);

struct CorpusVerdicts {
  std::string corpus;
  std::vector<HeadVerdict> heads;
};

struct CorpusSummary {
  std::string corpus;
  std::array<std::size_t, 3> plus_plus{};
  std::array<std::size_t, 3> first_plus{};
  std::array<std::size_t, 3> available{};
};

struct TableSummary {
  std::vector<CorpusSummary> corpora;
  std::size_t cells = 0; // (head, set, corpus) cells with a verdict
  std::size_t first_plus = 0;
  std::size_t plus_plus = 0;

  double first_plus_percent() const;
  double plus_plus_percent() const;
};

TableSummary summarize_table(std::span<const CorpusVerdicts> verdicts);

/// Header, one row per (head, set), then `#` summary lines.
void write_verdict_tsv(const CorpusVerdicts& verdicts, std::ostream& out);

/// Reads one or more verdict TSV blocks; rows are grouped by the corpus
/// column in first-seen order.
std::vector<CorpusVerdicts> read_verdict_tsv(std::istream& in,
                                             std::string_view source_name = "<stream>");

/// Multi-corpus sign table with per-set ++ counts and pooled percentages.
/// Throws DataError when corpora have different head counts.
std::string render_table(std::span<const CorpusVerdicts> verdicts);

} // namespace attnlex
