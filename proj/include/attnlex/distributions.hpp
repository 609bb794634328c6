#pragma once

#include "attnlex/lexicon.hpp"
#include "attnlex/word_aggregation.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attnlex {

inline constexpr std::size_t kBins = 100;
inline constexpr double kBinWidth = 0.01;

/// Word-set families: sentiment, positive, negative, and per trial the random
/// neutral subset ("equal", same size as sentiment) and its complement ("other").
enum class SetKind { Sentiment, Positive, Negative, Equal, Other };

std::string_view set_tag(SetKind kind); // "s", "p", "n", "e", "o"
bool is_trial_set(SetKind kind);

/// Bin k covers [0.01k, 0.01(k+1)); the last bin is closed at 1.
/// Throws DataError for weights outside [0, 1].
std::size_t bin_index(double weight);

struct HistogramKey {
  std::size_t head = 0;
  SetKind set = SetKind::Sentiment;
  std::size_t trial = 0; // 0 for non-trial sets

  auto operator<=>(const HistogramKey&) const = default;
};

struct WeightHistogram {
  HistogramKey key;
  std::array<std::uint64_t, kBins> counts{};
  std::uint64_t total = 0;
  double weight_sum = 0.0; // exact sum of contributing weights

  void add(double weight);
  WeightHistogram& operator+=(const WeightHistogram& other);
  /// Mean of the raw sample weights; throws DataError when empty.
  double exact_mean() const;

  friend bool operator==(const WeightHistogram&, const WeightHistogram&) = default;
};

/// Bin-midpoint mean: sum of counts[k] * (k + 0.5) * 0.01 over total.
double histogram_mean(const WeightHistogram& hist);

struct TrialPlan {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> equal; // per trial, sorted
  std::vector<std::vector<std::string>> other; // complement in the neutral set, sorted

  std::size_t trials() const { return equal.size(); }
};

/// Draws `trials` subsets of the neutral set, each the size of the sentiment
/// set, uniformly without replacement. Deterministic in (seed, trials, neutral set).
TrialPlan plan_trials(const WordSetPartition& partition, std::size_t trials, std::uint64_t seed);

class HistogramSet {
public:
  HistogramSet(std::size_t heads, std::size_t trials);

  std::size_t heads() const { return heads_; }
  std::size_t trials() const { return trials_; }

  /// Throws DataError naming (head, set, trial) when absent.
  const WeightHistogram& at(std::size_t head, SetKind set, std::size_t trial = 0) const;
  WeightHistogram& slot(std::size_t head, SetKind set, std::size_t trial = 0);
  void erase(std::size_t head, SetKind set, std::size_t trial = 0);

  /// Ordered by (head, set, trial).
  const std::map<HistogramKey, WeightHistogram>& all() const { return hists_; }

  friend bool operator==(const HistogramSet&, const HistogramSet&) = default;

private:
  std::size_t heads_;
  std::size_t trials_;
  std::map<HistogramKey, WeightHistogram> hists_;
};

/// Every sample increments the histogram of each set containing its lemma.
/// Throws DataError for an empty complement set, a weight outside [0, 1], a
/// head outside [0, heads), or a lemma missing from the partition.
HistogramSet build_histograms(std::span<const WordAttentionSample> samples, const TrialPlan& plan,
                              const WordSetPartition& partition, std::size_t heads);

/// CSV with columns head,set,trial,bin_low,count; trial is empty for s/p/n.
void write_histogram_csv(const HistogramSet& hists, std::ostream& out);

} // namespace attnlex
