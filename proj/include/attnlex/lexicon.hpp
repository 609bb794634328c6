#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attnlex {

enum class Polarity { Positive, Negative };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view text); // throws DataError

struct SourceLexicon {
  std::string name;
  std::map<std::string, Polarity> entries;
};

struct SourceLoad {
  SourceLexicon lexicon;
  std::vector<std::string> dropped_multiword; // entries containing whitespace
  std::vector<std::string> duplicates;        // repeated lines with the same polarity
};

/// Reads `lemma<TAB>polarity` lines; `#` lines and blank lines are skipped.
/// A lemma listed twice with different polarities is an error.
SourceLoad read_source_lexicon(std::istream& in, std::string name);
SourceLoad read_source_lexicon(const std::filesystem::path& path);

struct MergedEntry {
  Polarity polarity = Polarity::Positive;
  std::size_t source_count = 0;
};

struct MergedLexicon {
  std::map<std::string, MergedEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct PolarityTie {
  std::string lemma;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

struct MergeResult {
  MergedLexicon lexicon;
  std::vector<PolarityTie> ties; // met the threshold but split evenly; excluded
};

/// Keeps lemmas found in at least `min_sources` sources, with the majority
/// polarity among those sources. Exact ties are excluded and reported.
MergeResult merge_lexicons(std::span<const SourceLexicon> sources, std::size_t min_sources);

/// `lemma<TAB>polarity<TAB>source_count` lines, sorted by lemma.
void write_merged_lexicon(const MergedLexicon& lexicon, std::ostream& out);
void write_merged_lexicon(const MergedLexicon& lexicon, const std::filesystem::path& path);
MergedLexicon read_merged_lexicon(std::istream& in, std::string_view source_name = "<stream>");
MergedLexicon read_merged_lexicon(const std::filesystem::path& path);

/// `lemma<TAB>pos_count<TAB>neg_count`.
void write_tie_report(std::span<const PolarityTie> ties, const std::filesystem::path& path);

struct WordSetPartition {
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string> sentiment; // positive ∪ negative
  std::set<std::string> neutral;
};

WordSetPartition partition_vocabulary(const std::set<std::string>& corpus_lemmas,
                                      const MergedLexicon& lexicon);

struct LexiconStats {
  std::size_t total = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  // Percentages in tenths of a percent, rounded half up (356 == 35.6%).
  long positive_tenths = 0;
  long negative_tenths = 0;

  double positive_percent() const { return positive_tenths / 10.0; }
  double negative_percent() const { return negative_tenths / 10.0; }
};

LexiconStats lexicon_stats(const MergedLexicon& lexicon);

/// "2313, 823 (35.6%), 1490 (64.4%)"
std::string format_stats_line(const LexiconStats& stats);

/// Table-style block: header plus one row.
std::string format_stats_table(const LexiconStats& stats, std::string_view name = "Merged");

} // namespace attnlex
