#include "attnlex/lexicon.hpp"

#include "attnlex/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace attnlex {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos)
      break;
    start = tab + 1;
  }
  return cols;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \r\n");
  return s.substr(b, e - b + 1);
}

bool skip_line(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

long tenths_half_up(std::size_t part, std::size_t total) {
  if (total == 0)
    return 0;
  // round(1000 * part / total) with halves rounded up, in exact integer arithmetic
  return static_cast<long>((2000 * part + total) / (2 * total));
}

std::string tenths_text(long tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

} // namespace

std::string_view to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "positive")
    return Polarity::Positive;
  if (text == "negative")
    return Polarity::Negative;
  throw DataError("unknown polarity '" + std::string(text) + "' (expected positive or negative)");
}

SourceLoad read_source_lexicon(std::istream& in, std::string name) {
  SourceLoad out;
  out.lexicon.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line))
      continue;
    const auto cols = split_tabs(line);
    const std::string where = out.lexicon.name + ":" + std::to_string(line_no) + ": ";
    if (cols.size() != 2)
      throw DataError(where + "expected 2 tab-separated columns, found " +
                      std::to_string(cols.size()));
    const auto lemma = trim(cols[0]);
    if (lemma.empty())
      throw DataError(where + "empty lemma");
    Polarity pol;
    try {
      pol = parse_polarity(trim(cols[1]));
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    if (lemma.find_first_of(" \t") != std::string_view::npos) {
      out.dropped_multiword.emplace_back(lemma);
      continue;
    }
    auto [it, inserted] = out.lexicon.entries.emplace(std::string(lemma), pol);
    if (!inserted) {
      if (it->second != pol)
        throw DataError(where + "lemma '" + std::string(lemma) + "' listed with both polarities");
      out.duplicates.emplace_back(lemma);
    }
  }
  return out;
}

SourceLoad read_source_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open lexicon file " + path.string());
  return read_source_lexicon(in, path.string());
}

MergeResult merge_lexicons(std::span<const SourceLexicon> sources, std::size_t min_sources) {
  if (sources.empty())
    throw UsageError("merge_lexicons: at least one source lexicon is required");
  if (min_sources < 1)
    throw UsageError("merge_lexicons: minimum source count must be >= 1");
  if (min_sources > sources.size())
    throw UsageError("merge_lexicons: minimum source count " + std::to_string(min_sources) +
                     " exceeds the number of sources (" + std::to_string(sources.size()) + ")");

  struct Tally {
    std::size_t positive = 0;
    std::size_t negative = 0;
  };
  std::map<std::string, Tally> tally;
  for (const auto& src : sources)
    for (const auto& [lemma, pol] : src.entries) {
      auto& t = tally[lemma];
      (pol == Polarity::Positive ? t.positive : t.negative) += 1;
    }

  MergeResult result;
  for (const auto& [lemma, t] : tally) {
    const std::size_t n = t.positive + t.negative;
    if (n < min_sources)
      continue;
    if (t.positive == t.negative) {
      result.ties.push_back({lemma, t.positive, t.negative});
      continue;
    }
    result.lexicon.entries.emplace(
        lemma,
        MergedEntry{t.positive > t.negative ? Polarity::Positive : Polarity::Negative, n});
  }
  return result;
}

void write_merged_lexicon(const MergedLexicon& lexicon, std::ostream& out) {
  for (const auto& [lemma, e] : lexicon.entries)
    out << lemma << '\t' << to_string(e.polarity) << '\t' << e.source_count << '\n';
}

void write_merged_lexicon(const MergedLexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw DataError("cannot open " + path.string() + " for writing");
  write_merged_lexicon(lexicon, out);
  if (!out)
    throw DataError("write failure on " + path.string());
}

MergedLexicon read_merged_lexicon(std::istream& in, std::string_view source_name) {
  MergedLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line))
      continue;
    const auto cols = split_tabs(line);
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    if (cols.size() != 3)
      throw DataError(where + "expected 3 tab-separated columns (lemma, polarity, source_count)");
    MergedEntry e;
    try {
      e.polarity = parse_polarity(trim(cols[1]));
    } catch (const DataError& err) {
      throw DataError(where + err.what());
    }
    const std::string count(trim(cols[2]));
    std::size_t used = 0;
    try {
      e.source_count = std::stoul(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != count.size() || e.source_count == 0)
      throw DataError(where + "source_count must be a positive integer");
    const std::string lemma(trim(cols[0]));
    if (lemma.empty())
      throw DataError(where + "empty lemma");
    if (!lex.entries.emplace(lemma, e).second)
      throw DataError(where + "duplicate lemma '" + lemma + "'");
  }
  return lex;
}

MergedLexicon read_merged_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open lexicon file " + path.string());
  return read_merged_lexicon(in, path.string());
}

void write_tie_report(std::span<const PolarityTie> ties, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& t : ties)
    out << t.lemma << '\t' << t.positive << '\t' << t.negative << '\n';
  if (!out)
    throw DataError("write failure on " + path.string());
}

WordSetPartition partition_vocabulary(const std::set<std::string>& corpus_lemmas,
                                      const MergedLexicon& lexicon) {
  WordSetPartition p;
  for (const auto& lemma : corpus_lemmas) {
    const auto it = lexicon.entries.find(lemma);
    if (it == lexicon.entries.end()) {
      p.neutral.insert(lemma);
      continue;
    }
    (it->second.polarity == Polarity::Positive ? p.positive : p.negative).insert(lemma);
    p.sentiment.insert(lemma);
  }
  return p;
}

LexiconStats lexicon_stats(const MergedLexicon& lexicon) {
  LexiconStats s;
  for (const auto& [lemma, e] : lexicon.entries)
    (e.polarity == Polarity::Positive ? s.positive : s.negative) += 1;
  s.total = s.positive + s.negative;
  s.positive_tenths = tenths_half_up(s.positive, s.total);
  s.negative_tenths = tenths_half_up(s.negative, s.total);
  return s;
}

std::string format_stats_line(const LexiconStats& s) {
  return std::to_string(s.total) + ", " + std::to_string(s.positive) + " (" +
         tenths_text(s.positive_tenths) + "), " + std::to_string(s.negative) + " (" +
         tenths_text(s.negative_tenths) + ")";
}

std::string format_stats_table(const LexiconStats& s, std::string_view name) {
  std::ostringstream out;
  out << "Lexicon\tTotal\tPositive\t%\tNegative\t%\n"
      << name << '\t' << s.total << '\t' << s.positive << '\t' << tenths_text(s.positive_tenths)
      << '\t' << s.negative << '\t' << tenths_text(s.negative_tenths) << '\n';
  return out.str();
}

} // namespace attnlex
