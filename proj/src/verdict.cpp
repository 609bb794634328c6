#include "attnlex/verdict.hpp"

#include "attnlex/divergence.hpp"
#include "attnlex/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace attnlex {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::string_view kVerdictHeader =
    "corpus\thead\tset\tD_mean_set\tD_mean_e\tp_value\tmean_attn_set\tmean_attn_e\tverdict";

std::string g6(double v) {
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string percent(std::size_t part, std::size_t whole) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%",
                whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole));
  return buf;
}

double kl_or_nan(const WeightHistogram& p, const WeightHistogram& q, double smoothing) {
  if (p.total == 0 || q.total == 0)
    return kNaN;
  return kl_divergence(p, q, smoothing);
}

double mean_or_nan(const WeightHistogram& h) {
  return h.total == 0 ? kNaN : h.exact_mean();
}

double parse_real(std::string_view text, const std::string& where) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw DataError(where + "not a number: '" + s + "'");
  return v;
}

} // namespace

std::vector<DistanceSet> trial_distances(const HistogramSet& hists, double smoothing) {
  std::vector<DistanceSet> out;
  out.reserve(hists.heads() * hists.trials());
  for (std::size_t h = 0; h < hists.heads(); ++h) {
    const auto& s = hists.at(h, SetKind::Sentiment);
    const auto& p = hists.at(h, SetKind::Positive);
    const auto& n = hists.at(h, SetKind::Negative);
    for (std::size_t t = 0; t < hists.trials(); ++t) {
      const auto& o = hists.at(h, SetKind::Other, t);
      const auto& e = hists.at(h, SetKind::Equal, t);
      if (o.total == 0)
        throw DataError("no samples for the complement set (head " + std::to_string(h) +
                        ", trial " + std::to_string(t) + ")");
      out.push_back({h, t, kl_or_nan(o, s, smoothing), kl_or_nan(o, p, smoothing),
                     kl_or_nan(o, n, smoothing), kl_or_nan(o, e, smoothing)});
    }
  }
  return out;
}

std::vector<HeadDistanceSummary> average_distances(std::span<const DistanceSet> distances) {
  std::map<std::size_t, std::pair<HeadDistanceSummary, std::size_t>> acc;
  for (const auto& d : distances) {
    auto& [sum, count] = acc[d.head];
    sum.head = d.head;
    sum.os += d.os;
    sum.op += d.op;
    sum.on += d.on;
    sum.oe += d.oe;
    ++count;
  }
  std::vector<HeadDistanceSummary> out;
  std::size_t trials = 0;
  for (auto& [head, entry] : acc) {
    auto& [sum, count] = entry;
    if (trials == 0)
      trials = count;
    else if (count != trials)
      throw DataError("unequal trial counts across heads: head " + std::to_string(head) +
                      " has " + std::to_string(count) + ", expected " + std::to_string(trials));
    const double r = static_cast<double>(count);
    out.push_back({head, sum.os / r, sum.op / r, sum.on / r, sum.oe / r});
  }
  return out;
}

std::vector<HeadAttentionMeans> exact_means(const HistogramSet& hists) {
  std::vector<HeadAttentionMeans> out;
  for (std::size_t h = 0; h < hists.heads(); ++h) {
    WeightHistogram pooled;
    for (std::size_t t = 0; t < hists.trials(); ++t)
      pooled += hists.at(h, SetKind::Equal, t);
    out.push_back({h, mean_or_nan(hists.at(h, SetKind::Sentiment)),
                   mean_or_nan(hists.at(h, SetKind::Positive)),
                   mean_or_nan(hists.at(h, SetKind::Negative)), mean_or_nan(pooled)});
  }
  return out;
}

std::string_view to_string(SentimentSet s) {
  switch (s) {
  case SentimentSet::Sent:
    return "sent";
  case SentimentSet::Pos:
    return "pos";
  case SentimentSet::Neg:
    return "neg";
  }
  return "?";
}

SentimentSet parse_sentiment_set(std::string_view text) {
  for (auto s : kSentimentSets)
    if (to_string(s) == text)
      return s;
  throw DataError("unknown sentiment set '" + std::string(text) + "'");
}

std::string SetVerdict::signs() const {
  if (!available)
    return "NA";
  return std::string(significant ? "+" : "-") + (greater ? "+" : "-");
}

std::vector<HeadVerdict> assemble_verdicts(std::span<const HeadDistanceSummary> summaries,
                                           std::span<const DistanceSet> distances,
                                           std::span<const HeadAttentionMeans> means,
                                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw UsageError("alpha must lie in (0, 1)");

  std::map<std::size_t, std::vector<const DistanceSet*>> by_head;
  for (const auto& d : distances)
    by_head[d.head].push_back(&d);
  std::map<std::size_t, const HeadAttentionMeans*> means_by_head;
  for (const auto& m : means)
    means_by_head[m.head] = &m;

  std::vector<HeadVerdict> out;
  for (const auto& summary : summaries) {
    const auto dit = by_head.find(summary.head);
    const auto mit = means_by_head.find(summary.head);
    if (dit == by_head.end() || mit == means_by_head.end())
      throw DataError("missing distances or means for head " + std::to_string(summary.head));
    const auto& trials = dit->second;
    if (trials.size() < 2)
      throw UsageError("at least 2 trials are required for a significance test (head " +
                       std::to_string(summary.head) + " has " + std::to_string(trials.size()) +
                       ")");
    const HeadAttentionMeans& hm = *mit->second;

    HeadVerdict hv;
    hv.head = summary.head;
    for (auto set : kSentimentSets) {
      auto& v = hv[set];
      std::vector<double> xs, es;
      for (const auto* d : trials) {
        xs.push_back(set == SentimentSet::Sent ? d->os : set == SentimentSet::Pos ? d->op : d->on);
        es.push_back(d->oe);
      }
      v.d_mean_set = set == SentimentSet::Sent  ? summary.os
                     : set == SentimentSet::Pos ? summary.op
                                                : summary.on;
      v.d_mean_e = summary.oe;
      v.mean_attn_set = set == SentimentSet::Sent ? hm.sent : set == SentimentSet::Pos ? hm.pos
                                                                                        : hm.neg;
      v.mean_attn_e = hm.equal;
      v.available = !std::isnan(v.d_mean_set) && !std::isnan(v.mean_attn_set);
      if (!v.available) {
        v.p_value = kNaN;
        continue;
      }
      try {
        v.p_value = wilcoxon_signed_rank(xs, es).p_value;
      } catch (const DataError&) {
        v.p_value = 1.0; // every difference zero
      }
      v.significant = v.p_value < alpha;
      v.greater = v.mean_attn_set > v.mean_attn_e;
    }
    out.push_back(hv);
  }
  return out;
}

double TableSummary::first_plus_percent() const {
  return cells == 0 ? 0.0 : 100.0 * static_cast<double>(first_plus) / static_cast<double>(cells);
}

double TableSummary::plus_plus_percent() const {
  return cells == 0 ? 0.0 : 100.0 * static_cast<double>(plus_plus) / static_cast<double>(cells);
}

TableSummary summarize_table(std::span<const CorpusVerdicts> verdicts) {
  TableSummary t;
  for (const auto& cv : verdicts) {
    CorpusSummary cs;
    cs.corpus = cv.corpus;
    for (const auto& hv : cv.heads)
      for (auto set : kSentimentSets) {
        const auto& v = hv[set];
        if (!v.available)
          continue;
        const auto i = static_cast<std::size_t>(set);
        ++cs.available[i];
        cs.first_plus[i] += v.significant ? 1 : 0;
        cs.plus_plus[i] += v.plus_plus() ? 1 : 0;
      }
    for (std::size_t i = 0; i < 3; ++i) {
      t.cells += cs.available[i];
      t.first_plus += cs.first_plus[i];
      t.plus_plus += cs.plus_plus[i];
    }
    t.corpora.push_back(std::move(cs));
  }
  return t;
}

void write_verdict_tsv(const CorpusVerdicts& cv, std::ostream& out) {
  out << kVerdictHeader << '\n';
  for (const auto& hv : cv.heads)
    for (auto set : kSentimentSets) {
      const auto& v = hv[set];
      out << cv.corpus << '\t' << hv.head << '\t' << to_string(set) << '\t' << g6(v.d_mean_set)
          << '\t' << g6(v.d_mean_e) << '\t' << g6(v.p_value) << '\t' << g6(v.mean_attn_set)
          << '\t' << g6(v.mean_attn_e) << '\t' << v.signs() << '\n';
    }
  const CorpusVerdicts single[] = {cv};
  const auto summary = summarize_table(single);
  const auto& cs = summary.corpora.front();
  out << "# ++ heads: sent=" << cs.plus_plus[0] << " pos=" << cs.plus_plus[1]
      << " neg=" << cs.plus_plus[2] << '\n';
  out << "# first-sign +: " << percent(summary.first_plus, summary.cells) << " ("
      << summary.first_plus << "/" << summary.cells << ")\n";
  out << "# ++: " << percent(summary.plus_plus, summary.cells) << " (" << summary.plus_plus << "/"
      << summary.cells << ")\n";
}

std::vector<CorpusVerdicts> read_verdict_tsv(std::istream& in, std::string_view source_name) {
  std::vector<CorpusVerdicts> out;
  std::map<std::string, std::size_t> corpus_index;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> head_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line.front() == '#' || line == kVerdictHeader)
      continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');)
      cols.push_back(c);
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    if (cols.size() != 9)
      throw DataError(where + "expected 9 columns, found " + std::to_string(cols.size()));

    auto [cit, fresh] = corpus_index.try_emplace(cols[0], out.size());
    if (fresh)
      out.push_back({cols[0], {}});
    auto& cv = out[cit->second];
    const auto head = static_cast<std::size_t>(parse_real(cols[1], where));
    auto [hit, new_head] = head_index.try_emplace({cit->second, head}, cv.heads.size());
    if (new_head)
      cv.heads.push_back(HeadVerdict{head, {}});
    auto& v = cv.heads[hit->second][parse_sentiment_set(cols[2])];
    v.d_mean_set = parse_real(cols[3], where);
    v.d_mean_e = parse_real(cols[4], where);
    v.p_value = parse_real(cols[5], where);
    v.mean_attn_set = parse_real(cols[6], where);
    v.mean_attn_e = parse_real(cols[7], where);
    const std::string& signs = cols[8];
    if (signs == "NA") {
      v.available = false;
    } else if (signs.size() == 2 && (signs[0] == '+' || signs[0] == '-') &&
               (signs[1] == '+' || signs[1] == '-')) {
      v.available = true;
      v.significant = signs[0] == '+';
      v.greater = signs[1] == '+';
    } else {
      throw DataError(where + "bad verdict '" + signs + "'");
    }
  }
  return out;
}

std::string render_table(std::span<const CorpusVerdicts> verdicts) {
  if (verdicts.empty())
    throw DataError("no verdicts to render");
  const std::size_t heads = verdicts.front().heads.size();
  for (const auto& cv : verdicts)
    if (cv.heads.size() != heads)
      throw DataError("corpus '" + cv.corpus + "' has " + std::to_string(cv.heads.size()) +
                      " heads, expected " + std::to_string(heads));

  std::ostringstream out;
  out << "head";
  for (const auto& cv : verdicts)
    out << '\t' << cv.corpus << "\t\t";
  out << "\n";
  for (std::size_t c = 0; c < verdicts.size(); ++c)
    out << "\tsent\tpos\tneg";
  out << "\n";
  for (std::size_t i = 0; i < heads; ++i) {
    out << verdicts.front().heads[i].head;
    for (const auto& cv : verdicts)
      for (auto set : kSentimentSets)
        out << '\t' << cv.heads[i][set].signs();
    out << "\n";
  }
  const auto summary = summarize_table(verdicts);
  out << "++";
  for (const auto& cs : summary.corpora)
    for (std::size_t k = 0; k < 3; ++k)
      out << '\t' << cs.plus_plus[k];
  out << "\n";
  out << "first-sign +: " << percent(summary.first_plus, summary.cells) << " ("
      << summary.first_plus << "/" << summary.cells << ")\n";
  out << "++: " << percent(summary.plus_plus, summary.cells) << " (" << summary.plus_plus << "/"
      << summary.cells << ")\n";
  return out.str();
}

} // namespace attnlex
