#include "attnlex/distributions.hpp"

#include "attnlex/error.hpp"
#include "attnlex/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace attnlex {

namespace {

// Aggregated weights can overshoot 1 by a few ulps.
constexpr double kWeightSlack = 1e-9;

std::string describe(const HistogramKey& k) {
  std::string s = "(head " + std::to_string(k.head) + ", set " + std::string(set_tag(k.set));
  if (is_trial_set(k.set))
    s += ", trial " + std::to_string(k.trial);
  return s + ")";
}

} // namespace

std::string_view set_tag(SetKind kind) {
  switch (kind) {
  case SetKind::Sentiment:
    return "s";
  case SetKind::Positive:
    return "p";
  case SetKind::Negative:
    return "n";
  case SetKind::Equal:
    return "e";
  case SetKind::Other:
    return "o";
  }
  return "?";
}

bool is_trial_set(SetKind kind) { return kind == SetKind::Equal || kind == SetKind::Other; }

std::size_t bin_index(double weight) {
  if (!(weight >= 0.0 && weight <= 1.0 + kWeightSlack))
    throw DataError("attention weight " + std::to_string(weight) + " outside [0, 1]");
  // Edges are the doubles k / 100.0; the quotient can land one bin off
  // (0.29 / 0.01 == 28.999...), so correct against the edges themselves.
  auto k = static_cast<long>(std::floor(weight / kBinWidth));
  if (weight >= static_cast<double>(k + 1) / static_cast<double>(kBins))
    ++k;
  else if (k > 0 && weight < static_cast<double>(k) / static_cast<double>(kBins))
    --k;
  return std::min(static_cast<std::size_t>(std::max(k, 0L)), kBins - 1);
}

void WeightHistogram::add(double weight) {
  ++counts[bin_index(weight)];
  ++total;
  weight_sum += weight;
}

WeightHistogram& WeightHistogram::operator+=(const WeightHistogram& other) {
  for (std::size_t k = 0; k < kBins; ++k)
    counts[k] += other.counts[k];
  total += other.total;
  weight_sum += other.weight_sum;
  return *this;
}

double WeightHistogram::exact_mean() const {
  if (total == 0)
    throw DataError("mean of empty histogram " + describe(key));
  return weight_sum / static_cast<double>(total);
}

double histogram_mean(const WeightHistogram& hist) {
  if (hist.total == 0)
    throw DataError("mean of empty histogram " + describe(hist.key));
  double s = 0.0;
  for (std::size_t k = 0; k < kBins; ++k)
    s += static_cast<double>(hist.counts[k]) * (static_cast<double>(k) + 0.5) * kBinWidth;
  return s / static_cast<double>(hist.total);
}

TrialPlan plan_trials(const WordSetPartition& partition, std::size_t trials, std::uint64_t seed) {
  if (trials == 0)
    throw UsageError("trial count must be >= 1");
  const std::size_t m = partition.sentiment.size();
  if (m == 0)
    throw DataError("no sentiment words in the corpus vocabulary");
  if (partition.neutral.size() < m)
    throw DataError("neutral vocabulary smaller than sentiment vocabulary (" +
                    std::to_string(partition.neutral.size()) + " < " + std::to_string(m) + ")");

  const std::vector<std::string> neutral(partition.neutral.begin(), partition.neutral.end());
  const std::size_t n = neutral.size();
  TrialPlan plan;
  plan.seed = seed;
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t k = 0; k < n; ++k)
      idx[k] = k;
    // Partial Fisher-Yates: the first m slots become a uniform m-subset.
    for (std::size_t k = 0; k < m; ++k)
      std::swap(idx[k], idx[k + rng.below(n - k)]);
    std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<std::size_t> rest(idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end());
    std::sort(chosen.begin(), chosen.end());
    std::sort(rest.begin(), rest.end());
    auto& e = plan.equal.emplace_back();
    auto& o = plan.other.emplace_back();
    for (auto i : chosen)
      e.push_back(neutral[i]);
    for (auto i : rest)
      o.push_back(neutral[i]);
  }
  return plan;
}

HistogramSet::HistogramSet(std::size_t heads, std::size_t trials)
    : heads_(heads), trials_(trials) {}

const WeightHistogram& HistogramSet::at(std::size_t head, SetKind set, std::size_t trial) const {
  const HistogramKey key{head, set, is_trial_set(set) ? trial : 0};
  const auto it = hists_.find(key);
  if (it == hists_.end())
    throw DataError("missing histogram " + describe(key));
  return it->second;
}

WeightHistogram& HistogramSet::slot(std::size_t head, SetKind set, std::size_t trial) {
  const HistogramKey key{head, set, is_trial_set(set) ? trial : 0};
  auto [it, inserted] = hists_.try_emplace(key);
  if (inserted)
    it->second.key = key;
  return it->second;
}

void HistogramSet::erase(std::size_t head, SetKind set, std::size_t trial) {
  hists_.erase(HistogramKey{head, set, is_trial_set(set) ? trial : 0});
}

HistogramSet build_histograms(std::span<const WordAttentionSample> samples, const TrialPlan& plan,
                              const WordSetPartition& partition, std::size_t heads) {
  const std::size_t R = plan.trials();
  for (std::size_t t = 0; t < R; ++t)
    if (plan.other[t].empty())
      throw DataError("complement of neutral subset is empty in trial " + std::to_string(t) +
                      " (neutral and sentiment vocabularies have equal size)");

  // Per lemma: polarity class, and for neutral lemmas a per-trial membership flag.
  enum class Cls : std::uint8_t { Positive, Negative, Neutral };
  struct Info {
    Cls cls = Cls::Neutral;
    std::vector<std::uint8_t> in_equal;
  };
  std::unordered_map<std::string_view, Info> info;
  for (const auto& l : partition.positive)
    info[l].cls = Cls::Positive;
  for (const auto& l : partition.negative)
    info[l].cls = Cls::Negative;
  for (const auto& l : partition.neutral)
    info[l].in_equal.assign(R, 0);
  for (std::size_t t = 0; t < R; ++t)
    for (const auto& l : plan.equal[t]) {
      const auto it = info.find(l);
      if (it == info.end() || it->second.cls != Cls::Neutral)
        throw DataError("trial subset lemma '" + l + "' is not in the neutral set");
      it->second.in_equal[t] = 1;
    }

  HistogramSet out(heads, R);
  for (std::size_t h = 0; h < heads; ++h) {
    out.slot(h, SetKind::Sentiment);
    out.slot(h, SetKind::Positive);
    out.slot(h, SetKind::Negative);
    for (std::size_t t = 0; t < R; ++t) {
      out.slot(h, SetKind::Equal, t);
      out.slot(h, SetKind::Other, t);
    }
  }

  // Cache slot pointers per head to keep the inner loop map-free.
  struct HeadSlots {
    WeightHistogram* s;
    WeightHistogram* p;
    WeightHistogram* n;
    std::vector<WeightHistogram*> e, o;
  };
  std::vector<HeadSlots> slots(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    slots[h] = {&out.slot(h, SetKind::Sentiment), &out.slot(h, SetKind::Positive),
                &out.slot(h, SetKind::Negative), {}, {}};
    for (std::size_t t = 0; t < R; ++t) {
      slots[h].e.push_back(&out.slot(h, SetKind::Equal, t));
      slots[h].o.push_back(&out.slot(h, SetKind::Other, t));
    }
  }

  for (const auto& s : samples) {
    if (s.head >= heads)
      throw DataError("sample head " + std::to_string(s.head) + " outside [0, " +
                      std::to_string(heads) + ")");
    const auto it = info.find(s.lemma);
    if (it == info.end())
      throw DataError("sample lemma '" + s.lemma + "' is not in the word-set partition");
    bin_index(s.weight); // validates before any slot is touched
    auto& hs = slots[s.head];
    switch (it->second.cls) {
    case Cls::Positive:
      hs.s->add(s.weight);
      hs.p->add(s.weight);
      break;
    case Cls::Negative:
      hs.s->add(s.weight);
      hs.n->add(s.weight);
      break;
    case Cls::Neutral:
      for (std::size_t t = 0; t < R; ++t)
        (it->second.in_equal[t] ? hs.e[t] : hs.o[t])->add(s.weight);
      break;
    }
  }
  return out;
}

void write_histogram_csv(const HistogramSet& hists, std::ostream& out) {
  out << "head,set,trial,bin_low,count\n";
  char low[16];
  for (const auto& [key, hist] : hists.all()) {
    const std::string trial = is_trial_set(key.set) ? std::to_string(key.trial) : "";
    for (std::size_t k = 0; k < kBins; ++k) {
      std::snprintf(low, sizeof low, "%.2f", static_cast<double>(k) * kBinWidth);
      out << key.head << ',' << set_tag(key.set) << ',' << trial << ',' << low << ','
          << hist.counts[k] << '\n';
    }
  }
}

} // namespace attnlex
