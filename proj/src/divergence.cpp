#include "attnlex/divergence.hpp"

#include "attnlex/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace attnlex {

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || p.size() != q.size())
    throw UsageError("kl_divergence: distributions must be non-empty and of equal length");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0)
      continue;
    if (q[k] <= 0.0)
      return std::numeric_limits<double>::infinity();
    d += p[k] * std::log2(p[k] / q[k]);
  }
  // Rounding can leave a tiny negative for near-identical inputs.
  return std::max(d, 0.0);
}

std::vector<double> smoothed_distribution(const WeightHistogram& hist, double smoothing) {
  if (hist.total == 0)
    throw DataError("cannot build a distribution from an empty histogram (head " +
                    std::to_string(hist.key.head) + ", set " + std::string(set_tag(hist.key.set)) +
                    ")");
  if (!(smoothing >= 0.0))
    throw UsageError("smoothing must be >= 0");
  std::vector<double> probs(kBins);
  const double total = static_cast<double>(hist.total);
  double norm = 0.0;
  for (std::size_t k = 0; k < kBins; ++k) {
    probs[k] = static_cast<double>(hist.counts[k]) / total + smoothing;
    norm += probs[k];
  }
  for (auto& v : probs)
    v /= norm;
  return probs;
}

double kl_divergence(const WeightHistogram& p, const WeightHistogram& q, double smoothing) {
  return kl_divergence(smoothed_distribution(p, smoothing), smoothed_distribution(q, smoothing));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw UsageError("wilcoxon_signed_rank: samples differ in length (" +
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.empty())
    throw UsageError("wilcoxon_signed_rank: empty sample");

  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (std::isnan(d))
      throw DataError("wilcoxon_signed_rank: NaN in paired sample");
    if (d != 0.0)
      diffs.push_back(d);
  }
  const std::size_t m = diffs.size();
  if (m == 0)
    throw DataError("degenerate paired sample: all differences are zero");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

  // Doubled average ranks: a tie run over sorted positions [i, j) has average
  // rank (i + 1 + j) / 2, so twice that is the integer i + 1 + j.
  std::vector<long> rank2(m);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i + 1;
    while (j < m && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]]))
      ++j;
    for (std::size_t k = i; k < j; ++k)
      rank2[order[k]] = static_cast<long>(i + 1 + j);
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  long plus2 = 0;
  long total2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0)
      plus2 += rank2[i];
  }
  const long minus2 = total2 - plus2;

  WilcoxonResult res;
  res.effective_n = m;
  res.w_plus = plus2 / 2.0;
  res.w_minus = minus2 / 2.0;
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (m <= kExactWilcoxonLimit) {
    // ways[s]: number of sign assignments whose doubled W+ equals s.
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const long r = rank2[i];
      for (long s = reach; s >= 0; --s)
        if (ways[s] != 0.0)
          ways[s + r] += ways[s];
      reach += r;
    }
    const long w2 = std::min(plus2, minus2);
    double tail = 0.0;
    for (long s = 0; s <= w2; ++s)
      tail += ways[s];
    res.exact = true;
    res.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(m)));
  } else {
    const double n = static_cast<double>(m);
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    res.exact = false;
    if (var <= 0.0) {
      res.p_value = 1.0;
    } else {
      const double z = std::max(0.0, std::abs(res.statistic - mean) - 0.5) / std::sqrt(var);
      res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }
  }
  return res;
}

} // namespace attnlex
