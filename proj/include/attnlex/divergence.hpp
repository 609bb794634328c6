#pragma once

#include "attnlex/distributions.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace attnlex {

inline constexpr double kDefaultSmoothing = 1e-6;

/// D(P||Q) = sum p_k log2(p_k / q_k) over probability vectors of equal length.
/// Terms with p_k = 0 contribute nothing; p_k > 0 with q_k = 0 gives +inf.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Bin probabilities with `smoothing` added to each bin, renormalized to sum 1.
/// Throws DataError for an empty histogram.
std::vector<double> smoothed_distribution(const WeightHistogram& hist, double smoothing);

/// KL divergence in bits between two histograms after smoothing both.
double kl_divergence(const WeightHistogram& p, const WeightHistogram& q,
                     double smoothing = kDefaultSmoothing);

/// Effective sample sizes up to this bound get an exact p-value.
inline constexpr std::size_t kExactWilcoxonLimit = 20;

struct WilcoxonResult {
  double statistic = 0.0; // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;   // two-sided
  std::size_t effective_n = 0; // pairs left after dropping zero differences
  bool exact = true;
};

/// Two-sided Wilcoxon signed-rank test on the paired differences x - y.
///
/// Zero differences are dropped and tied |d| get average ranks. For up to
/// kExactWilcoxonLimit remaining pairs the p-value is exact: the null
/// distribution of W+ under all 2^m sign assignments is counted by dynamic
/// programming over doubled ranks (average ranks are multiples of 1/2).
/// Larger samples use the normal approximation with tie-corrected variance
/// and continuity correction.
///
/// Throws UsageError on length mismatch or empty input and DataError when
/// every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

} // namespace attnlex
