#include "attnlex/divergence.hpp"
#include "attnlex/error.hpp"
#include "attnlex/rng.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace attnlex;

namespace {

std::vector<double> random_distribution(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double s = 0;
  for (auto& v : p)
    s += v = rng.exponential();
  for (auto& v : p)
    v /= s;
  return p;
}

WeightHistogram random_histogram(Rng& rng) {
  WeightHistogram h;
  const auto n = 1 + rng.below(200);
  for (std::size_t i = 0; i < n; ++i)
    h.add(rng.uniform01() * rng.uniform01());
  return h;
}

std::vector<double> integers(Rng& rng, std::size_t n, std::uint64_t hi) {
  std::vector<double> v(n);
  for (auto& x : v)
    x = static_cast<double>(rng.below(hi));
  return v;
}

} // namespace

TEST_CASE("KL of a distribution with itself is zero") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto h = random_histogram(rng);
    CHECK(std::abs(kl_divergence(h, h)) < 1e-12);
  }
}

TEST_CASE("two-bin KL in bits") {
  const std::vector<double> p = {0.5, 0.5}, q = {0.25, 0.75};
  const double d = kl_divergence(p, q);
  CHECK(std::abs(d - 0.207519) < 1e-5);
  CHECK(std::abs(d - oracle::kl_bits(p, q)) < 1e-15);
  CHECK(std::abs(kl_divergence(q, p) - d) > 1e-3);
}

TEST_CASE("KL edge conventions") {
  const std::vector<double> p = {1.0, 0.0}, q = {0.5, 0.5};
  CHECK(kl_divergence(p, q) == doctest::Approx(1.0));
  CHECK(std::isinf(kl_divergence(q, p)));
}

TEST_CASE("KL is non-negative and agrees with the oracle") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto n = 2 + rng.below(100);
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n);
    const double d = kl_divergence(p, q);
    CHECK(d >= 0.0);
    CHECK(d == doctest::Approx(oracle::kl_bits(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("smoothing keeps empty bins finite") {
  WeightHistogram a, b;
  a.add(0.1);
  b.add(0.9);
  const auto p = smoothed_distribution(a, kDefaultSmoothing);
  double s = 0;
  for (double v : p)
    s += v;
  CHECK(s == doctest::Approx(1.0));
  CHECK(p[50] > 0.0);
  const double d = kl_divergence(a, b);
  CHECK(std::isfinite(d));
  CHECK(d > 10.0);
  CHECK_THROWS_AS(smoothed_distribution(WeightHistogram{}, kDefaultSmoothing), DataError);
}

TEST_CASE("Wilcoxon: ten positive differences") {
  std::vector<double> x, y(10, 0.0);
  for (int i = 1; i <= 10; ++i)
    x.push_back(i);
  const auto r = wilcoxon_signed_rank(x, y);
  CHECK(r.exact);
  CHECK(r.effective_n == 10);
  CHECK(r.w_minus == 0.0);
  CHECK(r.w_plus == 55.0);
  CHECK(r.p_value == doctest::Approx(2.0 / 1024).epsilon(1e-12));
}

TEST_CASE("Wilcoxon: a single pair is never significant") {
  const std::vector<double> x = {3.0}, y = {1.0};
  CHECK(wilcoxon_signed_rank(x, y).p_value == 1.0);
}

TEST_CASE("Wilcoxon: mixed signs with ties match enumeration") {
  const std::vector<double> x = {1.2, 0.4, 2.0, 0.9, 1.1, 0.3, 1.7, 0.8, 1.5, 0.6};
  const std::vector<double> y = {0.7, 0.9, 1.5, 0.9, 0.6, 0.8, 1.0, 0.3, 0.5, 0.1};
  const auto r = wilcoxon_signed_rank(x, y);
  CHECK(r.effective_n == 9);
  CHECK(r.w_plus + r.w_minus == doctest::Approx(45.0));
  CHECK(std::abs(r.p_value - oracle::wilcoxon_enumerate(x, y)) < 1e-12);
}

TEST_CASE("Wilcoxon exact p agrees with full enumeration") {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto m = 1 + rng.below(12);
    // small integer ranges force ties and zeros
    const auto x = integers(rng, m, 6), y = integers(rng, m, 6);
    bool all_zero = true;
    for (std::size_t k = 0; k < m; ++k)
      all_zero = all_zero && x[k] == y[k];
    if (all_zero) {
      CHECK_THROWS_AS(wilcoxon_signed_rank(x, y), DataError);
      continue;
    }
    const auto r = wilcoxon_signed_rank(x, y);
    CHECK(r.exact);
    CHECK(std::abs(r.p_value - oracle::wilcoxon_enumerate(x, y)) < 1e-12);
  }
}

TEST_CASE("Wilcoxon is symmetric in its arguments") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto m = 2 + rng.below(30);
    std::vector<double> x(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = rng.uniform01();
      y[k] = rng.uniform01();
    }
    const auto a = wilcoxon_signed_rank(x, y), b = wilcoxon_signed_rank(y, x);
    CHECK(a.p_value == b.p_value);
    CHECK(a.statistic == b.statistic);
    CHECK(a.w_plus == b.w_minus);
    CHECK(a.p_value > 0.0);
    CHECK(a.p_value <= 1.0);
  }
}

TEST_CASE("Wilcoxon normal approximation with ties and zeros") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back((i * 7) % 11);
    y.push_back((i * 5) % 9);
  }
  const auto r = wilcoxon_signed_rank(x, y);
  CHECK_FALSE(r.exact);
  CHECK(r.effective_n == 27);
  CHECK(r.statistic == 112.5);
  // reference: scipy.stats.wilcoxon(method="approx", correction=True)
  CHECK(r.p_value == doctest::Approx(0.06686366810178572).epsilon(1e-9));
}

TEST_CASE("Wilcoxon input errors") {
  const std::vector<double> a = {1, 2, 3}, b = {1, 2};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), UsageError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{}, std::vector<double>{}), UsageError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), DataError);
}
