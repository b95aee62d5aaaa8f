#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "ghmix/metrics.hpp"

namespace {

using ghmix::metrics::adjusted_rand_index;
using ghmix::metrics::cross_tab;

// Pair-counting oracle: a = pairs together in both, b = together only in the
// first, c = together only in the second, d = apart in both.
double ari_pair_counting(const std::vector<int>& x, const std::vector<int>& y) {
  long long a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j];
      const bool sy = y[i] == y[j];
      a += sx && sy;
      b += sx && !sy;
      c += !sx && sy;
      d += !sx && !sy;
    }
  }
  const long long num = 2 * (a * d - b * c);
  const long long den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0) return b == 0 && c == 0 ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<int> random_partition(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  std::vector<int> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

TEST(AdjustedRandIndex, IdenticalAndRelabeledPartitions) {
  EXPECT_EQ(adjusted_rand_index(std::vector<int>{1, 1, 2, 2, 3}, std::vector<int>{1, 1, 2, 2, 3}), 1.0);
  EXPECT_EQ(adjusted_rand_index(std::vector<int>{1, 1, 2, 2}, std::vector<int>{2, 2, 1, 1}), 1.0);
  EXPECT_EQ(adjusted_rand_index(std::vector<std::string>{"a", "a", "b"}, std::vector<int>{7, 7, 3}), 1.0);
}

TEST(AdjustedRandIndex, OneClusterVersusSingletonsIsZero) {
  EXPECT_EQ(adjusted_rand_index(std::vector<int>{0, 0, 0, 0}, std::vector<int>{0, 1, 2, 3}), 0.0);
}

TEST(AdjustedRandIndex, DegenerateTablesFollowDocumentedRule) {
  EXPECT_EQ(adjusted_rand_index(std::vector<int>{0, 0, 0}, std::vector<int>{5, 5, 5}), 1.0);
  EXPECT_EQ(adjusted_rand_index(std::vector<int>{0, 1, 2}, std::vector<int>{2, 0, 1}), 1.0);
}

TEST(AdjustedRandIndex, CanBeNegative) {
  EXPECT_LT(adjusted_rand_index(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0);
}

TEST(AdjustedRandIndex, ErrorsOnBadInput) {
  EXPECT_THROW(adjusted_rand_index(std::vector<int>{1, 2}, std::vector<int>{1}), ghmix::DomainError);
  EXPECT_THROW(adjusted_rand_index(std::vector<int>{1}, std::vector<int>{1}), ghmix::DomainError);
}

TEST(AdjustedRandIndex, MatchesPairCountingExactly) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::uniform_int_distribution<int> classes(1, 5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = size(rng);
    const auto x = random_partition(n, classes(rng), rng);
    const auto y = random_partition(n, classes(rng), rng);
    EXPECT_EQ(adjusted_rand_index(x, y), ari_pair_counting(x, y)) << "trial " << trial;
  }
}

TEST(AdjustedRandIndex, SymmetricAndInvariantToLabelPermutation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_partition(60, 4, rng);
    const auto y = random_partition(60, 3, rng);
    const double v = adjusted_rand_index(x, y);
    EXPECT_EQ(v, adjusted_rand_index(y, x));
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> xp;
    for (int l : x) xp.push_back(perm[static_cast<std::size_t>(l)] + 10);
    EXPECT_EQ(v, adjusted_rand_index(xp, y));
  }
}

TEST(AdjustedRandIndex, NullMeanNearZero) {
  std::mt19937_64 rng(99);
  const auto fixed = random_partition(150, 3, rng);
  double total = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto shuffled = fixed;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    total += adjusted_rand_index(fixed, shuffled);
  }
  const double mean = total / 1000.0;
  EXPECT_GT(mean, -0.02);
  EXPECT_LT(mean, 0.02);
}

TEST(CrossTab, PerfectPredictionIsDiagonal) {
  const auto t = cross_tab(std::vector<std::string>{"B", "B", "O", "O"}, std::vector<int>{1, 1, 2, 2});
  ASSERT_EQ(t.row_labels, (std::vector<std::string>{"B", "O"}));
  ASSERT_EQ(t.col_labels, (std::vector<int>{1, 2}));
  EXPECT_EQ(t.counts, (std::vector<std::vector<std::int64_t>>{{2, 0}, {0, 2}}));
}

TEST(CrossTab, MarginsMatchLabelCounts) {
  std::mt19937_64 rng(5);
  const auto x = random_partition(300, 4, rng);
  const auto y = random_partition(300, 6, rng);
  const auto t = cross_tab(x, y);
  EXPECT_EQ(t.total(), 300);
  const auto rows = t.row_sums();
  for (std::size_t i = 0; i < t.row_labels.size(); ++i)
    EXPECT_EQ(rows[i], std::count(x.begin(), x.end(), t.row_labels[i]));
  const auto cols = t.col_sums();
  for (std::size_t j = 0; j < t.col_labels.size(); ++j)
    EXPECT_EQ(cols[j], std::count(y.begin(), y.end(), t.col_labels[j]));
}

TEST(CrossTab, ErrorsOnLengthMismatch) {
  EXPECT_THROW(cross_tab(std::vector<int>{1, 2}, std::vector<int>{1}), ghmix::DomainError);
}

}  // namespace
