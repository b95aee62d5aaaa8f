#pragma once

// Agreement between two partitions of the same observations.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "ghmix/error.hpp"

namespace ghmix::metrics {

/// counts[i][j] = number of observations with row label row_labels[i] and
/// column label col_labels[j]. Labels are kept in sorted order.
template <class RowLabel, class ColLabel = RowLabel>
struct Contingency {
  std::vector<RowLabel> row_labels;
  std::vector<ColLabel> col_labels;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
      for (std::int64_t v : row) n += v;
    return n;
  }
  std::vector<std::int64_t> row_sums() const {
    std::vector<std::int64_t> s;
    for (const auto& row : counts) {
      std::int64_t t = 0;
      for (std::int64_t v : row) t += v;
      s.push_back(t);
    }
    return s;
  }
  std::vector<std::int64_t> col_sums() const {
    std::vector<std::int64_t> s(col_labels.size(), 0);
    for (const auto& row : counts)
      for (std::size_t j = 0; j < row.size(); ++j) s[j] += row[j];
    return s;
  }
};

template <class RowLabel, class ColLabel>
Contingency<RowLabel, ColLabel> cross_tab(const std::vector<RowLabel>& rows, const std::vector<ColLabel>& cols) {
  if (rows.size() != cols.size()) throw DomainError("cross_tab: label vectors differ in length");
  std::map<RowLabel, std::size_t> ri;
  std::map<ColLabel, std::size_t> ci;
  for (const auto& r : rows) ri.emplace(r, 0);
  for (const auto& c : cols) ci.emplace(c, 0);
  Contingency<RowLabel, ColLabel> t;
  for (auto& [label, index] : ri) {
    index = t.row_labels.size();
    t.row_labels.push_back(label);
  }
  for (auto& [label, index] : ci) {
    index = t.col_labels.size();
    t.col_labels.push_back(label);
  }
  t.counts.assign(t.row_labels.size(), std::vector<std::int64_t>(t.col_labels.size(), 0));
  for (std::size_t k = 0; k < rows.size(); ++k) ++t.counts[ri.at(rows[k])][ci.at(cols[k])];
  return t;
}

namespace detail {
inline __int128 pairs(std::int64_t m) { return static_cast<__int128>(m) * (m - 1) / 2; }
}  // namespace detail

/// Hubert-Arabie adjusted Rand index from a contingency table. When the
/// denominator vanishes (both partitions trivial) the result is 1 for
/// identical partitions and 0 otherwise.
template <class RowLabel, class ColLabel>
double adjusted_rand_index(const Contingency<RowLabel, ColLabel>& t) {
  __int128 index = 0;
  __int128 a = 0;
  __int128 b = 0;
  for (const auto& row : t.counts)
    for (std::int64_t v : row) index += detail::pairs(v);
  for (std::int64_t s : t.row_sums()) a += detail::pairs(s);
  for (std::int64_t s : t.col_sums()) b += detail::pairs(s);
  const __int128 total = detail::pairs(t.total());
  const __int128 num = 2 * (total * index - a * b);
  const __int128 den = total * (a + b) - 2 * a * b;
  if (den == 0) {
    for (const auto& row : t.counts) {
      if (std::count_if(row.begin(), row.end(), [](std::int64_t v) { return v > 0; }) > 1) return 0.0;
    }
    for (std::size_t j = 0; j < t.col_labels.size(); ++j) {
      int nonzero = 0;
      for (const auto& row : t.counts) nonzero += row[j] > 0;
      if (nonzero > 1) return 0.0;
    }
    return 1.0;
  }
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

template <class RowLabel, class ColLabel>
double adjusted_rand_index(const std::vector<RowLabel>& labels_a, const std::vector<ColLabel>& labels_b) {
  if (labels_a.size() != labels_b.size()) throw DomainError("adjusted_rand_index: label vectors differ in length");
  if (labels_a.size() < 2) throw DomainError("adjusted_rand_index: need at least two observations");
  return adjusted_rand_index(cross_tab(labels_a, labels_b));
}

}  // namespace ghmix::metrics
