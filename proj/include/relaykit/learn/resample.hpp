#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/random.hpp"

namespace relaykit::learn {

namespace detail {

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

/// The k rows of `pool` nearest to `row` (ties to the lower position), skipping `self`.
inline std::vector<std::size_t> nearest(const Matrix& x, std::span<const double> row,
                                        const std::vector<std::size_t>& pool, std::size_t k, std::size_t self) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p)
    if (pool[p] != self) d.emplace_back(euclid(row, x.row(pool[p])), p);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = pool[d[i].second];
  return out;
}

}  // namespace detail

/// Appends n_new synthetic rows of target_class, each on the segment between a
/// class member and one of its k nearest same-class neighbours.
inline Dataset smote(const Dataset& d, int target_class, std::size_t n_new, std::size_t k, std::uint64_t seed) {
  d.validate();
  if (target_class < 0 || target_class >= d.n_classes()) throw ConfigError("smote: target class out of range");
  if (k < 1) throw ConfigError("smote: k must be >= 1");
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < d.n(); ++i)
    if (d.y[i] == target_class) members.push_back(i);
  if (members.size() <= k)
    throw DataError("smote: class '" + d.class_names[target_class] + "' has " + std::to_string(members.size()) +
                    " rows, need more than k = " + std::to_string(k));
  Dataset out = d;
  if (n_new == 0) return out;
  std::vector<std::vector<std::size_t>> nn(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) nn[m] = detail::nearest(d.x, d.x.row(members[m]), members, k, members[m]);
  Rng rng(derive_seed(seed, {0x5307e}));
  std::vector<double> row(d.d());
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t m = rng.index(members.size());
    const std::size_t nb = nn[m][rng.index(nn[m].size())];
    const double u = rng.uniform();
    const auto a = d.x.row(members[m]);
    const auto b = d.x.row(nb);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = a[j] + u * (b[j] - a[j]);
    out.x.push_row(row);
    out.y.push_back(target_class);
  }
  return out;
}

/// NearMiss-1: keeps the n_keep rows of majority_class whose mean distance to
/// their 3 nearest rows of any other class is smallest. Row order is preserved.
inline Dataset nearmiss(const Dataset& d, int majority_class, std::size_t n_keep, std::uint64_t /*seed*/ = 0) {
  d.validate();
  if (majority_class < 0 || majority_class >= d.n_classes()) throw ConfigError("nearmiss: class out of range");
  std::vector<std::size_t> major, minor;
  for (std::size_t i = 0; i < d.n(); ++i) (d.y[i] == majority_class ? major : minor).push_back(i);
  if (n_keep > major.size())
    throw DataError("nearmiss: n_keep = " + std::to_string(n_keep) + " exceeds " + std::to_string(major.size()) +
                    " rows of '" + d.class_names[majority_class] + "'");
  if (n_keep == major.size()) return d;
  if (minor.empty()) throw DataError("nearmiss: no rows outside the majority class");
  std::vector<std::pair<double, std::size_t>> score;
  for (auto i : major) {
    const auto nb = detail::nearest(d.x, d.x.row(i), minor, 3, static_cast<std::size_t>(-1));
    double s = 0.0;
    for (auto j : nb) s += detail::euclid(d.x.row(i), d.x.row(j));
    score.emplace_back(s / static_cast<double>(nb.size()), i);
  }
  std::sort(score.begin(), score.end());
  std::vector<char> keep(d.n(), 0);
  for (auto i : minor) keep[i] = 1;
  for (std::size_t r = 0; r < n_keep; ++r) keep[score[r].second] = 1;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.n(); ++i)
    if (keep[i]) idx.push_back(i);
  return d.subset(idx);
}

}  // namespace relaykit::learn
