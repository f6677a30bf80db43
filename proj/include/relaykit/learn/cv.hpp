#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/learn/metrics.hpp"
#include "relaykit/learn/model.hpp"
#include "relaykit/random.hpp"

namespace relaykit::learn {

/// Each class is shuffled with its own derived seed and dealt round-robin into k
/// folds; the dealing position carries over from one class to the next so fold
/// sizes stay within one of each other.
inline std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& y, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_folds: k must be >= 2");
  if (y.empty()) throw DataError("stratified_folds: no samples");
  const int n_cls = *std::max_element(y.begin(), y.end()) + 1;
  std::vector<std::vector<std::size_t>> by_class(n_cls);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0) throw DataError("stratified_folds: negative label");
    by_class[y[i]].push_back(i);
  }
  for (int c = 0; c < n_cls; ++c) {
    const auto cnt = static_cast<long>(by_class[c].size());
    if (cnt > 0 && cnt < k)
      throw DataError("stratified_folds: class " + std::to_string(c) + " has " + std::to_string(cnt) +
                      " samples, fewer than k = " + std::to_string(k));
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (int c = 0; c < n_cls; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(seed, {0xf01d, static_cast<std::uint64_t>(c)}));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    for (auto i : idx) folds[pos++ % static_cast<std::size_t>(k)].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

struct CvResult {
  double mean = 0.0;
  std::vector<double> fold_scores;
  Confusion pooled;  // summed over held-out folds
};

/// Mean held-out balanced accuracy over stratified folds.
inline CvResult cross_validate(const Dataset& d, const ModelSpec& spec, int k, std::uint64_t seed, int jobs = 1) {
  d.validate();
  const auto folds = stratified_folds(d.y, k, seed);
  CvResult r;
  r.pooled.assign(d.n_classes(), std::vector<long>(d.n_classes(), 0));
  std::vector<char> in_fold(d.n());
  for (int f = 0; f < k; ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (auto i : folds[f]) in_fold[i] = 1;
    std::vector<std::size_t> tr;
    for (std::size_t i = 0; i < d.n(); ++i)
      if (!in_fold[i]) tr.push_back(i);
    const auto model = train(d.subset(tr), spec, derive_seed(seed, {0xc7, static_cast<std::uint64_t>(f)}), jobs);
    const Dataset te = d.subset(folds[f]);
    const auto pred = predict(model, te.x);
    const auto c = confusion(te.y, pred.labels, d.n_classes());
    // Classes with no rows at all are left out of the mean.
    double sum = 0.0;
    int used = 0;
    for (int a = 0; a < d.n_classes(); ++a) {
      long tot = 0;
      for (long v : c[a]) tot += v;
      if (tot == 0) continue;
      sum += static_cast<double>(c[a][a]) / static_cast<double>(tot);
      ++used;
    }
    r.fold_scores.push_back(sum / used);
    for (int a = 0; a < d.n_classes(); ++a)
      for (int b = 0; b < d.n_classes(); ++b) r.pooled[a][b] += c[a][b];
  }
  r.mean = std::accumulate(r.fold_scores.begin(), r.fold_scores.end(), 0.0) / static_cast<double>(k);
  return r;
}

inline double cross_val_score(const Dataset& d, const ModelSpec& spec, int k, std::uint64_t seed, int jobs = 1) {
  return cross_validate(d, spec, k, seed, jobs).mean;
}

/// Ordered parameter axes; expansion varies the last axis fastest.
using GridAxes = std::vector<std::pair<std::string, std::vector<nlohmann::json>>>;

inline std::vector<nlohmann::json> expand_grid(const GridAxes& axes) {
  std::vector<nlohmann::json> out = {nlohmann::json::object()};
  for (const auto& [key, values] : axes) {
    if (values.empty()) throw ConfigError("grid axis '" + key + "' has no values");
    std::vector<nlohmann::json> next;
    for (const auto& base : out)
      for (const auto& v : values) {
        auto p = base;
        p[key] = v;
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

struct GridResult {
  nlohmann::json best_params;
  double best_score = 0.0;
  std::size_t best_index = 0;
  std::vector<double> scores;  // in grid order
};

/// Exhaustive CV over the listed points; ties keep the earliest point.
inline GridResult grid_search(const Dataset& d, Family family, const std::vector<nlohmann::json>& grid, int folds,
                              std::uint64_t seed, int jobs = 1) {
  if (grid.empty()) throw ConfigError("grid_search: empty grid");
  GridResult g;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = cross_val_score(d, ModelSpec{family, grid[i]}, folds, seed, jobs);
    g.scores.push_back(s);
    if (i == 0 || s > g.best_score) {
      g.best_score = s;
      g.best_index = i;
      g.best_params = grid[i];
    }
  }
  return g;
}

}  // namespace relaykit::learn
