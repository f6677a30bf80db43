#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <bit>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"
#include "relaykit/learn/cv.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/learn/tree.hpp"
#include "relaykit/parallel.hpp"

namespace relaykit::select {

using learn::Dataset;

/// Named feature columns plus per-row class targets.
struct FeatureMatrix {
  std::vector<std::string> names;
  Dataset data;

  void validate() const {
    if (names.size() != data.d()) throw DataError("feature matrix: name count differs from column count");
    data.validate();
  }

  std::size_t column_index(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) c[i] = data.x(i, j);
    return c;
  }

  FeatureMatrix columns(const std::vector<std::string>& keep) const {
    std::vector<std::size_t> idx;
    for (const auto& k : keep) idx.push_back(column_index(k));
    return {keep, data.columns(idx)};
  }
};

struct Ranked {
  std::string name;
  double score = 0.0;
};
using RankedFeatures = std::vector<Ranked>;

/// Equal-width bin index per value; a constant column maps to bin 0.
inline std::vector<int> discretize(std::span<const double> x, int bins) {
  if (bins < 2) throw ConfigError("discretize: bins must be >= 2");
  std::vector<int> b(x.size(), 0);
  if (x.empty()) return b;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double mn = *lo, width = *hi - *lo;
  if (!std::isfinite(mn) || !std::isfinite(width)) throw DataError("discretize: non-finite value");
  if (!(width > 0)) return b;
  for (std::size_t i = 0; i < x.size(); ++i)
    b[i] = std::min(bins - 1, static_cast<int>(std::floor((x[i] - mn) / width * bins)));
  return b;
}

/// Plug-in mutual information in bits between two discrete codings.
inline double discrete_mi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw DataError("mutual information: length mismatch");
  if (a.empty()) throw DataError("mutual information: no samples");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pa, pb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [k, c] : joint) mi += c / n * std::log2(c * n / (pa[k.first] * pb[k.second]));
  return std::max(0.0, mi);
}

inline double mutual_information(std::span<const double> x, const std::vector<int>& y, int bins = 16) {
  if (x.size() != y.size()) throw DataError("mutual information: length mismatch");
  return discrete_mi(discretize(x, bins), y);
}

/// Greedy mRMR (difference form). Ties resolve to the lexicographically smallest name.
inline RankedFeatures mrmr_rank(const FeatureMatrix& m, std::size_t k, int bins = 16) {
  m.validate();
  const std::size_t d = m.names.size();
  if (k > d) throw ConfigError("mrmr: k = " + std::to_string(k) + " exceeds " + std::to_string(d) + " columns");
  std::vector<std::vector<int>> codes(d);
  std::vector<double> rel(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto c = m.column(j);
    codes[j] = discretize(c, bins);
    rel[j] = discrete_mi(codes[j], m.data.y);
  }
  std::vector<double> red_sum(d, 0.0);
  std::vector<char> used(d, 0);
  RankedFeatures out;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = d;
    double best_score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      const double s = step == 0 ? rel[j] : rel[j] - red_sum[j] / static_cast<double>(step);
      if (best == d || s > best_score || (s == best_score && m.names[j] < m.names[best])) {
        best = j;
        best_score = s;
      }
    }
    used[best] = 1;
    out.push_back({m.names[best], best_score});
    for (std::size_t j = 0; j < d; ++j)
      if (!used[j]) red_sum[j] += discrete_mi(codes[j], codes[best]);
  }
  return out;
}

/// Sorts by score descending, then name ascending.
inline void sort_ranking(RankedFeatures& r) {
  std::stable_sort(r.begin(), r.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.name < b.name;
  });
}

/// Forest mean-decrease-in-impurity, ranked.
inline RankedFeatures rf_importance(const FeatureMatrix& m, const learn::ForestConfig& cfg) {
  m.validate();
  const auto counts = m.data.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](long c) { return c > 0; }) < 2)
    throw DataError("rf_importance: target has fewer than 2 classes");
  const auto forest = learn::train_forest(m.data, cfg);
  const auto imp = forest.importance();
  RankedFeatures r;
  for (std::size_t j = 0; j < imp.size(); ++j) r.push_back({m.names[j], imp[j]});
  sort_ranking(r);
  return r;
}

enum class Baseline { decision_tree, knn };

inline Baseline parse_baseline(std::string_view s) {
  if (s == "decision_tree") return Baseline::decision_tree;
  if (s == "knn") return Baseline::knn;
  throw ConfigError("unknown baseline '" + std::string(s) + "'");
}

struct SubsetResult {
  std::vector<std::string> best;  // sorted by name
  double score = 0.0;
  std::size_t evaluations = 0;
};

/// Exhaustive search over all nonempty subsets of the candidates.
inline SubsetResult subset_search(const FeatureMatrix& m, const std::vector<std::string>& candidates, Baseline baseline,
                                  int cv_folds, std::uint64_t seed, int jobs = 1) {
  m.validate();
  if (candidates.empty()) throw ConfigError("subset_search: no candidates");
  if (candidates.size() > 16) throw ConfigError("subset_search: at most 16 candidates");
  std::vector<std::string> cand = candidates;
  std::sort(cand.begin(), cand.end());
  if (std::adjacent_find(cand.begin(), cand.end()) != cand.end())
    throw ConfigError("subset_search: duplicate candidate");
  std::vector<std::size_t> cols;
  for (const auto& c : cand) cols.push_back(m.column_index(c));
  const learn::ModelSpec spec = baseline == Baseline::decision_tree
                                    ? learn::ModelSpec{learn::Family::decision_tree, nlohmann::json::object()}
                                    : learn::ModelSpec{learn::Family::knn, nlohmann::json::object()};
  const std::size_t n_sub = (std::size_t{1} << cand.size()) - 1;
  std::vector<double> scores(n_sub);
  parallel_for(n_sub, jobs, [&](std::size_t s) {
    const std::size_t mask = s + 1;
    std::vector<std::size_t> pick;
    for (std::size_t j = 0; j < cand.size(); ++j)
      if (mask >> j & 1U) pick.push_back(cols[j]);
    scores[s] = learn::cross_val_score(m.data.columns(pick), spec, cv_folds, seed);
  });

  auto names_of = [&](std::size_t mask) {
    std::vector<std::string> v;
    for (std::size_t j = 0; j < cand.size(); ++j)
      if (mask >> j & 1U) v.push_back(cand[j]);
    return v;
  };
  SubsetResult r;
  r.evaluations = n_sub;
  std::size_t best_mask = 0;
  for (std::size_t s = 0; s < n_sub; ++s) {
    const std::size_t mask = s + 1;
    if (best_mask == 0 || scores[s] > r.score) {
      best_mask = mask;
      r.score = scores[s];
      continue;
    }
    if (scores[s] < r.score) continue;
    const int pc = std::popcount(mask), bc = std::popcount(best_mask);
    if (pc < bc || (pc == bc && names_of(mask) < names_of(best_mask))) best_mask = mask;
  }
  r.best = names_of(best_mask);
  return r;
}

inline nlohmann::json ranking_json(const RankedFeatures& r) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < r.size(); ++i) j.push_back({{"name", r[i].name}, {"score", r[i].score}, {"rank", i + 1}});
  return j;
}

}  // namespace relaykit::select
