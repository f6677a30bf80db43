#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"
#include "relaykit/parallel.hpp"
#include "relaykit/random.hpp"

namespace relaykit::learn {

enum class Criterion { gini, entropy };

inline std::string_view to_string(Criterion c) { return c == Criterion::gini ? "gini" : "entropy"; }
inline Criterion parse_criterion(std::string_view s) {
  if (s == "gini") return Criterion::gini;
  if (s == "entropy") return Criterion::entropy;
  throw ConfigError("unknown criterion '" + std::string(s) + "'");
}

/// Gini 1 - sum p^2 or entropy -sum p log2 p of a class-count vector.
inline double impurity(std::span<const double> counts, Criterion c) {
  double n = 0.0;
  for (double v : counts) n += v;
  if (!(n > 0)) throw DataError("impurity: empty node");
  double s = 0.0;
  for (double v : counts) {
    if (v <= 0) continue;
    const double p = v / n;
    s += c == Criterion::gini ? p * p : -p * std::log2(p);
  }
  return c == Criterion::gini ? 1.0 - s : s;
}

inline double impurity(const std::vector<long>& counts, Criterion c) {
  std::vector<double> d(counts.begin(), counts.end());
  return impurity(d, c);
}

/// Information gain I(parent) - (n_l/n) I(left) - (n_r/n) I(right). An empty side contributes 0.
inline double split_gain(std::span<const double> parent, std::span<const double> left, std::span<const double> right,
                         Criterion c) {
  if (parent.size() != left.size() || parent.size() != right.size())
    throw DataError("split_gain: class-count vectors differ in length");
  double np = 0, nl = 0, nr = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (std::abs(left[i] + right[i] - parent[i]) > 1e-9 * std::max(1.0, parent[i]))
      throw DataError("split_gain: left + right != parent");
    np += parent[i];
    nl += left[i];
    nr += right[i];
  }
  double g = impurity(parent, c);
  if (nl > 0) g -= nl / np * impurity(left, c);
  if (nr > 0) g -= nr / np * impurity(right, c);
  return g;
}

inline double split_gain(const std::vector<long>& p, const std::vector<long>& l, const std::vector<long>& r,
                         Criterion c) {
  std::vector<double> a(p.begin(), p.end()), b(l.begin(), l.end()), d(r.begin(), r.end());
  return split_gain(a, b, d, c);
}

struct TreeConfig {
  Criterion criterion = Criterion::gini;
  int max_depth = -1;  // negative: unbounded
  int min_samples_split = 2;
  int max_features = 0;  // features drawn per split; 0 or >= d means all, in index order
  std::uint64_t seed = 0;

  void validate() const {
    if (min_samples_split < 2) throw ConfigError("tree: min_samples_split must be >= 2");
    if (max_features < 0) throw ConfigError("tree: max_features must be >= 0");
  }
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1, right = -1;
  double impurity = 0.0;
  std::vector<double> counts;  // per class, bootstrap multiplicity included
};

struct TreeModel {
  std::vector<TreeNode> nodes;
  int n_features = 0;
  int n_classes = 0;
  TreeConfig cfg;
  std::vector<double> importance;  // weighted impurity decrease per feature

  const TreeNode& leaf(std::span<const double> row) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i];
  }

  std::vector<double> predict_proba(std::span<const double> row) const {
    const auto& n = leaf(row);
    double s = 0.0;
    for (double v : n.counts) s += v;
    std::vector<double> p(n.counts.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = n.counts[k] / s;
    return p;
  }

  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].feature >= 0) {
        d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
        best = std::max(best, d[i] + 1);
      }
    return best;
  }
};

namespace detail {

class TreeBuilder {
public:
  TreeBuilder(const Dataset& d, const TreeConfig& cfg, std::uint64_t seed) : d_(d), cfg_(cfg), rng_(seed) {
    model_.n_features = static_cast<int>(d.d());
    model_.n_classes = d.n_classes();
    model_.cfg = cfg;
    model_.importance.assign(d.d(), 0.0);
  }

  TreeModel build(std::vector<std::size_t> idx) {
    if (idx.empty()) throw DataError("tree: no training rows");
    total_ = static_cast<double>(idx.size());
    grow(idx, 0);
    return std::move(model_);
  }

private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::vector<double> counts_of(const std::vector<std::size_t>& idx) const {
    std::vector<double> c(d_.n_classes(), 0.0);
    for (auto i : idx) c[d_.y[i]] += 1.0;
    return c;
  }

  /// Best threshold on one feature; returns false when the feature is constant here.
  bool best_on_feature(const std::vector<std::size_t>& idx, int f, const std::vector<double>& parent, Split& best) {
    std::vector<std::pair<double, int>> v(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) v[k] = {d_.x(idx[k], f), d_.y[idx[k]]};
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> left(parent.size(), 0.0), right = parent;
    bool any = false;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      left[v[k].second] += 1.0;
      right[v[k].second] -= 1.0;
      if (!(v[k].first < v[k + 1].first)) continue;
      any = true;
      double thr = 0.5 * (v[k].first + v[k + 1].first);
      if (!(thr < v[k + 1].first)) thr = v[k].first;
      const double g = split_gain(parent, left, right, cfg_.criterion);
      if (best.feature < 0 || g > best.gain + 1e-12) best = {f, thr, g};
    }
    return any;
  }

  std::vector<int> candidate_order() {
    const int d = static_cast<int>(d_.d());
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    if (cfg_.max_features == 0 || cfg_.max_features >= d) return all;
    for (int i = 0; i < d - 1; ++i) std::swap(all[i], all[i + static_cast<int>(rng_.index(d - i))]);
    return all;
  }

  int grow(const std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(model_.nodes.size());
    model_.nodes.emplace_back();
    auto counts = counts_of(idx);
    const double imp = impurity(counts, cfg_.criterion);
    model_.nodes[id].counts = counts;
    model_.nodes[id].impurity = imp;
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
    if (pure || (cfg_.max_depth >= 0 && depth >= cfg_.max_depth) ||
        static_cast<int>(idx.size()) < cfg_.min_samples_split)
      return id;

    Split best;
    auto order = candidate_order();
    const int d = static_cast<int>(order.size());
    const bool sampled = !(cfg_.max_features == 0 || cfg_.max_features >= d);
    if (!sampled) {
      for (int f : order) best_on_feature(idx, f, counts, best);
    } else {
      // Evaluate the drawn subset in index order; if none of it can split, keep
      // drawing single features until one can.
      std::vector<int> first(order.begin(), order.begin() + cfg_.max_features);
      std::sort(first.begin(), first.end());
      bool any = false;
      for (int f : first) any |= best_on_feature(idx, f, counts, best);
      for (int k = cfg_.max_features; !any && k < d; ++k) any = best_on_feature(idx, order[k], counts, best);
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> li, ri;
    for (auto i : idx) (d_.x(i, best.feature) <= best.threshold ? li : ri).push_back(i);
    model_.importance[best.feature] += static_cast<double>(idx.size()) / total_ * best.gain;
    model_.nodes[id].feature = best.feature;
    model_.nodes[id].threshold = best.threshold;
    const int l = grow(li, depth + 1);
    const int r = grow(ri, depth + 1);
    model_.nodes[id].left = l;
    model_.nodes[id].right = r;
    return id;
  }

  const Dataset& d_;
  TreeConfig cfg_;
  Rng rng_;
  TreeModel model_;
  double total_ = 0.0;
};

}  // namespace detail

/// Greedy CART on the given rows (duplicates allowed, e.g. a bootstrap sample).
inline TreeModel train_tree(const Dataset& d, const TreeConfig& cfg, const std::vector<std::size_t>& rows) {
  cfg.validate();
  d.validate();
  return detail::TreeBuilder(d, cfg, cfg.seed).build(rows);
}

inline TreeModel train_tree(const Dataset& d, const TreeConfig& cfg = {}) {
  std::vector<std::size_t> all(d.n());
  std::iota(all.begin(), all.end(), 0);
  return train_tree(d, cfg, all);
}

struct ForestConfig {
  int n_estimators = 100;
  int max_depth = -1;
  int max_features = 0;  // 0: round(sqrt(d))
  bool bootstrap = true;
  Criterion criterion = Criterion::gini;
  int min_samples_split = 2;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const {
    if (n_estimators < 1) throw ConfigError("forest: n_estimators must be >= 1");
    if (max_features < 0) throw ConfigError("forest: max_features must be >= 0");
    if (min_samples_split < 2) throw ConfigError("forest: min_samples_split must be >= 2");
  }
};

struct ForestModel {
  std::vector<TreeModel> trees;
  int n_features = 0;
  int n_classes = 0;
  ForestConfig cfg;

  std::vector<double> predict_proba(std::span<const double> row) const {
    std::vector<double> p(n_classes, 0.0);
    for (const auto& t : trees) {
      auto q = t.predict_proba(row);
      for (int k = 0; k < n_classes; ++k) p[k] += q[k];
    }
    for (auto& v : p) v /= static_cast<double>(trees.size());
    return p;
  }

  /// Mean over trees of each tree's weighted impurity decrease.
  std::vector<double> importance() const {
    std::vector<double> imp(n_features, 0.0);
    for (const auto& t : trees)
      for (int f = 0; f < n_features; ++f) imp[f] += t.importance[f];
    for (auto& v : imp) v /= static_cast<double>(trees.size());
    return imp;
  }
};

inline ForestModel train_forest(const Dataset& d, const ForestConfig& cfg) {
  cfg.validate();
  d.validate();
  if (d.n() == 0) throw DataError("forest: no training rows");
  ForestModel m;
  m.n_features = static_cast<int>(d.d());
  m.n_classes = d.n_classes();
  m.cfg = cfg;
  m.trees.resize(cfg.n_estimators);
  const int mf = cfg.max_features > 0
                     ? cfg.max_features
                     : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d.d())))));
  parallel_for(static_cast<std::size_t>(cfg.n_estimators), cfg.jobs, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(cfg.seed, {t});
    std::vector<std::size_t> rows(d.n());
    if (cfg.bootstrap) {
      Rng r(derive_seed(s, {0xb007}));
      for (auto& v : rows) v = r.index(d.n());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeConfig tc{cfg.criterion, cfg.max_depth, cfg.min_samples_split, mf, derive_seed(s, {0xfea7})};
    m.trees[t] = train_tree(d, tc, rows);
  });
  return m;
}

}  // namespace relaykit::learn
