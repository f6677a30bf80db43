#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"

namespace relaykit::learn {

struct KnnConfig {
  int k = 5;
  double p = 2.0;  // Minkowski exponent

  void validate() const {
    if (k < 1) throw ConfigError("knn: k must be >= 1");
    if (!(p >= 1.0)) throw ConfigError("knn: p must be >= 1");
  }
};

struct KnnModel {
  KnnConfig cfg;
  Dataset train;

  double distance(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    if (cfg.p == 2.0) {
      for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
      return std::sqrt(s);
    }
    if (cfg.p == 1.0) {
      for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
      return s;
    }
    for (std::size_t j = 0; j < a.size(); ++j) s += std::pow(std::abs(a[j] - b[j]), cfg.p);
    return std::pow(s, 1.0 / cfg.p);
  }

  /// Indices of the k nearest training rows; equal distances resolve to the lower index.
  std::vector<std::size_t> neighbours(std::span<const double> row) const {
    const std::size_t n = train.n();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = {distance(row, train.x.row(i)), i};
    const auto k = static_cast<std::size_t>(cfg.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
  }

  /// Vote fractions among the k neighbours.
  std::vector<double> predict_proba(std::span<const double> row) const {
    std::vector<double> v(train.n_classes(), 0.0);
    for (auto i : neighbours(row)) v[train.y[i]] += 1.0;
    for (auto& x : v) x /= static_cast<double>(cfg.k);
    return v;
  }
};

inline KnnModel train_knn(const Dataset& d, const KnnConfig& cfg) {
  cfg.validate();
  d.validate();
  if (static_cast<std::size_t>(cfg.k) > d.n())
    throw DataError("knn: k = " + std::to_string(cfg.k) + " exceeds " + std::to_string(d.n()) + " training rows");
  return KnnModel{cfg, d};
}

}  // namespace relaykit::learn
