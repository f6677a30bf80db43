#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"

namespace relaykit::learn {

struct NbModel {
  int n_classes = 0;
  std::vector<double> log_prior;
  std::vector<std::vector<double>> mean, var;  // [class][feature]
  double epsilon = 0.0;

  std::vector<double> log_joint(std::span<const double> row) const {
    std::vector<double> lj(n_classes);
    for (int c = 0; c < n_classes; ++c) {
      double s = log_prior[c];
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double v = var[c][j];
        const double z = row[j] - mean[c][j];
        s -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + z * z / v);
      }
      lj[c] = s;
    }
    return lj;
  }

  std::vector<double> predict_proba(std::span<const double> row) const {
    auto lj = log_joint(row);
    const double mx = *std::max_element(lj.begin(), lj.end());
    double s = 0.0;
    for (auto& v : lj) s += (v = std::exp(v - mx));
    for (auto& v : lj) v /= s;
    return lj;
  }
};

/// Gaussian naive Bayes; variances are population variances plus
/// 1e-9 times the largest overall feature variance.
inline NbModel train_nb(const Dataset& d) {
  d.validate();
  if (d.n() == 0) throw DataError("nb: no training rows");
  const std::size_t n = d.n(), m = d.d();
  const int K = d.n_classes();
  NbModel nb;
  nb.n_classes = K;
  double max_var = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double mu = 0.0, s = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += d.x(i, j);
    mu /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) s += (d.x(i, j) - mu) * (d.x(i, j) - mu);
    max_var = std::max(max_var, s / static_cast<double>(n));
  }
  nb.epsilon = 1e-9 * max_var;
  const auto counts = d.class_counts();
  nb.mean.assign(K, std::vector<double>(m, 0.0));
  nb.var.assign(K, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) nb.mean[d.y[i]][j] += d.x(i, j);
  for (int c = 0; c < K; ++c)
    for (std::size_t j = 0; j < m; ++j)
      if (counts[c] > 0) nb.mean[c][j] /= static_cast<double>(counts[c]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double z = d.x(i, j) - nb.mean[d.y[i]][j];
      nb.var[d.y[i]][j] += z * z;
    }
  for (int c = 0; c < K; ++c) {
    nb.log_prior.push_back(counts[c] > 0 ? std::log(static_cast<double>(counts[c]) / static_cast<double>(n))
                                         : -std::numeric_limits<double>::max());
    for (std::size_t j = 0; j < m; ++j) {
      if (counts[c] > 0) nb.var[c][j] /= static_cast<double>(counts[c]);
      nb.var[c][j] += nb.epsilon;
      if (counts[c] > 0 && !(nb.var[c][j] > 0))
        throw DataError("nb: zero variance for class " + d.class_names[c] + " feature " + std::to_string(j) +
                        " after smoothing");
      if (counts[c] == 0) nb.var[c][j] = 1.0;
    }
  }
  return nb;
}

}  // namespace relaykit::learn
