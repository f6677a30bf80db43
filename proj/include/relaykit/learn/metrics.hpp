#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/learn/dataset.hpp"

namespace relaykit::learn {

/// counts[true][predicted]
using Confusion = std::vector<std::vector<long>>;

inline Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred, int n_classes) {
  if (y_true.size() != y_pred.size()) throw DataError("confusion: length mismatch");
  Confusion c(n_classes, std::vector<long>(n_classes, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes)
      throw DataError("confusion: label outside 0..c-1");
    ++c[y_true[i]][y_pred[i]];
  }
  return c;
}

inline std::vector<double> per_class_recall(const Confusion& c) {
  std::vector<double> r;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].size() != c.size()) throw DataError("confusion matrix must be square");
    long total = 0;
    for (long v : c[i]) total += v;
    if (total <= 0) throw DataError("balanced accuracy: class " + std::to_string(i) + " has no samples");
    r.push_back(static_cast<double>(c[i][i]) / static_cast<double>(total));
  }
  return r;
}

/// Mean of per-class recalls.
inline double balanced_accuracy(const Confusion& c) {
  if (c.empty()) throw DataError("balanced accuracy: empty confusion matrix");
  auto r = per_class_recall(c);
  double s = 0.0;
  for (double v : r) s += v;
  return s / static_cast<double>(r.size());
}

inline double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw DataError("accuracy: bad lengths");
  long ok = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) ok += y_true[i] == y_pred[i];
  return static_cast<double>(ok) / static_cast<double>(y_true.size());
}

/// Mean multinomial deviance -log p(y) over rows of a score matrix.
inline double multinomial_deviance(const Matrix& scores, const std::vector<int>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s -= std::log(std::max(scores(i, y[i]), 1e-300));
  return s / static_cast<double>(y.size());
}

}  // namespace relaykit::learn
