#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "relaykit/error.hpp"

namespace relaykit::learn {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rs) {
    Matrix m;
    m.rows = rs.size();
    m.cols = rs.empty() ? 0 : rs.front().size();
    m.data.reserve(m.rows * m.cols);
    for (const auto& r : rs) {
      if (r.size() != m.cols) throw DataError("matrix: ragged rows");
      m.data.insert(m.data.end(), r.begin(), r.end());
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

  void push_row(std::span<const double> r) {
    if (rows == 0 && cols == 0) cols = r.size();
    if (r.size() != cols) throw DataError("matrix: row width " + std::to_string(r.size()) + " != " + std::to_string(cols));
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
  }

  Matrix select_rows(const std::vector<std::size_t>& idx) const {
    Matrix m(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols), cols,
                  m.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    return m;
  }

  Matrix select_cols(const std::vector<std::size_t>& idx) const {
    Matrix m(rows, idx.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) m(r, j) = (*this)(r, idx[j]);
    return m;
  }
};

struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> class_names;

  std::size_t n() const { return x.rows; }
  std::size_t d() const { return x.cols; }
  int n_classes() const { return static_cast<int>(class_names.size()); }

  void validate() const {
    if (y.size() != x.rows) throw DataError("dataset: label count differs from row count");
    for (double v : x.data)
      if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
    for (int v : y)
      if (v < 0 || v >= n_classes()) throw DataError("dataset: label outside 0..c-1");
  }

  std::vector<long> class_counts() const {
    std::vector<long> c(class_names.size(), 0);
    for (int v : y) ++c[v];
    return c;
  }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset s;
    s.x = x.select_rows(idx);
    s.y.reserve(idx.size());
    for (auto i : idx) s.y.push_back(y[i]);
    s.class_names = class_names;
    return s;
  }

  Dataset columns(const std::vector<std::size_t>& idx) const {
    Dataset s;
    s.x = x.select_cols(idx);
    s.y = y;
    s.class_names = class_names;
    return s;
  }
};

}  // namespace relaykit::learn
