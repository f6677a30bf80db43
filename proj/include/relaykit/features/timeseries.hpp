#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relaykit/error.hpp"

namespace relaykit::features {

/// Linear-interpolation quantile (the usual "type 7" definition), q in [0, 1].
/// Positions within 1e-9 of an integer snap to it, so q = 0.3 on 41 samples is
/// exactly the 13th order statistic despite 0.3 not being representable.
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw DataError("quantile of empty sequence");
  std::sort(x.begin(), x.end());
  double h = (static_cast<double>(x.size()) - 1.0) * q;
  if (std::abs(h - std::round(h)) <= 1e-9 * std::max(1.0, h)) h = std::round(h);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// Mean absolute consecutive change over pairs whose samples both lie in the
/// [q(ql), q(qh)] value corridor. 0 when no such pair exists.
inline double change_quantile(std::span<const double> x, double ql, double qh) {
  if (!(ql >= 0 && ql < qh && qh <= 1)) throw ConfigError("change_quantile: need 0 <= ql < qh <= 1");
  if (x.size() < 2) return 0.0;
  std::vector<double> v(x.begin(), x.end());
  const double lo = quantile(v, ql), hi = quantile(v, qh);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const bool in0 = x[t - 1] >= lo && x[t - 1] <= hi;
    const bool in1 = x[t] >= lo && x[t] <= hi;
    if (in0 && in1) {
      sum += std::abs(x[t] - x[t - 1]);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;                  // population (1/n)
  std::optional<double> excess_kurtosis;  // empty when the signal is constant
};

inline Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw DataError("moments: need at least 2 samples");
  const double n = static_cast<double>(x.size());
  Moments m;
  double peak = 0.0;
  for (double v : x) {
    m.mean += v;
    peak = std::max(peak, std::abs(v));
  }
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m.mean) * (v - m.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  m.variance = m2;
  // Rounding in the mean leaves a tiny spread on constant input; treat it as zero.
  const double floor = 1e-12 * peak;
  if (m2 > floor * floor && m2 > 0.0) m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return m;
}

inline double variance(std::span<const double> x) { return moments(x).variance; }

inline double excess_kurtosis(std::span<const double> x) {
  auto m = moments(x);
  if (!m.excess_kurtosis) throw DataError("excess_kurtosis: zero variance");
  return *m.excess_kurtosis;
}

inline double stddev(std::span<const double> x) { return std::sqrt(moments(x).variance); }

/// sqrt of the summed squared first differences.
inline double complexity_invariant_distance(std::span<const double> x) {
  if (x.size() < 2) throw DataError("cid: need at least 2 samples");
  double s = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) s += (x[t] - x[t - 1]) * (x[t] - x[t - 1]);
  return std::sqrt(s);
}

/// -ln(A/B) with A, B the template-pair counts at lengths m+1 and m. Both use the
/// first n - m templates; pairs match when the Chebyshev distance is < r.
inline double sample_entropy(std::span<const double> x, int m, double r) {
  const long n = static_cast<long>(x.size());
  if (m < 1) throw ConfigError("sample_entropy: m must be >= 1");
  if (!(r > 0)) throw ConfigError("sample_entropy: r must be > 0");
  if (n <= m + 1) throw DataError("sample_entropy: signal too short for m");
  const long nt = n - m;
  long long a = 0, b = 0;
  for (long i = 0; i < nt; ++i)
    for (long j = i + 1; j < nt; ++j) {
      double d = 0.0;
      for (int k = 0; k < m; ++k) d = std::max(d, std::abs(x[i + k] - x[j + k]));
      if (d < r) {
        ++b;
        if (std::abs(x[i + m] - x[j + m]) < r) ++a;
      }
    }
  if (a == 0 || b == 0) throw DataError("sample_entropy: undefined (no template matches) for this r");
  return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

/// Defaults m = 2, r = 0.2 standard deviations.
inline double sample_entropy(std::span<const double> x) { return sample_entropy(x, 2, 0.2 * stddev(x)); }

enum class TrendAttr { slope, intercept, stderr_ };
enum class TrendAgg { mean, min, max, var };

inline std::string_view to_string(TrendAttr a) {
  return a == TrendAttr::slope ? "slope" : a == TrendAttr::intercept ? "intercept" : "stderr";
}
inline std::string_view to_string(TrendAgg a) {
  switch (a) {
    case TrendAgg::mean: return "mean";
    case TrendAgg::min: return "min";
    case TrendAgg::max: return "max";
    case TrendAgg::var: return "var";
  }
  return "";
}
inline TrendAttr parse_trend_attr(std::string_view s) {
  if (s == "slope") return TrendAttr::slope;
  if (s == "intercept") return TrendAttr::intercept;
  if (s == "stderr") return TrendAttr::stderr_;
  throw ConfigError("unknown trend attribute '" + std::string(s) + "'");
}
inline TrendAgg parse_trend_agg(std::string_view s) {
  if (s == "mean") return TrendAgg::mean;
  if (s == "min") return TrendAgg::min;
  if (s == "max") return TrendAgg::max;
  if (s == "var") return TrendAgg::var;
  throw ConfigError("unknown trend aggregate '" + std::string(s) + "'");
}

struct LineFit {
  double slope = 0, intercept = 0, stderr_ = 0;
};

/// Least-squares line through (t, y), t = 0..n-1 in samples.
inline LineFit fit_line(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double tbar = (n - 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double dt = static_cast<double>(t) - tbar;
    sxx += dt * dt;
    sxy += dt * (y[t] - ybar);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * tbar;
  if (y.size() > 2) {
    double sse = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      const double e = y[t] - (f.intercept + f.slope * static_cast<double>(t));
      sse += e * e;
    }
    f.stderr_ = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return f;
}

/// Fits a line to each full chunk and aggregates one attribute across chunks.
inline double linear_trend(std::span<const double> x, long chunk_len, TrendAttr attr, TrendAgg agg) {
  if (chunk_len < 2) throw ConfigError("linear_trend: chunk_len must be >= 2");
  if (static_cast<long>(x.size()) < chunk_len) throw DataError("linear_trend: signal shorter than one chunk");
  const long chunks = static_cast<long>(x.size()) / chunk_len;
  std::vector<double> vals;
  vals.reserve(chunks);
  for (long c = 0; c < chunks; ++c) {
    auto f = fit_line(x.subspan(c * chunk_len, chunk_len));
    vals.push_back(attr == TrendAttr::slope ? f.slope : attr == TrendAttr::intercept ? f.intercept : f.stderr_);
  }
  switch (agg) {
    case TrendAgg::mean: {
      double s = 0.0;
      for (double v : vals) s += v;
      return s / static_cast<double>(vals.size());
    }
    case TrendAgg::min: return *std::min_element(vals.begin(), vals.end());
    case TrendAgg::max: return *std::max_element(vals.begin(), vals.end());
    case TrendAgg::var: {
      double s = 0.0, s2 = 0.0;
      for (double v : vals) s += v;
      const double mu = s / static_cast<double>(vals.size());
      for (double v : vals) s2 += (v - mu) * (v - mu);
      return s2 / static_cast<double>(vals.size());
    }
  }
  return 0.0;
}

struct ArFit {
  double phi0 = 0.0;
  std::vector<double> phi;  // phi[0] is the lag-1 coefficient
};

/// Ordinary least squares of x_t on (1, x_{t-1}, ..., x_{t-k}).
inline ArFit ar_fit(std::span<const double> x, int k, bool with_intercept) {
  if (k < 1) throw ConfigError("ar_fit: k must be >= 1");
  const long n = static_cast<long>(x.size());
  if (n < k + 2) throw DataError("ar_fit: need at least k + 2 samples");
  const long rows = n - k;
  const int cols = k + (with_intercept ? 1 : 0);
  if (rows < cols) throw DataError("ar_fit: fewer equations than coefficients");
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (long t = k; t < n; ++t) {
    const long r = t - k;
    int c = 0;
    if (with_intercept) X(r, c++) = 1.0;
    for (int l = 1; l <= k; ++l) X(r, c++) = x[t - l];
    y(r) = x[t];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw DataError("ar_fit: rank-deficient design matrix");
  Eigen::VectorXd b = qr.solve(y);
  ArFit f;
  int c = 0;
  if (with_intercept) f.phi0 = b(c++);
  f.phi.assign(b.data() + c, b.data() + b.size());
  return f;
}

}  // namespace relaykit::features
