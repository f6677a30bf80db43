#pragma once

// Reference implementations shared by the unit tests and the acceptance run.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Oracles below are written from the textbook definitions with no shared code.

// q is read as a decimal with at most 9 digits and the position k(n-1)/1e9 is split
// with integer arithmetic, so ties with order statistics are exact.
inline double o_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const long long k = std::llround(q * 1e9), num = k * static_cast<long long>(v.size() - 1);
  const auto i = static_cast<std::size_t>(num / 1000000000LL);
  const double f = static_cast<double>(num % 1000000000LL) / 1e9;
  if (f == 0.0 || i + 1 >= v.size()) return v[i];
  return v[i] * (1 - f) + v[i + 1] * f;
}

inline double o_change_quantile(const std::vector<double>& x, double ql, double qh) {
  const double lo = o_quantile(x, ql), hi = o_quantile(x, qh);
  std::vector<double> diffs;
  for (std::size_t t = 0; t + 1 < x.size(); ++t)
    if (lo <= x[t] && x[t] <= hi && lo <= x[t + 1] && x[t + 1] <= hi) diffs.push_back(std::abs(x[t + 1] - x[t]));
  if (diffs.empty()) return 0.0;
  long double s = 0;
  for (double d : diffs) s += d;
  return static_cast<double>(s / diffs.size());
}

struct OMoments {
  double mean, var, kurt;
};

inline OMoments o_moments(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += v;
  const long double mu = s / x.size();
  long double c2 = 0, c4 = 0;
  for (double v : x) {
    c2 += std::pow(v - mu, 2);
    c4 += std::pow(v - mu, 4);
  }
  c2 /= x.size();
  c4 /= x.size();
  return {static_cast<double>(mu), static_cast<double>(c2), static_cast<double>(c4 / (c2 * c2) - 3)};
}

inline double o_cid(const std::vector<double>& x) {
  long double s = 0;
  for (std::size_t t = 1; t < x.size(); ++t) s += std::pow(x[t] - x[t - 1], 2);
  return static_cast<double>(std::sqrt(s));
}

// Returns nullopt when either count is zero.
inline std::optional<double> o_sampen(const std::vector<double>& x, int m, double r) {
  const std::size_t n = x.size(), nt = n - m;
  auto templates = [&](int len) {
    std::vector<std::vector<double>> t;
    for (std::size_t i = 0; i < nt; ++i) t.emplace_back(x.begin() + i, x.begin() + i + len);
    return t;
  };
  auto count = [&](const std::vector<std::vector<double>>& t) {
    long c = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j) {
        double d = 0;
        for (std::size_t k = 0; k < t[i].size(); ++k) d = std::max(d, std::abs(t[i][k] - t[j][k]));
        c += d < r;
      }
    return c;
  };
  const long b = count(templates(m)), a = count(templates(m + 1));
  if (a == 0 || b == 0) return std::nullopt;
  return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

// Line fit from the raw-sum normal equations.
inline std::array<double, 3> o_line(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  long double st = 0, stt = 0, sy = 0, sty = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    st += t;
    stt += static_cast<long double>(t) * t;
    sy += y[t];
    sty += t * y[t];
  }
  const long double det = n * stt - st * st;
  const double b = static_cast<double>((n * sty - st * sy) / det);
  const double a = static_cast<double>((sy - b * st) / n);
  long double sse = 0;
  for (std::size_t t = 0; t < y.size(); ++t) sse += std::pow(y[t] - a - b * static_cast<double>(t), 2);
  const double sxx = static_cast<double>(stt - st * st / n);
  const double se = y.size() > 2 ? static_cast<double>(std::sqrt(sse / (n - 2) / sxx)) : 0.0;
  return {b, a, se};
}

inline double o_linear_trend(const std::vector<double>& x, long chunk, int attr, int agg) {
  std::vector<double> v;
  for (long c = 0; (c + 1) * chunk <= static_cast<long>(x.size()); ++c)
    v.push_back(o_line(std::vector<double>(x.begin() + c * chunk, x.begin() + (c + 1) * chunk))[attr]);
  const auto m = o_moments(v.size() > 1 ? v : std::vector<double>{v[0], v[0]});
  switch (agg) {
    case 0: return m.mean;
    case 1: return *std::min_element(v.begin(), v.end());
    case 2: return *std::max_element(v.begin(), v.end());
    default: return m.var;
  }
}

inline std::vector<std::complex<double>> o_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> X(n / 2 + 1);
  for (std::size_t k = 0; k < X.size(); ++k)
    for (std::size_t t = 0; t < n; ++t)
      X[k] += x[t] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n));
  return X;
}

// Line-by-line transcription of the 2-winding fault-model script.
inline Eigen::MatrixXd script_two_winding(double MVA, double v1, double v2, double f, double Im, double Xl, double fault1,
                                   double fault2) {
  const double pi = std::numbers::pi;
  double Im2, Im1;
  Im2 = Im1 = Im;
  double fa = fault1 * 0.01;
  double fb = 1.0 - fa;
  double fc = fault2 * 0.01;
  double fd = 1.0 - fc;
  double i1 = MVA / v1;
  double i2 = MVA / v2;
  double z1 = v1 / i1;
  double z2 = v2 / i2;
  double w = 2 * pi * f;
  double Lk1 = Xl * z1 / w;
  double Lk2 = Xl * z2 / w;
  double L1l = Lk1 / 2 * fa;
  double L2l = Lk1 / 2 * fb;
  double L3l = Lk2 / 2 * fc;
  double L4l = Lk2 / 2 * fd;
  double L1m = (v1 / (w * Im1 * i1)) * fa * fa;
  double L2m = (v1 / (w * Im1 * i1)) * fb * fb;
  double L3m = (v2 / (w * Im2 * i2)) * fc * fc;
  double L4m = (v2 / (w * Im2 * i2)) * fd * fd;
  double L1 = L1l + L1m, L2 = L2l + L2m, L3 = L3l + L3m, L4 = L4l + L4m;
  double M12 = std::sqrt(L1m * L2m), M13 = std::sqrt(L1m * L3m), M14 = std::sqrt(L1m * L4m);
  double M23 = std::sqrt(L2m * L3m), M24 = std::sqrt(L2m * L4m), M34 = std::sqrt(L3m * L4m);
  Eigen::MatrixXd m(4, 4);
  m << L1, M12, M13, M14, M12, L2, M23, M24, M13, M23, L3, M34, M14, M24, M34, L4;
  return m;
}

// Line-by-line transcription of the 3-winding fault-model script; fe follows fault1
// exactly as written there.
inline Eigen::MatrixXd script_three_winding(double MVA, double v1, double v2, double v3, double f, double Im, double x12,
                                     double x13, double x23, double fault1, double fault2) {
  double w = 2 * std::numbers::pi * f;
  double Im1 = Im, Im2 = Im, Im3 = Im;
  double fa = fault1 * 0.01, fb = 1.0 - fa;
  double fc = fault2 * 0.01, fd = 1.0 - fc;
  double fe = fault1 * 0.01, ff = 1.0 - fe;
  double i1 = MVA / v1, i2 = MVA / v2, i3 = MVA / v3;
  double z1 = v1 / i1, z2 = v2 / i2, z3 = v3 / i3;
  double X1 = (x13 - x23 + x12) / 2;
  double X2 = (x23 - x13 + x12) / 2;
  double X3 = (x13 - x12 + x23) / 2;
  double Lk1 = X1 * z1 / w, Lk2 = X2 * z2 / w, Lk3 = X3 * z3 / w;
  double L1l = Lk1 * fa, L2l = Lk1 * fb;
  double L3l = Lk2 * fc, L4l = Lk2 * fd;
  double L5l = Lk3 * fe, L6l = Lk3 * ff;
  double L1m = v1 / (w * Im1 * i1) * fa * fa;
  double L2m = v1 / (w * Im1 * i1) * fb * fb;
  double L3m = v2 / (w * Im2 * i2) * fc * fc;
  double L4m = v2 / (w * Im2 * i2) * fd * fd;
  double L5m = v3 / (w * Im3 * i3) * fe * fe;
  double L6m = v3 / (w * Im3 * i3) * ff * ff;
  double Lm[6] = {L1m, L2m, L3m, L4m, L5m, L6m};
  double Ll[6] = {L1l, L2l, L3l, L4l, L5l, L6l};
  Eigen::MatrixXd m(6, 6);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) m(a, b) = a == b ? Ll[a] + Lm[a] : std::sqrt(Lm[a] * Lm[b]);
  return m;
}

}  // namespace oracle
