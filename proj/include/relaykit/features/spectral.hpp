#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "relaykit/error.hpp"

namespace relaykit::features {

using cplx = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

/// In-place iterative radix-2 transform; sign -1 forward, +1 inverse (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx w = std::polar(1.0, ang * static_cast<double>(k));
        const cplx u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
  }
}

/// Bluestein chirp-z transform for arbitrary lengths.
inline std::vector<cplx> fft_any(const std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  if (is_pow2(n)) {
    auto a = x;
    fft_pow2(a, sign);
    return a;
  }
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cplx> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for long inputs.
    const double kk = static_cast<double>((k * k) % (2 * n));
    w[k] = std::polar(1.0, sign * std::numbers::pi * kk / static_cast<double>(n));
  }
  std::vector<cplx> a(m, 0.0), b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * w[k];
  b[0] = std::conj(w[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(w[k]);
  fft_pow2(a, -1);
  fft_pow2(b, -1);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_pow2(a, 1);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] / static_cast<double>(m) * w[k];
  return out;
}

}  // namespace detail

/// Forward DFT X(k) = sum_t x_t exp(-j 2 pi k t / n) for any n >= 1.
inline std::vector<cplx> fft(std::span<const cplx> x) {
  if (x.empty()) throw DataError("fft: empty input");
  return detail::fft_any(std::vector<cplx>(x.begin(), x.end()), -1);
}

/// Non-negative-frequency bins 0..floor(n/2) of the DFT of a real signal.
inline std::vector<cplx> fft_coefficients(std::span<const double> x) {
  if (x.empty()) throw DataError("fft_coefficients: empty input");
  std::vector<cplx> c(x.begin(), x.end());
  auto X = detail::fft_any(c, -1);
  X.resize(x.size() / 2 + 1);
  return X;
}

enum class WindowKind { hann, boxcar };

inline WindowKind parse_window(std::string_view s) {
  if (s == "hann") return WindowKind::hann;
  if (s == "boxcar") return WindowKind::boxcar;
  throw ConfigError("unknown window '" + std::string(s) + "'");
}
inline std::string_view to_string(WindowKind w) { return w == WindowKind::hann ? "hann" : "boxcar"; }

struct WelchConfig {
  long segment_len = 64;
  double overlap_fraction = 0.5;
  WindowKind window = WindowKind::hann;
  double sample_rate = 1.0;
};

/// One-sided power spectral density by averaging windowed periodograms (no detrending).
/// Bin k is at frequency k * sample_rate / segment_len.
inline std::vector<double> welch_density(std::span<const double> x, const WelchConfig& cfg) {
  const long seg = cfg.segment_len;
  if (seg < 2) throw ConfigError("welch: segment_len must be >= 2");
  if (!(cfg.overlap_fraction >= 0 && cfg.overlap_fraction < 1)) throw ConfigError("welch: overlap must be in [0, 1)");
  if (!(cfg.sample_rate > 0)) throw ConfigError("welch: sample_rate must be > 0");
  if (seg > static_cast<long>(x.size()))
    throw DataError("welch: segment of " + std::to_string(seg) + " longer than signal of " + std::to_string(x.size()));
  std::vector<double> w(seg, 1.0);
  if (cfg.window == WindowKind::hann)
    for (long i = 0; i < seg; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg));
  double wss = 0.0;
  for (double v : w) wss += v * v;
  const double scale = 1.0 / (cfg.sample_rate * wss);
  const long noverlap = static_cast<long>(std::floor(cfg.overlap_fraction * static_cast<double>(seg)));
  const long step = seg - noverlap;
  const long nseg = (static_cast<long>(x.size()) - seg) / step + 1;
  const long nb = seg / 2 + 1;
  std::vector<double> p(nb, 0.0);
  std::vector<cplx> buf(seg);
  for (long s = 0; s < nseg; ++s) {
    for (long i = 0; i < seg; ++i) buf[i] = x[s * step + i] * w[i];
    auto X = detail::fft_any(buf, -1);
    for (long k = 0; k < nb; ++k) {
      double v = std::norm(X[k]) * scale;
      const bool nyquist = (seg % 2 == 0) && k == seg / 2;
      if (k != 0 && !nyquist) v *= 2.0;
      p[k] += v;
    }
  }
  for (auto& v : p) v /= static_cast<double>(nseg);
  return p;
}

}  // namespace relaykit::features
