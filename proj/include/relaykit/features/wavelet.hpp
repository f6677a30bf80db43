#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/features/wavelet_filters.hpp"

namespace relaykit::features {

using detail::FilterBankTable;
using detail::WaveletFamily;

/// Longest filter bank accepted (coif5).
inline constexpr std::size_t k_max_filter_len = 30;

enum class ExtensionMode { symmetric, periodization };

inline std::string_view family_prefix(WaveletFamily f) {
  switch (f) {
    case WaveletFamily::daubechies: return "db";
    case WaveletFamily::symlet: return "sym";
    case WaveletFamily::coiflet: return "coif";
    case WaveletFamily::biorthogonal: return "bior";
    case WaveletFamily::reverse_biorthogonal: return "rbio";
  }
  return "";
}

inline const FilterBankTable& filter_bank(std::string_view name) {
  for (const auto& fb : detail::k_filter_banks)
    if (fb.name == name) return fb;
  throw ConfigError("unsupported wavelet '" + std::string(name) + "'");
}

inline std::vector<std::string_view> supported_wavelets() {
  std::vector<std::string_view> out;
  for (const auto& fb : detail::k_filter_banks) out.push_back(fb.name);
  return out;
}

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::daubechies;
  std::string order = "4";
  int level = 1;

  std::string name() const { return std::string(family_prefix(family)) + order; }
  const FilterBankTable& bank() const { return filter_bank(name()); }

  /// "db4" + level -> spec. Longer prefixes are tried first so "rbio" is not read as "bior".
  static WaveletSpec parse(std::string_view name, int level) {
    for (auto f : {WaveletFamily::reverse_biorthogonal, WaveletFamily::biorthogonal, WaveletFamily::coiflet,
                   WaveletFamily::symlet, WaveletFamily::daubechies}) {
      auto pre = family_prefix(f);
      if (name.substr(0, pre.size()) == pre) {
        WaveletSpec s{f, std::string(name.substr(pre.size())), level};
        filter_bank(s.name());
        return s;
      }
    }
    throw ConfigError("unsupported wavelet '" + std::string(name) + "'");
  }
};

/// Deepest level at which the filter still fits: floor(log2(n / (F - 1))).
inline int max_level(long signal_len, long filter_len) {
  if (filter_len < 2) throw ConfigError("max_level: filter length must be >= 2");
  if (signal_len < filter_len) throw ConfigError("max_level: signal shorter than filter");
  int level = 0;
  // Integer form of the log: largest L with (F - 1) * 2^L <= n.
  while ((filter_len - 1) * (1L << (level + 1)) <= signal_len) ++level;
  return level;
}

struct DwtResult {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;  // details[l] holds level l + 1
};

namespace detail {

/// Half-point symmetric extension index, valid for any integer i.
inline long reflect(long i, long n) {
  const long p = 2 * n;
  i %= p;
  if (i < 0) i += p;
  return i < n ? i : p - 1 - i;
}

inline std::vector<double> analysis(std::span<const double> x, std::span<const double> f, ExtensionMode mode) {
  const long F = static_cast<long>(f.size());
  if (mode == ExtensionMode::symmetric) {
    const long n = static_cast<long>(x.size());
    std::vector<double> out((n + F - 1) / 2);
    for (long o = 0; o < static_cast<long>(out.size()); ++o) {
      double s = 0.0;
      for (long j = 0; j < F; ++j) s += f[j] * x[reflect(2 * o + 1 - j, n)];
      out[o] = s;
    }
    return out;
  }
  std::vector<double> xe(x.begin(), x.end());
  if (xe.size() % 2) xe.push_back(xe.back());
  const long n = static_cast<long>(xe.size());
  std::vector<double> out(n / 2);
  for (long o = 0; o < n / 2; ++o) {
    double s = 0.0;
    for (long j = 0; j < F; ++j) {
      long k = (2 * o + F / 2 - j) % n;
      if (k < 0) k += n;
      s += f[j] * xe[k];
    }
    out[o] = s;
  }
  return out;
}

inline std::vector<double> synthesis(std::span<const double> a, std::span<const double> d, const FilterBankTable& fb,
                                     ExtensionMode mode) {
  const long F = static_cast<long>(fb.rec_lo.size());
  const long nc = static_cast<long>(a.size());
  if (mode == ExtensionMode::symmetric) {
    // Keeps the fully overlapped part of the upsampled convolution.
    const long nout = 2 * nc - F + 2;
    if (nout < 1) throw DataError("idwt: too few coefficients for this filter");
    std::vector<double> out(nout, 0.0);
    long o = 0;
    for (long i = F / 2 - 1; i < nc; ++i, o += 2) {
      double even = 0.0, odd = 0.0;
      for (long j = 0; j < F / 2; ++j) {
        even += fb.rec_lo[2 * j] * a[i - j] + fb.rec_hi[2 * j] * d[i - j];
        odd += fb.rec_lo[2 * j + 1] * a[i - j] + fb.rec_hi[2 * j + 1] * d[i - j];
      }
      out[o] = even;
      out[o + 1] = odd;
    }
    return out;
  }
  const long n = 2 * nc;
  std::vector<double> out(n, 0.0);
  for (long o = 0; o < nc; ++o)
    for (long j = 0; j < F; ++j) {
      long k = (2 * o + 1 - F / 2 + j) % n;
      if (k < 0) k += n;
      out[k] += a[o] * fb.rec_lo[j] + d[o] * fb.rec_hi[j];
    }
  return out;
}

}  // namespace detail

/// Multilevel decomposition with the same boundary handling as PyWavelets' wavedec.
inline DwtResult dwt(std::span<const double> signal, const WaveletSpec& spec,
                     ExtensionMode mode = ExtensionMode::symmetric) {
  const auto& fb = spec.bank();
  const long F = static_cast<long>(fb.dec_lo.size());
  if (F > static_cast<long>(k_max_filter_len)) throw ConfigError("dwt: filter longer than supported");
  if (static_cast<long>(signal.size()) < F)
    throw DataError("dwt: signal of " + std::to_string(signal.size()) + " samples is shorter than the " + spec.name() +
                    " filter");
  if (spec.level < 1) throw ConfigError("dwt: level must be >= 1");
  const int lmax = max_level(static_cast<long>(signal.size()), F);
  if (spec.level > lmax)
    throw ConfigError("dwt: level " + std::to_string(spec.level) + " exceeds max level " + std::to_string(lmax) +
                      " for " + spec.name() + " on " + std::to_string(signal.size()) + " samples");
  DwtResult r;
  std::vector<double> a(signal.begin(), signal.end());
  r.details.reserve(spec.level);
  for (int l = 0; l < spec.level; ++l) {
    auto d = detail::analysis(a, fb.dec_hi, mode);
    a = detail::analysis(a, fb.dec_lo, mode);
    r.details.push_back(std::move(d));
  }
  r.approx = std::move(a);
  return r;
}

/// Inverse of dwt. The result can be one sample longer than an odd-length input;
/// pass `length` to trim.
inline std::vector<double> idwt(const DwtResult& c, std::string_view wavelet,
                                ExtensionMode mode = ExtensionMode::symmetric, long length = -1) {
  const auto& fb = filter_bank(wavelet);
  std::vector<double> a = c.approx;
  for (auto it = c.details.rbegin(); it != c.details.rend(); ++it) {
    if (a.size() == it->size() + 1) a.pop_back();
    if (a.size() != it->size()) throw DataError("idwt: coefficient lengths do not match");
    a = detail::synthesis(a, *it, fb, mode);
  }
  if (length >= 0) {
    if (static_cast<long>(a.size()) < length) throw DataError("idwt: requested length exceeds reconstruction");
    a.resize(length);
  }
  return a;
}

/// Sum of squared coefficients.
inline double wavelet_energy(std::span<const double> coeffs) {
  double e = 0.0;
  for (double c : coeffs) e += c * c;
  return e;
}

}  // namespace relaykit::features
