#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::detector {

struct DetectorConfig {
  double alpha = 0.05;       // ED threshold
  double th = 0.05;          // threshold on the normalized CDF index
  double pre_cycles = 0.5;
  double post_cycles = 1.0;

  void validate() const {
    if (!(alpha > 0)) throw ConfigError("detector: alpha must be > 0");
    if (!(th > 0)) throw ConfigError("detector: th must be > 0");
    if (!(pre_cycles >= 0)) throw ConfigError("detector: pre_cycles must be >= 0");
    if (!(post_cycles >= 1)) throw ConfigError("detector: post_cycles must be >= 1");
  }
};

enum class Method { ed, cdf };

inline std::string_view to_string(Method m) { return m == Method::ed ? "ed" : "cdf"; }
inline Method parse_method(std::string_view s) {
  if (s == "ed") return Method::ed;
  if (s == "cdf") return Method::cdf;
  throw ConfigError("unknown detector method '" + std::string(s) + "'");
}

/// Traces are indexed by the newest sample of the current cycle window; entries before
/// the first full pair of cycles are 0.
struct DetectionResult {
  bool triggered = false;
  std::optional<long> trigger_index;
  std::optional<int> trigger_phase;  // 0, 1, 2 for a, b, c
  std::array<std::vector<double>, 3> index_trace;
  std::array<std::vector<double>, 3> raw_trace;  // CDF only: unnormalized difference of sums
};

struct CaptureLengths {
  long pre = 0, post = 0;
  long total() const { return pre + post; }
};

/// Capture sizes use the exact period fs/f0, so 1.5 cycles at 10 kHz/60 Hz is 250 samples.
inline CaptureLengths capture_lengths(const SamplingSpec& spec, double pre_cycles, double post_cycles) {
  const double period = spec.sample_rate_hz / spec.nominal_freq_hz;
  CaptureLengths c;
  c.pre = std::lround(pre_cycles * period);
  c.post = std::lround((pre_cycles + post_cycles) * period) - c.pre;
  return c;
}

namespace detail {

inline DetectionResult scan(const ThreePhaseRecord& rec, const DetectorConfig& cfg, Method method) {
  cfg.validate();
  const long nc = rec.sampling.samples_per_cycle();
  const long n = static_cast<long>(rec.size());
  if (n < 2 * nc)
    throw DataError("detector: record of " + std::to_string(n) + " samples is shorter than two cycles (" +
                    std::to_string(2 * nc) + ")");
  double peak = 0.0;
  for (const auto& ph : rec.phases)
    for (double v : ph) peak = std::max(peak, std::abs(v));
  const double eps = std::max(1e-12 * peak, 1e-30);
  const double threshold = method == Method::ed ? cfg.alpha : cfg.th;
  const long lookahead = capture_lengths(rec.sampling, cfg.pre_cycles, cfg.post_cycles).post;

  DetectionResult res;
  std::array<std::vector<long double>, 3> prefix;
  for (int p = 0; p < 3; ++p) {
    res.index_trace[p].assign(n, 0.0);
    if (method == Method::cdf) res.raw_trace[p].assign(n, 0.0);
    prefix[p].assign(n + 1, 0.0L);
    for (long i = 0; i < n; ++i) prefix[p][i + 1] = prefix[p][i] + std::abs(static_cast<long double>(rec.phases[p][i]));
  }
  for (long tau = 2 * nc - 1; tau < n; ++tau) {
    for (int p = 0; p < 3; ++p) {
      const auto& P = prefix[p];
      const double cur = static_cast<double>(P[tau + 1] - P[tau + 1 - nc]);
      const double prev = static_cast<double>(P[tau + 1 - nc] - P[tau + 1 - 2 * nc]);
      double idx;
      if (method == Method::ed) {
        idx = cur < eps ? 0.0 : (cur - prev) / cur;
      } else {
        res.raw_trace[p][tau] = cur - prev;
        idx = (cur - prev) / std::max(prev, eps);
      }
      res.index_trace[p][tau] = idx;
      if (!res.triggered && idx >= threshold && tau + lookahead <= n) {
        res.triggered = true;
        res.trigger_index = tau;
        res.trigger_phase = p;
      }
    }
  }
  return res;
}

}  // namespace detail

/// ED index: (S_cur - S_prev) / S_cur over two successive cycles of |x|.
inline DetectionResult ed_scan(const ThreePhaseRecord& rec, const DetectorConfig& cfg = {}) {
  return detail::scan(rec, cfg, Method::ed);
}

/// CDF index: S_cur - S_prev, compared to th after dividing by the trailing cycle sum.
inline DetectionResult cdf_scan(const ThreePhaseRecord& rec, const DetectorConfig& cfg = {}) {
  return detail::scan(rec, cfg, Method::cdf);
}

inline DetectionResult scan(const ThreePhaseRecord& rec, const DetectorConfig& cfg, Method m) {
  return detail::scan(rec, cfg, m);
}

/// Window of pre + post cycles around the trigger; the trigger sample opens the post part.
inline ThreePhaseRecord capture(const ThreePhaseRecord& rec, const DetectionResult& det, const DetectorConfig& cfg) {
  cfg.validate();
  if (!det.triggered || !det.trigger_index) throw DataError("capture: detector did not trigger");
  const auto len = capture_lengths(rec.sampling, cfg.pre_cycles, cfg.post_cycles);
  const long start = *det.trigger_index - len.pre;
  if (start < 0 || start + len.total() > static_cast<long>(rec.size()))
    throw DataError("capture: need " + std::to_string(len.pre) + " samples before and " + std::to_string(len.post) +
                    " from trigger " + std::to_string(*det.trigger_index) + " in a record of " +
                    std::to_string(rec.size()));
  ThreePhaseRecord out = window(rec, start, len.total());
  out.meta["trigger_index"] = std::to_string(*det.trigger_index);
  return out;
}

}  // namespace relaykit::detector
