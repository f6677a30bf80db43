#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "relaykit/random.hpp"
#include "relaykit/waveform.hpp"

namespace testutil {

using relaykit::SamplingSpec;
using relaykit::ThreePhaseRecord;

/// Three-phase record from a per-phase sample function f(phase, index).
inline ThreePhaseRecord make_record(std::size_t n, const std::function<double(int, std::size_t)>& f,
                                    SamplingSpec spec = {}) {
  ThreePhaseRecord r;
  r.sampling = spec;
  for (int p = 0; p < 3; ++p) {
    r.phases[p].resize(n);
    for (std::size_t i = 0; i < n; ++i) r.phases[p][i] = f(p, i);
  }
  return r;
}

/// Balanced sinusoid at the nominal frequency.
inline ThreePhaseRecord sinusoid(std::size_t n, double amp = 1.0, double phase = 0.0, SamplingSpec spec = {}) {
  const double w = 2 * std::numbers::pi * spec.nominal_freq_hz / spec.sample_rate_hz;
  return make_record(
      n, [&](int p, std::size_t i) { return amp * std::sin(w * static_cast<double>(i) + phase - 2 * std::numbers::pi * p / 3); },
      spec);
}

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double lo = -1, double hi = 1) {
  relaykit::Rng r(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = r.uniform(lo, hi);
  return x;
}

}  // namespace testutil
