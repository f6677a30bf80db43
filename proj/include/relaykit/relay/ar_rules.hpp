#pragma once

#include <array>
#include <string>

#include "relaykit/error.hpp"
#include "relaykit/features/extract.hpp"
#include "relaykit/features/timeseries.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::relay {

struct ArRelayConfig {
  int lag = 10;
  double th1 = -0.7;  // direction threshold on phi_2
  double th2 = -0.1;  // zone threshold on phi_7

  void validate() const {
    if (lag < 8) throw ConfigError("ar relay: lag must be >= 8");
  }
};

enum class Direction { dfig_fed, grid_fed };
enum class Zone { zone1, zone2 };

inline std::string_view to_string(Direction d) { return d == Direction::dfig_fed ? "dfig_fed" : "grid_fed"; }
inline std::string_view to_string(Zone z) { return z == Zone::zone1 ? "zone1" : "zone2"; }

using PhaseCoefficients = std::array<double, 3>;

/// dfig_fed iff phi_2 <= th1 on every phase.
inline Direction direction_from_phi2(const PhaseCoefficients& phi2, const ArRelayConfig& cfg = {}) {
  for (double v : phi2)
    if (!(v <= cfg.th1)) return Direction::grid_fed;
  return Direction::dfig_fed;
}

/// zone2 iff phi_7 <= th2 on every phase.
inline Zone zone_from_phi7(const PhaseCoefficients& phi7, const ArRelayConfig& cfg = {}) {
  for (double v : phi7)
    if (!(v <= cfg.th2)) return Zone::zone1;
  return Zone::zone2;
}

/// Per-phase AR coefficients (no intercept) of mean-removed, peak-normalized currents.
inline std::array<features::ArFit, 3> phase_ar(const ThreePhaseRecord& currents, const ArRelayConfig& cfg) {
  cfg.validate();
  std::array<features::ArFit, 3> out;
  for (int p = 0; p < 3; ++p) {
    try {
      out[p] = features::ar_fit(features::normalize_for_ar(currents.phases[p]), cfg.lag, false);
    } catch (const DataError& e) {
      throw DataError(std::string("ar relay: phase ") + "abc"[p] + ": " + e.what());
    }
  }
  return out;
}

inline PhaseCoefficients coefficient(const std::array<features::ArFit, 3>& fits, int index) {
  PhaseCoefficients c{};
  for (int p = 0; p < 3; ++p) c[p] = fits[p].phi.at(static_cast<std::size_t>(index - 1));
  return c;
}

inline Direction ar_direction(const ThreePhaseRecord& currents, const ArRelayConfig& cfg = {}) {
  return direction_from_phi2(coefficient(phase_ar(currents, cfg), 2), cfg);
}

inline Zone ar_zone(const ThreePhaseRecord& currents, const ArRelayConfig& cfg = {}) {
  return zone_from_phi7(coefficient(phase_ar(currents, cfg), 7), cfg);
}

}  // namespace relaykit::relay
