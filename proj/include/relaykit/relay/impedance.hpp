#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "relaykit/error.hpp"

namespace relaykit::relay {

using cplx = std::complex<double>;

enum class ZoneShape { mho_circle, quadrilateral };

inline ZoneShape parse_zone_shape(std::string_view s) {
  if (s == "mho_circle" || s == "mho") return ZoneShape::mho_circle;
  if (s == "quadrilateral") return ZoneShape::quadrilateral;
  throw ConfigError("unknown zone shape '" + std::string(s) + "'");
}

struct ImpedanceParams {
  cplx z1_per_km{0.0, 0.0};
  cplx z0_per_km{0.0, 0.0};
  double line_km = 1.0;
  double ct_ratio = 1.0;
  double vt_ratio = 1.0;
  double zone1_reach = 0.8;
  double zone2_reach = 1.2;
  ZoneShape shape = ZoneShape::mho_circle;
  // Quadrilateral resistive reach as a multiple of the zone's reactive reach.
  double r_factor = 3.0;

  double ratio() const { return ct_ratio / vt_ratio; }

  void validate() const {
    if (!(zone1_reach > 0 && zone1_reach <= 2) || !(zone2_reach > 0 && zone2_reach <= 2))
      throw ConfigError("impedance: reaches must lie in (0, 2]");
    if (!(ct_ratio > 0) || !(vt_ratio > 0)) throw ConfigError("impedance: CT and VT ratios must be > 0");
    if (!(line_km > 0)) throw ConfigError("impedance: line length must be > 0");
    if (std::abs(z1_per_km) == 0.0) throw ConfigError("impedance: z1 must be nonzero");
    if (!(r_factor > 0)) throw ConfigError("impedance: r_factor must be > 0");
  }
};

/// Zero-sequence compensation factor (Z0 - Z1) / (3 Z1).
inline cplx k0(cplx z1, cplx z0) {
  if (std::abs(z1) == 0.0) throw ConfigError("k0: z1 is zero");
  return (z0 - z1) / (3.0 * z1);
}

/// Phase-a ground loop impedance V_a / (I_a + 3 k0 I_0), referred to the secondary side.
inline cplx measure_impedance(cplx va, cplx ia, cplx i0, const ImpedanceParams& p) {
  p.validate();
  const cplx comp = ia + 3.0 * k0(p.z1_per_km, p.z0_per_km) * i0;
  if (std::abs(comp) == 0.0) throw DataError("measure_impedance: compensated current is zero");
  return va / comp * p.ratio();
}

/// Secondary-side reach impedance of zone 1 or 2 along the line angle.
inline cplx zone_reach(const ImpedanceParams& p, int zone) {
  if (zone != 1 && zone != 2) throw ConfigError("zone must be 1 or 2");
  const double reach = zone == 1 ? p.zone1_reach : p.zone2_reach;
  return reach * p.line_km * p.z1_per_km * p.ratio();
}

inline bool in_zone(cplx z, const ImpedanceParams& p, int zone) {
  p.validate();
  const cplx zr = zone_reach(p, zone);
  if (p.shape == ZoneShape::mho_circle) return std::abs(z - zr / 2.0) <= std::abs(zr) / 2.0;
  const double x_reach = zr.imag();
  const double r_reach = p.r_factor * std::abs(x_reach);
  return z.imag() >= 0.0 && z.imag() <= x_reach && z.real() >= -r_reach / 10.0 && z.real() <= r_reach;
}

}  // namespace relaykit::relay
