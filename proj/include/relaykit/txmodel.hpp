#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "relaykit/error.hpp"

namespace relaykit::txmodel {

struct TwoWindingParams {
  double mva = 0, v1 = 0, v2 = 0, f = 60, im = 0, xl = 0;

  void validate() const {
    if (!(mva > 0 && v1 > 0 && v2 > 0 && f > 0 && im > 0 && xl > 0))
      throw ConfigError("two-winding params must be strictly positive");
    if (!(im < 1)) throw ConfigError("two-winding params: im must be < 1");
  }
};

struct ThreeWindingParams {
  double mva = 0, v1 = 0, v2 = 0, v3 = 0, f = 60, im = 0, x12 = 0, x13 = 0, x23 = 0;

  void validate() const {
    if (!(mva > 0 && v1 > 0 && v2 > 0 && v3 > 0 && f > 0 && im > 0 && x12 > 0 && x13 > 0 && x23 > 0))
      throw ConfigError("three-winding params must be strictly positive");
    if (!(im < 1)) throw ConfigError("three-winding params: im must be < 1");
  }
};

/// Percent of turns at which each winding is split by the fault.
struct WindingFaultSpec {
  double fault1_pct = 50, fault2_pct = 50;
};

struct InductanceMatrix {
  int order = 0;
  Eigen::MatrixXd entries;

  double operator()(int i, int j) const { return entries(i, j); }
};

namespace detail {

inline double split_fraction(double pct, const char* name) {
  if (!(pct >= 0.0 && pct <= 100.0)) throw ConfigError(std::string(name) + " must lie in [0, 100]");
  return pct * 0.01;
}

inline InductanceMatrix assemble(const std::vector<double>& leak, const std::vector<double>& mag) {
  const int n = static_cast<int>(leak.size());
  InductanceMatrix m;
  m.order = n;
  m.entries.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.entries(i, j) = (i == j) ? leak[i] + mag[i] : std::sqrt(mag[i] * mag[j]);
  return m;
}

}  // namespace detail

/// Coupled-coil inductances of a single-phase 2-winding transformer with an internal
/// fault splitting each winding into two sub-coils. Units follow the script: kV, MVA.
inline InductanceMatrix two_winding_matrix(const TwoWindingParams& p, const WindingFaultSpec& fs) {
  p.validate();
  const double fa = detail::split_fraction(fs.fault1_pct, "fault1_pct");
  const double fb = 1.0 - fa;
  const double fc = detail::split_fraction(fs.fault2_pct, "fault2_pct");
  const double fd = 1.0 - fc;
  const double i1 = p.mva / p.v1, i2 = p.mva / p.v2;
  const double z1 = p.v1 / i1, z2 = p.v2 / i2;
  const double w = 2.0 * std::numbers::pi * p.f;
  const double lk1 = p.xl * z1 / w, lk2 = p.xl * z2 / w;
  // The script halves the leakage of each winding before splitting it.
  std::vector<double> leak = {lk1 / 2 * fa, lk1 / 2 * fb, lk2 / 2 * fc, lk2 / 2 * fd};
  const double m1 = p.v1 / (w * p.im * i1), m2 = p.v2 / (w * p.im * i2);
  std::vector<double> mag = {m1 * fa * fa, m1 * fb * fb, m2 * fc * fc, m2 * fd * fd};
  return detail::assemble(leak, mag);
}

struct StarReactances {
  double x1, x2, x3;
};

/// Star-equivalent leakage reactances from pairwise short-circuit reactances.
inline StarReactances star_reactances(double x12, double x13, double x23) {
  return {(x13 - x23 + x12) / 2, (x23 - x13 + x12) / 2, (x13 - x12 + x23) / 2};
}

inline InductanceMatrix three_winding_matrix(const ThreeWindingParams& p, double f1_pct, double f2_pct,
                                             double f3_pct) {
  p.validate();
  const auto x = star_reactances(p.x12, p.x13, p.x23);
  if (x.x1 < 0 || x.x2 < 0 || x.x3 < 0)
    throw ConfigError("three-winding params: inconsistent short-circuit reactances (negative star branch)");
  const double fa = detail::split_fraction(f1_pct, "f1_pct"), fb = 1.0 - fa;
  const double fc = detail::split_fraction(f2_pct, "f2_pct"), fd = 1.0 - fc;
  const double fe = detail::split_fraction(f3_pct, "f3_pct"), ff = 1.0 - fe;
  const double i1 = p.mva / p.v1, i2 = p.mva / p.v2, i3 = p.mva / p.v3;
  const double z1 = p.v1 / i1, z2 = p.v2 / i2, z3 = p.v3 / i3;
  const double w = 2.0 * std::numbers::pi * p.f;
  const double lk1 = x.x1 * z1 / w, lk2 = x.x2 * z2 / w, lk3 = x.x3 * z3 / w;
  std::vector<double> leak = {lk1 * fa, lk1 * fb, lk2 * fc, lk2 * fd, lk3 * fe, lk3 * ff};
  const double m1 = p.v1 / (w * p.im * i1), m2 = p.v2 / (w * p.im * i2), m3 = p.v3 / (w * p.im * i3);
  std::vector<double> mag = {m1 * fa * fa, m1 * fb * fb, m2 * fc * fc, m2 * fd * fd, m3 * fe * fe, m3 * ff * ff};
  return detail::assemble(leak, mag);
}

struct SimulationOptions {
  double duration_s = 0.1;
  double dt_s = 1e-5;
  double freq_hz = 60.0;  // only used for the step-size bound
};

using VoltageSource = std::function<double(double)>;

/// Trapezoidal integration of v = R i + L di/dt from i(0) = 0. Returns one trace per
/// coil, sample k at t = k dt, k = 0..round(duration/dt).
inline std::vector<std::vector<double>> simulate_coupled(const InductanceMatrix& L, const std::vector<double>& r,
                                                         const std::vector<VoltageSource>& source,
                                                         const SimulationOptions& opt) {
  const int n = L.order;
  if (static_cast<int>(r.size()) != n || static_cast<int>(source.size()) != n)
    throw ConfigError("simulate_coupled: resistance/source count must equal matrix order");
  if (!(opt.dt_s > 0) || !(opt.duration_s >= 0)) throw ConfigError("simulate_coupled: bad time grid");
  if (opt.dt_s > 1.0 / (50.0 * opt.freq_hz) * (1 + 1e-12))
    throw ConfigError("simulate_coupled: dt exceeds 1/(50 f)");
  for (double ri : r)
    if (!(ri >= 0)) throw ConfigError("simulate_coupled: negative resistance");

  Eigen::MatrixXd Ldt = L.entries / opt.dt_s;
  Eigen::MatrixXd A = Ldt, B = Ldt;
  for (int k = 0; k < n; ++k) {
    A(k, k) += r[k] / 2;
    B(k, k) -= r[k] / 2;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(1e-12);
  if (lu.rank() < n) throw ModelError("simulate_coupled: singular system matrix");

  const long steps = std::lround(opt.duration_s / opt.dt_s);
  std::vector<std::vector<double>> out(n, std::vector<double>(steps + 1, 0.0));
  Eigen::VectorXd i = Eigen::VectorXd::Zero(n), v0(n), v1(n);
  for (int k = 0; k < n; ++k) v0(k) = source[k](0.0);
  for (long s = 1; s <= steps; ++s) {
    const double t = s * opt.dt_s;
    for (int k = 0; k < n; ++k) v1(k) = source[k](t);
    i = lu.solve(B * i + (v0 + v1) / 2);
    for (int k = 0; k < n; ++k) out[k][s] = i(k);
    v0 = v1;
  }
  return out;
}

/// Core flux after energization: residual flux plus the transient offset.
inline double inrush_flux(double phi_r, double phi_m, double t_switch_s, double t_s, double omega) {
  if (!(phi_m > 0)) throw ConfigError("inrush_flux: phi_m must be positive");
  return phi_r + phi_m * std::cos(omega * t_switch_s) - phi_m * std::cos(omega * (t_s + t_switch_s));
}

/// Per-cycle flux change driving sympathetic inrush, trapezoidal over the samples.
inline double sympathetic_flux_increment(double r_sys, double r_par, const std::vector<double>& i1,
                                         const std::vector<double>& i2, double dt_s) {
  if (i1.size() != i2.size()) throw DataError("sympathetic_flux_increment: sequence lengths differ");
  if (i1.size() < 2) throw DataError("sympathetic_flux_increment: need at least two samples");
  double acc = 0.0;
  auto g = [&](std::size_t k) { return (r_sys + r_par) * i1[k] + r_sys * i2[k]; };
  for (std::size_t k = 1; k < i1.size(); ++k) acc += 0.5 * (g(k - 1) + g(k)) * dt_s;
  return acc;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Quadrature voltage magnitude a phase-angle regulator must inject for shift alpha.
inline double quadrature_voltage(double v_ph, double alpha_deg) {
  if (!(std::abs(alpha_deg) <= 180.0)) throw ConfigError("quadrature_voltage: |alpha| must be <= 180 deg");
  return v_ph * 2.0 * std::sin(deg2rad(alpha_deg) / 2.0);
}

/// Real power across a line with a phase-angle regulator in series.
inline double par_power(double v_s, double v_l, double x_line, double x_par, double delta_deg, double alpha_deg) {
  const double x = x_line + x_par;
  if (!(x > 0)) throw ConfigError("par_power: total reactance must be positive");
  return v_s * v_l / x * std::sin(deg2rad(delta_deg + alpha_deg));
}

}  // namespace relaykit::txmodel
