#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"

namespace relaykit {

// ---------------------------------------------------------------------------
// Sampling

struct SamplingSpec {
  double sample_rate_hz = 10000.0;
  double nominal_freq_hz = 60.0;

  SamplingSpec() = default;
  SamplingSpec(double fs, double f0) : sample_rate_hz(fs), nominal_freq_hz(f0) { validate(); }

  int samples_per_cycle() const {
    return static_cast<int>(std::lround(sample_rate_hz / nominal_freq_hz));
  }
  double dt() const { return 1.0 / sample_rate_hz; }

  void validate() const {
    if (!(sample_rate_hz > 0.0) || !(nominal_freq_hz > 0.0) || !std::isfinite(sample_rate_hz) ||
        !std::isfinite(nominal_freq_hz))
      throw ConfigError("sampling: rates must be positive and finite");
    if (!(sample_rate_hz > 2.0 * nominal_freq_hz))
      throw ConfigError("sampling: sample rate must exceed twice the nominal frequency");
    if (samples_per_cycle() < 8) throw ConfigError("sampling: fewer than 8 samples per cycle");
  }

  bool operator==(const SamplingSpec&) const = default;
};

/// Whole nominal cycles contained in `seconds`.
inline long cycle_count(const SamplingSpec& spec, double seconds) {
  if (!(seconds >= 0.0)) throw ConfigError("cycle_count: seconds must be >= 0");
  // Nudge by a few ulps so that e.g. 0.05 s * 60 Hz lands on 3, not 2.999...
  double c = seconds * spec.nominal_freq_hz;
  return static_cast<long>(std::floor(c * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())));
}

// ---------------------------------------------------------------------------
// Labels

enum class Category {
  internal_fault,
  magnetizing_inrush,
  sympathetic_inrush,
  overexcitation,
  external_fault_ct_sat,
  ferroresonance,
  capacitor_switching,
  nonlinear_load_switching,
  power_swing,
  fault_during_swing,
};

enum class FaultUnit { power_transformer, ispar_series, ispar_exciting };

enum class FaultType { wa_g, wb_g, wc_g, wab_g, wac_g, wbc_g, wab, wac, wbc, w_w, t_t, ph3, ph3_g };

enum class Stability { stable, unstable };
enum class Symmetry { symmetrical, asymmetrical };

inline constexpr std::array<std::string_view, 10> k_category_names = {
    "internal_fault",        "magnetizing_inrush", "sympathetic_inrush",  "overexcitation",
    "external_fault_ct_sat", "ferroresonance",     "capacitor_switching", "nonlinear_load_switching",
    "power_swing",           "fault_during_swing"};
inline constexpr std::array<std::string_view, 3> k_unit_names = {"power_transformer", "ispar_series",
                                                                 "ispar_exciting"};
inline constexpr std::array<std::string_view, 13> k_fault_type_names = {
    "wa-g", "wb-g", "wc-g", "wab-g", "wac-g", "wbc-g", "wab", "wac", "wbc", "w-w", "t-t", "3-ph", "3-ph-g"};
inline constexpr std::array<std::string_view, 2> k_stability_names = {"stable", "unstable"};
inline constexpr std::array<std::string_view, 2> k_symmetry_names = {"symmetrical", "asymmetrical"};

template <class E, std::size_t N>
std::string_view enum_name(E e, const std::array<std::string_view, N>& names) {
  return names.at(static_cast<std::size_t>(e));
}

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  throw DataError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

inline std::string_view to_string(Category c) { return enum_name(c, k_category_names); }
inline std::string_view to_string(FaultUnit u) { return enum_name(u, k_unit_names); }
inline std::string_view to_string(FaultType t) { return enum_name(t, k_fault_type_names); }
inline std::string_view to_string(Stability s) { return enum_name(s, k_stability_names); }
inline std::string_view to_string(Symmetry s) { return enum_name(s, k_symmetry_names); }

inline Category parse_category(std::string_view s) { return parse_enum<Category>(s, k_category_names, "category"); }
inline FaultUnit parse_unit(std::string_view s) { return parse_enum<FaultUnit>(s, k_unit_names, "unit"); }
inline FaultType parse_fault_type(std::string_view s) {
  return parse_enum<FaultType>(s, k_fault_type_names, "fault type");
}

/// Phases a fault type involves; `ground` for types with a ground return.
struct FaultPattern {
  std::array<bool, 3> phases{};
  bool ground = false;
};

inline FaultPattern fault_pattern(FaultType t) {
  switch (t) {
    case FaultType::wa_g: return {{true, false, false}, true};
    case FaultType::wb_g: return {{false, true, false}, true};
    case FaultType::wc_g: return {{false, false, true}, true};
    case FaultType::wab_g: return {{true, true, false}, true};
    case FaultType::wac_g: return {{true, false, true}, true};
    case FaultType::wbc_g: return {{false, true, true}, true};
    case FaultType::wab: return {{true, true, false}, false};
    case FaultType::wac: return {{true, false, true}, false};
    case FaultType::wbc: return {{false, true, true}, false};
    case FaultType::w_w: return {{true, false, false}, false};
    case FaultType::t_t: return {{true, false, false}, false};
    case FaultType::ph3: return {{true, true, true}, false};
    case FaultType::ph3_g: return {{true, true, true}, true};
  }
  return {};
}

struct FaultDetail {
  FaultUnit unit = FaultUnit::power_transformer;
  FaultType type = FaultType::wa_g;
  bool operator==(const FaultDetail&) const = default;
};

struct SwingDetail {
  Stability stability = Stability::stable;
  Symmetry symmetry = Symmetry::symmetrical;
  bool operator==(const SwingDetail&) const = default;
};

struct TransientLabel {
  Category category = Category::internal_fault;
  std::optional<FaultDetail> fault;
  std::optional<SwingDetail> swing;

  static bool needs_fault(Category c) {
    return c == Category::internal_fault || c == Category::fault_during_swing;
  }
  static bool needs_swing(Category c) { return c == Category::power_swing; }

  void validate() const {
    if (needs_fault(category) != fault.has_value())
      throw DataError("label: fault detail must be present exactly for fault categories");
    if (needs_swing(category) != swing.has_value())
      throw DataError("label: swing detail must be present exactly for power_swing");
  }

  /// "internal_fault/power_transformer/wa-g", "power_swing/stable/symmetrical", "ferroresonance".
  std::string str() const {
    std::string s(to_string(category));
    if (fault) s += "/" + std::string(to_string(fault->unit)) + "/" + std::string(to_string(fault->type));
    if (swing) s += "/" + std::string(to_string(swing->stability)) + "/" + std::string(to_string(swing->symmetry));
    return s;
  }

  static TransientLabel parse(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find('/', start);
      parts.push_back(s.substr(start, pos == std::string_view::npos ? s.size() - start : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    TransientLabel l;
    l.category = parse_category(parts[0]);
    if (needs_fault(l.category)) {
      if (parts.size() != 3) throw DataError("label '" + std::string(s) + "': expected category/unit/type");
      l.fault = FaultDetail{parse_unit(parts[1]), parse_fault_type(parts[2])};
    } else if (needs_swing(l.category)) {
      if (parts.size() != 3) throw DataError("label '" + std::string(s) + "': expected power_swing/stability/symmetry");
      l.swing = SwingDetail{parse_enum<Stability>(parts[1], k_stability_names, "stability"),
                            parse_enum<Symmetry>(parts[2], k_symmetry_names, "symmetry")};
    } else if (parts.size() != 1) {
      throw DataError("label '" + std::string(s) + "': category takes no detail");
    }
    return l;
  }

  bool operator==(const TransientLabel&) const = default;
};

// ---------------------------------------------------------------------------
// Records

enum class RecordKind { current, voltage };

inline std::string_view to_string(RecordKind k) { return k == RecordKind::current ? "current" : "voltage"; }
inline RecordKind parse_kind(std::string_view s) {
  if (s == "current") return RecordKind::current;
  if (s == "voltage") return RecordKind::voltage;
  throw DataError("unknown record kind '" + std::string(s) + "'");
}

using Signal = std::vector<double>;

struct ThreePhaseRecord {
  std::array<Signal, 3> phases;
  RecordKind kind = RecordKind::current;
  SamplingSpec sampling;
  std::optional<TransientLabel> label;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return phases[0].size(); }

  void validate() const {
    if (phases[0].empty()) throw DataError("record: empty phases");
    if (phases[1].size() != phases[0].size() || phases[2].size() != phases[0].size())
      throw DataError("record: phase lengths differ");
    for (const auto& p : phases)
      for (double v : p)
        if (!std::isfinite(v)) throw DataError("record: non-finite sample");
    sampling.validate();
    if (label) label->validate();
  }

  bool operator==(const ThreePhaseRecord&) const = default;
};

/// Exact slice [start, start+length); label, kind, sampling and meta are kept.
inline ThreePhaseRecord window(const ThreePhaseRecord& r, long start, long length) {
  if (start < 0 || length < 1 || static_cast<std::size_t>(start + length) > r.size())
    throw DataError("window: [" + std::to_string(start) + ", " + std::to_string(start + length) +
                    ") outside record of length " + std::to_string(r.size()));
  ThreePhaseRecord out;
  for (int p = 0; p < 3; ++p)
    out.phases[p].assign(r.phases[p].begin() + start, r.phases[p].begin() + start + length);
  out.kind = r.kind;
  out.sampling = r.sampling;
  out.label = r.label;
  out.meta = r.meta;
  return out;
}

inline double mean_square(const Signal& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

/// Adds zero-mean white Gaussian noise per phase so that the realized SNR over the
/// whole record equals `snr_db`. Infinite SNR returns a copy.
inline ThreePhaseRecord add_noise(const ThreePhaseRecord& r, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw ConfigError("add_noise: SNR is NaN");
  ThreePhaseRecord out = r;
  if (std::isinf(snr_db) && snr_db > 0) return out;
  for (int p = 0; p < 3; ++p) {
    const Signal& x = r.phases[p];
    double ps = mean_square(x);
    if (!(ps > 0.0)) throw DataError("add_noise: phase " + std::string(1, "abc"[p]) + " is all zero");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(p + 1)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> nd(0.0, 1.0);
    Signal n(x.size());
    for (auto& v : n) v = nd(rng);
    double mean = 0.0;
    for (double v : n) mean += v;
    mean /= static_cast<double>(n.size());
    for (auto& v : n) v -= mean;
    double pn = mean_square(n);
    double scale = pn > 0.0 ? std::sqrt(ps / std::pow(10.0, snr_db / 10.0) / pn) : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out.phases[p][i] = x[i] + scale * n[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV + sidecar JSON

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line, const char* col) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("csv line " + std::to_string(line) + ": bad number in column " + col);
  if (!std::isfinite(v)) throw DataError("csv line " + std::to_string(line) + ": non-finite value in column " + col);
  return v;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

}  // namespace detail

struct CsvSidecar {
  RecordKind kind = RecordKind::current;
  SamplingSpec sampling;
  std::string units = "A";
};

inline void write_sidecar(const std::filesystem::path& csv, const CsvSidecar& sc) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(sc.kind));
  j["sample_rate_hz"] = sc.sampling.sample_rate_hz;
  j["nominal_freq_hz"] = sc.sampling.nominal_freq_hz;
  j["units"] = sc.units;
  std::ofstream f(detail::sidecar_path(csv), std::ios::binary);
  if (!f) throw DataError("cannot write " + detail::sidecar_path(csv).string());
  f << j.dump(2) << "\n";
}

inline CsvSidecar read_sidecar(const std::filesystem::path& csv) {
  auto path = detail::sidecar_path(csv);
  std::ifstream f(path);
  if (!f) throw DataError("missing sidecar " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
    CsvSidecar sc;
    sc.kind = parse_kind(j.at("kind").get<std::string>());
    sc.sampling = SamplingSpec(j.at("sample_rate_hz").get<double>(), j.at("nominal_freq_hz").get<double>());
    sc.units = j.value("units", std::string(sc.kind == RecordKind::current ? "A" : "V"));
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("sidecar " + path.string() + ": " + e.what());
  }
}

/// Writes records back to back. Each record restarts its time axis at 0, which is
/// how the reader finds record boundaries.
inline void write_csv(std::ostream& os, const std::vector<ThreePhaseRecord>& records) {
  os << "t,pa,pb,pc,label\n";
  for (const auto& r : records) {
    r.validate();
    std::string lab = r.label ? r.label->str() : std::string();
    double dt = r.sampling.dt();
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << detail::fmt_double(static_cast<double>(i) * dt) << ',' << detail::fmt_double(r.phases[0][i]) << ','
         << detail::fmt_double(r.phases[1][i]) << ',' << detail::fmt_double(r.phases[2][i]) << ',' << lab << '\n';
    }
  }
}

inline void write_csv(const std::vector<ThreePhaseRecord>& records, const std::filesystem::path& path,
                      const std::string& units = "") {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  write_csv(f, records);
  CsvSidecar sc;
  if (!records.empty()) {
    sc.kind = records.front().kind;
    sc.sampling = records.front().sampling;
  }
  sc.units = units.empty() ? (sc.kind == RecordKind::current ? "A" : "V") : units;
  write_sidecar(path, sc);
}

inline std::vector<ThreePhaseRecord> read_csv(std::istream& is, const CsvSidecar& sc) {
  std::vector<ThreePhaseRecord> out;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw DataError("csv line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,pa,pb,pc,label") throw DataError("csv line 1: malformed header '" + line + "'");
  double last_t = -std::numeric_limits<double>::infinity();
  std::string cur_label;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 5> cols;
    std::string_view sv(line);
    std::size_t n = 0, start = 0;
    for (std::size_t i = 0; i <= sv.size(); ++i) {
      if (i == sv.size() || sv[i] == ',') {
        if (n >= 5) throw DataError("csv line " + std::to_string(lineno) + ": too many columns");
        cols[n++] = sv.substr(start, i - start);
        start = i + 1;
      }
    }
    if (n != 5) throw DataError("csv line " + std::to_string(lineno) + ": expected 5 columns, got " + std::to_string(n));
    double t = detail::parse_double(cols[0], lineno, "t");
    std::array<double, 3> v{detail::parse_double(cols[1], lineno, "pa"), detail::parse_double(cols[2], lineno, "pb"),
                            detail::parse_double(cols[3], lineno, "pc")};
    std::string lab(cols[4]);
    if (out.empty() || !(t > last_t)) {
      ThreePhaseRecord r;
      r.kind = sc.kind;
      r.sampling = sc.sampling;
      if (!lab.empty()) {
        try {
          r.label = TransientLabel::parse(lab);
        } catch (const DataError& e) {
          throw DataError("csv line " + std::to_string(lineno) + ": " + e.what());
        }
      }
      out.push_back(std::move(r));
      cur_label = lab;
    } else if (lab != cur_label) {
      throw DataError("csv line " + std::to_string(lineno) + ": label changes inside a record");
    }
    for (int p = 0; p < 3; ++p) out.back().phases[p].push_back(v[p]);
    last_t = t;
  }
  return out;
}

inline std::vector<ThreePhaseRecord> read_csv(const std::filesystem::path& path) {
  CsvSidecar sc = read_sidecar(path);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  return read_csv(f, sc);
}

}  // namespace relaykit
