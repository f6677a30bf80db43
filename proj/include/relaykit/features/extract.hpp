#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"
#include "relaykit/features/spectral.hpp"
#include "relaykit/features/timeseries.hpp"
#include "relaykit/features/wavelet.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::features {

enum class FeatureSet { td5, we6, wc, f5, swing6, ar_relay };

inline constexpr std::array<std::string_view, 6> k_feature_set_names = {"td5", "we6", "wc", "f5", "swing6", "ar_relay"};
inline std::string_view to_string(FeatureSet s) { return k_feature_set_names.at(static_cast<std::size_t>(s)); }
inline FeatureSet parse_feature_set(std::string_view s) {
  for (std::size_t i = 0; i < k_feature_set_names.size(); ++i)
    if (k_feature_set_names[i] == s) return static_cast<FeatureSet>(i);
  throw ConfigError("unknown feature set '" + std::string(s) + "'");
}

struct TrendSpec {
  long chunk_len = 10;
  TrendAttr attr = TrendAttr::slope;
  TrendAgg agg = TrendAgg::mean;
};

struct FeatureConfig {
  FeatureSet set = FeatureSet::td5;
  std::optional<WaveletSpec> wavelet;  // wc: restrict to this wavelet/level
  std::vector<std::pair<double, double>> change_quantile_bounds = {{0.4, 0.8}, {0.2, 0.8}, {0.6, 1.0}};
  int ar_lag = 10;
  std::vector<int> fft_bins = {1, 2, 3, 4, 5, 6, 7, 8};
  WelchConfig welch;
  long trend_chunk_len = 10;
  std::vector<TrendSpec> trends = {{5, TrendAttr::stderr_, TrendAgg::mean},
                                   {10, TrendAttr::intercept, TrendAgg::var},
                                   {15, TrendAttr::slope, TrendAgg::var}};
  std::vector<int> welch_bins = {2, 5, 8};
  std::vector<int> ar_indices = {2, 7};  // 1-based coefficient indices
  std::vector<std::string> we_wavelets = {"rbio3.1", "sym10", "bior3.9", "rbio3.9", "coif5", "db10"};
  std::vector<std::pair<std::string, int>> wc_wavelets = {
      {"bior2.2", 3}, {"db4", 4}, {"rbio3.3", 3}, {"rbio4.4", 4}, {"sym4", 4}};

  void validate() const {
    for (auto [ql, qh] : change_quantile_bounds)
      if (!(ql >= 0 && ql < qh && qh <= 1)) throw ConfigError("features: change-quantile bounds need 0 <= ql < qh <= 1");
    if (ar_lag < 1) throw ConfigError("features: ar_lag must be >= 1");
    for (int i : ar_indices)
      if (i < 1 || i > ar_lag) throw ConfigError("features: AR coefficient index outside 1..ar_lag");
    for (int b : fft_bins)
      if (b < 0) throw ConfigError("features: negative FFT bin");
    for (int b : welch_bins)
      if (b < 0) throw ConfigError("features: negative Welch bin");
    if (trend_chunk_len < 2) throw ConfigError("features: trend_chunk_len must be >= 2");
    for (const auto& t : trends)
      if (t.chunk_len < 2) throw ConfigError("features: trend chunk_len must be >= 2");
    for (const auto& w : we_wavelets) filter_bank(w);
    for (const auto& [w, l] : wc_wavelets) {
      filter_bank(w);
      if (l < 1) throw ConfigError("features: wavelet level must be >= 1");
    }
  }
};

/// Stages with a preset f5 layout (counts of F1..F5 per phase).
enum class F5Stage { detect, locate, series_type, exciting_type, pt_type, transients };

inline FeatureConfig f5_preset(F5Stage stage) {
  struct Counts {
    int f1, f2, f3, f4, f5;
  };
  static constexpr Counts table[] = {{2, 1, 1, 1, 1}, {2, 2, 2, 0, 0}, {3, 1, 2, 1, 0},
                                     {3, 2, 2, 0, 0}, {3, 2, 2, 0, 0}, {2, 1, 1, 0, 1}};
  const Counts c = table[static_cast<int>(stage)];
  FeatureConfig cfg;
  cfg.set = FeatureSet::f5;
  cfg.change_quantile_bounds.resize(c.f1);
  cfg.fft_bins.resize(c.f2);
  cfg.trends.resize(c.f3);
  cfg.welch_bins.resize(c.f4);
  cfg.ar_indices.resize(c.f5);
  return cfg;
}

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<bool> degenerate;  // value was undefined for this input and replaced by 0

  std::size_t size() const { return values.size(); }
  void push(std::string name, double v, bool bad = false) {
    names.push_back(std::move(name));
    values.push_back(bad ? 0.0 : v);
    degenerate.push_back(bad);
  }
};

inline std::string phase_prefix(int p) { return std::string("ph") + "ABC"[p] + "."; }

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Runs `f`; a DataError means the feature is undefined for this input.
inline void push_guarded(FeatureVector& fv, std::string name, const std::function<double()>& f) {
  try {
    double v = f();
    fv.push(std::move(name), v, !std::isfinite(v));
  } catch (const DataError&) {
    fv.push(std::move(name), 0.0, true);
  }
}

inline void require_length(const Signal& x, std::size_t n, const std::string& feature) {
  if (x.size() < n)
    throw DataError("features: record of " + std::to_string(x.size()) + " samples too short for " + feature +
                    " (needs " + std::to_string(n) + ")");
}

}  // namespace detail

/// Mean-removed, peak-normalized copy used by the AR relay features.
inline Signal normalize_for_ar(const Signal& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  Signal y(x.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] - mean;
    peak = std::max(peak, std::abs(y[i]));
  }
  if (peak > 0)
    for (auto& v : y) v /= peak;
  return y;
}

/// Fundamental-frequency amplitude from the DFT bin nearest f0.
inline double fundamental_amplitude(const Signal& x, const SamplingSpec& spec) {
  const auto X = fft_coefficients(x);
  const double n = static_cast<double>(x.size());
  auto k = static_cast<std::size_t>(std::lround(n * spec.nominal_freq_hz / spec.sample_rate_hz));
  k = std::min(k, X.size() - 1);
  return std::abs(X[k]) * (k == 0 ? 1.0 : 2.0) / n;
}

namespace detail {

inline void extract_phase(FeatureVector& fv, int p, const Signal& x, const FeatureConfig& cfg,
                          const SamplingSpec& spec) {
  const std::string ph = phase_prefix(p);
  switch (cfg.set) {
    case FeatureSet::td5: {
      require_length(x, 4, "td5");
      const auto [ql, qh] = cfg.change_quantile_bounds.empty() ? std::pair{0.4, 0.8} : cfg.change_quantile_bounds[0];
      fv.push(ph + "change_q1", change_quantile(x, ql, qh));
      push_guarded(fv, ph + "sampen", [&] {
        const double sd = stddev(x);
        if (!(sd > 0)) throw DataError("zero spread");
        return sample_entropy(x, 2, 0.2 * sd);
      });
      auto m = moments(x);
      fv.push(ph + "kurtosis", m.excess_kurtosis.value_or(0.0), !m.excess_kurtosis);
      fv.push(ph + "var", m.variance);
      fv.push(ph + "cid", complexity_invariant_distance(x));
      break;
    }
    case FeatureSet::we6: {
      for (const auto& name : cfg.we_wavelets) {
        const auto& fb = filter_bank(name);
        require_length(x, fb.dec_lo.size(), "we6 (" + name + ")");
        const int level = max_level(static_cast<long>(x.size()), static_cast<long>(fb.dec_lo.size()));
        if (level < 1) throw DataError("features: record too short for we6 (" + name + ")");
        auto c = dwt(x, WaveletSpec::parse(name, level));
        fv.push(ph + "we." + name, wavelet_energy(c.details.back()));
      }
      break;
    }
    case FeatureSet::wc: {
      std::vector<std::pair<std::string, int>> picks = cfg.wc_wavelets;
      if (cfg.wavelet) picks = {{cfg.wavelet->name(), cfg.wavelet->level}};
      for (const auto& [name, level] : picks) {
        const auto& fb = filter_bank(name);
        require_length(x, fb.dec_lo.size(), "wc (" + name + ")");
        DwtResult c;
        try {
          c = dwt(x, WaveletSpec::parse(name, level));
        } catch (const ConfigError& e) {
          throw DataError(std::string("features: record too short for wc: ") + e.what());
        }
        const auto& d = c.details.back();
        for (std::size_t i = 0; i < d.size(); ++i)
          fv.push(ph + "wc." + name + ".L" + std::to_string(level) + "." + std::to_string(i), d[i]);
      }
      break;
    }
    case FeatureSet::f5: {
      require_length(x, 2, "f5");
      for (std::size_t i = 0; i < cfg.change_quantile_bounds.size(); ++i) {
        auto [ql, qh] = cfg.change_quantile_bounds[i];
        fv.push(ph + "change_q." + fmt_num(ql) + "-" + fmt_num(qh), change_quantile(x, ql, qh));
      }
      if (!cfg.fft_bins.empty()) {
        const auto X = fft_coefficients(x);
        for (int b : cfg.fft_bins) {
          if (static_cast<std::size_t>(b) >= X.size()) throw DataError("features: record too short for fft bin " + std::to_string(b));
          fv.push(ph + "fft.abs" + std::to_string(b), std::abs(X[b]));
        }
      }
      for (const auto& t : cfg.trends) {
        require_length(x, static_cast<std::size_t>(t.chunk_len), "linear trend");
        fv.push(ph + "trend.c" + std::to_string(t.chunk_len) + "." + std::string(to_string(t.attr)) + "." +
                    std::string(to_string(t.agg)),
                linear_trend(x, t.chunk_len, t.attr, t.agg));
      }
      if (!cfg.welch_bins.empty()) {
        require_length(x, static_cast<std::size_t>(cfg.welch.segment_len), "welch density");
        const auto P = welch_density(x, cfg.welch);
        for (int b : cfg.welch_bins) {
          if (static_cast<std::size_t>(b) >= P.size()) throw ConfigError("features: welch bin beyond segment");
          fv.push(ph + "welch." + std::to_string(b), P[b]);
        }
      }
      if (!cfg.ar_indices.empty()) {
        require_length(x, static_cast<std::size_t>(cfg.ar_lag) + 2, "ar coefficients");
        std::optional<ArFit> fit;
        try {
          fit = ar_fit(x, cfg.ar_lag, true);
        } catch (const DataError&) {
        }
        for (int k : cfg.ar_indices)
          fv.push(ph + "arcoef.k" + std::to_string(cfg.ar_lag) + ".phi" + std::to_string(k),
                  fit ? fit->phi[k - 1] : 0.0, !fit);
      }
      break;
    }
    case FeatureSet::ar_relay: {
      require_length(x, static_cast<std::size_t>(cfg.ar_lag) + 2, "ar_relay");
      const int k = cfg.ar_indices.empty() ? 2 : cfg.ar_indices.front();
      push_guarded(fv, ph + "arcoef.k" + std::to_string(cfg.ar_lag) + ".phi" + std::to_string(k),
                   [&] { return ar_fit(normalize_for_ar(x), cfg.ar_lag, false).phi[k - 1]; });
      break;
    }
    case FeatureSet::swing6: break;  // needs voltages; handled by the two-record overload
  }
  (void)spec;
}

}  // namespace detail

/// Per-phase features for phases a, b, c in turn.
inline FeatureVector extract(const ThreePhaseRecord& rec, const FeatureConfig& cfg) {
  cfg.validate();
  if (cfg.set == FeatureSet::swing6) throw DataError("features: swing6 needs voltage channels");
  FeatureVector fv;
  for (int p = 0; p < 3; ++p) detail::extract_phase(fv, p, rec.phases[p], cfg, rec.sampling);
  return fv;
}

/// swing6: per phase, the fundamental amplitude of the voltage and the mean chunk
/// slope of the rectified current (chunks of trend_chunk_len samples).
inline FeatureVector extract(const ThreePhaseRecord& current, const ThreePhaseRecord* voltage,
                             const FeatureConfig& cfg) {
  if (cfg.set != FeatureSet::swing6) return extract(current, cfg);
  cfg.validate();
  if (!voltage) throw DataError("features: swing6 needs voltage channels");
  if (voltage->size() != current.size()) throw DataError("features: current and voltage lengths differ");
  FeatureVector fv;
  for (int p = 0; p < 3; ++p) {
    const std::string ph = phase_prefix(p);
    detail::require_length(current.phases[p], static_cast<std::size_t>(cfg.trend_chunk_len), "swing6 trend");
    fv.push(ph + "v.fund", fundamental_amplitude(voltage->phases[p], voltage->sampling));
    Signal r(current.phases[p].size());
    std::transform(current.phases[p].begin(), current.phases[p].end(), r.begin(), [](double v) { return std::abs(v); });
    fv.push(ph + "i.abs_trend", linear_trend(r, cfg.trend_chunk_len, TrendAttr::slope, TrendAgg::mean));
  }
  return fv;
}

/// Feature matrix as CSV: header of feature names plus `label`.
inline void write_feature_csv(std::ostream& os, const std::vector<FeatureVector>& rows,
                              const std::vector<std::string>& labels) {
  if (rows.size() != labels.size()) throw DataError("feature csv: row/label count mismatch");
  if (rows.empty()) {
    os << "label\n";
    return;
  }
  for (const auto& n : rows.front().names) os << n << ',';
  os << "label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].names != rows.front().names) throw DataError("feature csv: rows have different feature names");
    for (double v : rows[i].values) os << detail::fmt_num(v) << ',';
    os << labels[i] << '\n';
  }
}

// JSON ---------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const FeatureConfig& c) {
  j = nlohmann::json::object();
  j["set"] = std::string(to_string(c.set));
  if (c.wavelet) j["wavelet"] = {{"name", c.wavelet->name()}, {"level", c.wavelet->level}};
  j["change_quantile_bounds"] = nlohmann::json::array();
  for (auto [ql, qh] : c.change_quantile_bounds) j["change_quantile_bounds"].push_back({ql, qh});
  j["ar_lag"] = c.ar_lag;
  j["fft_bins"] = c.fft_bins;
  j["welch"] = {{"segment_len", c.welch.segment_len},
                {"overlap_fraction", c.welch.overlap_fraction},
                {"window", std::string(to_string(c.welch.window))}};
  j["trend_chunk_len"] = c.trend_chunk_len;
  j["trends"] = nlohmann::json::array();
  for (const auto& t : c.trends)
    j["trends"].push_back({{"chunk_len", t.chunk_len},
                           {"attr", std::string(to_string(t.attr))},
                           {"agg", std::string(to_string(t.agg))}});
  j["welch_bins"] = c.welch_bins;
  j["ar_indices"] = c.ar_indices;
  j["we_wavelets"] = c.we_wavelets;
  j["wc_wavelets"] = nlohmann::json::array();
  for (const auto& [n, l] : c.wc_wavelets) j["wc_wavelets"].push_back({{"name", n}, {"level", l}});
}

inline void from_json(const nlohmann::json& j, FeatureConfig& c) {
  c = FeatureConfig{};
  if (j.contains("preset")) {
    static const std::pair<std::string_view, F5Stage> presets[] = {
        {"detect", F5Stage::detect},           {"locate", F5Stage::locate},   {"series_type", F5Stage::series_type},
        {"exciting_type", F5Stage::exciting_type}, {"pt_type", F5Stage::pt_type}, {"transients", F5Stage::transients}};
    const auto name = j.at("preset").get<std::string>();
    bool found = false;
    for (auto [n, s] : presets)
      if (n == name) {
        c = f5_preset(s);
        found = true;
      }
    if (!found) throw ConfigError("unknown f5 preset '" + name + "'");
  }
  if (j.contains("set")) c.set = parse_feature_set(j.at("set").get<std::string>());
  if (j.contains("wavelet"))
    c.wavelet = WaveletSpec::parse(j.at("wavelet").at("name").get<std::string>(), j.at("wavelet").at("level").get<int>());
  if (j.contains("change_quantile_bounds")) {
    c.change_quantile_bounds.clear();
    for (const auto& b : j.at("change_quantile_bounds")) c.change_quantile_bounds.emplace_back(b.at(0), b.at(1));
  }
  if (j.contains("ar_lag")) c.ar_lag = j.at("ar_lag");
  if (j.contains("fft_bins")) c.fft_bins = j.at("fft_bins").get<std::vector<int>>();
  if (j.contains("welch")) {
    const auto& w = j.at("welch");
    c.welch.segment_len = w.value("segment_len", c.welch.segment_len);
    c.welch.overlap_fraction = w.value("overlap_fraction", c.welch.overlap_fraction);
    if (w.contains("window")) c.welch.window = parse_window(w.at("window").get<std::string>());
  }
  if (j.contains("trend_chunk_len")) c.trend_chunk_len = j.at("trend_chunk_len");
  if (j.contains("trends")) {
    c.trends.clear();
    for (const auto& t : j.at("trends"))
      c.trends.push_back({t.at("chunk_len").get<long>(), parse_trend_attr(t.at("attr").get<std::string>()),
                          parse_trend_agg(t.at("agg").get<std::string>())});
  }
  if (j.contains("welch_bins")) c.welch_bins = j.at("welch_bins").get<std::vector<int>>();
  if (j.contains("ar_indices")) c.ar_indices = j.at("ar_indices").get<std::vector<int>>();
  if (j.contains("we_wavelets")) c.we_wavelets = j.at("we_wavelets").get<std::vector<std::string>>();
  if (j.contains("wc_wavelets")) {
    c.wc_wavelets.clear();
    for (const auto& w : j.at("wc_wavelets")) c.wc_wavelets.emplace_back(w.at("name").get<std::string>(), w.at("level").get<int>());
  }
  c.validate();
}

}  // namespace relaykit::features
