#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"
#include "relaykit/parallel.hpp"
#include "relaykit/random.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::txmodel {

/// Parametric description of one transient. Waveform families are caricatures of
/// the recorded shapes, not circuit solutions.
struct SynthesisScenario {
  TransientLabel label;
  double amplitude_pu = 5.0;
  double dc_tau_s = 0.03;
  std::map<int, double> harmonic_mix;  // harmonic order -> fraction of amplitude
  double saturation_knee = 0.3;        // inrush burst threshold (cosine units); CT clip level (fraction of peak)
  long inception_index = 0;            // first event sample; >= record length gives a quiescent record
  std::uint64_t seed = 0;
  double baseline_pu = 0.1;            // pre-event steady-state amplitude

  void validate() const {
    label.validate();
    if (!(amplitude_pu > 0) || !std::isfinite(amplitude_pu)) throw ConfigError("scenario: amplitude_pu must be > 0");
    if (!(dc_tau_s > 0)) throw ConfigError("scenario: dc_tau_s must be > 0");
    if (!(baseline_pu >= 0)) throw ConfigError("scenario: baseline_pu must be >= 0");
    if (inception_index < 0) throw ConfigError("scenario: inception_index must be >= 0");
    if (!(saturation_knee > -1 && saturation_knee < 1)) throw ConfigError("scenario: saturation_knee must lie in (-1, 1)");
    for (auto [h, f] : harmonic_mix)
      if (h < 1 || !(f >= 0)) throw ConfigError("scenario: harmonic orders >= 1 with fractions >= 0");
  }
};

inline void to_json(nlohmann::json& j, const SynthesisScenario& s) {
  nlohmann::json h = nlohmann::json::object();
  for (auto [k, v] : s.harmonic_mix) h[std::to_string(k)] = v;
  j = nlohmann::json{{"label", s.label.str()},
                     {"amplitude_pu", s.amplitude_pu},
                     {"dc_tau_s", s.dc_tau_s},
                     {"harmonic_mix", h},
                     {"saturation_knee", s.saturation_knee},
                     {"inception_index", s.inception_index},
                     {"seed", s.seed},
                     {"baseline_pu", s.baseline_pu}};
}

inline void from_json(const nlohmann::json& j, SynthesisScenario& s) {
  s = SynthesisScenario{};
  s.label = TransientLabel::parse(j.at("label").get<std::string>());
  s.amplitude_pu = j.value("amplitude_pu", s.amplitude_pu);
  s.dc_tau_s = j.value("dc_tau_s", s.dc_tau_s);
  if (j.contains("harmonic_mix"))
    for (auto& [k, v] : j.at("harmonic_mix").items()) s.harmonic_mix[std::stoi(k)] = v.get<double>();
  s.saturation_knee = j.value("saturation_knee", s.saturation_knee);
  s.inception_index = j.value("inception_index", s.inception_index);
  s.seed = j.value("seed", s.seed);
  s.baseline_pu = j.value("baseline_pu", s.baseline_pu);
}

namespace detail {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Draws that shape a record beyond the scenario fields. Always drawn in the same
/// order so a seed means the same thing for every category.
struct HiddenDraws {
  double theta0, psi, depth, ground_share, slip_hz, swing_depth, swing_phase, damping, delta_pre, delta_step,
      hf_hz, hf_tau, step_pu, rise_tau, weak_phase_gain;
  int weak_phase;
  std::array<double, 3> phase_gain;

  explicit HiddenDraws(std::uint64_t seed) {
    Rng r(derive_seed(seed, {0x51a7}));
    theta0 = r.uniform(0, two_pi);
    psi = r.uniform(0, two_pi);
    depth = r.uniform(0.3, 0.9);
    ground_share = r.uniform(0.2, 0.4);
    slip_hz = r.uniform(0.3, 7.0);
    swing_depth = r.uniform(0.05, 0.2);
    swing_phase = r.uniform(0, two_pi);
    damping = r.uniform(1.0, 4.0);
    delta_pre = r.uniform(0.35, 0.6);
    delta_step = r.uniform(0.5, 1.2);
    hf_hz = r.uniform(400, 1200);
    hf_tau = r.uniform(0.003, 0.01);
    step_pu = r.uniform(0.3, 1.0);
    rise_tau = r.uniform(0.01, 0.03);
    weak_phase_gain = r.uniform(0.55, 0.85);
    weak_phase = static_cast<int>(r.index(3));
    for (auto& g : phase_gain) g = r.uniform(0.4, 1.0);
  }
};

inline double harmonics(const std::map<int, double>& mix, double arg) {
  double s = 0.0;
  for (auto [h, f] : mix) s += f * std::sin(h * arg);
  return s;
}

}  // namespace detail

/// Renders `n_cycles` nominal cycles of the scenario as currents or voltages. The
/// same scenario gives a consistent current/voltage pair.
inline ThreePhaseRecord synthesize(const SynthesisScenario& sc, const SamplingSpec& spec, int n_cycles,
                                   RecordKind kind = RecordKind::current) {
  using detail::two_pi;
  sc.validate();
  spec.validate();
  if (n_cycles < 3) throw ConfigError("synthesize: n_cycles must be >= 3");
  const long n = static_cast<long>(n_cycles) * spec.samples_per_cycle();
  const double dt = spec.dt(), w = two_pi * spec.nominal_freq_hz;
  const detail::HiddenDraws hd(sc.seed);
  const Category cat = sc.label.category;
  const double A = sc.amplitude_pu;
  const bool current = kind == RecordKind::current;

  ThreePhaseRecord rec;
  rec.kind = kind;
  rec.sampling = spec;
  rec.label = sc.label;
  rec.meta["seed"] = std::to_string(sc.seed);
  rec.meta["inception_index"] = std::to_string(sc.inception_index);
  for (auto& p : rec.phases) p.assign(n, 0.0);

  std::array<double, 3> phi;
  for (int p = 0; p < 3; ++p) phi[p] = hd.theta0 - two_pi * p / 3.0;

  auto fault_wave = [&](int p, double tau, double amp) {
    double arg = w * tau + hd.psi + phi[p];
    return amp * (std::sin(arg) - std::sin(hd.psi + phi[p]) * std::exp(-tau / sc.dc_tau_s) +
                  detail::harmonics(sc.harmonic_mix, arg));
  };

  // Per-phase fault currents for the labelled fault type.
  auto fault_currents = [&](double tau, double amp) {
    std::array<double, 3> f{};
    const FaultType ft = sc.label.fault->type;
    const FaultPattern pat = fault_pattern(ft);
    const double g = hd.ground_share;
    switch (ft) {
      case FaultType::wab:
      case FaultType::wac:
      case FaultType::wbc: {
        int a = pat.phases[0] ? 0 : 1;
        int b = pat.phases[2] ? 2 : 1;
        double v = fault_wave(a, tau, amp);
        f[a] = v;
        f[b] = -v;
        break;
      }
      case FaultType::w_w: f[0] = fault_wave(0, tau, amp); break;
      case FaultType::t_t: f[0] = fault_wave(0, tau, 0.25 * amp); break;
      default: {
        double zero = 0.0;
        for (int p = 0; p < 3; ++p)
          if (pat.phases[p]) {
            f[p] = fault_wave(p, tau, amp);
            zero += f[p];
          }
        if (ft == FaultType::ph3_g) zero = 0.6 * fault_wave(0, tau, amp);
        if (pat.ground && ft != FaultType::ph3)
          for (int p = 0; p < 3; ++p) f[p] += g * zero;
        break;
      }
    }
    return f;
  };

  // Power-swing angle trajectory (radians) for tau >= 0.
  const bool unstable = sc.label.swing && sc.label.swing->stability == Stability::unstable;
  auto swing_delta = [&](double tau) {
    const double d_s = hd.delta_pre + hd.delta_step;
    if (unstable) return d_s + 0.4 + two_pi * hd.slip_hz * tau * (1.0 + 2.0 * tau);
    return d_s + 0.6 * std::exp(-hd.damping * tau) * std::cos(two_pi * hd.slip_hz * tau);
  };

  for (long i = 0; i < n; ++i) {
    const double t = i * dt;
    const bool post = i >= sc.inception_index;
    const double tau = (i - sc.inception_index) * dt;
    for (int p = 0; p < 3; ++p) {
      const double s1 = std::sin(w * t + phi[p]);
      double v;
      if (current) {
        v = sc.baseline_pu * s1;
        if (post) {
          switch (cat) {
            case Category::internal_fault: v += fault_currents(tau, A)[p]; break;
            case Category::magnetizing_inrush:
            case Category::sympathetic_inrush: {
              const double k = sc.saturation_knee;
              double burst = std::max(0.0, (std::cos(w * tau + hd.psi - two_pi * p / 3.0) - k) / (1.0 - k));
              double env = std::exp(-tau / sc.dc_tau_s);
              if (cat == Category::sympathetic_inrush) env *= 1.0 - std::exp(-tau / hd.rise_tau);
              v += A * hd.phase_gain[p] * env * burst;
              break;
            }
            case Category::overexcitation: {
              double arg = w * t + phi[p];
              v = (sc.baseline_pu + A) * (std::sin(arg) + detail::harmonics(sc.harmonic_mix, arg));
              break;
            }
            case Category::external_fault_ct_sat: {
              double f = fault_wave(p, tau, A);
              double lim = sc.saturation_knee * A;
              v += std::clamp(f, -std::abs(lim), std::abs(lim));
              break;
            }
            case Category::ferroresonance: {
              double arg = w * tau + hd.psi + phi[p];
              double x = 0.7 * std::sin(arg / 3.0) + 0.5 * std::sin(arg) + 0.25 * std::sin(2.0 * arg / 3.0);
              v += A * std::tanh(1.5 * x) / std::tanh(1.5);
              break;
            }
            case Category::capacitor_switching:
              v += hd.step_pu * s1 +
                   A * std::exp(-tau / hd.hf_tau) * std::sin(two_pi * hd.hf_hz * tau + hd.psi + phi[p]);
              break;
            case Category::nonlinear_load_switching: {
              double arg = w * t + phi[p];
              v += A * (std::sin(arg) + detail::harmonics(sc.harmonic_mix, arg));
              break;
            }
            case Category::power_swing: {
              double g = (sc.label.swing->symmetry == Symmetry::asymmetrical && p == hd.weak_phase)
                             ? hd.weak_phase_gain : 1.0;
              double d = swing_delta(tau);
              double mag = sc.baseline_pu * (1.0 + (A - 1.0) * std::abs(std::sin(d / 2)) / std::sin((hd.delta_pre + hd.delta_step + 0.6) / 2));
              v = g * mag * std::sin(w * t + phi[p] + (d - hd.delta_pre) / 2);
              break;
            }
            case Category::fault_during_swing: v += fault_currents(tau, A)[p]; break;
          }
        }
        if (cat == Category::fault_during_swing)
          v += sc.baseline_pu * hd.swing_depth * std::sin(two_pi * (0.3 + (hd.slip_hz - 0.3) * 0.7 / 6.7) * t + hd.swing_phase) * s1;
      } else {
        // Voltages: 1 pu pre-event, then a family-specific distortion.
        double amp = 1.0;
        double extra = 0.0;
        if (cat == Category::fault_during_swing)
          amp -= hd.swing_depth * std::sin(two_pi * (0.3 + (hd.slip_hz - 0.3) * 0.7 / 6.7) * t + hd.swing_phase);
        if (post) {
          switch (cat) {
            case Category::internal_fault:
            case Category::fault_during_swing: {
              const FaultPattern pat = fault_pattern(sc.label.fault->type);
              double d = sc.label.fault->type == FaultType::t_t ? 0.1 * hd.depth : hd.depth;
              if (pat.phases[p]) amp *= 1.0 - d;
              break;
            }
            case Category::external_fault_ct_sat: amp *= 1.0 - 0.5 * hd.depth; break;
            case Category::magnetizing_inrush:
            case Category::sympathetic_inrush:
              amp *= 0.95;
              extra = 0.03 * std::sin(2.0 * (w * t + phi[p]));
              break;
            case Category::overexcitation: amp *= 1.1 + 0.2 * hd.step_pu; break;
            case Category::ferroresonance: extra = 0.3 * std::sin((w * tau + hd.psi + phi[p]) / 3.0); break;
            case Category::capacitor_switching:
              extra = 0.2 * std::exp(-tau / hd.hf_tau) * std::sin(two_pi * hd.hf_hz * tau + phi[p]);
              break;
            case Category::nonlinear_load_switching: extra = 0.05 * std::sin(5.0 * (w * t + phi[p])); break;
            case Category::power_swing: {
              double g = (sc.label.swing->symmetry == Symmetry::asymmetrical && p == hd.weak_phase)
                             ? 0.5 * (1.0 + hd.weak_phase_gain) : 1.0;
              amp = g * std::abs(std::cos(swing_delta(tau) / 2)) / std::cos(hd.delta_pre / 2);
              break;
            }
          }
        }
        v = amp * s1 + extra;
      }
      rec.phases[p][i] = v;
    }
  }
  return rec;
}

/// Quiescent scenario: a steady sinusoid of `amplitude_pu` with no event.
inline SynthesisScenario steady_scenario(double amplitude_pu, std::uint64_t seed) {
  SynthesisScenario s;
  s.label.category = Category::nonlinear_load_switching;  // placeholder; never rendered past inception
  s.amplitude_pu = amplitude_pu;
  s.baseline_pu = amplitude_pu;
  s.inception_index = std::numeric_limits<long>::max() / 2;
  s.seed = seed;
  return s;
}

// ---------------------------------------------------------------------------
// Corpus classes

/// One generator class of the default corpus.
struct CorpusClass {
  std::string name;
  Category category;
  std::optional<FaultUnit> unit;
  std::optional<Stability> stability;
  int n_cycles = 6;
};

inline std::vector<CorpusClass> default_corpus_classes() {
  return {
      {"internal_fault/power_transformer", Category::internal_fault, FaultUnit::power_transformer, {}, 6},
      {"internal_fault/ispar_series", Category::internal_fault, FaultUnit::ispar_series, {}, 6},
      {"internal_fault/ispar_exciting", Category::internal_fault, FaultUnit::ispar_exciting, {}, 6},
      {"magnetizing_inrush", Category::magnetizing_inrush, {}, {}, 6},
      {"sympathetic_inrush", Category::sympathetic_inrush, {}, {}, 6},
      {"external_fault_ct_sat", Category::external_fault_ct_sat, {}, {}, 6},
      {"ferroresonance", Category::ferroresonance, {}, {}, 6},
      {"capacitor_switching", Category::capacitor_switching, {}, {}, 6},
      {"nonlinear_load_switching", Category::nonlinear_load_switching, {}, {}, 6},
      {"power_swing/stable", Category::power_swing, {}, Stability::stable, 14},
      {"power_swing/unstable", Category::power_swing, {}, Stability::unstable, 14},
      {"fault_during_swing", Category::fault_during_swing, FaultUnit::power_transformer, {}, 14},
  };
}

/// Draws the `index`-th scenario of a class. Fault types cycle through all 13 kinds.
inline SynthesisScenario random_scenario(const CorpusClass& cls, std::size_t index, const SamplingSpec& spec,
                                         std::uint64_t seed) {
  Rng r(derive_seed(seed, {0xc0de}));
  SynthesisScenario s;
  s.seed = derive_seed(seed, {0x5eed});
  s.label.category = cls.category;
  const int nc = spec.samples_per_cycle();
  s.inception_index = 2 * nc + 3 + static_cast<long>(r.index(static_cast<std::uint64_t>(nc / 2)));
  if (TransientLabel::needs_fault(cls.category))
    s.label.fault = FaultDetail{cls.unit.value_or(FaultUnit::power_transformer),
                                static_cast<FaultType>(index % k_fault_type_names.size())};
  if (TransientLabel::needs_swing(cls.category))
    s.label.swing = SwingDetail{cls.stability.value_or(Stability::stable),
                                r.uniform() < 0.5 ? Symmetry::symmetrical : Symmetry::asymmetrical};

  switch (cls.category) {
    case Category::internal_fault:
      switch (*cls.unit) {
        case FaultUnit::power_transformer:
          s.amplitude_pu = r.uniform(4, 12);
          s.dc_tau_s = r.uniform(0.02, 0.06);
          s.harmonic_mix = {{2, r.uniform(0.0, 0.05)}};
          break;
        case FaultUnit::ispar_series:
          s.amplitude_pu = r.uniform(3, 10);
          s.dc_tau_s = r.uniform(0.02, 0.05);
          s.harmonic_mix = {{3, r.uniform(0.08, 0.2)}};
          break;
        case FaultUnit::ispar_exciting:
          s.amplitude_pu = r.uniform(1.5, 5);
          s.dc_tau_s = r.uniform(0.008, 0.02);
          s.harmonic_mix = {{5, r.uniform(0.08, 0.2)}};
          break;
      }
      break;
    case Category::magnetizing_inrush:
      s.amplitude_pu = r.uniform(2, 8);
      s.dc_tau_s = r.uniform(0.05, 0.2);
      s.saturation_knee = r.uniform(0.0, 0.6);
      s.baseline_pu = 0.0;
      break;
    case Category::sympathetic_inrush:
      s.amplitude_pu = r.uniform(0.5, 3);
      s.dc_tau_s = r.uniform(0.05, 0.2);
      s.saturation_knee = r.uniform(0.2, 0.7);
      break;
    case Category::overexcitation:
      s.amplitude_pu = r.uniform(0.3, 1.2);
      s.harmonic_mix = {{3, r.uniform(0.2, 0.5)}, {5, r.uniform(0.05, 0.2)}};
      break;
    case Category::external_fault_ct_sat:
      s.amplitude_pu = r.uniform(4, 12);
      s.dc_tau_s = r.uniform(0.02, 0.06);
      s.saturation_knee = r.uniform(0.2, 0.6);
      break;
    case Category::ferroresonance: s.amplitude_pu = r.uniform(0.5, 3); break;
    case Category::capacitor_switching: s.amplitude_pu = r.uniform(0.5, 3); break;
    case Category::nonlinear_load_switching:
      s.amplitude_pu = r.uniform(0.4, 1.5);
      s.harmonic_mix = {{5, r.uniform(0.1, 0.25)}, {7, r.uniform(0.05, 0.15)}, {11, r.uniform(0.03, 0.09)},
                        {13, r.uniform(0.02, 0.07)}};
      break;
    case Category::power_swing:
      s.amplitude_pu = r.uniform(1.5, 3);
      s.baseline_pu = 1.0;
      break;
    case Category::fault_during_swing:
      s.amplitude_pu = r.uniform(3, 10);
      s.dc_tau_s = r.uniform(0.02, 0.05);
      s.baseline_pu = 1.0;
      break;
  }
  return s;
}

struct CorpusItem {
  SynthesisScenario scenario;
  int n_cycles = 6;
  ThreePhaseRecord current;
  ThreePhaseRecord voltage;
};

/// `per_class` scenarios of every class, rendered as current/voltage pairs, in class order.
inline std::vector<CorpusItem> generate_corpus(const std::vector<CorpusClass>& classes, std::size_t per_class,
                                               const SamplingSpec& spec, std::uint64_t seed, int jobs = 1) {
  std::vector<CorpusItem> out(classes.size() * per_class);
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const std::size_t c = i / per_class, j = i % per_class;
    CorpusItem& it = out[i];
    it.scenario = random_scenario(classes[c], j, spec, derive_seed(seed, {c, j}));
    it.n_cycles = classes[c].n_cycles;
    it.current = synthesize(it.scenario, spec, it.n_cycles, RecordKind::current);
    it.voltage = synthesize(it.scenario, spec, it.n_cycles, RecordKind::voltage);
    it.current.meta["class"] = it.voltage.meta["class"] = classes[c].name;
  });
  return out;
}

}  // namespace relaykit::txmodel
