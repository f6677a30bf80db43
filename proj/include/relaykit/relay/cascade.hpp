#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relaykit/detector.hpp"
#include "relaykit/error.hpp"
#include "relaykit/features/extract.hpp"
#include "relaykit/learn/cv.hpp"
#include "relaykit/learn/model.hpp"
#include "relaykit/parallel.hpp"
#include "relaykit/random.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::relay {

enum class StageKind { detect, locate, fault_type, disturbance_type, swing_event, swing_stability, swing_symmetry };

inline constexpr std::array<std::string_view, 7> k_stage_kind_names = {
    "detect", "locate", "fault_type", "disturbance_type", "swing_event", "swing_stability", "swing_symmetry"};

inline std::string_view to_string(StageKind k) { return k_stage_kind_names[static_cast<int>(k)]; }
inline StageKind parse_stage_kind(std::string_view s) {
  for (std::size_t i = 0; i < k_stage_kind_names.size(); ++i)
    if (k_stage_kind_names[i] == s) return static_cast<StageKind>(i);
  throw ConfigError("unknown stage kind '" + std::string(s) + "'");
}

inline bool is_disturbance(Category c) {
  switch (c) {
    case Category::magnetizing_inrush:
    case Category::sympathetic_inrush:
    case Category::overexcitation:
    case Category::external_fault_ct_sat:
    case Category::ferroresonance:
    case Category::capacitor_switching:
    case Category::nonlinear_load_switching: return true;
    default: return false;
  }
}

inline bool is_swing_stage(StageKind k) {
  return k == StageKind::swing_event || k == StageKind::swing_stability || k == StageKind::swing_symmetry;
}

struct StageSpec {
  std::string name;
  StageKind kind = StageKind::detect;
  std::optional<FaultUnit> unit;  // fault_type stages only
  features::FeatureConfig features;
  double pre_cycles = 0.5;
  double post_cycles = 1.0;
  learn::ModelSpec model;

  void validate() const {
    if (name.empty()) throw ConfigError("stage: empty name");
    if ((kind == StageKind::fault_type) != unit.has_value())
      throw ConfigError("stage '" + name + "': a unit is required exactly for fault_type stages");
    if (!(pre_cycles >= 0) || !(post_cycles > 0) || !(pre_cycles + post_cycles >= 1.0))
      throw ConfigError("stage '" + name + "': capture must span at least one cycle");
    features.validate();
    learn::validate(model);
  }
};

/// Class names in the order used for stage targets.
inline std::vector<std::string> class_order(const StageSpec& s) {
  auto names = [](const auto& arr) { return std::vector<std::string>(arr.begin(), arr.end()); };
  switch (s.kind) {
    case StageKind::detect: return {"internal_fault", "disturbance"};
    case StageKind::locate: return names(k_unit_names);
    case StageKind::fault_type: return names(k_fault_type_names);
    case StageKind::disturbance_type: {
      std::vector<std::string> v;
      for (std::size_t c = 0; c < k_category_names.size(); ++c)
        if (is_disturbance(static_cast<Category>(c))) v.emplace_back(k_category_names[c]);
      return v;
    }
    case StageKind::swing_event: return {"fault", "fault_during_swing", "power_swing"};
    case StageKind::swing_stability: return names(k_stability_names);
    case StageKind::swing_symmetry: return names(k_symmetry_names);
  }
  return {};
}

/// Training target of a labelled record for this stage, or nothing if the record
/// does not belong to the stage's corpus.
inline std::optional<std::string> stage_target(const StageSpec& s, const TransientLabel& l) {
  switch (s.kind) {
    case StageKind::detect:
      if (l.category == Category::internal_fault) return "internal_fault";
      if (is_disturbance(l.category)) return "disturbance";
      return std::nullopt;
    case StageKind::locate:
      if (l.category == Category::internal_fault) return std::string(to_string(l.fault->unit));
      return std::nullopt;
    case StageKind::fault_type:
      if (l.category == Category::internal_fault && l.fault->unit == *s.unit)
        return std::string(to_string(l.fault->type));
      return std::nullopt;
    case StageKind::disturbance_type:
      if (is_disturbance(l.category)) return std::string(to_string(l.category));
      return std::nullopt;
    case StageKind::swing_event:
      if (l.category == Category::internal_fault) return "fault";
      if (l.category == Category::fault_during_swing) return "fault_during_swing";
      if (l.category == Category::power_swing) return "power_swing";
      return std::nullopt;
    case StageKind::swing_stability:
      if (l.category == Category::power_swing) return std::string(to_string(l.swing->stability));
      return std::nullopt;
    case StageKind::swing_symmetry:
      if (l.category == Category::power_swing) return std::string(to_string(l.swing->symmetry));
      return std::nullopt;
  }
  return std::nullopt;
}

struct CascadeConfig {
  SamplingSpec sampling;
  detector::DetectorConfig detector;
  detector::Method method = detector::Method::cdf;
  std::vector<StageSpec> stages;
  int cv_folds = 5;                      // 0 skips cross-validation
  std::optional<double> capture_snr_db;  // noise added to training captures
  std::uint64_t seed = 0;

  void validate() const {
    sampling.validate();
    detector.validate();
    if (cv_folds == 1 || cv_folds < 0) throw ConfigError("cascade: cv_folds must be 0 or >= 2");
    if (stages.empty()) throw ConfigError("cascade: no stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      stages[i].validate();
      for (std::size_t j = 0; j < i; ++j) {
        if (stages[j].name == stages[i].name) throw ConfigError("cascade: duplicate stage name '" + stages[i].name + "'");
        if (stages[j].kind == stages[i].kind && stages[j].unit == stages[i].unit)
          throw ConfigError("cascade: stages '" + stages[j].name + "' and '" + stages[i].name + "' have the same role");
      }
    }
  }
};

inline learn::ModelSpec default_boost_spec() {
  return {learn::Family::gradient_boosting, {{"n_stages", 300}, {"learning_rate", 0.1}, {"max_depth", 3}}};
}

/// Six-classifier layout: detect, locate, one fault-type stage per unit, and disturbance type.
inline CascadeConfig default_cascade_config() {
  using features::F5Stage;
  using features::f5_preset;
  CascadeConfig c;
  const auto m = default_boost_spec();
  c.stages = {
      {"detect", StageKind::detect, {}, f5_preset(F5Stage::detect), 0.5, 1.0, m},
      {"locate", StageKind::locate, {}, f5_preset(F5Stage::locate), 0.5, 2.5, m},
      {"pt_type", StageKind::fault_type, FaultUnit::power_transformer, f5_preset(F5Stage::pt_type), 0.5, 2.5, m},
      {"series_type", StageKind::fault_type, FaultUnit::ispar_series, f5_preset(F5Stage::series_type), 0.5, 2.5, m},
      {"exciting_type", StageKind::fault_type, FaultUnit::ispar_exciting, f5_preset(F5Stage::exciting_type), 0.5,
       2.5, m},
      {"disturbance_type", StageKind::disturbance_type, {}, f5_preset(F5Stage::transients), 0.5, 2.5, m},
  };
  return c;
}

/// Swing pipeline: one-cycle event stage, ten-cycle stability and symmetry stages.
inline CascadeConfig swing_cascade_config() {
  CascadeConfig c;
  features::FeatureConfig f;
  f.set = features::FeatureSet::swing6;
  const auto m = default_boost_spec();
  c.stages = {
      {"swing_event", StageKind::swing_event, {}, f, 0.0, 1.0, m},
      {"swing_stability", StageKind::swing_stability, {}, f, 0.0, 10.0, m},
      {"swing_symmetry", StageKind::swing_symmetry, {}, f, 0.0, 10.0, m},
  };
  return c;
}

/// A current record with optional voltages over the same samples.
struct EventRecord {
  ThreePhaseRecord current;
  std::optional<ThreePhaseRecord> voltage;
};

/// Window of the stage's capture length starting `pre` samples before the trigger.
inline EventRecord stage_capture(const StageSpec& s, const EventRecord& r, long trigger) {
  const auto len = detector::capture_lengths(r.current.sampling, s.pre_cycles, s.post_cycles);
  const long start = trigger - len.pre;
  if (start < 0 || start + len.total() > static_cast<long>(r.current.size()))
    throw DataError("stage '" + s.name + "': record of " + std::to_string(r.current.size()) +
                    " samples is too short for a " + std::to_string(len.total()) + "-sample capture at trigger " +
                    std::to_string(trigger));
  EventRecord out{window(r.current, start, len.total()), std::nullopt};
  if (r.voltage) out.voltage = window(*r.voltage, start, len.total());
  return out;
}

inline features::FeatureVector stage_features(const StageSpec& s, const EventRecord& capture) {
  return features::extract(capture.current, capture.voltage ? &*capture.voltage : nullptr, s.features);
}

/// Feature names the stage produces for its capture length, from a probe waveform.
inline std::vector<std::string> expected_feature_names(const StageSpec& s, const SamplingSpec& spec) {
  const auto len = detector::capture_lengths(spec, s.pre_cycles, s.post_cycles);
  EventRecord probe;
  probe.current.sampling = spec;
  probe.voltage = ThreePhaseRecord{};
  probe.voltage->sampling = spec;
  probe.voltage->kind = RecordKind::voltage;
  for (int p = 0; p < 3; ++p)
    for (long i = 0; i < len.total(); ++i) {
      const double t = static_cast<double>(i) / spec.sample_rate_hz;
      const double w = 2.0 * std::numbers::pi * spec.nominal_freq_hz * t - 2.0 * std::numbers::pi * p / 3.0;
      probe.current.phases[p].push_back(std::sin(w) + 0.2 * std::sin(3.0 * w + 0.3 * i));
      probe.voltage->phases[p].push_back(std::cos(w));
    }
  return stage_features(s, probe).names;
}

struct StageModel {
  StageSpec spec;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  learn::AnyModel model;
  std::optional<double> cv_score;
  long n_rows = 0;
  long n_skipped = 0;  // labelled records the detector missed or that were too short
};

struct CascadeModel {
  CascadeConfig config;
  std::vector<StageModel> stages;

  const StageModel* find(StageKind k, std::optional<FaultUnit> unit = std::nullopt) const {
    for (const auto& s : stages)
      if (s.spec.kind == k && s.spec.unit == unit) return &s;
    return nullptr;
  }
};

/// Checks every stage model against the feature layout its config produces.
inline CascadeModel assemble(const CascadeConfig& cfg, std::vector<StageModel> stages) {
  cfg.validate();
  if (stages.size() != cfg.stages.size()) throw ModelError("cascade: stage count differs from config");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    auto& s = stages[i];
    if (s.spec.name != cfg.stages[i].name) throw ModelError("cascade: stage " + std::to_string(i) + " name mismatch");
    const auto expect = expected_feature_names(s.spec, cfg.sampling);
    const int width = learn::n_features(s.model);
    if (static_cast<std::size_t>(width) != expect.size() || s.feature_names != expect)
      throw ModelError("stage '" + s.spec.name + "': model takes " + std::to_string(width) +
                       " features but its feature set yields " + std::to_string(expect.size()));
    if (static_cast<std::size_t>(learn::n_classes(s.model)) != s.class_names.size())
      throw ModelError("stage '" + s.spec.name + "': class count mismatch");
  }
  return {cfg, std::move(stages)};
}

struct StageData {
  learn::Dataset data;
  std::vector<std::string> feature_names;
  long n_skipped = 0;
};

/// Trigger index per record, or nothing when the detector stays quiet.
inline std::vector<std::optional<long>> detect_all(const std::vector<EventRecord>& corpus, const CascadeConfig& cfg,
                                                   int jobs) {
  std::vector<std::optional<long>> out(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const auto det = detector::scan(corpus[i].current, cfg.detector, cfg.method);
    if (det.triggered) out[i] = det.trigger_index;
  });
  return out;
}

/// Per-record stage target and features; either is empty when the record has no
/// target for the stage, the detector missed it, or it is too short for the capture.
struct StageRows {
  std::vector<std::optional<std::string>> target;
  std::vector<std::optional<features::FeatureVector>> features;
};

inline StageRows stage_rows(const std::vector<EventRecord>& corpus, const std::vector<std::optional<long>>& triggers,
                            const CascadeConfig& cfg, std::size_t stage_index, int jobs) {
  const StageSpec& s = cfg.stages[stage_index];
  StageRows out;
  out.target.resize(corpus.size());
  out.features.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus[i].current.label) out.target[i] = stage_target(s, *corpus[i].current.label);
  const auto len = detector::capture_lengths(cfg.sampling, s.pre_cycles, s.post_cycles);
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    if (!out.target[i] || !triggers[i]) return;
    const long start = *triggers[i] - len.pre;
    if (start < 0 || start + len.total() > static_cast<long>(corpus[i].current.size())) return;
    EventRecord cap = stage_capture(s, corpus[i], *triggers[i]);
    if (cfg.capture_snr_db) {
      const auto seed = derive_seed(cfg.seed, {0x4015e, stage_index, i});
      cap.current = add_noise(cap.current, *cfg.capture_snr_db, seed);
      if (cap.voltage) cap.voltage = add_noise(*cap.voltage, *cfg.capture_snr_db, derive_seed(seed, {1}));
    }
    out.features[i] = stage_features(s, cap);
  });
  return out;
}

inline StageData stage_dataset(const std::vector<EventRecord>& corpus, const std::vector<std::optional<long>>& triggers,
                               const CascadeConfig& cfg, std::size_t stage_index, int jobs) {
  const StageSpec& s = cfg.stages[stage_index];
  const auto order = class_order(s);
  const auto rows = stage_rows(corpus, triggers, cfg, stage_index, jobs);
  const auto& target = rows.target;
  const auto& fv = rows.features;

  StageData out;
  std::vector<char> present(order.size(), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (target[i] && fv[i]) present[std::find(order.begin(), order.end(), *target[i]) - order.begin()] = 1;
  std::vector<int> remap(order.size(), -1);
  for (std::size_t c = 0; c < order.size(); ++c)
    if (present[c]) {
      remap[c] = static_cast<int>(out.data.class_names.size());
      out.data.class_names.push_back(order[c]);
    }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!target[i]) continue;
    if (!fv[i]) {
      ++out.n_skipped;
      continue;
    }
    if (out.feature_names.empty()) out.feature_names = fv[i]->names;
    if (fv[i]->names != out.feature_names) throw DataError("stage '" + s.name + "': feature layout differs between records");
    out.data.x.push_row(fv[i]->values);
    out.data.y.push_back(remap[std::find(order.begin(), order.end(), *target[i]) - order.begin()]);
  }
  return out;
}

inline constexpr long k_min_rows_per_class = 10;

/// Trains stage `si` of `cfg` on its own captures and records its CV balanced accuracy.
inline StageModel train_stage(const std::vector<EventRecord>& corpus, const std::vector<std::optional<long>>& triggers,
                              const CascadeConfig& cfg, std::size_t si, int jobs = 1) {
  const auto& s = cfg.stages[si];
  auto sd = stage_dataset(corpus, triggers, cfg, si, jobs);
  const auto counts = sd.data.class_counts();
  if (counts.size() < 2)
    throw DataError("stage '" + s.name + "': needs at least 2 classes, found " + std::to_string(counts.size()));
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < k_min_rows_per_class)
      throw DataError("stage '" + s.name + "': class '" + sd.data.class_names[c] + "' has " +
                      std::to_string(counts[c]) + " rows, need " + std::to_string(k_min_rows_per_class));
  StageModel sm;
  sm.spec = s;
  sm.class_names = sd.data.class_names;
  sm.feature_names = sd.feature_names;
  sm.n_rows = static_cast<long>(sd.data.n());
  sm.n_skipped = sd.n_skipped;
  const auto stage_seed = derive_seed(cfg.seed, {0x57a9e, si});
  if (cfg.cv_folds >= 2) sm.cv_score = learn::cross_val_score(sd.data, s.model, cfg.cv_folds, stage_seed, jobs);
  sm.model = learn::train(sd.data, s.model, stage_seed, jobs);
  return sm;
}

inline void check_corpus(const std::vector<EventRecord>& corpus, const CascadeConfig& cfg) {
  for (const auto& r : corpus) {
    if (r.current.sampling != cfg.sampling) throw DataError("cascade: record sampling differs from config");
    if (r.voltage && r.voltage->size() != r.current.size()) throw DataError("cascade: voltage/current length mismatch");
  }
}

inline CascadeModel build_cascade(const std::vector<EventRecord>& corpus, const CascadeConfig& cfg, int jobs = 1) {
  cfg.validate();
  check_corpus(corpus, cfg);
  const auto triggers = detect_all(corpus, cfg, jobs);
  std::vector<StageModel> stages;
  for (std::size_t si = 0; si < cfg.stages.size(); ++si) stages.push_back(train_stage(corpus, triggers, cfg, si, jobs));
  return assemble(cfg, std::move(stages));
}

struct StageEvaluation {
  std::string stage;
  std::vector<std::string> class_names;  // the model's classes
  learn::Confusion confusion;            // rows: true class, columns: predicted
  std::optional<double> balanced_accuracy;
  std::vector<std::optional<double>> recall;  // per class; empty when no test rows
  long n_rows = 0;
  long n_skipped = 0;
};

/// Held-out confusion per stage. Captures get the model's training noise setting
/// with seeds derived from `seed`.
inline std::vector<StageEvaluation> evaluate_cascade(const CascadeModel& m, const std::vector<EventRecord>& corpus,
                                                     std::uint64_t seed, int jobs = 1) {
  CascadeConfig cfg = m.config;
  cfg.seed = seed;
  const auto triggers = detect_all(corpus, cfg, jobs);
  std::vector<StageEvaluation> out;
  for (std::size_t si = 0; si < m.stages.size(); ++si) {
    const auto& sm = m.stages[si];
    auto sd = stage_dataset(corpus, triggers, cfg, si, jobs);
    StageEvaluation ev;
    ev.stage = sm.spec.name;
    ev.class_names = sm.class_names;
    ev.n_skipped = sd.n_skipped;
    ev.n_rows = static_cast<long>(sd.data.n());
    const auto k = sm.class_names.size();
    ev.confusion.assign(k, std::vector<long>(k, 0));
    if (sd.data.n() > 0) {
      if (sd.feature_names != sm.feature_names)
        throw DataError("stage '" + sm.spec.name + "': evaluation features differ from the model's");
      const auto pred = learn::predict(sm.model, sd.data.x);
      for (std::size_t i = 0; i < sd.data.n(); ++i) {
        const auto& name = sd.data.class_names[sd.data.y[i]];
        auto it = std::find(sm.class_names.begin(), sm.class_names.end(), name);
        if (it == sm.class_names.end())
          throw DataError("stage '" + sm.spec.name + "': class '" + name + "' was not seen in training");
        ++ev.confusion[it - sm.class_names.begin()][pred.labels[i]];
      }
    }
    double sum = 0.0;
    int used = 0;
    for (std::size_t a = 0; a < k; ++a) {
      long tot = 0;
      for (long v : ev.confusion[a]) tot += v;
      if (tot == 0) {
        ev.recall.emplace_back();
        continue;
      }
      const double r = static_cast<double>(ev.confusion[a][a]) / static_cast<double>(tot);
      ev.recall.emplace_back(r);
      sum += r;
      ++used;
    }
    if (used > 0) ev.balanced_accuracy = sum / used;
    out.push_back(std::move(ev));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decisions

enum class Verdict { trip, restrain, block, no_event };

inline std::string_view to_string(Verdict v) {
  static constexpr std::array<std::string_view, 4> n = {"trip", "restrain", "block", "no_event"};
  return n[static_cast<int>(v)];
}

struct RelayDecision {
  Verdict verdict = Verdict::no_event;
  std::optional<std::string> category;
  std::optional<std::string> unit;
  std::optional<std::string> fault_type;
  std::optional<std::string> direction;
  std::optional<std::string> zone;
  std::optional<std::string> stability;
  std::optional<std::string> symmetry;
  std::vector<std::pair<std::string, double>> stage_confidences;  // in evaluation order
  std::optional<long> trigger_index;
};

inline nlohmann::json to_json(const RelayDecision& d) {
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [k, v] : d.stage_confidences) conf[k] = v;
  return {{"verdict", std::string(to_string(d.verdict))},
          {"category", opt(d.category)},
          {"unit", opt(d.unit)},
          {"fault_type", opt(d.fault_type)},
          {"direction", opt(d.direction)},
          {"zone", opt(d.zone)},
          {"stability", opt(d.stability)},
          {"symmetry", opt(d.symmetry)},
          {"stage_confidences", conf},
          {"trigger_index", d.trigger_index ? nlohmann::json(*d.trigger_index) : nlohmann::json(nullptr)}};
}

/// Predicted class name and its score for one capture.
inline std::pair<std::string, double> run_stage(const StageModel& s, const EventRecord& capture) {
  const auto fv = stage_features(s.spec, capture);
  if (fv.names != s.feature_names)
    throw DataError("stage '" + s.spec.name + "': capture yields " + std::to_string(fv.size()) +
                    " features, model expects " + std::to_string(s.feature_names.size()));
  learn::Matrix x;
  x.push_row(fv.values);
  const auto p = learn::predict(s.model, x);
  return {s.class_names.at(p.labels[0]), p.scores(0, p.labels[0])};
}

inline const StageModel& require_stage(const CascadeModel& m, StageKind k, std::optional<FaultUnit> unit = std::nullopt) {
  const auto* s = m.find(k, unit);
  if (!s) throw ModelError("cascade has no " + std::string(to_string(k)) + " stage");
  return *s;
}

/// Detector gate, then detect; faults go through locate and the unit's fault-type
/// stage (trip), disturbances through disturbance_type (restrain).
inline RelayDecision classify_event(const CascadeModel& m, const ThreePhaseRecord& current,
                                    const std::optional<ThreePhaseRecord>& voltage = std::nullopt) {
  current.validate();
  if (current.sampling != m.config.sampling) throw DataError("classify: record sampling differs from the model's");
  RelayDecision d;
  const auto det = detector::scan(current, m.config.detector, m.config.method);
  if (!det.triggered) return d;
  d.trigger_index = det.trigger_index;
  const EventRecord rec{current, voltage};
  const auto& detect = require_stage(m, StageKind::detect);
  const auto [cls, conf] = run_stage(detect, stage_capture(detect.spec, rec, *det.trigger_index));
  d.stage_confidences.emplace_back(detect.spec.name, conf);
  if (cls == "internal_fault") {
    d.verdict = Verdict::trip;
    d.category = "internal_fault";
    if (const auto* loc = m.find(StageKind::locate)) {
      const auto [unit, c2] = run_stage(*loc, stage_capture(loc->spec, rec, *det.trigger_index));
      d.stage_confidences.emplace_back(loc->spec.name, c2);
      d.unit = unit;
      if (const auto* ft = m.find(StageKind::fault_type, parse_unit(unit))) {
        const auto [type, c3] = run_stage(*ft, stage_capture(ft->spec, rec, *det.trigger_index));
        d.stage_confidences.emplace_back(ft->spec.name, c3);
        d.fault_type = type;
      }
    }
  } else {
    d.verdict = Verdict::restrain;
    if (const auto* dt = m.find(StageKind::disturbance_type)) {
      const auto [cat, c2] = run_stage(*dt, stage_capture(dt->spec, rec, *det.trigger_index));
      d.stage_confidences.emplace_back(dt->spec.name, c2);
      d.category = cat;
    }
  }
  return d;
}

/// Swing pipeline on explicit captures: event stage on `short_capture`, stability
/// and symmetry stages on `long_capture`, which only swings need.
inline RelayDecision classify_swing(const CascadeModel& m, const EventRecord& short_capture,
                                    const std::optional<EventRecord>& long_capture) {
  if (!short_capture.voltage || (long_capture && !long_capture->voltage))
    throw DataError("classify_swing: voltage channels are required");
  RelayDecision d;
  const auto& ev = require_stage(m, StageKind::swing_event);
  const auto [cls, conf] = run_stage(ev, short_capture);
  d.stage_confidences.emplace_back(ev.spec.name, conf);
  if (cls == "fault" || cls == "fault_during_swing") {
    d.verdict = Verdict::trip;
    d.category = cls == "fault" ? "internal_fault" : "fault_during_swing";
    return d;
  }
  d.category = "power_swing";
  const auto& st = require_stage(m, StageKind::swing_stability);
  if (!long_capture) throw DataError("classify_swing: swing needs the long capture");
  const auto [stab, c2] = run_stage(st, *long_capture);
  d.stage_confidences.emplace_back(st.spec.name, c2);
  d.stability = stab;
  d.verdict = stab == "unstable" ? Verdict::block : Verdict::restrain;
  if (const auto* sy = m.find(StageKind::swing_symmetry)) {
    const auto [sym, c3] = run_stage(*sy, *long_capture);
    d.stage_confidences.emplace_back(sy->spec.name, c3);
    d.symmetry = sym;
  }
  return d;
}

/// Detector gate on the currents, then classify_swing on the stage captures.
inline RelayDecision classify_swing_record(const CascadeModel& m, const ThreePhaseRecord& current,
                                           const std::optional<ThreePhaseRecord>& voltage) {
  current.validate();
  if (!voltage) throw DataError("classify_swing: voltage channels are required");
  if (voltage->size() != current.size()) throw DataError("classify_swing: voltage/current length mismatch");
  const auto det = detector::scan(current, m.config.detector, m.config.method);
  if (!det.triggered) return {};
  const EventRecord rec{current, voltage};
  const auto& ev = require_stage(m, StageKind::swing_event);
  const auto* st = m.find(StageKind::swing_stability);
  const auto short_cap = stage_capture(ev.spec, rec, *det.trigger_index);
  // Fault records may end before the long window; it is only needed for swings.
  std::optional<EventRecord> long_cap;
  if (st) {
    const auto len = detector::capture_lengths(current.sampling, st->spec.pre_cycles, st->spec.post_cycles);
    const long start = *det.trigger_index - len.pre;
    if (start >= 0 && start + len.total() <= static_cast<long>(current.size()))
      long_cap = stage_capture(st->spec, rec, *det.trigger_index);
  }
  auto d = classify_swing(m, short_cap, long_cap);
  d.trigger_index = det.trigger_index;
  return d;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const StageSpec& s) {
  nlohmann::json f;
  features::to_json(f, s.features);
  nlohmann::json j = {{"name", s.name},
                      {"kind", std::string(to_string(s.kind))},
                      {"features", f},
                      {"pre_cycles", s.pre_cycles},
                      {"post_cycles", s.post_cycles},
                      {"model", {{"family", std::string(learn::to_string(s.model.family))}, {"params", s.model.params}}}};
  if (s.unit) j["unit"] = std::string(to_string(*s.unit));
  return j;
}

inline StageSpec stage_spec_from_json(const nlohmann::json& j) {
  StageSpec s;
  s.name = j.at("name").get<std::string>();
  s.kind = parse_stage_kind(j.at("kind").get<std::string>());
  if (j.contains("unit")) s.unit = parse_unit(j.at("unit").get<std::string>());
  if (j.contains("features")) features::from_json(j.at("features"), s.features);
  s.pre_cycles = j.value("pre_cycles", s.pre_cycles);
  s.post_cycles = j.value("post_cycles", s.post_cycles);
  if (j.contains("model")) {
    s.model.family = learn::parse_family(j.at("model").at("family").get<std::string>());
    s.model.params = j.at("model").value("params", nlohmann::json::object());
  } else {
    s.model = default_boost_spec();
  }
  s.validate();
  return s;
}

inline nlohmann::json to_json(const CascadeConfig& c) {
  nlohmann::json j = {{"sampling", {{"sample_rate_hz", c.sampling.sample_rate_hz}, {"nominal_freq_hz", c.sampling.nominal_freq_hz}}},
                      {"detector",
                       {{"method", std::string(detector::to_string(c.method))},
                        {"alpha", c.detector.alpha},
                        {"th", c.detector.th},
                        {"pre_cycles", c.detector.pre_cycles},
                        {"post_cycles", c.detector.post_cycles}}},
                      {"cv_folds", c.cv_folds},
                      {"seed", c.seed},
                      {"stages", nlohmann::json::array()}};
  j["capture_snr_db"] = c.capture_snr_db ? nlohmann::json(*c.capture_snr_db) : nlohmann::json(nullptr);
  for (const auto& s : c.stages) j["stages"].push_back(to_json(s));
  return j;
}

/// Missing keys keep their defaults; "stages": "default" or "swing" selects a preset layout.
inline CascadeConfig cascade_config_from_json(const nlohmann::json& j) {
  try {
    CascadeConfig c = default_cascade_config();
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      c.sampling = SamplingSpec(s.value("sample_rate_hz", 10000.0), s.value("nominal_freq_hz", 60.0));
    }
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      if (d.contains("method")) c.method = detector::parse_method(d.at("method").get<std::string>());
      c.detector.alpha = d.value("alpha", c.detector.alpha);
      c.detector.th = d.value("th", c.detector.th);
      c.detector.pre_cycles = d.value("pre_cycles", c.detector.pre_cycles);
      c.detector.post_cycles = d.value("post_cycles", c.detector.post_cycles);
    }
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    c.seed = j.value("seed", c.seed);
    if (j.contains("capture_snr_db") && !j.at("capture_snr_db").is_null())
      c.capture_snr_db = j.at("capture_snr_db").get<double>();
    if (j.contains("stages")) {
      const auto& st = j.at("stages");
      if (st.is_string()) {
        const auto name = st.get<std::string>();
        if (name == "default") c.stages = default_cascade_config().stages;
        else if (name == "swing") c.stages = swing_cascade_config().stages;
        else throw ConfigError("unknown stage layout '" + name + "'");
      } else {
        c.stages.clear();
        for (const auto& s : st) c.stages.push_back(stage_spec_from_json(s));
      }
    }
    if (j.contains("model")) {
      // Shared trainer override for every stage.
      learn::ModelSpec m{learn::parse_family(j.at("model").at("family").get<std::string>()),
                         j.at("model").value("params", nlohmann::json::object())};
      for (auto& s : c.stages) s.model = m;
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cascade config: ") + e.what());
  }
}

inline constexpr int k_model_format_version = 1;

inline nlohmann::json to_json(const CascadeModel& m) {
  nlohmann::json j = {{"format", "relaykit-model"}, {"version", k_model_format_version}, {"config", to_json(m.config)}};
  j["stages"] = nlohmann::json::array();
  for (const auto& s : m.stages)
    j["stages"].push_back({{"name", s.spec.name},
                           {"class_names", s.class_names},
                           {"feature_names", s.feature_names},
                           {"cv_score", s.cv_score ? nlohmann::json(*s.cv_score) : nlohmann::json(nullptr)},
                           {"n_rows", s.n_rows},
                           {"n_skipped", s.n_skipped},
                           {"model", learn::to_json(s.model)}});
  return j;
}

/// Raises ModelError on a wrong format tag, version or structure.
inline CascadeModel cascade_model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", std::string()) != "relaykit-model")
    throw ModelError("model file: not a relaykit-model document");
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != k_model_format_version)
    throw ModelError("model file: unsupported version (expected " + std::to_string(k_model_format_version) + ")");
  CascadeConfig cfg;
  try {
    cfg = cascade_config_from_json(j.at("config"));
  } catch (const ConfigError& e) {
    throw ModelError(std::string("model file: bad embedded config: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: ") + e.what());
  }
  std::vector<StageModel> stages;
  try {
    const auto& arr = j.at("stages");
    if (arr.size() != cfg.stages.size()) throw ModelError("model file: stage count differs from config");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& s = arr[i];
      StageModel sm;
      sm.spec = cfg.stages[i];
      if (s.at("name").get<std::string>() != sm.spec.name) throw ModelError("model file: stage name mismatch");
      sm.class_names = s.at("class_names").get<std::vector<std::string>>();
      sm.feature_names = s.at("feature_names").get<std::vector<std::string>>();
      if (!s.at("cv_score").is_null()) sm.cv_score = s.at("cv_score").get<double>();
      sm.n_rows = s.at("n_rows").get<long>();
      sm.n_skipped = s.at("n_skipped").get<long>();
      sm.model = learn::model_from_json(s.at("model"));
      stages.push_back(std::move(sm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: ") + e.what());
  }
  return assemble(cfg, std::move(stages));
}

}  // namespace relaykit::relay
