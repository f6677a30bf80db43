#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "relaykit/cli/config.hpp"
#include "relaykit/cli/corpus_io.hpp"
#include "relaykit/error.hpp"
#include "relaykit/relay/cascade.hpp"
#include "relaykit/synth.hpp"

namespace relaykit::cli {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline SamplingSpec sampling_of(const nlohmann::json& cfg) {
  SamplingSpec s;
  if (cfg.contains("sampling")) {
    const auto& j = cfg.at("sampling");
    s = SamplingSpec(j.value("sample_rate_hz", s.sample_rate_hz), j.value("nominal_freq_hz", s.nominal_freq_hz));
  }
  return s;
}

inline int jobs_of(const nlohmann::json& cfg) { return cfg.value("jobs", 1); }

inline nlohmann::json report_header(std::string_view command, const nlohmann::json& cfg) {
  return {{"schema", std::string(k_report_schema)}, {"command", std::string(command)}, {"config_hash", config_hash(cfg)}};
}

/// Cascade config from the "cascade" subtree; a top-level seed wins over the subtree's.
inline relay::CascadeConfig cascade_of(const nlohmann::json& cfg) {
  nlohmann::json c = cfg.value("cascade", nlohmann::json::object());
  if (cfg.contains("seed")) c["seed"] = cfg.at("seed");
  return relay::cascade_config_from_json(c);
}

inline relay::CascadeModel load_model(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw ModelError("cannot read model file " + p.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("model file " + p.string() + " is not valid JSON: " + e.what());
  }
  return relay::cascade_model_from_json(j);
}

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
  return o + "\"";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// gen

inline int cmd_gen(const nlohmann::json& cfg, Streams io) {
  const auto spec = detail::sampling_of(cfg);
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  const int jobs = detail::jobs_of(cfg);
  std::vector<txmodel::CorpusItem> items;

  if (cfg.contains("scenarios")) {
    if (cfg.contains("classes") || cfg.contains("per_class"))
      throw ConfigError("gen: give either scenarios or classes/per_class, not both");
    const auto& arr = cfg.at("scenarios");
    items.resize(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto& it = items[i];
      try {
        arr[i].get_to(it.scenario);
        it.scenario.validate();
      } catch (const std::exception& e) {
        throw ConfigError("gen: scenario " + std::to_string(i) + ": " + e.what());
      }
      it.n_cycles = arr[i].value("n_cycles", 6);
      const auto cls = arr[i].value("class", std::string(to_string(it.scenario.label.category)));
      it.current.meta["class"] = cls;
    }
    parallel_for(items.size(), jobs, [&](std::size_t i) {
      auto& it = items[i];
      const auto cls = it.current.meta["class"];
      it.current = txmodel::synthesize(it.scenario, spec, it.n_cycles, RecordKind::current);
      it.voltage = txmodel::synthesize(it.scenario, spec, it.n_cycles, RecordKind::voltage);
      it.current.meta["class"] = it.voltage.meta["class"] = cls;
    });
  } else {
    auto classes = txmodel::default_corpus_classes();
    if (cfg.contains("classes") && cfg.at("classes").is_array()) {
      std::vector<txmodel::CorpusClass> pick;
      for (const auto& n : cfg.at("classes")) {
        const auto name = n.get<std::string>();
        auto it = std::find_if(classes.begin(), classes.end(), [&](const auto& c) { return c.name == name; });
        if (it == classes.end()) throw ConfigError("gen: unknown class '" + name + "'");
        pick.push_back(*it);
      }
      classes = pick;
    }
    items = txmodel::generate_corpus(classes, cfg.value("per_class", std::size_t{200}), spec, seed, jobs);
  }

  if (cfg.contains("snr_db") && !cfg.at("snr_db").is_null()) {
    const double snr = cfg.at("snr_db").get<double>();
    parallel_for(items.size(), jobs, [&](std::size_t i) {
      const auto s = derive_seed(seed, {0x9e7, i});
      items[i].current = add_noise(items[i].current, snr, s);
      items[i].voltage = add_noise(items[i].voltage, snr, derive_seed(s, {1}));
    });
  }

  const auto dir = ensure_dir(cfg.at("out").get<std::string>());
  write_corpus(dir, items, spec);
  std::map<std::string, long> counts;
  std::vector<std::string> order;
  for (const auto& it : items) {
    const auto& c = it.current.meta.at("class");
    if (!counts.count(c)) order.push_back(c);
    ++counts[c];
  }
  for (const auto& c : order) io.out << c << ": " << counts[c] << '\n';
  io.out << "total: " << items.size() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// features

inline int cmd_features(const nlohmann::json& cfg, Streams io) {
  const auto cc = detail::cascade_of(cfg);
  const int jobs = detail::jobs_of(cfg);
  const auto corpus = read_corpus(cfg.at("corpus").get<std::string>());
  relay::check_corpus(corpus, cc);
  const auto dir = ensure_dir(cfg.at("out").get<std::string>());
  const auto triggers = relay::detect_all(corpus, cc, jobs);
  auto report = detail::report_header("features", cfg);
  report["stages"] = nlohmann::json::array();
  for (std::size_t si = 0; si < cc.stages.size(); ++si) {
    const auto& s = cc.stages[si];
    const auto rows = relay::stage_rows(corpus, triggers, cc, si, jobs);
    std::ostringstream csv;
    csv << "record,target";
    for (const auto& n : relay::expected_feature_names(s, cc.sampling)) csv << ',' << detail::csv_escape(n);
    csv << '\n';
    long n_rows = 0, n_skipped = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!rows.target[i]) continue;
      if (!rows.features[i]) {
        ++n_skipped;
        continue;
      }
      ++n_rows;
      csv << i << ',' << *rows.target[i];
      for (double v : rows.features[i]->values) csv << ',' << relaykit::detail::fmt_double(v);
      csv << '\n';
    }
    const std::string file = "features_" + s.name + ".csv";
    write_text(dir / file, csv.str());
    report["stages"].push_back({{"name", s.name}, {"file", file}, {"n_rows", n_rows}, {"n_skipped", n_skipped}});
    io.out << s.name << ": " << n_rows << " rows, " << n_skipped << " skipped\n";
  }
  write_json(dir / "features.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// train

inline int cmd_train(const nlohmann::json& cfg, Streams io) {
  const auto cc = detail::cascade_of(cfg);
  const int jobs = detail::jobs_of(cfg);
  std::optional<relay::CascadeModel> prior;
  if (cfg.contains("resume")) prior = detail::load_model(cfg.at("resume").get<std::string>());
  const auto corpus = read_corpus(cfg.at("corpus").get<std::string>());
  relay::check_corpus(corpus, cc);
  const auto dir = ensure_dir(cfg.at("out").get<std::string>());

  // Stages are reused from the resumed model only when the whole config matches
  // apart from the stage list, and the stage spec itself is unchanged.
  auto globals = [](const relay::CascadeConfig& c) {
    auto j = relay::to_json(c);
    j.erase("stages");
    return j;
  };
  const bool reusable = prior && globals(prior->config) == globals(cc);
  if (prior && !reusable) io.err << "resume: model config differs; retraining every stage\n";

  const auto t0 = std::chrono::steady_clock::now();
  const auto triggers = relay::detect_all(corpus, cc, jobs);
  std::vector<relay::StageModel> stages;
  auto report = detail::report_header("train", cfg);
  report["seed"] = cc.seed;
  report["n_records"] = corpus.size();
  report["stages"] = nlohmann::json::array();
  for (std::size_t si = 0; si < cc.stages.size(); ++si) {
    const auto& s = cc.stages[si];
    const auto ts = std::chrono::steady_clock::now();
    const relay::StageModel* old = nullptr;
    if (reusable)
      for (const auto& ps : prior->stages)
        if (ps.spec.name == s.name && relay::to_json(ps.spec) == relay::to_json(s)) old = &ps;
    stages.push_back(old ? *old : relay::train_stage(corpus, triggers, cc, si, jobs));
    const auto& sm = stages.back();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - ts).count();
    report["stages"].push_back({{"name", s.name},
                                {"kind", std::string(relay::to_string(s.kind))},
                                {"classes", sm.class_names},
                                {"n_features", sm.feature_names.size()},
                                {"n_rows", sm.n_rows},
                                {"n_skipped", sm.n_skipped},
                                {"cv_folds", cc.cv_folds},
                                {"cv_balanced_accuracy", detail::opt_json(sm.cv_score)},
                                {"resumed", old != nullptr},
                                {"train_seconds", secs}});
    io.out << s.name << ": " << sm.n_rows << " rows";
    if (sm.cv_score) io.out << ", cv balanced accuracy " << *sm.cv_score;
    if (old) io.out << " (resumed)";
    io.out << '\n';
  }
  const auto model = relay::assemble(cc, std::move(stages));
  report["train_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(dir / "model.json", relay::to_json(model), -1);
  write_json(dir / "report.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

inline int cmd_eval(const nlohmann::json& cfg, Streams io) {
  const auto model = detail::load_model(cfg.at("model").get<std::string>());
  const auto corpus = read_corpus(cfg.at("corpus").get<std::string>());
  relay::check_corpus(corpus, model.config);
  const std::uint64_t seed = cfg.value("seed", model.config.seed);
  const auto evs = relay::evaluate_cascade(model, corpus, seed, detail::jobs_of(cfg));
  const auto dir = ensure_dir(cfg.at("out").get<std::string>());

  auto report = detail::report_header("eval", cfg);
  report["seed"] = seed;
  report["n_records"] = corpus.size();
  report["stages"] = nlohmann::json::array();
  std::ostringstream summary;
  summary << "stage,balanced_accuracy,n_rows,n_skipped\n";
  for (const auto& ev : evs) {
    nlohmann::json recall = nlohmann::json::array();
    for (const auto& r : ev.recall) recall.push_back(detail::opt_json(r));
    report["stages"].push_back({{"name", ev.stage},
                                {"class_names", ev.class_names},
                                {"confusion", ev.confusion},
                                {"balanced_accuracy", detail::opt_json(ev.balanced_accuracy)},
                                {"per_class_recall", recall},
                                {"n_rows", ev.n_rows},
                                {"n_skipped", ev.n_skipped}});
    std::ostringstream csv;
    csv << "true\\predicted";
    for (const auto& c : ev.class_names) csv << ',' << c;
    csv << '\n';
    for (std::size_t a = 0; a < ev.class_names.size(); ++a) {
      csv << ev.class_names[a];
      for (long v : ev.confusion[a]) csv << ',' << v;
      csv << '\n';
    }
    write_text(dir / ("confusion_" + ev.stage + ".csv"), csv.str());
    summary << ev.stage << ','
            << (ev.balanced_accuracy ? relaykit::detail::fmt_double(*ev.balanced_accuracy) : std::string()) << ','
            << ev.n_rows << ',' << ev.n_skipped << '\n';
    io.out << ev.stage << ": ";
    if (ev.balanced_accuracy) io.out << "balanced accuracy " << *ev.balanced_accuracy;
    else io.out << "no rows";
    io.out << " (" << ev.n_rows << " rows)\n";
  }
  write_json(dir / "eval.json", report);
  write_text(dir / "eval_summary.csv", summary.str());
  return 0;
}

// ---------------------------------------------------------------------------
// classify

inline int exit_code(const std::exception& e);

inline int cmd_classify(const nlohmann::json& cfg, Streams io) {
  const auto model = detail::load_model(cfg.at("model").get<std::string>());
  const auto cur = read_csv(std::filesystem::path(cfg.at("input").get<std::string>()));
  std::optional<std::vector<ThreePhaseRecord>> vol;
  if (cfg.contains("voltage")) {
    vol = read_csv(std::filesystem::path(cfg.at("voltage").get<std::string>()));
    if (vol->size() != cur.size())
      throw DataError("classify: " + std::to_string(cur.size()) + " current records but " + std::to_string(vol->size()) +
                      " voltage records");
  }
  std::string mode = model.find(relay::StageKind::swing_event) ? "swing" : "event";
  if (cfg.contains("mode")) mode = cfg.at("mode").get<std::string>();
  if (mode == "swing" && !vol) throw ConfigError("classify: swing mode needs a voltage file");

  struct Failure {
    std::string message;
    int code;
  };
  std::vector<std::variant<nlohmann::json, Failure>> results(cur.size());
  parallel_for(cur.size(), detail::jobs_of(cfg), [&](std::size_t i) {
    try {
      std::optional<ThreePhaseRecord> v;
      if (vol) v = (*vol)[i];
      const auto d = mode == "swing" ? relay::classify_swing_record(model, cur[i], v)
                                     : relay::classify_event(model, cur[i], v);
      nlohmann::json j = {{"record", i}};
      j.update(relay::to_json(d));
      results[i] = j;
    } catch (const std::exception& e) {
      results[i] = Failure{e.what(), exit_code(e)};
    }
  });

  std::ofstream file;
  std::ostream* os = &io.out;
  if (cfg.contains("out")) {
    const auto dir = ensure_dir(cfg.at("out").get<std::string>());
    file.open(dir / "decisions.jsonl", std::ios::binary);
    if (!file) throw DataError("cannot write " + (dir / "decisions.jsonl").string());
    os = &file;
  }
  int code = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (const auto* j = std::get_if<nlohmann::json>(&results[i])) {
      *os << j->dump() << '\n';
      continue;
    }
    const auto& f = std::get<Failure>(results[i]);
    *os << nlohmann::json{{"record", i}, {"error", f.message}}.dump() << '\n';
    io.err << "record " << i << ": " << f.message << '\n';
    if (code == 0) code = f.code;
  }
  return code;
}

// ---------------------------------------------------------------------------

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const ModelError*>(&e)) return 4;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 3;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
  return 1;
}

}  // namespace relaykit::cli
