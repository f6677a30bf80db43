#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relaykit/error.hpp"
#include "relaykit/relay/cascade.hpp"
#include "relaykit/synth.hpp"
#include "relaykit/waveform.hpp"

namespace relaykit::cli {

// A corpus directory holds current.csv and voltage.csv (each with its JSON sidecar)
// with records in the same order, plus manifest.csv with one row per record.

inline constexpr std::string_view k_manifest_header = "index,class,label,n_samples,inception_index,scenario_seed";

inline void write_records(const std::filesystem::path& p, const std::vector<ThreePhaseRecord>& recs, RecordKind kind,
                          const SamplingSpec& spec) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  write_csv(f, recs);
  if (!f) throw DataError("write failed for " + p.string());
  write_sidecar(p, {kind, spec, kind == RecordKind::current ? "A" : "V"});
}

inline void write_corpus(const std::filesystem::path& dir, const std::vector<txmodel::CorpusItem>& items,
                         const SamplingSpec& spec) {
  std::vector<ThreePhaseRecord> cur, vol;
  std::ostringstream man;
  man << k_manifest_header << '\n';
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    cur.push_back(it.current);
    vol.push_back(it.voltage);
    const auto cls = it.current.meta.count("class") ? it.current.meta.at("class") : it.scenario.label.str();
    man << i << ',' << cls << ',' << it.scenario.label.str() << ',' << it.current.size() << ','
        << it.scenario.inception_index << ',' << it.scenario.seed << '\n';
  }
  write_records(dir / "current.csv", cur, RecordKind::current, spec);
  write_records(dir / "voltage.csv", vol, RecordKind::voltage, spec);
  std::ofstream f(dir / "manifest.csv", std::ios::binary);
  if (!f) throw DataError("cannot write " + (dir / "manifest.csv").string());
  f << man.str();
}

/// Current records paired with the voltage file when present.
inline std::vector<relay::EventRecord> read_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("corpus directory " + dir.string() + " does not exist");
  const auto cur = read_csv(dir / "current.csv");
  std::vector<relay::EventRecord> out(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i) out[i].current = cur[i];
  if (std::filesystem::exists(dir / "voltage.csv")) {
    const auto vol = read_csv(dir / "voltage.csv");
    if (vol.size() != cur.size())
      throw DataError("corpus: " + std::to_string(cur.size()) + " current records but " + std::to_string(vol.size()) +
                      " voltage records");
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (vol[i].size() != cur[i].size())
        throw DataError("corpus: record " + std::to_string(i) + " has current/voltage length mismatch");
      out[i].voltage = vol[i];
    }
  }
  return out;
}

}  // namespace relaykit::cli
