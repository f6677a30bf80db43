#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaykit/cli/schema.hpp"
#include "relaykit/cli/schemas.hpp"
#include "relaykit/error.hpp"

namespace relaykit::cli {

inline constexpr std::string_view k_report_schema = "report_v1";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the compact dump; object keys are sorted, so key order in the file does not matter.
inline std::string config_hash(const nlohmann::json& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  return buf;
}

inline nlohmann::json load_json_file(const std::filesystem::path& p, const char* what) {
  std::ifstream f(p);
  if (!f) throw ConfigError(std::string("cannot read ") + what + " " + p.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + " " + p.string() + ": " + e.what());
  }
}

/// Sets cfg at a dotted path, creating objects on the way. The value is parsed as
/// JSON when it parses, else taken as a string.
inline void set_leaf(nlohmann::json& cfg, const std::string& dotted, const std::string& raw) {
  if (dotted.empty()) throw ConfigError("--set: empty key");
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  nlohmann::json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("--set: malformed key '" + dotted + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + dotted + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::vector<std::string> sets;  // "a.b=value"
};

/// Config file (or {}) with flag overrides applied, validated against the command's schema.
inline nlohmann::json effective_config(std::string_view command, std::string_view schema, const Overrides& o) {
  nlohmann::json cfg = o.config_path ? load_json_file(*o.config_path, "config") : nlohmann::json::object();
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    set_leaf(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.out) cfg["out"] = *o.out;
  if (o.jobs) cfg["jobs"] = *o.jobs;
  validate_or_throw(cfg, nlohmann::json::parse(schema), std::string(command) + " config");
  return cfg;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + p.string());
  f << text;
  if (!f) throw DataError("write failed for " + p.string());
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j, int indent = 2) {
  write_text(p, j.dump(indent) + "\n");
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw DataError("cannot create output directory " + dir + (ec ? ": " + ec.message() : ""));
  return dir;
}

}  // namespace relaykit::cli
