#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "relaykit/error.hpp"

namespace relaykit::cli {

// Subset of JSON Schema: type, enum, properties, required, additionalProperties
// (bool or schema), items, minItems, minimum, maximum, exclusiveMinimum, anyOf, $ref
// into the root "definitions".

namespace detail {

inline bool type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  throw ConfigError("schema: unknown type '" + t + "'");
}

inline void validate_at(const nlohmann::json& v, const nlohmann::json& schema, const nlohmann::json& root,
                        const std::string& path, std::vector<std::string>& errors) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) errors.push_back(path + ": not allowed");
    return;
  }
  if (schema.contains("$ref")) {
    const auto ref = schema.at("$ref").get<std::string>();
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0 || !root.contains("definitions") || !root.at("definitions").contains(ref.substr(prefix.size())))
      throw ConfigError("schema: unresolved $ref '" + ref + "'");
    validate_at(v, root.at("definitions").at(ref.substr(prefix.size())), root, path, errors);
    return;
  }
  if (schema.contains("type")) {
    const auto& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) ok = type_matches(v, t.get<std::string>());
    else
      for (const auto& x : t) ok = ok || type_matches(v, x.get<std::string>());
    if (!ok) {
      errors.push_back(path + ": expected type " + t.dump() + ", got " + v.type_name());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema.at("enum")) ok = ok || e == v;
    if (!ok) errors.push_back(path + ": value " + v.dump() + " not in " + schema.at("enum").dump());
  }
  if (schema.contains("anyOf")) {
    bool ok = false;
    for (const auto& alt : schema.at("anyOf")) {
      std::vector<std::string> sub;
      validate_at(v, alt, root, path, sub);
      if (sub.empty()) {
        ok = true;
        break;
      }
    }
    if (!ok) errors.push_back(path + ": matches none of the allowed forms");
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema.at("minimum").get<double>())
      errors.push_back(path + ": " + v.dump() + " < minimum " + schema.at("minimum").dump());
    if (schema.contains("maximum") && x > schema.at("maximum").get<double>())
      errors.push_back(path + ": " + v.dump() + " > maximum " + schema.at("maximum").dump());
    if (schema.contains("exclusiveMinimum") && !(x > schema.at("exclusiveMinimum").get<double>()))
      errors.push_back(path + ": " + v.dump() + " must exceed " + schema.at("exclusiveMinimum").dump());
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema.at("minItems").get<std::size_t>())
      errors.push_back(path + ": fewer than " + schema.at("minItems").dump() + " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i)
        validate_at(v[i], schema.at("items"), root, path + "[" + std::to_string(i) + "]", errors);
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema.at("required"))
        if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing required key '" + r.get<std::string>() + "'");
    const nlohmann::json props = schema.value("properties", nlohmann::json::object());
    for (const auto& [k, x] : v.items()) {
      const std::string sub = path + "." + k;
      if (props.contains(k)) validate_at(x, props.at(k), root, sub, errors);
      else if (schema.contains("additionalProperties")) validate_at(x, schema.at("additionalProperties"), root, sub, errors);
    }
  }
}

}  // namespace detail

/// All violations, each prefixed with a "$.a.b[2]"-style path; empty when valid.
inline std::vector<std::string> schema_errors(const nlohmann::json& v, const nlohmann::json& schema) {
  std::vector<std::string> errors;
  detail::validate_at(v, schema, schema, "$", errors);
  return errors;
}

inline void validate_or_throw(const nlohmann::json& v, const nlohmann::json& schema, const std::string& what) {
  const auto errs = schema_errors(v, schema);
  if (errs.empty()) return;
  std::string msg = what + " fails its schema:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw ConfigError(msg);
}

}  // namespace relaykit::cli
