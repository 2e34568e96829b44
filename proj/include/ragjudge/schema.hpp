// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ragjudge/errors.hpp"

namespace ragjudge::schema {

using json = nlohmann::json;

// {"TP": [int...], "FP": [...], ...}: one integer list per label, every key
// required, nothing else allowed. `required` keeps the label order.
inline json label_list_schema(const std::vector<std::string>& labels, std::optional<std::int64_t> max_index = {}) {
  json item = {{"type", "integer"}, {"minimum", 1}};
  if (max_index) item["maximum"] = *max_index;
  json props = json::object();
  for (const auto& label : labels) props[label] = {{"type", "array"}, {"items", item}};
  return json{{"type", "object"}, {"properties", props}, {"required", labels}, {"additionalProperties", false}};
}

inline json correctness_schema(std::optional<std::int64_t> max_index = {}) {
  return label_list_schema({"TP", "FP", "FN"}, max_index);
}

inline json faithfulness_schema(std::optional<std::int64_t> max_index = {}) {
  return label_list_schema({"PASSED", "FAILED"}, max_index);
}

// Label names of a label-list schema, in `required` order.
inline std::vector<std::string> label_list_shape(const json& schema) {
  const auto fail = [](const std::string& why) -> std::vector<std::string> {
    throw UnsupportedSchema("not a label-list schema: " + why);
  };
  if (!schema.is_object() || schema.value("type", "") != "object") return fail("root must be an object schema");
  if (!schema.contains("properties") || !schema["properties"].is_object()) return fail("missing properties");
  if (!schema.contains("required") || !schema["required"].is_array()) return fail("missing required list");

  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (const auto& r : schema["required"]) {
    if (!r.is_string()) return fail("required entries must be strings");
    if (!seen.insert(r.get<std::string>()).second) return fail("duplicate required key");
    labels.push_back(r.get<std::string>());
  }
  if (labels.empty()) return fail("no labels");
  if (schema["properties"].size() != labels.size()) return fail("properties and required disagree");
  for (const auto& label : labels) {
    if (!schema["properties"].contains(label)) return fail("required key '" + label + "' has no property");
    const auto& prop = schema["properties"][label];
    if (prop.value("type", "") != "array") return fail("'" + label + "' is not an array");
    if (prop.contains("items") && prop["items"].value("type", "integer") != "integer") {
      return fail("'" + label + "' items are not integers");
    }
  }
  return labels;
}

namespace detail {

inline bool has_type(const json& v, std::string_view type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  return false;
}

inline std::optional<std::string> validate_at(const json& v, const json& s, const std::string& path) {
  if (s.is_boolean()) return s.get<bool>() ? std::nullopt : std::optional<std::string>(path + ": schema is false");
  if (!s.is_object()) return std::nullopt;

  if (s.contains("type")) {
    const auto& t = s["type"];
    bool ok = false;
    if (t.is_string()) ok = has_type(v, t.get<std::string>());
    if (t.is_array()) {
      for (const auto& alt : t) ok = ok || (alt.is_string() && has_type(v, alt.get<std::string>()));
    }
    if (!ok) return path + ": expected type " + t.dump();
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) return path + ": value not in enum";
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (s.contains("minimum") && d < s["minimum"].get<double>()) return path + ": below minimum";
    if (s.contains("maximum") && d > s["maximum"].get<double>()) return path + ": above maximum";
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) return path + ": too few items";
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) return path + ": too many items";
    if (s.value("uniqueItems", false)) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          if (v[i] == v[j]) return path + ": duplicate items";
        }
      }
    }
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (auto err = validate_at(v[i], s["items"], path + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& key : s["required"]) {
        if (!v.contains(key.get<std::string>())) return path + ": missing key '" + key.get<std::string>() + "'";
      }
    }
    const json props = s.value("properties", json::object());
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        if (auto err = validate_at(value, props[key], path + "." + key)) return err;
      } else if (s.contains("additionalProperties")) {
        if (auto err = validate_at(value, s["additionalProperties"], path + "." + key)) {
          return path + ": unexpected key '" + key + "'";
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Validates against the JSON-schema keywords the label schemas use (type,
// enum, minimum/maximum, items, min/maxItems, uniqueItems, properties,
// required, additionalProperties). Other keywords are ignored.
// Returns a description of the first violation, or nullopt.
inline std::optional<std::string> validate(const json& instance, const json& schema) {
  return detail::validate_at(instance, schema, "$");
}

}  // namespace ragjudge::schema
