#pragma once

// Just enough JSON-schema validation for the shipped schema: type
// (string or array of strings), required, properties, items, and
// #/definitions $refs. Returns a list of violations, empty when valid.

#include <string>
#include <vector>

#include "json.hpp"

namespace schema_check {

using nlohmann::json;

inline bool type_matches(const std::string& type, const json& value) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

inline void validate_node(const json& root, const json& schema,
                          const json& value, const std::string& path,
                          std::vector<std::string>& errors) {
  if (schema.contains("$ref")) {
    const std::string ref = schema["$ref"].get<std::string>();
    // only local refs of the form #/definitions/name
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) == 0) {
      const auto& target = root["definitions"][ref.substr(prefix.size())];
      validate_node(root, target, value, path, errors);
    } else {
      errors.push_back(path + ": unsupported $ref " + ref);
    }
    return;
  }

  if (schema.contains("type")) {
    const auto& type = schema["type"];
    bool ok = false;
    if (type.is_string()) {
      ok = type_matches(type.get<std::string>(), value);
    } else {
      for (const auto& t : type)
        ok = ok || type_matches(t.get<std::string>(), value);
    }
    if (!ok) {
      errors.push_back(path + ": type mismatch, got " +
                       std::string(value.type_name()));
      return;
    }
  }

  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key '" +
                           key.get<std::string>() + "'");
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key))
          validate_node(root, sub, value[key], path + "/" + key, errors);
    }
  }

  if (value.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& element : value)
      validate_node(root, schema["items"], element,
                    path + "/" + std::to_string(i++), errors);
  }
}

inline std::vector<std::string> validate(const json& schema,
                                         const json& value) {
  std::vector<std::string> errors;
  validate_node(schema, schema, value, "", errors);
  return errors;
}

}  // namespace schema_check
