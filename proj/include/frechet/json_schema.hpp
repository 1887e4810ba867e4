#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace frechet::io {

/// Structural validator for the subset of JSON Schema the checked-in
/// schemas use: type, required, properties, items, enum, minimum, maximum.
inline std::optional<std::string> schema_validate(const nlohmann::json& value,
                                                  const nlohmann::json& schema,
                                                  const std::string& path = "$") {
  using nlohmann::json;
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    const bool ok = (type == "object" && value.is_object()) || (type == "array" && value.is_array()) ||
                    (type == "string" && value.is_string()) ||
                    (type == "number" && value.is_number()) ||
                    (type == "integer" && value.is_number_integer()) ||
                    (type == "boolean" && value.is_boolean()) || (type == "null" && value.is_null());
    if (!ok) return path + ": expected type " + type;
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& option : schema["enum"])
      if (option == value) found = true;
    if (!found) return path + ": value not in enum";
  }
  if (value.is_number()) {
    if (schema.contains("minimum") && value.get<double>() < schema["minimum"].get<double>())
      return path + ": below minimum";
    if (schema.contains("maximum") && value.get<double>() > schema["maximum"].get<double>())
      return path + ": above maximum";
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>()))
          return path + ": missing required field " + key.get<std::string>();
    if (schema.contains("properties"))
      for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
        if (value.contains(it.key()))
          if (auto err = schema_validate(value[it.key()], it.value(), path + "." + it.key()))
            return err;
  }
  if (value.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < value.size(); ++i)
      if (auto err = schema_validate(value[i], schema["items"], path + "[" + std::to_string(i) + "]"))
        return err;
  return std::nullopt;
}

}  // namespace frechet::io
