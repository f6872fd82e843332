#pragma once

// Small helpers for reading JSON objects with defaults and strict keys.

#include <initializer_list>
#include <json.hpp>
#include <stdexcept>
#include <string>

#include "mvdesc/synthscene.hpp"

namespace mvdesc::detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->get<T>();
}

/// Throws std::invalid_argument when `j` has a key outside `allowed`.
inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
  }
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& s);
/// Missing keys keep their defaults; unknown keys are rejected.
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

}  // namespace mvdesc::detail
