#pragma once

// Checked accessors for decoding untrusted JSON. Every failure is an
// Error(FormatError) located by JSON pointer.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "insightspec/error.hpp"

namespace insightspec::json_util {

using nlohmann::json;

inline std::string escape_pointer_token(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

inline std::string child(const std::string& where, const std::string& key) {
  return where + "/" + escape_pointer_token(key);
}
inline std::string child(const std::string& where, std::size_t index) {
  return where + "/" + std::to_string(index);
}

[[noreturn]] inline void fail(const std::string& where, const std::string& message) {
  throw Error(ErrorCode::FormatError, message, where.empty() ? "/" : where);
}

inline const json& object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  return j;
}

inline const json& array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

inline const json& field(const json& obj, const std::string& key, const std::string& where) {
  object(obj, where);
  auto it = obj.find(key);
  if (it == obj.end()) fail(child(where, key), "missing field \"" + key + "\"");
  return *it;
}

inline std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

inline std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::uint64_t unsigned_integer(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(where, "expected a non-negative integer");
}

inline bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

/// Re-throws a nested Error with its location prefixed by `where`.
template <class F>
auto located(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.location().empty() || e.location() == "/") throw e.at(where);
    if (e.location().rfind(where, 0) == 0) throw;
    if (e.location().front() == '/') throw e.at(where + e.location());
    throw e.at(where + " (" + e.location() + ")");
  }
}

}  // namespace insightspec::json_util
