#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace insightspec {

enum class AttributeType { nominal, ordinal, quantitative, temporal };

std::string_view to_string(AttributeType type) noexcept;
std::optional<AttributeType> attribute_type_from_string(std::string_view text);

/// Categorical types compare by label only; nominal and ordinal behave alike
/// everywhere except schema declarations.
inline bool is_categorical(AttributeType t) noexcept {
  return t == AttributeType::nominal || t == AttributeType::ordinal;
}
inline bool is_numeric(AttributeType t) noexcept {
  return t == AttributeType::quantitative || t == AttributeType::temporal;
}

struct Attribute {
  std::string name;
  AttributeType type = AttributeType::nominal;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t ms = 0;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// A single cell. Quantitative payloads are always finite.
class Value {
 public:
  Value() = default;

  static Value null() { return Value(); }
  static Value nominal(std::string text) { return Value(Payload(std::move(text))); }
  /// Throws Error(TypeError) on NaN or infinity.
  static Value quantitative(double x);
  static Value temporal(std::int64_t ms) { return Value(Payload(Timestamp{ms})); }
  /// Expression results: comparisons and logic yield 1 or 0.
  static Value truth(bool b) { return Value(Payload(b ? 1.0 : 0.0)); }

  bool is_null() const noexcept { return std::holds_alternative<std::monostate>(data_); }
  bool is_nominal() const noexcept { return std::holds_alternative<std::string>(data_); }
  bool is_quantitative() const noexcept { return std::holds_alternative<double>(data_); }
  bool is_temporal() const noexcept { return std::holds_alternative<Timestamp>(data_); }
  bool is_numeric() const noexcept { return is_quantitative() || is_temporal(); }

  const std::string& as_string() const { return std::get<std::string>(data_); }
  double as_number() const;  // quantitative or temporal
  std::int64_t as_ms() const { return std::get<Timestamp>(data_).ms; }

  /// Non-null numeric and non-zero.
  bool is_true() const noexcept;

  /// Does this cell conform to a column of the given type (Null always does)?
  bool conforms_to(AttributeType type) const noexcept;

  /// Human-readable rendering used in CSV output and CLI messages.
  std::string to_text() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Payload = std::variant<std::monostate, std::string, double, Timestamp>;
  explicit Value(Payload p) : data_(std::move(p)) {}
  Payload data_;
};

/// Total order used for sorting and grouping: Null sorts after every
/// non-null value; numbers compare numerically; strings bytewise.
std::weak_ordering compare_values(const Value& a, const Value& b);

std::optional<double> parse_number(std::string_view text);
/// ISO-8601 date or date-time (optional fraction and zone), or MM/DD/YYYY
/// with an optional HH:MM[:SS] time.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t ms);
/// Shortest decimal that round-trips.
std::string format_number(double x);

/// Parses raw cell text under a column type; empty text is Null.
/// Returns nullopt when the text does not parse.
std::optional<Value> parse_cell(std::string_view text, AttributeType type);

nlohmann::json value_to_json(const Value& v);
/// Decodes according to the column type; throws Error(FormatError).
Value value_from_json(const nlohmann::json& j, AttributeType type);

nlohmann::json attribute_to_json(const Attribute& a);
Attribute attribute_from_json(const nlohmann::json& j);

}  // namespace insightspec
