#include "insightspec/value.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "insightspec/error.hpp"

namespace insightspec {

std::string_view to_string(AttributeType type) noexcept {
  switch (type) {
    case AttributeType::nominal: return "nominal";
    case AttributeType::ordinal: return "ordinal";
    case AttributeType::quantitative: return "quantitative";
    case AttributeType::temporal: return "temporal";
  }
  return "nominal";
}

std::optional<AttributeType> attribute_type_from_string(std::string_view text) {
  if (text == "nominal") return AttributeType::nominal;
  if (text == "ordinal") return AttributeType::ordinal;
  if (text == "quantitative") return AttributeType::quantitative;
  if (text == "temporal") return AttributeType::temporal;
  return std::nullopt;
}

Value Value::quantitative(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::TypeError, "quantitative values must be finite");
  }
  return Value(Payload(x));
}

double Value::as_number() const {
  if (const auto* d = std::get_if<double>(&data_)) return *d;
  return static_cast<double>(std::get<Timestamp>(data_).ms);
}

bool Value::is_true() const noexcept {
  if (const auto* d = std::get_if<double>(&data_)) return *d != 0.0;
  if (const auto* t = std::get_if<Timestamp>(&data_)) return t->ms != 0;
  return false;
}

bool Value::conforms_to(AttributeType type) const noexcept {
  if (is_null()) return true;
  switch (type) {
    case AttributeType::nominal:
    case AttributeType::ordinal: return is_nominal();
    case AttributeType::quantitative: return is_quantitative();
    case AttributeType::temporal: return is_temporal();
  }
  return false;
}

std::string Value::to_text() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return p;
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(p);
        } else {
          return format_timestamp(p.ms);
        }
      },
      data_);
}

std::weak_ordering compare_values(const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) {
    if (a.is_null() && b.is_null()) return std::weak_ordering::equivalent;
    return a.is_null() ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_temporal() && b.is_temporal()) return a.as_ms() <=> b.as_ms();
    const double x = a.as_number();
    const double y = b.as_number();
    if (x < y) return std::weak_ordering::less;
    if (x > y) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
  }
  if (a.is_nominal() && b.is_nominal()) {
    const int c = a.as_string().compare(b.as_string());
    return c < 0 ? std::weak_ordering::less
                 : (c > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent);
  }
  // Numbers before strings; only reachable for ill-typed columns.
  return a.is_numeric() ? std::weak_ordering::less : std::weak_ordering::greater;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  double out = 0;
  auto [ptr, ec] = std::from_chars(first, last, out, std::chars_format::general);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) return std::nullopt;
  return out;
}

namespace {

bool read_digits(std::string_view text, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += count;
  out = v;
  return true;
}

bool read_char(std::string_view text, std::size_t& pos, char expected) {
  if (pos < text.size() && text[pos] == expected) {
    ++pos;
    return true;
  }
  return false;
}

std::optional<std::int64_t> civil_to_ms(int y, int m, int d, int hh, int mm, int ss,
                                        int millis, int offset_minutes) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return (static_cast<std::int64_t>(days) * 86400 + hh * 3600 + mm * 60 + ss -
          offset_minutes * 60) *
             1000 +
         millis;
}

// HH:MM[:SS[.fff]] starting at pos.
bool read_time(std::string_view text, std::size_t& pos, int& hh, int& mm, int& ss,
               int& millis) {
  if (!read_digits(text, pos, 2, hh) || !read_char(text, pos, ':') ||
      !read_digits(text, pos, 2, mm)) {
    return false;
  }
  ss = 0;
  millis = 0;
  if (read_char(text, pos, ':')) {
    if (!read_digits(text, pos, 2, ss)) return false;
    if (read_char(text, pos, '.')) {
      int digits = 0;
      int frac = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        if (digits < 3) frac = frac * 10 + (text[pos] - '0');
        ++digits;
        ++pos;
      }
      if (digits == 0) return false;
      for (int i = digits; i < 3; ++i) frac *= 10;
      millis = frac;
    }
  }
  return true;
}

std::optional<std::int64_t> parse_iso(std::string_view text) {
  std::size_t pos = 0;
  int y = 0, m = 0, d = 0;
  if (!read_digits(text, pos, 4, y) || !read_char(text, pos, '-') ||
      !read_digits(text, pos, 2, m) || !read_char(text, pos, '-') ||
      !read_digits(text, pos, 2, d)) {
    return std::nullopt;
  }
  int hh = 0, mm = 0, ss = 0, millis = 0, offset = 0;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    if (!read_time(text, pos, hh, mm, ss, millis)) return std::nullopt;
    if (read_char(text, pos, 'Z')) {
      offset = 0;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      const int sign = text[pos] == '-' ? -1 : 1;
      ++pos;
      int oh = 0, om = 0;
      if (!read_digits(text, pos, 2, oh)) return std::nullopt;
      read_char(text, pos, ':');
      if (!read_digits(text, pos, 2, om)) return std::nullopt;
      offset = sign * (oh * 60 + om);
    }
  }
  if (pos != text.size()) return std::nullopt;
  return civil_to_ms(y, m, d, hh, mm, ss, millis, offset);
}

std::optional<std::int64_t> parse_us_date(std::string_view text) {
  std::size_t pos = 0;
  int m = 0, d = 0, y = 0;
  if (!read_digits(text, pos, 2, m) || !read_char(text, pos, '/') ||
      !read_digits(text, pos, 2, d) || !read_char(text, pos, '/') ||
      !read_digits(text, pos, 4, y)) {
    return std::nullopt;
  }
  int hh = 0, mm = 0, ss = 0, millis = 0;
  if (pos < text.size()) {
    if (!read_char(text, pos, ' ') || !read_time(text, pos, hh, mm, ss, millis)) {
      return std::nullopt;
    }
  }
  if (pos != text.size()) return std::nullopt;
  return civil_to_ms(y, m, d, hh, mm, ss, millis, 0);
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  if (auto iso = parse_iso(text)) return iso;
  return parse_us_date(text);
}

std::string format_timestamp(std::int64_t ms) {
  using namespace std::chrono;
  std::int64_t days = ms / 86'400'000;
  std::int64_t rem = ms % 86'400'000;
  if (rem < 0) {
    rem += 86'400'000;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[64];
  const int y = static_cast<int>(ymd.year());
  const unsigned mo = static_cast<unsigned>(ymd.month());
  const unsigned d = static_cast<unsigned>(ymd.day());
  if (rem == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, mo, d);
  } else {
    const auto hh = rem / 3'600'000;
    const auto mm = (rem / 60'000) % 60;
    const auto ss = (rem / 1000) % 60;
    const auto frac = rem % 1000;
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", y, mo, d,
                  static_cast<long long>(hh), static_cast<long long>(mm),
                  static_cast<long long>(ss), static_cast<long long>(frac));
  }
  return buf;
}

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::optional<Value> parse_cell(std::string_view text, AttributeType type) {
  if (text.empty()) return Value::null();
  switch (type) {
    case AttributeType::nominal:
    case AttributeType::ordinal: return Value::nominal(std::string(text));
    case AttributeType::quantitative:
      if (auto x = parse_number(text)) return Value::quantitative(*x);
      return std::nullopt;
    case AttributeType::temporal:
      if (auto t = parse_timestamp(text)) return Value::temporal(*t);
      if (auto x = parse_number(text); x && std::trunc(*x) == *x) {
        return Value::temporal(static_cast<std::int64_t>(*x));
      }
      return std::nullopt;
  }
  return std::nullopt;
}

nlohmann::json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_nominal()) return v.as_string();
  if (v.is_temporal()) return v.as_ms();
  return v.as_number();
}

Value value_from_json(const nlohmann::json& j, AttributeType type) {
  if (j.is_null()) return Value::null();
  switch (type) {
    case AttributeType::nominal:
    case AttributeType::ordinal:
      if (j.is_string()) return Value::nominal(j.get<std::string>());
      break;
    case AttributeType::quantitative:
      if (j.is_number()) return Value::quantitative(j.get<double>());
      break;
    case AttributeType::temporal:
      if (j.is_number_integer()) return Value::temporal(j.get<std::int64_t>());
      if (j.is_string()) {
        if (auto t = parse_timestamp(j.get<std::string>())) return Value::temporal(*t);
      }
      break;
  }
  throw Error(ErrorCode::FormatError,
              "value " + j.dump() + " does not fit a " + std::string(to_string(type)) +
                  " attribute");
}

nlohmann::json attribute_to_json(const Attribute& a) {
  return {{"name", a.name}, {"attributeType", std::string(to_string(a.type))}};
}

Attribute attribute_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
      !j.contains("attributeType") || !j["attributeType"].is_string()) {
    throw Error(ErrorCode::FormatError,
                "attribute must be {\"name\": string, \"attributeType\": string}");
  }
  const auto type = attribute_type_from_string(j["attributeType"].get<std::string>());
  if (!type) {
    throw Error(ErrorCode::UnknownKind,
                "unknown attribute type '" + j["attributeType"].get<std::string>() + "'");
  }
  Attribute a{j["name"].get<std::string>(), *type};
  if (a.name.empty()) throw Error(ErrorCode::FormatError, "attribute name is empty");
  return a;
}

}  // namespace insightspec
