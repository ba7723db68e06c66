#include "insightspec/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "insightspec/error.hpp"

namespace insightspec {

Dataset::Dataset(std::string name, Schema schema, std::vector<Record> records)
    : name_(std::move(name)), schema_(std::move(schema)), records_(std::move(records)) {}

const Attribute* Dataset::attribute(std::string_view name) const {
  auto it = std::find_if(schema_.begin(), schema_.end(),
                         [&](const Attribute& a) { return a.name == name; });
  return it == schema_.end() ? nullptr : &*it;
}

Dataset Dataset::renamed(std::string name) const {
  Dataset copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

bool Dataset::same_content(const Dataset& other) const {
  return schema_ == other.schema_ && records_ == other.records_;
}

namespace {

struct RawTable {
  std::vector<std::string> header;
  // nullopt marks a missing cell (JSON key absent or null).
  std::vector<std::vector<std::optional<std::string>>> rows;
};

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          if (i + 1 < text.size() && text[i + 1] != ',' && text[i + 1] != '\n' &&
              text[i + 1] != '\r') {
            throw Error(ErrorCode::ParseError, "text after closing quote",
                        "line " + std::to_string(line));
          }
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) {
          throw Error(ErrorCode::ParseError, "quote inside unquoted field",
                      "line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        quote_line = line;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, "unterminated quoted field",
                "line " + std::to_string(quote_line));
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

void check_header(const std::vector<std::string>& header) {
  if (header.empty() || (header.size() == 1 && header[0].empty())) {
    throw Error(ErrorCode::EmptyHeader, "table has no header");
  }
  std::set<std::string_view> seen;
  for (const auto& h : header) {
    if (h.empty()) throw Error(ErrorCode::ParseError, "empty attribute name in header");
    if (h == "*") throw Error(ErrorCode::ParseError, "attribute name '*' is reserved");
    if (!seen.insert(h).second) {
      throw Error(ErrorCode::ParseError, "duplicate attribute '" + h + "'");
    }
  }
}

RawTable read_csv(std::string_view text) {
  auto rows = split_csv(text);
  RawTable t;
  if (rows.empty()) throw Error(ErrorCode::EmptyHeader, "table has no header");
  t.header = std::move(rows.front());
  check_header(t.header);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto& row = rows[r];
    if (row.size() != t.header.size()) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(row.size()),
                  "row " + std::to_string(r - 1));
    }
    std::vector<std::optional<std::string>> cells;
    cells.reserve(row.size());
    for (auto& f : row) {
      if (f.empty()) {
        cells.emplace_back(std::nullopt);
      } else {
        cells.emplace_back(std::move(f));
      }
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

RawTable read_json(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "expected a JSON array of objects");
  RawTable t;
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const auto& obj = doc[r];
    if (!obj.is_object()) {
      throw Error(ErrorCode::ParseError, "row is not an object", "row " + std::to_string(r));
    }
    for (const auto& [key, _] : obj.items()) {
      if (!index.contains(key)) {
        index.emplace(key, t.header.size());
        t.header.push_back(key);
      }
    }
  }
  check_header(t.header);
  for (std::size_t r = 0; r < doc.size(); ++r) {
    std::vector<std::optional<std::string>> cells(t.header.size());
    for (const auto& [key, cell] : doc[r].items()) {
      auto& slot = cells[index.at(key)];
      if (cell.is_null()) continue;
      if (cell.is_string()) {
        const auto& s = cell.get_ref<const std::string&>();
        if (!s.empty()) slot = s;
      } else if (cell.is_number_float()) {
        slot = format_number(cell.get<double>());
      } else if (cell.is_number()) {
        slot = cell.dump();
      } else if (cell.is_boolean()) {
        slot = cell.get<bool>() ? "true" : "false";
      } else {
        throw Error(ErrorCode::ParseError, "nested value for '" + key + "'",
                    "row " + std::to_string(r));
      }
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

AttributeType infer_column(const RawTable& t, std::size_t col) {
  bool any = false;
  bool numeric = true;
  bool temporal = true;
  for (const auto& row : t.rows) {
    const auto& cell = row[col];
    if (!cell) continue;
    any = true;
    if (numeric && !parse_number(*cell)) numeric = false;
    if (temporal && !parse_timestamp(*cell)) temporal = false;
    if (!numeric && !temporal) break;
  }
  if (!any) return AttributeType::nominal;
  if (numeric) return AttributeType::quantitative;
  if (temporal) return AttributeType::temporal;
  return AttributeType::nominal;
}

bool looks_like_json(std::string_view text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '[';
  }
  return false;
}

}  // namespace

Dataset load_table(std::string_view source, std::string name,
                   const std::optional<Schema>& schema_override, TableFormat format) {
  if (format == TableFormat::automatic) {
    format = looks_like_json(source) ? TableFormat::json : TableFormat::csv;
  }
  RawTable raw = format == TableFormat::json ? read_json(source) : read_csv(source);

  Schema schema;
  std::vector<std::size_t> columns;  // raw column feeding each schema attribute
  if (schema_override) {
    std::set<std::string_view> seen;
    for (const auto& attr : *schema_override) {
      if (attr.name.empty() || attr.name == "*" || !seen.insert(attr.name).second) {
        throw Error(ErrorCode::SchemaMismatch, "invalid override attribute '" + attr.name + "'");
      }
      auto it = std::find(raw.header.begin(), raw.header.end(), attr.name);
      if (it == raw.header.end()) {
        throw Error(ErrorCode::SchemaMismatch,
                    "override attribute '" + attr.name + "' is not in the header");
      }
      columns.push_back(static_cast<std::size_t>(it - raw.header.begin()));
    }
    schema = *schema_override;
  } else {
    for (std::size_t c = 0; c < raw.header.size(); ++c) {
      schema.push_back({raw.header[c], infer_column(raw, c)});
      columns.push_back(c);
    }
  }

  std::vector<Record> records;
  records.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    Record rec;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const auto& cell = raw.rows[r][columns[a]];
      if (!cell) {
        rec.emplace(schema[a].name, Value::null());
        continue;
      }
      auto v = parse_cell(*cell, schema[a].type);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    "'" + *cell + "' is not a valid " + std::string(to_string(schema[a].type)) +
                        " value for '" + schema[a].name + "'",
                    "row " + std::to_string(r));
      }
      rec.emplace(schema[a].name, std::move(*v));
    }
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(name), std::move(schema), std::move(records));
}

Dataset load_table_file(const std::string& path, std::string name,
                        const std::optional<Schema>& schema_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnresolvedSource, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  TableFormat fmt = TableFormat::automatic;
  if (path.ends_with(".json")) fmt = TableFormat::json;
  if (path.ends_with(".csv")) fmt = TableFormat::csv;
  return load_table(buf.str(), std::move(name), schema_override, fmt);
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  std::set<std::string_view> names;
  for (const auto& a : d.schema()) {
    if (a.name.empty()) out.push_back({std::nullopt, a.name, "attribute name is empty"});
    if (!names.insert(a.name).second) {
      out.push_back({std::nullopt, a.name, "duplicate attribute name"});
    }
  }
  for (std::size_t r = 0; r < d.size(); ++r) {
    const Record& rec = d[r];
    for (const auto& a : d.schema()) {
      auto it = rec.find(a.name);
      if (it == rec.end()) {
        out.push_back({r, a.name, "missing attribute"});
      } else if (!it->second.conforms_to(a.type)) {
        out.push_back({r, a.name,
                       "value '" + it->second.to_text() + "' is not " +
                           std::string(to_string(a.type))});
      }
    }
    for (const auto& [key, _] : rec) {
      if (!names.contains(key)) out.push_back({r, key, "attribute not in schema"});
    }
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_csv(const Dataset& d) {
  std::string out;
  for (std::size_t i = 0; i < d.schema().size(); ++i) {
    if (i) out += ',';
    out += csv_field(d.schema()[i].name);
  }
  out += '\n';
  for (const auto& rec : d.records()) {
    for (std::size_t i = 0; i < d.schema().size(); ++i) {
      if (i) out += ',';
      auto it = rec.find(d.schema()[i].name);
      if (it != rec.end()) out += csv_field(it->second.to_text());
    }
    out += '\n';
  }
  return out;
}

nlohmann::json schema_to_json(const Schema& s) {
  auto out = nlohmann::json::array();
  for (const auto& a : s) out.push_back(attribute_to_json(a));
  return out;
}

Schema schema_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "schema must be an array");
  Schema s;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      s.push_back(attribute_from_json(j[i]));
    } catch (const Error& e) {
      throw e.at("/" + std::to_string(i));
    }
    if (!seen.insert(s.back().name).second) {
      throw Error(ErrorCode::FormatError, "duplicate attribute '" + s.back().name + "'",
                  "/" + std::to_string(i));
    }
  }
  return s;
}

nlohmann::json dataset_to_json(const Dataset& d) {
  auto rows = nlohmann::json::array();
  for (const auto& rec : d.records()) {
    auto row = nlohmann::json::array();
    for (const auto& a : d.schema()) {
      auto it = rec.find(a.name);
      row.push_back(it == rec.end() ? nlohmann::json(nullptr) : value_to_json(it->second));
    }
    rows.push_back(std::move(row));
  }
  return {{"schema", schema_to_json(d.schema())}, {"records", std::move(rows)}};
}

Dataset dataset_from_json(const nlohmann::json& j, std::string name) {
  if (!j.is_object() || !j.contains("schema") || !j.contains("records") ||
      !j["records"].is_array()) {
    throw Error(ErrorCode::FormatError, "dataset must be {\"schema\": [...], \"records\": [...]}");
  }
  Schema schema;
  try {
    schema = schema_from_json(j["schema"]);
  } catch (const Error& e) {
    throw e.at("/schema" + e.location());
  }
  std::vector<Record> records;
  const auto& rows = j["records"];
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "/records/" + std::to_string(r);
    if (!rows[r].is_array() || rows[r].size() != schema.size()) {
      throw Error(ErrorCode::FormatError, "record width does not match schema", where);
    }
    Record rec;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      try {
        rec.emplace(schema[a].name, value_from_json(rows[r][a], schema[a].type));
      } catch (const Error& e) {
        throw e.at(where + "/" + std::to_string(a));
      }
    }
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(name), std::move(schema), std::move(records));
}

Record record_from_json(const nlohmann::json& j, std::span<const Attribute> attributes) {
  if (!j.is_object()) throw Error(ErrorCode::FormatError, "record must be a JSON object");
  Record rec;
  for (const auto& a : attributes) {
    auto it = j.find(a.name);
    if (it == j.end()) continue;
    if (it->is_string() && !is_categorical(a.type)) {
      auto v = parse_cell(it->get<std::string>(), a.type);
      if (!v) {
        throw Error(ErrorCode::FormatError, "cannot parse '" + it->get<std::string>() + "'",
                    "/" + a.name);
      }
      rec.emplace(a.name, std::move(*v));
    } else if (it->is_number() && is_categorical(a.type)) {
      rec.emplace(a.name, Value::nominal(it->is_number_float() ? format_number(it->get<double>())
                                                               : it->dump()));
    } else {
      try {
        rec.emplace(a.name, value_from_json(*it, a.type));
      } catch (const Error& e) {
        throw e.at("/" + a.name);
      }
    }
  }
  return rec;
}

}  // namespace insightspec
