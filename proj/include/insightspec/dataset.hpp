#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "insightspec/value.hpp"

namespace insightspec {

using Record = std::map<std::string, Value, std::less<>>;
using Schema = std::vector<Attribute>;

/// Immutable table of records. Construction does not validate; use
/// `validate_dataset` (loaders only ever produce valid tables).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, Schema schema, std::vector<Record> records);

  const std::string& name() const noexcept { return name_; }
  const Schema& schema() const noexcept { return schema_; }
  std::span<const Record> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }

  const Attribute* attribute(std::string_view name) const;

  Dataset renamed(std::string name) const;

  /// Same schema and records (names are not compared).
  bool same_content(const Dataset& other) const;

 private:
  std::string name_;
  Schema schema_;
  std::vector<Record> records_;
};

enum class TableFormat { automatic, csv, json };

/// CSV (RFC-4180, header row) or a JSON array of flat objects.
Dataset load_table(std::string_view source, std::string name,
                   const std::optional<Schema>& schema_override = std::nullopt,
                   TableFormat format = TableFormat::automatic);

Dataset load_table_file(const std::string& path, std::string name,
                        const std::optional<Schema>& schema_override = std::nullopt);

struct Violation {
  std::optional<std::size_t> row;  // empty for schema-level problems
  std::string attribute;
  std::string message;
};

std::vector<Violation> validate_dataset(const Dataset& d);

std::string to_csv(const Dataset& d);

nlohmann::json schema_to_json(const Schema& s);
Schema schema_from_json(const nlohmann::json& j);

/// {"schema": [...], "records": [[cell, ...], ...]} in schema order.
nlohmann::json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const nlohmann::json& j, std::string name);

/// Converts a JSON object to a record, typing cells by the given attributes.
/// Attributes absent from the object are left out of the record.
Record record_from_json(const nlohmann::json& j, std::span<const Attribute> attributes);

}  // namespace insightspec
