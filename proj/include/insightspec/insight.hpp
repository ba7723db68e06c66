#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightspec/knowledge_graph.hpp"

namespace insightspec {

/// The "*" token.
struct Wildcard {
  friend bool operator==(Wildcard, Wildcard) = default;
};

inline constexpr std::string_view wildcard_token = "*";

/// Stands for any analytic node whose evidence matches `pattern`, a JSON
/// object with optional "transformation" and "relationship" keys shaped like
/// `transformation_to_json` / `model_spec_to_json`, where "*" may replace any
/// value. A pattern must contain at least one "*".
struct AnalyticPattern {
  nlohmann::json pattern;

  friend bool operator==(const AnalyticPattern&, const AnalyticPattern&) = default;
};

using DomainElement = std::variant<std::string, Wildcard>;
using AnalyticElement = std::variant<std::string, Wildcard, AnalyticPattern>;

/// Either the whole slot is "*", or a list whose elements may themselves be
/// wildcards. A list containing "*" means "at least these".
template <class Element>
using Slot = std::variant<Wildcard, std::vector<Element>>;

using DomainSlot = Slot<DomainElement>;
using AnalyticSlot = Slot<AnalyticElement>;

struct InsightNode {
  std::string name;
  DomainSlot domain_knowledge;
  AnalyticSlot analytic_knowledge;
  std::optional<std::string> description;
  LinkSet links;
};

struct SimpleTaskNode {
  std::string name;
  std::string objective;
  std::vector<std::string> insights;
  LinkSet links;
};

/// True iff `j` is "*" or contains it at any depth.
bool contains_wildcard(const nlohmann::json& j);

/// Structural match of a pattern against a concrete value. "*" matches
/// anything; objects constrain only the keys the pattern lists; arrays match
/// positionally unless they contain "*", in which case the other elements
/// must match distinct elements of the value in any order.
bool json_pattern_matches(const nlohmann::json& pattern, const nlohmann::json& value);

/// True iff some slot or element of the insight is a wildcard or pattern.
bool has_wildcard(const InsightNode& n);

nlohmann::json domain_slot_to_json(const DomainSlot& s);
nlohmann::json analytic_slot_to_json(const AnalyticSlot& s);
DomainSlot domain_slot_from_json(const nlohmann::json& j);
AnalyticSlot analytic_slot_from_json(const nlohmann::json& j);

}  // namespace insightspec
