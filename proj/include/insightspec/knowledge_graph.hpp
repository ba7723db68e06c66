#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insightspec/dataset.hpp"
#include "insightspec/value.hpp"

namespace insightspec {

/// Families of linkable nodes. Names are unique within a family only.
enum class NodeFamily { domain, analytic, insight, task };

std::string_view to_string(NodeFamily f) noexcept;
std::optional<NodeFamily> node_family_from_string(std::string_view text);

struct NodeRef {
  NodeFamily family = NodeFamily::domain;
  std::string name;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

std::string to_string(const NodeRef& r);

enum class LinkKind { source, target, related };

using EdgeLabel = std::optional<std::string>;

/// Edges out of one node. Each entry carries an optional free-text label
/// ("causing", "related to", ...).
struct LinkSet {
  std::map<NodeRef, EdgeLabel> sources;
  std::map<NodeRef, EdgeLabel> targets;
  std::map<NodeRef, EdgeLabel> related;

  bool empty() const noexcept { return sources.empty() && targets.empty() && related.empty(); }
};

struct Concept {
  std::string name;
  std::vector<std::string> parents;
};

struct Metadata {
  std::vector<Attribute> attributes;
  std::map<std::string, Value, std::less<>> values;
};

struct DomainKnowledgeNode {
  std::string name;
  std::string core_concept;
  std::vector<std::string> relevant_concepts;
  Metadata metadata;
  LinkSet links;
};

/// Evidence is a named transformation and/or a named relationship model
/// held by the workspace. `results` means the node's results are the output
/// of its transformation, computed on first request and memoized.
struct AnalyticKnowledgeNode {
  std::string name;
  std::int64_t timestamp = 0;  // epoch ms, caller supplied
  std::optional<std::string> transformation;
  std::optional<std::string> relationship;
  bool results = false;
  std::optional<std::string> description;
  LinkSet links;
};

}  // namespace insightspec
