#include <algorithm>
#include <functional>
#include <set>

#include "insightspec/insight.hpp"
#include "insightspec/workspace.hpp"
#include "json_util.hpp"

namespace insightspec {

using nlohmann::json;

namespace {

bool is_star(const json& j) { return j.is_string() && j.get_ref<const std::string&>() == wildcard_token; }

/// Kuhn's augmenting paths: can every left vertex be matched to a distinct
/// right vertex?
bool injective_matching(std::size_t left, std::size_t right,
                        const std::function<bool(std::size_t, std::size_t)>& edge) {
  if (left > right) return false;
  std::vector<std::vector<std::size_t>> adj(left);
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      if (edge(l, r)) adj[l].push_back(r);
    }
    if (adj[l].empty()) return false;
  }
  std::vector<std::ptrdiff_t> owner(right, -1);
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t l) {
    for (auto r : adj[l]) {
      if (seen[r]) continue;
      seen[r] = 1;
      if (owner[r] < 0 || augment(static_cast<std::size_t>(owner[r]))) {
        owner[r] = static_cast<std::ptrdiff_t>(l);
        return true;
      }
    }
    return false;
  };
  for (std::size_t l = 0; l < left; ++l) {
    seen.assign(right, 0);
    if (!augment(l)) return false;
  }
  return true;
}

void check_pattern(const json& p) {
  if (!p.is_object()) throw Error(ErrorCode::KindMismatch, "an analytic pattern must be an object");
  for (const auto& [key, _] : p.items()) {
    if (key != "transformation" && key != "relationship") {
      throw Error(ErrorCode::KindMismatch, "analytic patterns constrain only \"transformation\" and "
                                           "\"relationship\", not \"" + key + "\"");
    }
  }
  if (!contains_wildcard(p)) {
    throw Error(ErrorCode::KindMismatch, "an analytic pattern needs at least one \"*\"");
  }
}

}  // namespace

bool contains_wildcard(const json& j) {
  if (is_star(j)) return true;
  if (j.is_structured()) {
    for (const auto& v : j) {
      if (contains_wildcard(v)) return true;
    }
  }
  return false;
}

bool json_pattern_matches(const json& pattern, const json& value) {
  if (is_star(pattern)) return true;
  if (pattern.is_object()) {
    if (!value.is_object()) return false;
    for (const auto& [key, p] : pattern.items()) {
      auto it = value.find(key);
      if (it == value.end() || !json_pattern_matches(p, *it)) return false;
    }
    return true;
  }
  if (pattern.is_array()) {
    if (!value.is_array()) return false;
    std::vector<const json*> required;
    bool open = false;
    for (const auto& p : pattern) {
      if (is_star(p)) {
        open = true;
      } else {
        required.push_back(&p);
      }
    }
    if (!open) {
      if (pattern.size() != value.size()) return false;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (!json_pattern_matches(pattern[i], value[i])) return false;
      }
      return true;
    }
    return injective_matching(required.size(), value.size(), [&](std::size_t l, std::size_t r) {
      return json_pattern_matches(*required[l], value[r]);
    });
  }
  return pattern == value;
}

bool has_wildcard(const InsightNode& n) {
  if (std::holds_alternative<Wildcard>(n.domain_knowledge)) return true;
  if (std::holds_alternative<Wildcard>(n.analytic_knowledge)) return true;
  for (const auto& e : std::get<std::vector<DomainElement>>(n.domain_knowledge)) {
    if (!std::holds_alternative<std::string>(e)) return true;
  }
  for (const auto& e : std::get<std::vector<AnalyticElement>>(n.analytic_knowledge)) {
    if (!std::holds_alternative<std::string>(e)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// JSON

json domain_slot_to_json(const DomainSlot& s) {
  if (std::holds_alternative<Wildcard>(s)) return wildcard_token;
  auto out = json::array();
  for (const auto& e : std::get<std::vector<DomainElement>>(s)) {
    if (const auto* name = std::get_if<std::string>(&e)) {
      out.push_back(*name);
    } else {
      out.push_back(wildcard_token);
    }
  }
  return out;
}

json analytic_slot_to_json(const AnalyticSlot& s) {
  if (std::holds_alternative<Wildcard>(s)) return wildcard_token;
  auto out = json::array();
  for (const auto& e : std::get<std::vector<AnalyticElement>>(s)) {
    if (const auto* name = std::get_if<std::string>(&e)) {
      out.push_back(*name);
    } else if (const auto* p = std::get_if<AnalyticPattern>(&e)) {
      out.push_back(p->pattern);
    } else {
      out.push_back(wildcard_token);
    }
  }
  return out;
}

namespace {

template <class Element, class Decode>
Slot<Element> slot_from_json(const json& j, Decode&& decode) {
  if (is_star(j)) return Wildcard{};
  json_util::array(j, "");
  std::vector<Element> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto where = json_util::child("", i);
    if (is_star(j[i])) {
      out.emplace_back(Wildcard{});
    } else {
      out.push_back(json_util::located(where, [&] { return decode(j[i], where); }));
    }
  }
  return out;
}

}  // namespace

DomainSlot domain_slot_from_json(const json& j) {
  return slot_from_json<DomainElement>(j, [](const json& e, const std::string& where) {
    return DomainElement{json_util::string(e, where)};
  });
}

AnalyticSlot analytic_slot_from_json(const json& j) {
  return slot_from_json<AnalyticElement>(j, [](const json& e, const std::string& where) {
    if (e.is_object()) {
      check_pattern(e);
      return AnalyticElement{AnalyticPattern{e}};
    }
    return AnalyticElement{json_util::string(e, where)};
  });
}

// ---------------------------------------------------------------------------
// Workspace: insights and tasks

void Workspace::check_insight_refs(const InsightNode& n) const {
  if (const auto* list = std::get_if<std::vector<DomainElement>>(&n.domain_knowledge)) {
    for (const auto& e : *list) {
      const auto* name = std::get_if<std::string>(&e);
      if (name && !domain_nodes_.contains(*name)) {
        throw Error(ErrorCode::UnresolvedReference, "unknown domain knowledge node '" + *name + "'");
      }
    }
  }
  if (const auto* list = std::get_if<std::vector<AnalyticElement>>(&n.analytic_knowledge)) {
    for (const auto& e : *list) {
      if (const auto* name = std::get_if<std::string>(&e); name && !analytic_nodes_.contains(*name)) {
        throw Error(ErrorCode::UnresolvedReference, "unknown analytic knowledge node '" + *name + "'");
      }
      if (const auto* p = std::get_if<AnalyticPattern>(&e)) check_pattern(p->pattern);
    }
  }
}

const InsightNode& Workspace::create_insight(std::string name, DomainSlot domain_knowledge,
                                             AnalyticSlot analytic_knowledge,
                                             std::optional<std::string> description) {
  if (name.empty() || name == wildcard_token) {
    throw Error(ErrorCode::ReservedName, "invalid insight name '" + name + "'");
  }
  if (insights_.contains(name)) {
    throw Error(ErrorCode::DuplicateName, "insight node '" + name + "' already exists");
  }
  InsightNode node{name, std::move(domain_knowledge), std::move(analytic_knowledge),
                   std::move(description), {}};
  check_insight_refs(node);
  return insights_.emplace(std::move(name), std::move(node)).first->second;
}

const SimpleTaskNode& Workspace::create_task(std::string name, std::string objective,
                                             std::vector<std::string> insights) {
  if (name.empty() || name == wildcard_token) {
    throw Error(ErrorCode::ReservedName, "invalid task name '" + name + "'");
  }
  if (tasks_.contains(name)) throw Error(ErrorCode::DuplicateName, "task node '" + name + "' already exists");
  auto resolve = [&](const std::string& n) -> const InsightNode& {
    auto it = insights_.find(n);
    if (it == insights_.end()) throw Error(ErrorCode::UnresolvedReference, "unknown insight '" + n + "'");
    return it->second;
  };
  if (!has_wildcard(resolve(objective))) {
    throw Error(ErrorCode::ObjectiveNotObjective, "'" + objective + "' contains no wildcard");
  }
  for (const auto& i : insights) {
    if (has_wildcard(resolve(i))) throw Error(ErrorCode::InsightIsObjective, "'" + i + "' is an objective");
  }
  SimpleTaskNode node{name, std::move(objective), std::move(insights), {}};
  return tasks_.emplace(std::move(name), std::move(node)).first->second;
}

bool Workspace::is_objective(std::string_view name) const { return has_wildcard(insight(name)); }

bool Workspace::analytic_matches(const AnalyticElement& e, const AnalyticKnowledgeNode& node) const {
  if (const auto* name = std::get_if<std::string>(&e)) return *name == node.name;
  if (std::holds_alternative<Wildcard>(e)) return true;
  json view = {{"transformation", nullptr}, {"relationship", nullptr}};
  if (node.transformation) {
    if (auto it = transformations_.find(*node.transformation); it != transformations_.end()) {
      view["transformation"] = transformation_to_json(it->second);
    }
  }
  if (node.relationship) {
    if (auto it = models_.find(*node.relationship); it != models_.end()) {
      view["relationship"] = model_spec_to_json(it->second);
    }
  }
  return json_pattern_matches(std::get<AnalyticPattern>(e).pattern, view);
}

namespace {

template <class Element, class Match>
bool list_matches(const std::vector<Element>& objective, const std::vector<std::string>& concrete,
                  Match&& match) {
  // References compare as sets; patterns each need their own node.
  std::vector<const Element*> required;
  std::set<std::string> refs;
  bool open = false;
  for (const auto& e : objective) {
    if (std::holds_alternative<Wildcard>(e)) {
      open = true;
    } else if (const auto* name = std::get_if<std::string>(&e)) {
      if (refs.insert(*name).second) required.push_back(&e);
    } else {
      required.push_back(&e);
    }
  }
  if (!open && required.size() != concrete.size()) return false;
  return injective_matching(required.size(), concrete.size(), [&](std::size_t l, std::size_t r) {
    return match(*required[l], concrete[r]);
  });
}

template <class Element>
std::vector<std::string> concrete_names(const Slot<Element>& s) {
  std::set<std::string> names;
  for (const auto& e : std::get<std::vector<Element>>(s)) names.insert(std::get<std::string>(e));
  return {names.begin(), names.end()};
}

}  // namespace

bool Workspace::slot_matches_domain(const DomainSlot& o, const DomainSlot& i) const {
  if (std::holds_alternative<Wildcard>(o)) return true;
  return list_matches(std::get<std::vector<DomainElement>>(o), concrete_names(i),
                      [](const DomainElement& e, const std::string& n) {
                        return std::get<std::string>(e) == n;
                      });
}

bool Workspace::slot_matches_analytic(const AnalyticSlot& o, const AnalyticSlot& i) const {
  if (std::holds_alternative<Wildcard>(o)) return true;
  return list_matches(std::get<std::vector<AnalyticElement>>(o), concrete_names(i),
                      [&](const AnalyticElement& e, const std::string& n) {
                        auto it = analytic_nodes_.find(n);
                        if (it == analytic_nodes_.end()) {
                          const auto* ref = std::get_if<std::string>(&e);
                          return ref && *ref == n;
                        }
                        return analytic_matches(e, it->second);
                      });
}

bool Workspace::match_objective(std::string_view objective, std::string_view insight_name) const {
  const auto& o = insight(objective);
  const auto& i = insight(insight_name);
  if (!has_wildcard(o)) {
    throw Error(ErrorCode::KindMismatch, "'" + o.name + "' is not an objective");
  }
  if (has_wildcard(i)) {
    throw Error(ErrorCode::KindMismatch, "'" + i.name + "' is not a concrete insight");
  }
  return slot_matches_domain(o.domain_knowledge, i.domain_knowledge) &&
         slot_matches_analytic(o.analytic_knowledge, i.analytic_knowledge);
}

std::vector<std::string> Workspace::matching_insights(std::string_view objective) const {
  if (!is_objective(objective)) {
    throw Error(ErrorCode::KindMismatch, "'" + std::string(objective) + "' is not an objective");
  }
  std::vector<std::string> out;
  for (const auto& [name, node] : insights_) {
    if (!has_wildcard(node) && match_objective(objective, name)) out.push_back(name);
  }
  return out;
}

std::vector<std::string> Workspace::validate_task(std::string_view name) const {
  const auto& t = task(name);
  std::vector<std::string> out;
  const auto o = insights_.find(t.objective);
  const bool usable = o != insights_.end() && has_wildcard(o->second);
  for (const auto& i : t.insights) {
    auto it = insights_.find(i);
    if (!usable || it == insights_.end() || has_wildcard(it->second) ||
        !match_objective(t.objective, i)) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace insightspec
