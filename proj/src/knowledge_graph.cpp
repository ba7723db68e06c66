#include <algorithm>
#include <functional>
#include <set>

#include "insightspec/workspace.hpp"

namespace insightspec {

std::string_view to_string(NodeFamily f) noexcept {
  switch (f) {
    case NodeFamily::domain: return "domain";
    case NodeFamily::analytic: return "analytic";
    case NodeFamily::insight: return "insight";
    case NodeFamily::task: return "task";
  }
  return "domain";
}

std::optional<NodeFamily> node_family_from_string(std::string_view text) {
  for (auto f : {NodeFamily::domain, NodeFamily::analytic, NodeFamily::insight, NodeFamily::task}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

std::string to_string(const NodeRef& r) { return std::string(to_string(r.family)) + "/" + r.name; }

namespace {

void check_name(const std::string& name, std::string_view what) {
  if (name.empty()) throw Error(ErrorCode::ReservedName, std::string(what) + " name is empty");
  if (name == "*") {
    throw Error(ErrorCode::ReservedName, "\"*\" is reserved and cannot name a " + std::string(what));
  }
}

template <class Map>
void check_unused(const Map& m, const std::string& name, std::string_view what) {
  check_name(name, what);
  if (m.contains(name)) {
    throw Error(ErrorCode::DuplicateName, std::string(what) + " '" + name + "' already exists");
  }
}

template <class Map>
auto& lookup(Map& m, std::string_view name, ErrorCode code, std::string_view what) {
  auto it = m.find(name);
  if (it == m.end()) {
    throw Error(code, "no " + std::string(what) + " named '" + std::string(name) + "'");
  }
  return it->second;
}

LinkKind reverse(LinkKind k) {
  switch (k) {
    case LinkKind::source: return LinkKind::target;
    case LinkKind::target: return LinkKind::source;
    case LinkKind::related: return LinkKind::related;
  }
  return k;
}

template <class L>
auto& edges(L& s, LinkKind k) {
  switch (k) {
    case LinkKind::source: return s.sources;
    case LinkKind::target: return s.targets;
    case LinkKind::related: return s.related;
  }
  return s.related;
}

}  // namespace

Workspace::Workspace(std::string name) : name_(std::move(name)) {}

// ---------------------------------------------------------------------------
// datasets, transformations, models

const DatasetRef& Workspace::add_dataset(std::string name, std::string path, Schema schema) {
  check_unused(datasets_, name, "dataset");
  std::set<std::string_view> seen;
  for (const auto& a : schema) {
    check_name(a.name, "attribute");
    if (!seen.insert(a.name).second) {
      throw Error(ErrorCode::DuplicateName, "attribute '" + a.name + "' declared twice");
    }
  }
  auto key = name;
  return datasets_.emplace(std::move(key), DatasetRef{std::move(name), std::move(path), std::move(schema)})
      .first->second;
}

void Workspace::attach_dataset(const Dataset& table) {
  const auto& ref = lookup(datasets_, table.name(), ErrorCode::UnresolvedSource, "dataset");
  if (table.schema() != ref.schema) {
    throw Error(ErrorCode::SchemaMismatch,
                "table schema differs from the declared schema of '" + ref.name + "'");
  }
  loaded_.insert_or_assign(ref.name, table);
  results_cache_.clear();
}

const DatasetRef& Workspace::dataset_ref(std::string_view name) const {
  return lookup(datasets_, name, ErrorCode::UnresolvedSource, "dataset");
}

const Dataset* Workspace::loaded_dataset(std::string_view name) const {
  auto it = loaded_.find(name);
  return it == loaded_.end() ? nullptr : &it->second;
}

const DataTransformation& Workspace::add_transformation(std::string name, DataTransformation t) {
  check_unused(transformations_, name, "transformation");
  for (const auto& s : t.sources) {
    if (!datasets_.contains(s)) {
      throw Error(ErrorCode::UnresolvedReference,
                  "transformation '" + name + "' reads unknown dataset '" + s + "'");
    }
  }
  const Schema* schema = t.sources.size() == 1 ? &datasets_.find(t.sources[0])->second.schema : nullptr;
  auto problems = check_transformation(t, schema);
  if (!problems.empty()) {
    Error first = problems.front();
    throw Error(first.code(), "transformation '" + name + "': " + first.message(), first.location(),
                [&] {
                  std::vector<std::string> d;
                  for (const auto& p : problems) d.emplace_back(p.what());
                  return d;
                }());
  }
  return transformations_.emplace(std::move(name), std::move(t)).first->second;
}

const DataTransformation& Workspace::transformation(std::string_view name) const {
  return lookup(transformations_, name, ErrorCode::UnresolvedReference, "transformation");
}

const RelationshipModel& Workspace::add_model(RelationshipModel m) {
  check_unused(models_, m.name, "model");
  check_model_spec(m);
  auto key = m.name;
  return models_.emplace(std::move(key), std::move(m)).first->second;
}

const RelationshipModel& Workspace::model(std::string_view name) const {
  return lookup(models_, name, ErrorCode::UnresolvedReference, "model");
}

void Workspace::update_model(RelationshipModel m) {
  auto& slot = lookup(models_, m.name, ErrorCode::UnresolvedReference, "model");
  if (slot.kind != m.kind) {
    throw Error(ErrorCode::KindMismatch, "model '" + m.name + "' cannot change kind");
  }
  check_model_spec(m);
  slot = std::move(m);
}

// ---------------------------------------------------------------------------
// concepts

const Concept& Workspace::create_concept(std::string name, std::vector<std::string> parents) {
  check_name(name, "concept");
  for (const auto& p : parents) {
    if (p == name || (concepts_.contains(name) && concepts_.contains(p) && concept_is_a(p, name))) {
      throw Error(ErrorCode::CycleWouldForm,
                  "'" + p + "' as a parent of '" + name + "' would make a cycle");
    }
  }
  check_unused(concepts_, name, "concept");
  std::vector<std::string> unique;
  for (auto& p : parents) {
    lookup(concepts_, p, ErrorCode::UnknownConcept, "concept");
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(std::move(p));
  }
  auto key = name;
  return concepts_.emplace(std::move(key), Concept{std::move(name), std::move(unique)}).first->second;
}

void Workspace::add_concept_parent(std::string_view name, std::string_view parent) {
  auto& c = lookup(concepts_, name, ErrorCode::UnknownConcept, "concept");
  lookup(concepts_, parent, ErrorCode::UnknownConcept, "concept");
  if (concept_is_a(parent, name)) {
    throw Error(ErrorCode::CycleWouldForm, "'" + std::string(parent) + "' as a parent of '" +
                                               std::string(name) + "' would make a cycle");
  }
  if (std::find(c.parents.begin(), c.parents.end(), parent) == c.parents.end()) {
    c.parents.emplace_back(parent);
  }
}

const Concept& Workspace::concept_named(std::string_view name) const {
  return lookup(concepts_, name, ErrorCode::UnknownConcept, "concept");
}

bool Workspace::concept_is_a(std::string_view c, std::string_view ancestor) const {
  lookup(concepts_, c, ErrorCode::UnknownConcept, "concept");
  lookup(concepts_, ancestor, ErrorCode::UnknownConcept, "concept");
  std::set<std::string_view> seen;
  std::vector<std::string_view> stack{c};
  while (!stack.empty()) {
    auto at = stack.back();
    stack.pop_back();
    if (at == ancestor) return true;
    if (!seen.insert(at).second) continue;
    auto it = concepts_.find(at);
    if (it == concepts_.end()) continue;  // dangling after removal
    for (const auto& p : it->second.parents) stack.push_back(p);
  }
  return false;
}

// ---------------------------------------------------------------------------
// domain and analytic nodes

const DomainKnowledgeNode& Workspace::create_domain_node(std::string name, std::string core_concept,
                                                         Metadata metadata,
                                                         std::vector<std::string> relevant_concepts) {
  check_unused(domain_nodes_, name, "domain knowledge node");
  lookup(concepts_, core_concept, ErrorCode::UnknownConcept, "concept");
  for (const auto& c : relevant_concepts) lookup(concepts_, c, ErrorCode::UnknownConcept, "concept");
  std::set<std::string_view> declared;
  for (const auto& a : metadata.attributes) {
    check_name(a.name, "metadata attribute");
    if (!declared.insert(a.name).second) {
      throw Error(ErrorCode::DuplicateName, "metadata attribute '" + a.name + "' declared twice");
    }
  }
  for (const auto& [key, value] : metadata.values) {
    auto a = std::find_if(metadata.attributes.begin(), metadata.attributes.end(),
                          [&](const Attribute& x) { return x.name == key; });
    if (a == metadata.attributes.end()) {
      throw Error(ErrorCode::UndeclaredMetadataKey, "metadata key '" + key + "' is not declared");
    }
    if (!value.conforms_to(a->type)) {
      throw Error(ErrorCode::TypeError, "metadata value for '" + key + "' is not " +
                                            std::string(to_string(a->type)));
    }
  }
  DomainKnowledgeNode node{name, std::move(core_concept), std::move(relevant_concepts),
                           std::move(metadata), {}};
  return domain_nodes_.emplace(std::move(name), std::move(node)).first->second;
}

const AnalyticKnowledgeNode& Workspace::create_analytic_node(
    std::string name, std::int64_t timestamp, std::optional<std::string> transformation,
    std::optional<std::string> relationship, bool results, std::optional<std::string> description) {
  check_unused(analytic_nodes_, name, "analytic knowledge node");
  if (!transformation && !relationship) {
    throw Error(ErrorCode::NoEvidence,
                "analytic node '" + name + "' needs a transformation or a relationship");
  }
  if (results && !transformation) {
    throw Error(ErrorCode::NoEvidence, "analytic node '" + name + "' has results but no transformation");
  }
  if (transformation) this->transformation(*transformation);
  if (relationship) model(*relationship);
  AnalyticKnowledgeNode node{name,    timestamp, std::move(transformation), std::move(relationship),
                             results, std::move(description), {}};
  return analytic_nodes_.emplace(std::move(name), std::move(node)).first->second;
}

const DomainKnowledgeNode& Workspace::domain_node(std::string_view name) const {
  return lookup(domain_nodes_, name, ErrorCode::UnknownNode, "domain knowledge node");
}
const AnalyticKnowledgeNode& Workspace::analytic_node(std::string_view name) const {
  return lookup(analytic_nodes_, name, ErrorCode::UnknownNode, "analytic knowledge node");
}
const InsightNode& Workspace::insight(std::string_view name) const {
  return lookup(insights_, name, ErrorCode::UnknownNode, "insight node");
}
const SimpleTaskNode& Workspace::task(std::string_view name) const {
  return lookup(tasks_, name, ErrorCode::UnknownNode, "task node");
}

bool Workspace::contains(const NodeRef& r) const {
  switch (r.family) {
    case NodeFamily::domain: return domain_nodes_.contains(r.name);
    case NodeFamily::analytic: return analytic_nodes_.contains(r.name);
    case NodeFamily::insight: return insights_.contains(r.name);
    case NodeFamily::task: return tasks_.contains(r.name);
  }
  return false;
}

// ---------------------------------------------------------------------------
// links

LinkSet& Workspace::links_mut(const NodeRef& r) {
  switch (r.family) {
    case NodeFamily::domain: return lookup(domain_nodes_, r.name, ErrorCode::UnknownNode, "domain knowledge node").links;
    case NodeFamily::analytic: return lookup(analytic_nodes_, r.name, ErrorCode::UnknownNode, "analytic knowledge node").links;
    case NodeFamily::insight: return lookup(insights_, r.name, ErrorCode::UnknownNode, "insight node").links;
    case NodeFamily::task: return lookup(tasks_, r.name, ErrorCode::UnknownNode, "task node").links;
  }
  throw Error(ErrorCode::UnknownNode, "bad node family");
}

const LinkSet& Workspace::links(const NodeRef& r) const {
  return const_cast<Workspace*>(this)->links_mut(r);
}

void Workspace::link_nodes(const NodeRef& a, const NodeRef& b, LinkKind kind, EdgeLabel label) {
  if (a == b) throw Error(ErrorCode::SelfLink, "cannot link " + to_string(a) + " to itself");
  auto& la = links_mut(a);
  auto& lb = links_mut(b);
  edges(la, kind).insert_or_assign(b, label);
  edges(lb, reverse(kind)).insert_or_assign(a, std::move(label));
}

void Workspace::unlink_nodes(const NodeRef& a, const NodeRef& b, LinkKind kind) {
  auto& la = links_mut(a);
  auto& lb = links_mut(b);
  edges(la, kind).erase(b);
  edges(lb, reverse(kind)).erase(a);
}

namespace {

template <class F>
void for_each_node(const Workspace& w, F&& f) {
  for (const auto& [n, node] : w.domain_nodes()) f(NodeRef{NodeFamily::domain, n}, node.links);
  for (const auto& [n, node] : w.analytic_nodes()) f(NodeRef{NodeFamily::analytic, n}, node.links);
  for (const auto& [n, node] : w.insights()) f(NodeRef{NodeFamily::insight, n}, node.links);
  for (const auto& [n, node] : w.tasks()) f(NodeRef{NodeFamily::task, n}, node.links);
}

}  // namespace

std::vector<std::string> Workspace::audit_links() const {
  std::vector<std::string> out;
  for_each_node(*this, [&](const NodeRef& a, const LinkSet& ls) {
    for (auto kind : {LinkKind::source, LinkKind::target, LinkKind::related}) {
      for (const auto& [b, label] : edges(ls, kind)) {
        if (b == a) {
          out.push_back(to_string(a) + " links to itself");
          continue;
        }
        if (!contains(b)) {
          out.push_back(to_string(a) + " links to missing node " + to_string(b));
          continue;
        }
        const auto& back = edges(links(b), reverse(kind));
        auto it = back.find(a);
        if (it == back.end()) {
          out.push_back(to_string(a) + " -> " + to_string(b) + " has no reverse entry");
        } else if (it->second != label) {
          out.push_back(to_string(a) + " -> " + to_string(b) + " labels differ");
        }
      }
    }
  });
  return out;
}

std::optional<std::vector<NodeRef>> Workspace::find_directed_cycle() const {
  enum class Mark { none, active, done };
  std::map<NodeRef, Mark> mark;
  std::vector<NodeRef> path;
  std::optional<std::vector<NodeRef>> found;

  std::function<bool(const NodeRef&)> visit = [&](const NodeRef& a) {
    mark[a] = Mark::active;
    path.push_back(a);
    for (const auto& [b, _] : links(a).targets) {
      if (!contains(b)) continue;
      auto m = mark[b];
      if (m == Mark::active) {
        auto start = std::find(path.begin(), path.end(), b);
        found = std::vector<NodeRef>(start, path.end());
        return true;
      }
      if (m == Mark::none && visit(b)) return true;
    }
    path.pop_back();
    mark[a] = Mark::done;
    return false;
  };

  std::vector<NodeRef> roots;
  for_each_node(*this, [&](const NodeRef& a, const LinkSet&) { roots.push_back(a); });
  for (const auto& r : roots) {
    if (mark[r] == Mark::none && visit(r)) return found;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// results

const Dataset& Workspace::materialize_results(std::string_view analytic) {
  const auto& node = analytic_node(analytic);
  if (auto it = results_cache_.find(analytic); it != results_cache_.end()) return it->second;
  if (!node.results || !node.transformation) {
    throw Error(ErrorCode::NoEvidence, "analytic node '" + node.name + "' has no results");
  }
  const auto& t = lookup(transformations_, *node.transformation, ErrorCode::BrokenReference,
                         "transformation");
  auto out = execute_transformation(t, [this](std::string_view name) { return loaded_dataset(name); });
  return results_cache_.insert_or_assign(node.name, std::move(out)).first->second;
}

const Dataset* Workspace::cached_results(std::string_view analytic) const {
  auto it = results_cache_.find(analytic);
  return it == results_cache_.end() ? nullptr : &it->second;
}

void Workspace::set_cached_results(std::string_view analytic, Dataset d) {
  const auto& node = analytic_node(analytic);
  if (!node.results) {
    throw Error(ErrorCode::NoEvidence, "analytic node '" + node.name + "' has no results");
  }
  results_cache_.insert_or_assign(node.name, std::move(d));
}

void Workspace::clear_cached_results() { results_cache_.clear(); }

// ---------------------------------------------------------------------------
// removal

void Workspace::remove_dataset(std::string_view name) {
  lookup(datasets_, name, ErrorCode::UnresolvedSource, "dataset");
  datasets_.erase(datasets_.find(name));
  if (auto it = loaded_.find(name); it != loaded_.end()) loaded_.erase(it);
  results_cache_.clear();
}

void Workspace::remove_transformation(std::string_view name) {
  lookup(transformations_, name, ErrorCode::UnresolvedReference, "transformation");
  transformations_.erase(transformations_.find(name));
  results_cache_.clear();
}

void Workspace::remove_model(std::string_view name) {
  lookup(models_, name, ErrorCode::UnresolvedReference, "model");
  models_.erase(models_.find(name));
}

void Workspace::remove_concept(std::string_view name) {
  lookup(concepts_, name, ErrorCode::UnknownConcept, "concept");
  concepts_.erase(concepts_.find(name));
}

void Workspace::remove_node(const NodeRef& r) {
  const LinkSet ls = links(r);
  for (auto kind : {LinkKind::source, LinkKind::target, LinkKind::related}) {
    for (const auto& [b, _] : edges(ls, kind)) {
      if (contains(b) && b != r) edges(links_mut(b), reverse(kind)).erase(r);
    }
  }
  switch (r.family) {
    case NodeFamily::domain: domain_nodes_.erase(r.name); break;
    case NodeFamily::analytic:
      analytic_nodes_.erase(r.name);
      results_cache_.erase(r.name);
      break;
    case NodeFamily::insight: insights_.erase(r.name); break;
    case NodeFamily::task: tasks_.erase(r.name); break;
  }
}

// ---------------------------------------------------------------------------
// validation

std::vector<Error> Workspace::validate() const {
  std::vector<Error> out;
  auto broken = [&](std::string where, std::string msg) {
    out.emplace_back(ErrorCode::BrokenReference, std::move(msg), std::move(where));
  };

  for (const auto& [name, t] : transformations_) {
    const std::string where = "transformation/" + name;
    for (const auto& s : t.sources) {
      if (!datasets_.contains(s)) broken(where, "unknown dataset '" + s + "'");
    }
    const Schema* schema = nullptr;
    if (t.sources.size() == 1 && datasets_.contains(t.sources[0])) {
      schema = &datasets_.find(t.sources[0])->second.schema;
    }
    for (auto& e : check_transformation(t, schema)) out.push_back(e.at(where));
  }

  for (const auto& [name, d] : loaded_) {
    for (const auto& v : validate_dataset(d)) {
      std::string where = "dataset/" + name;
      if (v.row) where += " row " + std::to_string(*v.row);
      out.emplace_back(ErrorCode::SchemaMismatch, v.attribute + ": " + v.message, where);
    }
  }

  for (const auto& [name, c] : concepts_) {
    for (const auto& p : c.parents) {
      if (!concepts_.contains(p)) broken("concept/" + name, "unknown parent concept '" + p + "'");
    }
  }

  for (const auto& [name, n] : domain_nodes_) {
    const std::string where = "domain/" + name;
    if (!concepts_.contains(n.core_concept)) broken(where, "unknown core concept '" + n.core_concept + "'");
    for (const auto& c : n.relevant_concepts) {
      if (!concepts_.contains(c)) broken(where, "unknown relevant concept '" + c + "'");
    }
  }

  for (const auto& [name, n] : analytic_nodes_) {
    const std::string where = "analytic/" + name;
    if (n.transformation && !transformations_.contains(*n.transformation)) {
      broken(where, "unknown transformation '" + *n.transformation + "'");
    }
    if (n.relationship && !models_.contains(*n.relationship)) {
      broken(where, "unknown model '" + *n.relationship + "'");
    }
    if (const Dataset* cached = cached_results(name);
        cached && n.transformation && transformations_.contains(*n.transformation)) {
      const auto& t = transformations_.find(*n.transformation)->second;
      bool loaded = std::all_of(t.sources.begin(), t.sources.end(),
                                [&](const std::string& s) { return loaded_.contains(s); });
      if (loaded) {
        try {
          auto fresh = execute_transformation(t, [this](std::string_view s) { return loaded_dataset(s); });
          if (!fresh.same_content(*cached)) {
            out.emplace_back(ErrorCode::SchemaMismatch, "cached results differ from a fresh run", where);
          }
        } catch (const Error& e) {
          out.push_back(e.at(where));
        }
      }
    }
  }

  for (const auto& [name, n] : insights_) {
    try {
      check_insight_refs(n);
    } catch (const Error& e) {
      broken("insight/" + name, e.message());
    }
  }

  for (const auto& [name, t] : tasks_) {
    const std::string where = "task/" + name;
    if (auto it = insights_.find(t.objective); it == insights_.end()) {
      broken(where, "unknown objective '" + t.objective + "'");
    } else if (!has_wildcard(it->second)) {
      out.emplace_back(ErrorCode::ObjectiveNotObjective, "'" + t.objective + "' has no wildcard", where);
    }
    for (const auto& i : t.insights) {
      if (auto it = insights_.find(i); it == insights_.end()) {
        broken(where, "unknown insight '" + i + "'");
      } else if (has_wildcard(it->second)) {
        out.emplace_back(ErrorCode::InsightIsObjective, "'" + i + "' is an objective", where);
      }
    }
  }

  for (auto& msg : audit_links()) {
    out.emplace_back(ErrorCode::BrokenReference, std::move(msg), "links");
  }
  return out;
}

}  // namespace insightspec
