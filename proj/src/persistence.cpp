#include "insightspec/persistence.hpp"

#include <set>
#include <sstream>
#include <tuple>

#include "json_util.hpp"

namespace insightspec {

using nlohmann::json;
namespace ju = json_util;

namespace {

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json node_ref_json(const NodeRef& r) { return {{"family", to_string(r.family)}, {"name", r.name}}; }

json links_json(const Workspace& w) {
  // (kind, from, to) -> label; sorted, related pairs once.
  std::map<std::tuple<std::string, NodeRef, NodeRef>, EdgeLabel> edges;
  auto collect = [&](NodeFamily family, const std::string& name, const LinkSet& ls) {
    const NodeRef a{family, name};
    for (const auto& [b, label] : ls.targets) edges.emplace(std::tuple{"directed", a, b}, label);
    for (const auto& [b, label] : ls.sources) edges.emplace(std::tuple{"directed", b, a}, label);
    for (const auto& [b, label] : ls.related) {
      edges.emplace(a < b ? std::tuple{"related", a, b} : std::tuple{"related", b, a}, label);
    }
  };
  for (const auto& [n, node] : w.domain_nodes()) collect(NodeFamily::domain, n, node.links);
  for (const auto& [n, node] : w.analytic_nodes()) collect(NodeFamily::analytic, n, node.links);
  for (const auto& [n, node] : w.insights()) collect(NodeFamily::insight, n, node.links);
  for (const auto& [n, node] : w.tasks()) collect(NodeFamily::task, n, node.links);

  auto out = json::array();
  for (const auto& [key, label] : edges) {
    const auto& [kind, from, to] = key;
    out.push_back({{"kind", kind},
                   {"from", node_ref_json(from)},
                   {"to", node_ref_json(to)},
                   {"label", optional_string(label)}});
  }
  return out;
}

}  // namespace

json workspace_to_json(const Workspace& w, const SerializeOptions& options) {
  std::vector<std::string> broken;
  for (const auto& e : w.validate()) {
    if (e.code() == ErrorCode::BrokenReference) broken.emplace_back(e.what());
  }
  if (!broken.empty()) {
    throw Error(ErrorCode::BrokenReference,
                std::to_string(broken.size()) + " unresolved reference(s); first: " + broken.front(),
                {}, broken);
  }

  json j;
  j["version"] = workspace_format_version;
  j["name"] = w.name();

  j["datasets"] = json::array();
  for (const auto& [name, d] : w.datasets()) {
    j["datasets"].push_back({{"name", name}, {"path", d.path}, {"schema", schema_to_json(d.schema)}});
  }
  j["transformations"] = json::array();
  for (const auto& [name, t] : w.transformations()) {
    json tj = transformation_to_json(t);
    tj["name"] = name;
    j["transformations"].push_back(std::move(tj));
  }
  j["models"] = json::array();
  for (const auto& [_, m] : w.models()) j["models"].push_back(model_to_json(m));

  j["concepts"] = json::array();
  for (const auto& [name, c] : w.concepts()) {
    j["concepts"].push_back({{"name", name}, {"parentConcepts", c.parents}});
  }
  j["domainNodes"] = json::array();
  for (const auto& [name, n] : w.domain_nodes()) {
    auto attrs = json::array();
    for (const auto& a : n.metadata.attributes) attrs.push_back(attribute_to_json(a));
    json values = json::object();
    for (const auto& [k, v] : n.metadata.values) values[k] = value_to_json(v);
    j["domainNodes"].push_back({{"name", name},
                                {"coreConcept", n.core_concept},
                                {"relevantConcepts", n.relevant_concepts},
                                {"metadata", {{"attributes", std::move(attrs)}, {"values", std::move(values)}}}});
  }
  j["analyticNodes"] = json::array();
  for (const auto& [name, n] : w.analytic_nodes()) {
    j["analyticNodes"].push_back({{"name", name},
                                  {"timestamp", n.timestamp},
                                  {"transformation", optional_string(n.transformation)},
                                  {"relationship", optional_string(n.relationship)},
                                  {"results", n.results},
                                  {"description", optional_string(n.description)}});
  }
  j["insightNodes"] = json::array();
  for (const auto& [name, n] : w.insights()) {
    j["insightNodes"].push_back({{"name", name},
                                 {"domainKnowledge", domain_slot_to_json(n.domain_knowledge)},
                                 {"analyticKnowledge", analytic_slot_to_json(n.analytic_knowledge)},
                                 {"description", optional_string(n.description)}});
  }
  j["taskNodes"] = json::array();
  for (const auto& [name, t] : w.tasks()) {
    j["taskNodes"].push_back({{"name", name}, {"objective", t.objective}, {"insights", t.insights}});
  }
  j["links"] = links_json(w);

  if (options.embed_results) {
    json cached = json::object();
    for (const auto& [name, _] : w.analytic_nodes()) {
      if (const Dataset* d = w.cached_results(name)) cached[name] = dataset_to_json(*d);
    }
    j["cachedResults"] = std::move(cached);
  }
  return j;
}

std::string serialize_workspace(const Workspace& w, const SerializeOptions& options) {
  return workspace_to_json(w, options).dump() + "\n";
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

std::optional<std::string> optional_string_from(const json& obj, const std::string& key,
                                                const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return ju::string(*it, ju::child(where, key));
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  ju::array(j, where);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(ju::string(j[i], ju::child(where, i)));
  return out;
}

NodeRef node_ref_from(const json& j, const std::string& where) {
  const auto family_text = ju::string(ju::field(j, "family", where), where + "/family");
  const auto family = node_family_from_string(family_text);
  if (!family) throw Error(ErrorCode::UnknownKind, "unknown node family '" + family_text + "'", where + "/family");
  return {*family, ju::string(ju::field(j, "name", where), where + "/name")};
}

/// Runs `f` for each element of the named top-level array, locating errors.
template <class F>
void each(const json& root, const char* key, F&& f) {
  const std::string where = ju::child("", key);
  if (!root.contains(key)) return;
  const auto& items = ju::array(root[key], where);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto at = ju::child(where, i);
    ju::located(at, [&] {
      ju::object(items[i], "");
      f(items[i], at);
      return 0;
    });
  }
}

ErrorCode public_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::FormatError:
    case ErrorCode::BrokenReference:
    case ErrorCode::UnknownKind:
      return c;
    case ErrorCode::UnknownConcept:
    case ErrorCode::UnknownNode:
    case ErrorCode::UnresolvedReference:
    case ErrorCode::UnresolvedSource:
      return ErrorCode::BrokenReference;
    case ErrorCode::UnknownVerb:
      return ErrorCode::UnknownKind;
    default:
      return ErrorCode::FormatError;
  }
}

Workspace decode(const json& root) {
  ju::object(root, "");
  const auto version = ju::integer(ju::field(root, "version", ""), "/version");
  if (version != workspace_format_version) {
    ju::fail("/version", "unsupported workspace version " + std::to_string(version));
  }
  Workspace w(ju::string(ju::field(root, "name", ""), "/name"));

  each(root, "datasets", [&](const json& d, const std::string&) {
    auto schema = ju::located("/schema", [&] { return schema_from_json(ju::field(d, "schema", "")); });
    w.add_dataset(ju::string(ju::field(d, "name", ""), "/name"),
                  ju::string(ju::field(d, "path", ""), "/path"), std::move(schema));
  });

  each(root, "transformations", [&](const json& t, const std::string&) {
    const auto name = ju::string(ju::field(t, "name", ""), "/name");
    json body = t;
    body.erase("name");
    w.add_transformation(name, build_transformation(body));
  });

  each(root, "models", [&](const json& m, const std::string&) { w.add_model(model_from_json(m)); });

  // Concepts may be listed before their parents.
  if (root.contains("concepts")) {
    const auto& items = ju::array(root["concepts"], "/concepts");
    std::vector<std::pair<std::string, std::vector<std::string>>> pending;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto at = ju::child("/concepts", i);
      pending.emplace_back(ju::string(ju::field(items[i], "name", at), at + "/name"),
                           string_list(ju::field(items[i], "parentConcepts", at), at + "/parentConcepts"));
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!seen.insert(pending[i].first).second) {
        ju::fail(ju::child("/concepts", i) + "/name", "duplicate concept '" + pending[i].first + "'");
      }
    }
    std::vector<bool> done(pending.size(), false);
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        if (done[i]) continue;
        const auto& [name, parents] = pending[i];
        bool ready = std::all_of(parents.begin(), parents.end(),
                                 [&](const std::string& p) { return w.concepts().contains(p); });
        if (!ready) continue;
        ju::located(ju::child("/concepts", i), [&] { return w.create_concept(name, parents); });
        done[i] = progress = true;
      }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (done[i]) continue;
      for (const auto& p : pending[i].second) {
        if (!seen.contains(p)) {
          throw Error(ErrorCode::BrokenReference, "unknown parent concept '" + p + "'",
                      ju::child("/concepts", i) + "/parentConcepts");
        }
      }
      ju::fail(ju::child("/concepts", i), "concept hierarchy has a cycle through '" + pending[i].first + "'");
    }
  }

  each(root, "domainNodes", [&](const json& n, const std::string&) {
    Metadata meta;
    const auto& mj = ju::object(ju::field(n, "metadata", ""), "/metadata");
    const auto& attrs = ju::array(ju::field(mj, "attributes", "/metadata"), "/metadata/attributes");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      meta.attributes.push_back(
          ju::located(ju::child("/metadata/attributes", i), [&] { return attribute_from_json(attrs[i]); }));
    }
    const auto& values = ju::object(ju::field(mj, "values", "/metadata"), "/metadata/values");
    for (const auto& [k, v] : values.items()) {
      const auto at = ju::child("/metadata/values", k);
      auto a = std::find_if(meta.attributes.begin(), meta.attributes.end(),
                            [&](const Attribute& x) { return x.name == k; });
      if (a == meta.attributes.end()) {
        throw Error(ErrorCode::UndeclaredMetadataKey, "metadata key '" + k + "' is not declared", at);
      }
      meta.values[k] = ju::located(at, [&] { return value_from_json(v, a->type); });
    }
    std::vector<std::string> relevant;
    if (n.contains("relevantConcepts")) relevant = string_list(n["relevantConcepts"], "/relevantConcepts");
    w.create_domain_node(ju::string(ju::field(n, "name", ""), "/name"),
                         ju::string(ju::field(n, "coreConcept", ""), "/coreConcept"), std::move(meta),
                         std::move(relevant));
  });

  each(root, "analyticNodes", [&](const json& n, const std::string&) {
    bool results = false;
    if (n.contains("results")) results = ju::boolean(n["results"], "/results");
    w.create_analytic_node(ju::string(ju::field(n, "name", ""), "/name"),
                           ju::integer(ju::field(n, "timestamp", ""), "/timestamp"),
                           optional_string_from(n, "transformation", ""),
                           optional_string_from(n, "relationship", ""), results,
                           optional_string_from(n, "description", ""));
  });

  each(root, "insightNodes", [&](const json& n, const std::string&) {
    auto domain = ju::located("/domainKnowledge", [&] {
      return domain_slot_from_json(ju::field(n, "domainKnowledge", ""));
    });
    auto analytic = ju::located("/analyticKnowledge", [&] {
      return analytic_slot_from_json(ju::field(n, "analyticKnowledge", ""));
    });
    w.create_insight(ju::string(ju::field(n, "name", ""), "/name"), std::move(domain), std::move(analytic),
                     optional_string_from(n, "description", ""));
  });

  each(root, "taskNodes", [&](const json& n, const std::string&) {
    w.create_task(ju::string(ju::field(n, "name", ""), "/name"),
                  ju::string(ju::field(n, "objective", ""), "/objective"),
                  string_list(ju::field(n, "insights", ""), "/insights"));
  });

  each(root, "links", [&](const json& l, const std::string&) {
    const auto kind = ju::string(ju::field(l, "kind", ""), "/kind");
    const auto from = node_ref_from(ju::field(l, "from", ""), "/from");
    const auto to = node_ref_from(ju::field(l, "to", ""), "/to");
    const auto label = optional_string_from(l, "label", "");
    if (kind == "directed") {
      w.link_nodes(from, to, LinkKind::target, label);
    } else if (kind == "related") {
      w.link_nodes(from, to, LinkKind::related, label);
    } else {
      throw Error(ErrorCode::UnknownKind, "unknown link kind '" + kind + "'", "/kind");
    }
  });

  if (root.contains("cachedResults")) {
    const auto& cached = ju::object(root["cachedResults"], "/cachedResults");
    for (const auto& [name, d] : cached.items()) {
      const auto at = ju::child("/cachedResults", name);
      ju::located(at, [&] {
        w.set_cached_results(name, dataset_from_json(d, name));
        return 0;
      });
    }
  }
  return w;
}

}  // namespace

Workspace workspace_from_json(const json& j) {
  try {
    return decode(j);
  } catch (const Error& e) {
    const auto code = public_code(e.code());
    if (code == e.code()) throw;
    throw Error(code, std::string(to_string(e.code())) + ": " + e.message(),
                e.location().empty() ? "/" : e.location(), e.details());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, e.what(), "/");
  }
}

Workspace deserialize_workspace(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what(), "/");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, e.what(), "/");
  }
  return workspace_from_json(j);
}

std::vector<Error> load_datasets(Workspace& w, const std::filesystem::path& base_dir) {
  std::vector<Error> out;
  std::vector<DatasetRef> refs;
  for (const auto& [_, d] : w.datasets()) refs.push_back(d);
  for (const auto& d : refs) {
    std::filesystem::path p(d.path);
    if (p.is_relative()) p = base_dir / p;
    try {
      w.attach_dataset(load_table_file(p.string(), d.name, d.schema));
    } catch (const Error& e) {
      out.push_back(e.location().empty() ? e.at("dataset/" + d.name) : e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string dot_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string dot_id(std::string_view family, std::string_view name) {
  return dot_string(std::string(family) + "/" + std::string(name));
}

}  // namespace

std::string export_dot(const Workspace& w) {
  std::ostringstream out;
  std::set<std::string> ids;
  out << "digraph " << dot_string(w.name()) << " {\n";
  auto node = [&](std::string_view family, const std::string& name) {
    const auto id = dot_id(family, name);
    ids.insert(id);
    out << "  " << id << " [label=" << dot_string(name + "\n[" + std::string(family) + "]") << "];\n";
  };
  for (const auto& [n, _] : w.datasets()) node("dataset", n);
  for (const auto& [n, _] : w.transformations()) node("transformation", n);
  for (const auto& [n, _] : w.models()) node("model", n);
  for (const auto& [n, _] : w.concepts()) node("concept", n);
  for (const auto& [n, _] : w.domain_nodes()) node("domain", n);
  for (const auto& [n, _] : w.analytic_nodes()) node("analytic", n);
  for (const auto& [n, _] : w.insights()) node("insight", n);
  for (const auto& [n, _] : w.tasks()) node("task", n);

  auto edge = [&](std::string_view ff, const std::string& from, std::string_view tf, const std::string& to,
                  std::string_view attrs = {}) {
    const auto a = dot_id(ff, from);
    const auto b = dot_id(tf, to);
    if (!ids.contains(a) || !ids.contains(b)) return;
    out << "  " << a << " -> " << b;
    if (!attrs.empty()) out << " [" << attrs << "]";
    out << ";\n";
  };

  for (const auto& [n, c] : w.concepts()) {
    for (const auto& p : c.parents) edge("concept", p, "concept", n);
  }
  for (const auto& [n, t] : w.transformations()) {
    for (const auto& s : t.sources) edge("dataset", s, "transformation", n);
  }
  for (const auto& [n, d] : w.domain_nodes()) {
    edge("concept", d.core_concept, "domain", n);
    for (const auto& c : d.relevant_concepts) edge("concept", c, "domain", n, "style=dotted");
  }
  for (const auto& [n, a] : w.analytic_nodes()) {
    if (a.transformation) edge("transformation", *a.transformation, "analytic", n);
    if (a.relationship) edge("model", *a.relationship, "analytic", n);
  }
  for (const auto& [n, i] : w.insights()) {
    if (const auto* list = std::get_if<std::vector<DomainElement>>(&i.domain_knowledge)) {
      for (const auto& e : *list) {
        if (const auto* ref = std::get_if<std::string>(&e)) edge("domain", *ref, "insight", n);
      }
    }
    if (const auto* list = std::get_if<std::vector<AnalyticElement>>(&i.analytic_knowledge)) {
      for (const auto& e : *list) {
        if (const auto* ref = std::get_if<std::string>(&e)) edge("analytic", *ref, "insight", n);
      }
    }
  }
  for (const auto& [n, t] : w.tasks()) {
    edge("insight", t.objective, "task", n);
    for (const auto& i : t.insights) edge("insight", i, "task", n);
  }

  for (const auto& l : links_json(w)) {
    std::string attrs = "style=dashed";
    if (l["kind"] == "related") attrs += ", dir=none";
    if (!l["label"].is_null()) attrs += ", label=" + dot_string(l["label"].get<std::string>());
    edge(l["from"]["family"].get<std::string>(), l["from"]["name"].get<std::string>(),
         l["to"]["family"].get<std::string>(), l["to"]["name"].get<std::string>(), attrs);
  }
  out << "}\n";
  return out.str();
}

}  // namespace insightspec
