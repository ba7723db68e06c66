#include "insightspec/transform.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "insightspec/error.hpp"

namespace insightspec {

std::string_view to_string(AggregateFn fn) noexcept {
  switch (fn) {
    case AggregateFn::count: return "count";
    case AggregateFn::sum: return "sum";
    case AggregateFn::mean: return "mean";
    case AggregateFn::min: return "min";
    case AggregateFn::max: return "max";
  }
  return "count";
}

namespace {

std::optional<AggregateFn> aggregate_from_string(std::string_view s) {
  for (auto fn : {AggregateFn::count, AggregateFn::sum, AggregateFn::mean, AggregateFn::min,
                  AggregateFn::max}) {
    if (s == to_string(fn)) return fn;
  }
  return std::nullopt;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Column types as far as they are statically known.
using TypedColumns = std::vector<std::pair<std::string, std::optional<AttributeType>>>;

const std::optional<AttributeType>* find_column(const TypedColumns& cols, std::string_view name) {
  for (const auto& [n, t] : cols) {
    if (n == name) return &t;
  }
  return nullptr;
}

std::optional<AttributeType> static_type(const Expr& e, const TypedColumns* cols) {
  return std::visit(
      overloaded{
          [](const expr_node::Literal& l) -> std::optional<AttributeType> {
            if (l.value.is_nominal()) return AttributeType::nominal;
            if (l.value.is_temporal()) return AttributeType::temporal;
            if (l.value.is_quantitative()) return AttributeType::quantitative;
            return std::nullopt;
          },
          [&](const expr_node::Column& c) -> std::optional<AttributeType> {
            if (!cols) return std::nullopt;
            const auto* t = find_column(*cols, c.name);
            return t ? *t : std::nullopt;
          },
          [](const auto&) -> std::optional<AttributeType> { return AttributeType::quantitative; },
      },
      e.node());
}

struct PipelineState {
  std::optional<TypedColumns> columns;  // nullopt when the source schema is unknown
  std::optional<std::vector<std::string>> group;
  bool ordered = false;
};

// Checks one verb against the state and advances the state.
void check_verb(const TransformVerb& verb, std::size_t index, PipelineState& st,
                std::vector<Error>& errors) {
  const std::string where = "/transforms/" + std::to_string(index);
  auto need_column = [&](const std::string& name) -> const std::optional<AttributeType>* {
    if (!st.columns) return nullptr;
    const auto* t = find_column(*st.columns, name);
    if (!t) errors.emplace_back(ErrorCode::UnknownColumn, "unknown column '" + name + "'", where);
    return t;
  };

  std::visit(
      overloaded{
          [&](const GroupBy& g) {
            std::set<std::string_view> seen;
            for (const auto& k : g.keys) {
              need_column(k);
              if (!seen.insert(k).second) {
                errors.emplace_back(ErrorCode::MalformedExpr, "duplicate groupby key '" + k + "'",
                                    where);
              }
            }
            st.group = g.keys;
          },
          [&](const Rollup& r) {
            const auto keys = st.group.value_or(std::vector<std::string>{});
            std::set<std::string> outs(keys.begin(), keys.end());
            TypedColumns next;
            for (const auto& k : keys) {
              const auto* t = st.columns ? find_column(*st.columns, k) : nullptr;
              next.emplace_back(k, t ? *t : std::nullopt);
            }
            for (const auto& a : r.aggregates) {
              if (a.out.empty() || a.out == "*") {
                errors.emplace_back(ErrorCode::MalformedExpr, "invalid rollup output name", where);
              } else if (!outs.insert(a.out).second) {
                errors.emplace_back(ErrorCode::MalformedExpr,
                                    "duplicate output column '" + a.out + "'", where);
              }
              std::optional<AttributeType> out_type = AttributeType::quantitative;
              if (a.fn != AggregateFn::count && !a.arg) {
                errors.emplace_back(ErrorCode::MalformedExpr,
                                    std::string(to_string(a.fn)) + " needs an argument", where);
              }
              if (a.arg) {
                const auto* t = need_column(*a.arg);
                if (a.fn != AggregateFn::count && t && *t && is_categorical(**t)) {
                  errors.emplace_back(ErrorCode::TypeError,
                                      std::string(to_string(a.fn)) + " over categorical column '" +
                                          *a.arg + "'",
                                      where);
                }
                if ((a.fn == AggregateFn::min || a.fn == AggregateFn::max) && t) out_type = *t;
              }
              next.emplace_back(a.out, out_type);
            }
            if (st.columns) st.columns = std::move(next);
            st.group.reset();
          },
          [&](const OrderBy& o) {
            if (o.keys.empty()) {
              errors.emplace_back(ErrorCode::MalformedExpr, "orderby needs at least one key", where);
            }
            for (const auto& k : o.keys) need_column(k.attribute);
            st.ordered = true;
          },
          [&](const Filter& f) {
            if (uses_rank(f.predicate) && !st.ordered) {
              errors.emplace_back(ErrorCode::RankOutsideOrderedContext,
                                  "rank() in a filter that follows no orderby", where);
            }
            for (const auto& c : referenced_columns(f.predicate)) need_column(c);
          },
          [&](const Derive& d) {
            if (uses_rank(d.expr) && !st.ordered) {
              errors.emplace_back(ErrorCode::RankOutsideOrderedContext,
                                  "rank() in a derive that follows no orderby", where);
            }
            if (d.out.empty() || d.out == "*") {
              errors.emplace_back(ErrorCode::MalformedExpr, "invalid derive output name", where);
            }
            for (const auto& c : referenced_columns(d.expr)) need_column(c);
            if (st.columns) {
              const auto type = static_type(d.expr, &*st.columns);
              auto it = std::find_if(st.columns->begin(), st.columns->end(),
                                     [&](const auto& c) { return c.first == d.out; });
              if (it != st.columns->end()) {
                it->second = type;
              } else {
                st.columns->emplace_back(d.out, type);
              }
            }
          },
      },
      verb);
}

PipelineState initial_state(const Schema* schema) {
  PipelineState st;
  if (schema) {
    TypedColumns cols;
    for (const auto& a : *schema) cols.emplace_back(a.name, a.type);
    st.columns = std::move(cols);
  }
  return st;
}

}  // namespace

std::vector<Error> check_transformation(const DataTransformation& t, const Schema* source_schema) {
  std::vector<Error> errors;
  if (t.sources.empty()) {
    errors.emplace_back(ErrorCode::MalformedExpr, "a transformation needs at least one source",
                        "/sources");
  }
  PipelineState st = initial_state(source_schema);
  for (std::size_t i = 0; i < t.transforms.size(); ++i) check_verb(t.transforms[i], i, st, errors);
  return errors;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json verb_to_json(const TransformVerb& v) {
  return std::visit(
      overloaded{
          [](const GroupBy& g) { return nlohmann::json{{"op", "groupby"}, {"args", g.keys}}; },
          [](const Rollup& r) {
            auto args = nlohmann::json::array();
            for (const auto& a : r.aggregates) {
              nlohmann::json j{{"out", a.out}, {"fn", to_string(a.fn)}};
              if (a.arg) j["arg"] = *a.arg;
              args.push_back(std::move(j));
            }
            return nlohmann::json{{"op", "rollup"}, {"args", std::move(args)}};
          },
          [](const OrderBy& o) {
            auto args = nlohmann::json::array();
            for (const auto& k : o.keys) args.push_back({{"attr", k.attribute}, {"desc", k.descending}});
            return nlohmann::json{{"op", "orderby"}, {"args", std::move(args)}};
          },
          [](const Filter& f) {
            return nlohmann::json{{"op", "filter"}, {"args", {expr_to_json(f.predicate)}}};
          },
          [](const Derive& d) {
            return nlohmann::json{
                {"op", "derive"},
                {"args", {nlohmann::json{{"out", d.out}, {"expr", expr_to_json(d.expr)}}}}};
          },
      },
      v);
}

nlohmann::json transformation_to_json(const DataTransformation& t) {
  auto verbs = nlohmann::json::array();
  for (const auto& v : t.transforms) verbs.push_back(verb_to_json(v));
  return {{"sources", t.sources}, {"transforms", std::move(verbs)}};
}

namespace {

TransformVerb decode_verb(const nlohmann::json& j, const std::string& where) {
  auto malformed = [&](const std::string& msg) {
    return Error(ErrorCode::MalformedExpr, msg, where);
  };
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw malformed("verb must be an object with a string \"op\"");
  }
  const auto op = j["op"].get<std::string>();
  if (op != "groupby" && op != "rollup" && op != "orderby" && op != "filter" && op != "derive") {
    throw Error(ErrorCode::UnknownVerb, "unknown verb '" + op + "'", where + "/op");
  }
  if (!j.contains("args") || !j["args"].is_array()) throw malformed("verb without \"args\" array");
  const auto& args = j["args"];

  if (op == "groupby") {
    GroupBy g;
    for (const auto& k : args) {
      if (!k.is_string()) throw malformed("groupby keys must be strings");
      g.keys.push_back(k.get<std::string>());
    }
    return g;
  }
  if (op == "rollup") {
    Rollup r;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const auto& a = args[i];
      if (!a.is_object() || !a.contains("out") || !a["out"].is_string() || !a.contains("fn") ||
          !a["fn"].is_string()) {
        throw malformed("rollup entries are {\"out\": string, \"fn\": string[, \"arg\": string]}");
      }
      auto fn = aggregate_from_string(a["fn"].get<std::string>());
      if (!fn) {
        throw Error(ErrorCode::UnknownVerb, "unknown aggregate '" + a["fn"].get<std::string>() + "'",
                    where + "/args/" + std::to_string(i) + "/fn");
      }
      Aggregate agg{a["out"].get<std::string>(), *fn, std::nullopt};
      if (a.contains("arg") && !a["arg"].is_null()) {
        if (!a["arg"].is_string()) throw malformed("rollup \"arg\" must be a string");
        agg.arg = a["arg"].get<std::string>();
      }
      r.aggregates.push_back(std::move(agg));
    }
    return r;
  }
  if (op == "orderby") {
    OrderBy o;
    for (const auto& k : args) {
      if (k.is_string()) {
        o.keys.push_back(asc(k.get<std::string>()));
      } else if (k.is_object() && k.contains("attr") && k["attr"].is_string()) {
        bool d = false;
        if (k.contains("desc")) {
          if (!k["desc"].is_boolean()) throw malformed("orderby \"desc\" must be a boolean");
          d = k["desc"].get<bool>();
        }
        o.keys.push_back({k["attr"].get<std::string>(), d});
      } else {
        throw malformed("orderby keys are strings or {\"attr\": string, \"desc\": bool}");
      }
    }
    return o;
  }
  if (op == "filter") {
    if (args.size() != 1) throw malformed("filter takes exactly one predicate");
    try {
      return Filter{expr_from_json(args[0])};
    } catch (const Error& e) {
      throw e.at(where + "/args/0" + e.location());
    }
  }
  // derive
  if (args.size() != 1 || !args[0].is_object() || !args[0].contains("out") ||
      !args[0]["out"].is_string() || !args[0].contains("expr")) {
    throw malformed("derive takes one {\"out\": string, \"expr\": expression}");
  }
  try {
    return Derive{args[0]["out"].get<std::string>(), expr_from_json(args[0]["expr"])};
  } catch (const Error& e) {
    throw e.at(where + "/args/0/expr" + e.location());
  }
}

}  // namespace

DataTransformation build_transformation(const nlohmann::json& spec, const Schema* source_schema) {
  std::vector<Error> errors;
  DataTransformation t;
  if (!spec.is_object()) {
    throw Error(ErrorCode::MalformedExpr, "transformation must be a JSON object");
  }
  if (!spec.contains("sources") || !spec["sources"].is_array()) {
    errors.emplace_back(ErrorCode::MalformedExpr, "\"sources\" must be an array", "/sources");
  } else {
    for (const auto& s : spec["sources"]) {
      if (!s.is_string()) {
        errors.emplace_back(ErrorCode::MalformedExpr, "source names must be strings", "/sources");
        break;
      }
      t.sources.push_back(s.get<std::string>());
    }
  }
  if (spec.contains("transforms")) {
    const auto& verbs = spec["transforms"];
    if (!verbs.is_array()) {
      errors.emplace_back(ErrorCode::MalformedExpr, "\"transforms\" must be an array", "/transforms");
    } else {
      for (std::size_t i = 0; i < verbs.size(); ++i) {
        try {
          t.transforms.push_back(decode_verb(verbs[i], "/transforms/" + std::to_string(i)));
        } catch (const Error& e) {
          errors.push_back(e);
        }
      }
    }
  }
  if (errors.empty()) errors = check_transformation(t, source_schema);
  if (!errors.empty()) {
    std::vector<std::string> details;
    for (const auto& e : errors) details.emplace_back(e.what());
    std::string message = std::to_string(errors.size()) + " violation(s); first: " +
                          errors.front().message();
    throw Error(errors.front().code(), std::move(message), errors.front().location(),
                std::move(details));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct KeyLess {
  bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end(),
                                                  compare_values) < 0;
  }
};

Value aggregate_values(const Aggregate& agg, const std::vector<const Record*>& rows) {
  if (agg.fn == AggregateFn::count) return Value::quantitative(static_cast<double>(rows.size()));
  std::vector<const Value*> present;
  for (const auto* r : rows) {
    const Value& v = r->at(*agg.arg);
    if (!v.is_null()) present.push_back(&v);
  }
  switch (agg.fn) {
    case AggregateFn::sum: {
      double s = 0;
      for (const auto* v : present) s += v->as_number();
      return Value::quantitative(s);
    }
    case AggregateFn::mean: {
      if (present.empty()) return Value::null();
      double s = 0;
      for (const auto* v : present) s += v->as_number();
      return Value::quantitative(s / static_cast<double>(present.size()));
    }
    case AggregateFn::min:
    case AggregateFn::max: {
      if (present.empty()) return Value::null();
      const Value* best = present.front();
      for (const auto* v : present) {
        const auto c = compare_values(*v, *best);
        if (agg.fn == AggregateFn::min ? c < 0 : c > 0) best = v;
      }
      return *best;
    }
    case AggregateFn::count: break;
  }
  return Value::null();
}

struct Table {
  Schema schema;
  std::vector<Record> rows;
};

const Attribute& schema_attr(const Schema& s, std::string_view name) {
  for (const auto& a : s) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
}

void apply_rollup(Table& t, const Rollup& r, const std::vector<std::string>& keys) {
  std::map<std::vector<Value>, std::size_t, KeyLess> index;
  std::vector<std::vector<Value>> key_order;
  std::vector<std::vector<const Record*>> groups;
  if (keys.empty()) {
    // One implicit group, present even for an empty table.
    key_order.emplace_back();
    groups.emplace_back();
    for (const auto& row : t.rows) groups[0].push_back(&row);
  } else {
    for (const auto& row : t.rows) {
      std::vector<Value> key;
      key.reserve(keys.size());
      for (const auto& k : keys) key.push_back(row.at(k));
      auto [it, inserted] = index.try_emplace(key, groups.size());
      if (inserted) {
        key_order.push_back(std::move(key));
        groups.emplace_back();
      }
      groups[it->second].push_back(&row);
    }
  }

  Schema schema;
  for (const auto& k : keys) schema.push_back(schema_attr(t.schema, k));
  for (const auto& a : r.aggregates) {
    AttributeType type = AttributeType::quantitative;
    if (a.arg && (a.fn == AggregateFn::min || a.fn == AggregateFn::max)) {
      type = schema_attr(t.schema, *a.arg).type;
    }
    schema.push_back({a.out, type});
  }

  std::vector<Record> rows;
  rows.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Record rec;
    for (std::size_t k = 0; k < keys.size(); ++k) rec.emplace(keys[k], key_order[g][k]);
    for (const auto& a : r.aggregates) {
      rec.insert_or_assign(a.out, aggregate_values(a, groups[g]));
    }
    rows.push_back(std::move(rec));
  }
  t.schema = std::move(schema);
  t.rows = std::move(rows);
}

void apply_derive(Table& t, const Derive& d, bool ordered, const TypedColumns& cols) {
  std::optional<AttributeType> type = static_type(d.expr, &cols);
  std::vector<Value> values;
  values.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EvalContext ctx;
    if (ordered) ctx.rank = static_cast<std::int64_t>(i);
    values.push_back(eval_expr(d.expr, t.rows[i], ctx));
  }
  if (!type) {
    for (const auto& v : values) {
      if (v.is_null()) continue;
      type = v.is_nominal() ? AttributeType::nominal
                            : (v.is_temporal() ? AttributeType::temporal : AttributeType::quantitative);
      break;
    }
  }
  const AttributeType out_type = type.value_or(AttributeType::nominal);
  for (const auto& v : values) {
    if (!v.conforms_to(out_type)) {
      throw Error(ErrorCode::EvaluationError,
                  "derive '" + d.out + "' produced values of mixed types");
    }
  }
  auto it = std::find_if(t.schema.begin(), t.schema.end(),
                         [&](const Attribute& a) { return a.name == d.out; });
  if (it != t.schema.end()) {
    it->type = out_type;
  } else {
    t.schema.push_back({d.out, out_type});
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].insert_or_assign(d.out, values[i]);
}

}  // namespace

Dataset apply_verbs(const Dataset& input, const std::vector<TransformVerb>& verbs) {
  Table t{input.schema(), {input.records().begin(), input.records().end()}};
  PipelineState st = initial_state(&t.schema);

  for (std::size_t i = 0; i < verbs.size(); ++i) {
    const auto& verb = verbs[i];
    const auto group_before = st.group;
    const bool ordered_before = st.ordered;
    const TypedColumns cols_before = *st.columns;
    std::vector<Error> errors;
    check_verb(verb, i, st, errors);
    if (!errors.empty()) throw errors.front();

    try {
      std::visit(overloaded{
                     [](const GroupBy&) {},
                     [&](const Rollup& r) {
                       apply_rollup(t, r, group_before.value_or(std::vector<std::string>{}));
                     },
                     [&](const OrderBy& o) {
                       std::stable_sort(t.rows.begin(), t.rows.end(),
                                        [&](const Record& a, const Record& b) {
                                          for (const auto& k : o.keys) {
                                            auto c = compare_values(a.at(k.attribute),
                                                                    b.at(k.attribute));
                                            if (c == 0) continue;
                                            return k.descending ? c > 0 : c < 0;
                                          }
                                          return false;
                                        });
                     },
                     [&](const Filter& f) {
                       std::vector<Record> kept;
                       for (std::size_t r = 0; r < t.rows.size(); ++r) {
                         EvalContext ctx;
                         if (ordered_before) ctx.rank = static_cast<std::int64_t>(r);
                         const Value v = eval_expr(f.predicate, t.rows[r], ctx);
                         if (v.is_nominal()) {
                           throw Error(ErrorCode::EvaluationError, "filter predicate is a string");
                         }
                         if (v.is_true()) kept.push_back(t.rows[r]);
                       }
                       t.rows = std::move(kept);
                     },
                     [&](const Derive& d) { apply_derive(t, d, ordered_before, cols_before); },
                 },
                 verb);
    } catch (const Error& e) {
      throw e.location().empty() ? e.at("/transforms/" + std::to_string(i)) : e;
    }

    // Re-sync the static view with the concrete schema.
    TypedColumns cols;
    for (const auto& a : t.schema) cols.emplace_back(a.name, a.type);
    st.columns = std::move(cols);
  }
  return Dataset(input.name(), std::move(t.schema), std::move(t.rows));
}

Dataset execute_transformation(const DataTransformation& t, const DatasetResolver& resolve) {
  if (t.sources.empty()) {
    throw Error(ErrorCode::UnresolvedSource, "transformation has no source");
  }
  if (t.sources.size() > 1) {
    throw Error(ErrorCode::EvaluationError, "multi-source transformations are not executable");
  }
  const Dataset* source = resolve ? resolve(t.sources.front()) : nullptr;
  if (!source) {
    throw Error(ErrorCode::UnresolvedSource, "unresolved source '" + t.sources.front() + "'");
  }
  return apply_verbs(*source, t.transforms);
}

}  // namespace insightspec
