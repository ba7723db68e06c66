#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightspec/dataset.hpp"
#include "insightspec/error.hpp"
#include "insightspec/expr.hpp"

namespace insightspec {

enum class AggregateFn { count, sum, mean, min, max };

struct GroupBy {
  std::vector<std::string> keys;
};

struct Aggregate {
  std::string out;
  AggregateFn fn = AggregateFn::count;
  std::optional<std::string> arg;
};

struct Rollup {
  std::vector<Aggregate> aggregates;
};

struct SortKey {
  std::string attribute;
  bool descending = false;
};

struct OrderBy {
  std::vector<SortKey> keys;
};

struct Filter {
  Expr predicate;
};

struct Derive {
  std::string out;
  Expr expr;
};

using TransformVerb = std::variant<GroupBy, Rollup, OrderBy, Filter, Derive>;

struct DataTransformation {
  std::vector<std::string> sources;
  std::vector<TransformVerb> transforms;
};

// Builders, so pipelines read like the verbs they encode.
inline TransformVerb group_by(std::vector<std::string> keys) { return GroupBy{std::move(keys)}; }
inline TransformVerb rollup(std::vector<Aggregate> aggs) { return Rollup{std::move(aggs)}; }
inline TransformVerb order_by(std::vector<SortKey> keys) { return OrderBy{std::move(keys)}; }
inline TransformVerb filter(Expr predicate) { return Filter{std::move(predicate)}; }
inline TransformVerb derive(std::string out, Expr e) { return Derive{std::move(out), std::move(e)}; }
inline Aggregate count(std::string out) { return {std::move(out), AggregateFn::count, std::nullopt}; }
inline Aggregate aggregate(std::string out, AggregateFn fn, std::string arg) {
  return {std::move(out), fn, std::move(arg)};
}
inline SortKey asc(std::string attr) { return {std::move(attr), false}; }
inline SortKey desc(std::string attr) { return {std::move(attr), true}; }

std::string_view to_string(AggregateFn fn) noexcept;

/// Static checks over a pipeline. Without a source schema only the
/// structural rules run (rank ordering, output name clashes); with one,
/// column references and aggregate argument types are checked as well.
/// Returns every violation found.
std::vector<Error> check_transformation(const DataTransformation& t,
                                        const Schema* source_schema = nullptr);

/// Decodes `{"sources": [...], "transforms": [verb, ...]}` and validates it.
/// Throws one Error carrying all violations in `details()`; its code is the
/// first violation's.
DataTransformation build_transformation(const nlohmann::json& spec,
                                        const Schema* source_schema = nullptr);

nlohmann::json transformation_to_json(const DataTransformation& t);
nlohmann::json verb_to_json(const TransformVerb& v);

using DatasetResolver = std::function<const Dataset*(std::string_view name)>;

/// Runs the verbs left to right over the single source. Inputs are never
/// modified; the result is named after the source.
Dataset execute_transformation(const DataTransformation& t, const DatasetResolver& resolve);

/// The pipeline applied to an explicit table, bypassing source resolution.
Dataset apply_verbs(const Dataset& input, const std::vector<TransformVerb>& verbs);

}  // namespace insightspec
