#include <doctest.h>

#include <random>

#include "insightspec/error.hpp"
#include "insightspec/transform.hpp"
#include "oracle.hpp"

using namespace insightspec;

namespace {

Dataset crimes() {
  return load_table(
      "CrimeDate,Description,Premise,Loss\n"
      "2015-04-27,BURGLARY,ROW,100\n"
      "2015-04-27,ROBBERY,STREET,\n"
      "2015-04-25,BURGLARY,ROW,50\n"
      "2015-04-27,ARSON,ROW,900\n"
      "2015-04-26,ROBBERY,STREET,10\n"
      "2015-04-25,ROBBERY,PARK,20\n",
      "crimes");
}

std::vector<double> column(const Dataset& d, const std::string& c) {
  std::vector<double> out;
  for (const auto& r : d.records()) out.push_back(r.at(c).is_null() ? -1 : r.at(c).as_number());
  return out;
}

}  // namespace

TEST_CASE("count per day, top two days") {
  const auto out = apply_verbs(crimes(), {group_by({"CrimeDate"}), rollup({count("count")}),
                                          order_by({desc("count")}), filter(rank() <= 1)});
  REQUIRE(out.size() == 2);
  CHECK(out.schema()[0] == Attribute{"CrimeDate", AttributeType::temporal});
  CHECK(out.schema()[1] == Attribute{"count", AttributeType::quantitative});
  CHECK(format_timestamp(out[0].at("CrimeDate").as_ms()) == "2015-04-27");
  CHECK(column(out, "count") == std::vector<double>{3, 2});
}

TEST_CASE("aggregates skip nulls") {
  const auto out = apply_verbs(
      crimes(), {group_by({"Description"}),
                 rollup({count("n"), aggregate("sum", AggregateFn::sum, "Loss"),
                         aggregate("mean", AggregateFn::mean, "Loss"),
                         aggregate("lo", AggregateFn::min, "Loss"), aggregate("hi", AggregateFn::max, "Loss")})});
  REQUIRE(out.size() == 3);
  CHECK(out[0].at("Description").as_string() == "BURGLARY");  // first appearance
  CHECK(column(out, "n") == std::vector<double>{2, 3, 1});
  CHECK(column(out, "sum") == std::vector<double>{150, 30, 900});
  CHECK(column(out, "mean") == std::vector<double>{75, 15, 900});
  CHECK(column(out, "lo") == std::vector<double>{50, 10, 900});
}

TEST_CASE("rollup without groupby yields one row even when empty") {
  const auto none = apply_verbs(crimes(), {filter(col("Loss") > 1e9),
                                           rollup({count("n"), aggregate("s", AggregateFn::sum, "Loss"),
                                                   aggregate("m", AggregateFn::mean, "Loss")})});
  REQUIRE(none.size() == 1);
  CHECK(none[0].at("n").as_number() == 0);
  CHECK(none[0].at("s").as_number() == 0);
  CHECK(none[0].at("m").is_null());
}

TEST_CASE("orderby is stable and puts nulls last") {
  const auto asc_out = apply_verbs(crimes(), {order_by({asc("Loss")})});
  CHECK(column(asc_out, "Loss") == std::vector<double>{10, 20, 50, 100, 900, -1});
  const auto by_premise = apply_verbs(crimes(), {order_by({asc("Premise")})});
  std::vector<std::string> desc_order;
  for (const auto& r : by_premise.records()) desc_order.push_back(r.at("Description").as_string());
  CHECK(desc_order ==
        std::vector<std::string>{"ROBBERY", "BURGLARY", "BURGLARY", "ARSON", "ROBBERY", "ROBBERY"});
}

TEST_CASE("derive adds or replaces a column") {
  const auto out = apply_verbs(crimes(), {derive("big", col("Loss") > 60), derive("Loss", col("Loss") * 2)});
  CHECK(out.schema().back().name == "big");
  CHECK(column(out, "big") == std::vector<double>{1, 0, 0, 1, 0, 0});
  CHECK(column(out, "Loss") == std::vector<double>{200, -1, 100, 1800, 20, 40});
}

TEST_CASE("inputs are not modified") {
  const auto in = crimes();
  const auto copy = in;
  apply_verbs(in, {filter(col("Loss") > 20), derive("Loss", 0)});
  CHECK(in.same_content(copy));
}

TEST_CASE("static checks") {
  const auto schema = crimes().schema();
  auto codes = [&](std::vector<TransformVerb> verbs) {
    std::vector<ErrorCode> out;
    for (const auto& e : check_transformation({{"crimes"}, std::move(verbs)}, &schema)) {
      out.push_back(e.code());
    }
    return out;
  };
  CHECK(codes({filter(rank() <= 2)}) == std::vector{ErrorCode::RankOutsideOrderedContext});
  CHECK(codes({order_by({asc("Loss")}), rollup({count("n")}), filter(rank() < 1)}).empty());
  CHECK(codes({filter(col("Nope") > 1)}) == std::vector{ErrorCode::UnknownColumn});
  CHECK(codes({rollup({aggregate("s", AggregateFn::sum, "Premise")})}) == std::vector{ErrorCode::TypeError});
  CHECK(codes({group_by({"Premise", "Premise"})}) == std::vector{ErrorCode::MalformedExpr});
  CHECK(codes({group_by({"Premise"}), rollup({count("n")}), filter(col("Loss") > 1)}) ==
        std::vector{ErrorCode::UnknownColumn});
  CHECK_FALSE(check_transformation({{}, {}}).empty());
}

TEST_CASE("build_transformation collects every violation") {
  const auto spec = nlohmann::json::parse(R"({
    "sources": ["crimes"],
    "transforms": [
      {"op": "filter", "args": [{"op": "<=", "args": [{"op": "rank"}, {"op": "lit", "value": 2}]}]},
      {"op": "pivot", "args": []},
      {"op": "derive", "args": [{"out": "x", "expr": {"op": "+", "args": [{"op": "col"}]}}]}
    ]})");
  try {
    build_transformation(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownVerb);
    CHECK(e.details().size() == 2);
    CHECK(e.location() == "/transforms/1/op");
  }
}

TEST_CASE("transformations round-trip through JSON") {
  const DataTransformation t{{"crimes"},
                             {group_by({"CrimeDate"}), rollup({count("count")}), order_by({desc("count")}),
                              filter(rank() <= 2), derive("twice", col("count") * 2)}};
  const auto j = transformation_to_json(t);
  CHECK(j["transforms"][3]["args"].is_array());
  CHECK(j["transforms"][3]["args"].size() == 1);
  CHECK(transformation_to_json(build_transformation(j)) == j);
}

TEST_CASE("execution resolves its single source") {
  const auto data = crimes();
  const DataTransformation t{{"crimes"}, {filter(col("Premise") == "ROW")}};
  const auto out = execute_transformation(t, [&](std::string_view n) -> const Dataset* {
    return n == "crimes" ? &data : nullptr;
  });
  CHECK(out.size() == 3);
  CHECK(out.name() == "crimes");
  try {
    execute_transformation({{"ghost"}, {}}, [](std::string_view) -> const Dataset* { return nullptr; });
    FAIL("expected UnresolvedSource");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnresolvedSource);
  }
}

TEST_CASE("random pipelines agree with the reference evaluator") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 300; ++i) {
    const auto table = oracle::random_table(rng);
    oracle::PipelineGenerator gen(rng);
    const auto verbs = gen.generate(table);
    std::vector<TransformVerb> pipeline;
    for (const auto& v : verbs) pipeline.push_back(oracle::to_verb(v));
    const auto schema = oracle::to_dataset(table).schema();
    REQUIRE(check_transformation({{"t"}, pipeline}, &schema).empty());
    const auto got = apply_verbs(oracle::to_dataset(table), pipeline);
    const auto diff = oracle::compare(oracle::run(table, verbs), got);
    INFO("case " << i << ": " << transformation_to_json({{"t"}, pipeline}).dump());
    CHECK(diff == "");
  }
}
