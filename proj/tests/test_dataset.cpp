#include <doctest.h>

#include "insightspec/dataset.hpp"
#include "insightspec/error.hpp"

using namespace insightspec;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::FormatError;
}

}  // namespace

TEST_CASE("CSV loading infers column types") {
  const auto d = load_table("a,b,c,d\n1,x,2015-04-27,\n2.5,y,04/28/2015,\n", "t");
  REQUIRE(d.schema().size() == 4);
  CHECK(d.schema()[0].type == AttributeType::quantitative);
  CHECK(d.schema()[1].type == AttributeType::nominal);
  CHECK(d.schema()[2].type == AttributeType::temporal);
  CHECK(d.schema()[3].type == AttributeType::nominal);  // all empty
  CHECK(d.size() == 2);
  CHECK(d[1].at("a").as_number() == 2.5);
  CHECK(d[0].at("d").is_null());
}

TEST_CASE("CSV quoting, CRLF and embedded separators") {
  const auto d = load_table("name,note\r\n\"Smith, J\",\"said \"\"hi\"\"\"\r\nx,\"multi\nline\"\r\n", "t");
  REQUIRE(d.size() == 2);
  CHECK(d[0].at("name").as_string() == "Smith, J");
  CHECK(d[0].at("note").as_string() == "said \"hi\"");
  CHECK(d[1].at("note").as_string() == "multi\nline");
}

TEST_CASE("CSV errors carry codes") {
  CHECK(code_of([] { load_table("", "t", std::nullopt, TableFormat::csv); }) == ErrorCode::EmptyHeader);
  CHECK(code_of([] { load_table("a,b\n1,2,3\n", "t"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_table("a,a\n1,2\n", "t"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_table("a,*\n1,2\n", "t"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_table("a\n\"open\n", "t"); }) == ErrorCode::ParseError);
}

TEST_CASE("schema override is enforced") {
  const Schema s = {{"a", AttributeType::quantitative}, {"b", AttributeType::ordinal}};
  const auto d = load_table("b,a,extra\nlow,1,z\n", "t", s);
  CHECK(d.schema() == s);
  CHECK(d[0].at("b").as_string() == "low");
  CHECK_FALSE(d[0].contains("extra"));
  CHECK(code_of([&] { load_table("a,b\nx,low\n", "t", s); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_table("a\n1\n", "t", s); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("JSON tables keep first-appearance key order") {
  const auto d = load_table(R"([{"z": 1, "a": "x"}, {"a": "y", "z": 2, "m": true}])", "t");
  REQUIRE(d.schema().size() == 3);
  CHECK(d.schema()[0].name == "z");
  CHECK(d.schema()[1].name == "a");
  CHECK(d.schema()[2].name == "m");
  CHECK(d[0].at("m").is_null());
  CHECK(d[1].at("m").as_string() == "true");
  CHECK(code_of([] { load_table(R"([{"a": [1]}])", "t"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { load_table(R"({"a": 1})", "t", std::nullopt, TableFormat::json); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("missing files are unresolved sources") {
  CHECK(code_of([] { load_table_file("/nonexistent/x.csv", "x"); }) == ErrorCode::UnresolvedSource);
}

TEST_CASE("validation reports non-conforming cells") {
  Dataset d("t", {{"a", AttributeType::quantitative}},
            {Record{{"a", Value::nominal("oops")}}, Record{{"a", Value::quantitative(1)}}, Record{}});
  const auto v = validate_dataset(d);
  REQUIRE(v.size() == 2);
  CHECK(v[0].row == 0u);
  CHECK(v[1].row == 2u);
}

TEST_CASE("CSV output round-trips") {
  const auto d = load_table("when,n,label\n2015-04-27,3,\"a,b\"\n,,\n", "t");
  const auto again = load_table(to_csv(d), "t", d.schema());
  CHECK(again.same_content(d));
}

TEST_CASE("dataset JSON round-trips") {
  const auto d = load_table("when,n,label\n2015-04-27,3,x\n2015-04-28,,y\n", "t");
  const auto j = dataset_to_json(d);
  CHECK(dataset_from_json(j, "t").same_content(d));
  CHECK_THROWS_AS(dataset_from_json({{"schema", schema_to_json(d.schema())}, {"records", {{1}}}}, "t"),
                  Error);
}

TEST_CASE("records from JSON objects follow attribute types") {
  const std::vector<Attribute> attrs = {{"n", AttributeType::quantitative}, {"c", AttributeType::nominal}};
  const auto r = record_from_json({{"n", "4"}, {"c", 7}}, attrs);
  CHECK(r.at("n").as_number() == 4);
  CHECK(r.at("c").as_string() == "7");
  const auto partial = record_from_json({{"c", "x"}}, attrs);
  CHECK_FALSE(partial.contains("n"));
}
