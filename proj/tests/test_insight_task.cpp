#include <doctest.h>

#include "insightspec/error.hpp"
#include "sample_workspace.hpp"

using namespace insightspec;
using nlohmann::json;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::FormatError;
}

}  // namespace

TEST_CASE("json patterns") {
  CHECK(json_pattern_matches("*", json::array({1, 2})));
  CHECK(json_pattern_matches(json{{"a", "*"}}, json{{"a", 1}, {"b", 2}}));
  CHECK_FALSE(json_pattern_matches(json{{"c", "*"}}, json{{"a", 1}}));
  CHECK(json_pattern_matches(json::array({1, "*"}), json::array({3, 1})));
  CHECK_FALSE(json_pattern_matches(json::array({1, 1, "*"}), json::array({1, 2})));
  CHECK(json_pattern_matches(json::array({1, 2}), json::array({1, 2})));
  CHECK_FALSE(json_pattern_matches(json::array({1, 2}), json::array({2, 1})));
  CHECK_FALSE(json_pattern_matches(json::array({1}), json::array({1, 2})));
  CHECK(json_pattern_matches(2, 2.0));
  CHECK(contains_wildcard(json{{"x", json::array({json{{"y", "*"}}})}}));
  CHECK_FALSE(contains_wildcard(json{{"x", "**"}}));
}

TEST_CASE("slot JSON") {
  const AnalyticSlot s = std::vector<AnalyticElement>{"a", Wildcard{}, AnalyticPattern{json{{"relationship", "*"}}}};
  const auto j = analytic_slot_to_json(s);
  CHECK(j == json::parse(R"(["a", "*", {"relationship": "*"}])"));
  CHECK(analytic_slot_from_json(j) == s);
  CHECK(domain_slot_from_json("*") == DomainSlot{Wildcard{}});
  CHECK_THROWS_AS(domain_slot_from_json(json::array({1})), Error);
  CHECK_THROWS_AS(analytic_slot_from_json(json::parse(R"([{"relationship": {"kind": "KernelDensity"}}])")), Error);
  CHECK_THROWS_AS(analytic_slot_from_json(json::parse(R"([{"dataset": "*"}])")), Error);
}

TEST_CASE("objectives match concrete insights") {
  const auto w = sample::build();
  CHECK(w.is_objective("protestsObjective"));
  CHECK_FALSE(w.is_objective("johnsInsight"));
  CHECK(w.match_objective("protestsObjective", "johnsInsight"));
  CHECK_FALSE(w.match_objective("aprilCrimeObjective", "johnsInsight"));
  CHECK(w.matching_insights("protestsObjective") == std::vector<std::string>{"johnsInsight"});
  CHECK(w.validate_task("protestsTask").empty());
  CHECK(code_of([&] { w.match_objective("johnsInsight", "johnsInsight"); }) == ErrorCode::KindMismatch);
  CHECK(code_of([&] { w.match_objective("protestsObjective", "aprilCrimeObjective"); }) ==
        ErrorCode::KindMismatch);
}

TEST_CASE("list slots without a wildcard need equal sets") {
  auto w = sample::build();
  w.create_insight("exact", std::vector<DomainElement>{"2015BaltimoreProtests"},
                   std::vector<AnalyticElement>{"crimeLocations", "peakCrimes", "peakCrimes"});
  w.create_insight("plusOne", Wildcard{},
                   std::vector<AnalyticElement>{"peakCrimes", Wildcard{}});
  w.create_insight("twoPatterns", Wildcard{},
                   std::vector<AnalyticElement>{AnalyticPattern{json{{"relationship", {{"kind", "*"}}}}},
                                                AnalyticPattern{json{{"transformation", {{"sources", "*"}}}}}});
  w.create_insight("bothRel", Wildcard{},
                   std::vector<AnalyticElement>{AnalyticPattern{json{{"relationship", {{"kind", "*"}}}}},
                                                AnalyticPattern{json{{"relationship", {{"kind", "*"}}}}}});
  w.create_insight("anyEvidence", Wildcard{},
                   std::vector<AnalyticElement>{AnalyticPattern{json{{"relationship", "*"}}},
                                                AnalyticPattern{json{{"relationship", "*"}}}});
  CHECK(w.match_objective("plusOne", "exact"));
  CHECK(w.match_objective("plusOne", "johnsInsight"));
  CHECK(w.match_objective("twoPatterns", "johnsInsight"));
  // Two patterns need two distinct nodes; only one node has a model.
  CHECK_FALSE(w.match_objective("bothRel", "johnsInsight"));
  // A bare "*" also accepts an absent model.
  CHECK(w.match_objective("anyEvidence", "johnsInsight"));
}

TEST_CASE("analytic patterns look inside evidence") {
  auto w = sample::build();
  w.create_insight("treeModels", Wildcard{},
                   std::vector<AnalyticElement>{
                       "peakCrimes",
                       AnalyticPattern{json{{"relationship", {{"kind", "DecisionTreeClassification"}, {"inputs", "*"}}}}}});
  w.create_insight("regressions", Wildcard{},
                   std::vector<AnalyticElement>{
                       "peakCrimes", AnalyticPattern{json{{"relationship", {{"kind", "LinearRegression"}, {"name", "*"}}}}}});
  w.create_insight("countsByDate", Wildcard{},
                   std::vector<AnalyticElement>{
                       AnalyticPattern{json{{"transformation",
                                             {{"sources", {"baltimoreCrime"}},
                                              {"transforms", json::array({json{{"op", "groupby"}, {"args", {"CrimeDate"}}}, "*"})}}}}},
                       Wildcard{}});
  CHECK(w.match_objective("treeModels", "johnsInsight"));
  CHECK_FALSE(w.match_objective("regressions", "johnsInsight"));
  CHECK(w.match_objective("countsByDate", "johnsInsight"));
  CHECK(code_of([&] {
          w.create_insight("noStar", Wildcard{},
                           std::vector<AnalyticElement>{AnalyticPattern{json{{"relationship", {{"kind", "KNNClassification"}}}}}});
        }) == ErrorCode::KindMismatch);
}

TEST_CASE("tasks check objective and insights") {
  auto w = sample::build();
  CHECK(code_of([&] { w.create_task("t", "johnsInsight", {}); }) == ErrorCode::ObjectiveNotObjective);
  CHECK(code_of([&] { w.create_task("t", "protestsObjective", {"aprilCrimeObjective"}); }) ==
        ErrorCode::InsightIsObjective);
  CHECK(code_of([&] { w.create_task("t", "protestsObjective", {"ghost"}); }) == ErrorCode::UnresolvedReference);
  w.create_insight("other", std::vector<DomainElement>{}, std::vector<AnalyticElement>{"crimeLocations"});
  w.create_task("mixed", "protestsObjective", {"johnsInsight", "other"});
  CHECK(w.validate_task("mixed") == std::vector<std::string>{"other"});
}

TEST_CASE("insights check their references") {
  auto w = sample::build();
  CHECK(code_of([&] {
          w.create_insight("bad", std::vector<DomainElement>{"ghost"}, Wildcard{});
        }) == ErrorCode::UnresolvedReference);
  CHECK(code_of([&] {
          w.create_insight("bad", Wildcard{}, std::vector<AnalyticElement>{"ghost"});
        }) == ErrorCode::UnresolvedReference);
}

TEST_CASE("a fully wildcarded objective matches every concrete insight") {
  auto w = sample::build();
  w.create_insight("anything", Wildcard{}, Wildcard{});
  w.create_insight("empty", std::vector<DomainElement>{}, std::vector<AnalyticElement>{});
  CHECK(w.matching_insights("anything") == std::vector<std::string>{"empty", "johnsInsight"});
}
