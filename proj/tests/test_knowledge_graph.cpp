#include <doctest.h>

#include <random>

#include "insightspec/error.hpp"
#include "sample_workspace.hpp"

using namespace insightspec;

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

NodeRef dom(std::string n) { return {NodeFamily::domain, std::move(n)}; }
NodeRef ana(std::string n) { return {NodeFamily::analytic, std::move(n)}; }

}  // namespace

TEST_CASE("the sample workspace is valid") {
  const auto w = sample::build();
  CHECK(w.validate().empty());
  CHECK(w.audit_links().empty());
}

TEST_CASE("names are unique per registry and '*' is reserved") {
  auto w = sample::build();
  CHECK(code_of([&] { w.create_concept("Crime"); }) == ErrorCode::DuplicateName);
  CHECK(code_of([&] { w.create_concept("*"); }) == ErrorCode::ReservedName);
  CHECK(code_of([&] { w.create_concept(""); }) == ErrorCode::ReservedName);
  CHECK(code_of([&] { w.create_domain_node("2015BaltimoreProtests", "Crime"); }) == ErrorCode::DuplicateName);
  // Same name in another family is fine.
  CHECK_NOTHROW(w.create_analytic_node("2015BaltimoreProtests", 0, "aggTransform", std::nullopt));
}

TEST_CASE("concept hierarchy stays acyclic") {
  Workspace w;
  w.create_concept("Event");
  w.create_concept("Protest", {"Event"});
  w.create_concept("March", {"Protest", "Event"});
  CHECK(w.concept_is_a("March", "Event"));
  CHECK(w.concept_is_a("March", "March"));
  CHECK_FALSE(w.concept_is_a("Event", "March"));
  CHECK(code_of([&] { w.add_concept_parent("Event", "March"); }) == ErrorCode::CycleWouldForm);
  CHECK(code_of([&] { w.add_concept_parent("Event", "Event"); }) == ErrorCode::CycleWouldForm);
  CHECK(code_of([&] { w.create_concept("Riot", {"Ghost"}); }) == ErrorCode::UnknownConcept);
  CHECK(w.concept_named("Event").parents.empty());
}

TEST_CASE("domain nodes check concepts and metadata") {
  Workspace w;
  w.create_concept("Protest");
  CHECK(code_of([&] { w.create_domain_node("d", "Riot"); }) == ErrorCode::UnknownConcept);
  CHECK(code_of([&] { w.create_domain_node("d", "Protest", {}, {"Riot"}); }) == ErrorCode::UnknownConcept);
  Metadata undeclared;
  undeclared.values = {{"link", Value::nominal("x")}};
  CHECK(code_of([&] { w.create_domain_node("d", "Protest", undeclared); }) ==
        ErrorCode::UndeclaredMetadataKey);
  Metadata mistyped;
  mistyped.attributes = {{"size", AttributeType::quantitative}};
  mistyped.values = {{"size", Value::nominal("big")}};
  CHECK(code_of([&] { w.create_domain_node("d", "Protest", mistyped); }) == ErrorCode::TypeError);
  CHECK(w.domain_nodes().empty());
}

TEST_CASE("analytic nodes need evidence") {
  auto w = sample::build();
  CHECK(code_of([&] { w.create_analytic_node("a", 0, std::nullopt, std::nullopt); }) == ErrorCode::NoEvidence);
  CHECK(code_of([&] { w.create_analytic_node("a", 0, std::nullopt, "predictCrimeType", true); }) ==
        ErrorCode::NoEvidence);
  CHECK(code_of([&] { w.create_analytic_node("a", 0, "ghost", std::nullopt); }) ==
        ErrorCode::UnresolvedReference);
}

TEST_CASE("links are dual and idempotent") {
  auto w = sample::build();
  const auto d = dom("2015BaltimoreProtests");
  const auto a = ana("peakCrimes");
  w.link_nodes(a, d, LinkKind::source, "causing");
  CHECK(w.links(a).sources.at(d) == "causing");
  CHECK(w.links(d).targets.at(a) == "causing");
  w.link_nodes(a, d, LinkKind::source, "related to");
  CHECK(w.links(a).sources.size() == 1);
  CHECK(w.links(d).targets.at(a) == "related to");
  w.link_nodes(a, ana("crimeLocations"), LinkKind::related);
  CHECK(w.links(ana("crimeLocations")).related.contains(a));
  CHECK(w.audit_links().empty());
  CHECK(code_of([&] { w.link_nodes(a, a, LinkKind::related); }) == ErrorCode::SelfLink);
  CHECK(code_of([&] { w.link_nodes(a, dom("ghost"), LinkKind::related); }) == ErrorCode::UnknownNode);
  w.unlink_nodes(d, a, LinkKind::target);
  CHECK(w.links(a).sources.empty());
  CHECK(w.links(d).targets.empty());
}

TEST_CASE("directed cycles are reported but allowed") {
  auto w = sample::build();
  const auto d = dom("2015BaltimoreProtests");
  const auto a = ana("peakCrimes");
  const auto b = ana("crimeLocations");
  CHECK_FALSE(w.find_directed_cycle());
  w.link_nodes(d, a, LinkKind::target);
  w.link_nodes(a, b, LinkKind::target);
  CHECK_FALSE(w.find_directed_cycle());
  w.link_nodes(b, d, LinkKind::target);
  const auto cycle = w.find_directed_cycle();
  REQUIRE(cycle);
  CHECK(cycle->size() == 3);
  CHECK(w.audit_links().empty());
}

TEST_CASE("removing a node drops its edges") {
  auto w = sample::build();
  const auto d = dom("2015BaltimoreProtests");
  w.link_nodes(ana("peakCrimes"), d, LinkKind::related);
  w.remove_node(ana("peakCrimes"));
  CHECK(w.links(d).related.empty());
  CHECK(w.audit_links().empty());
  // johnsInsight still names peakCrimes: validation reports it.
  CHECK_FALSE(w.validate().empty());
}

TEST_CASE("removal does not cascade but validation notices") {
  auto w = sample::build();
  w.remove_transformation("aggTransform");
  const auto problems = w.validate();
  REQUIRE_FALSE(problems.empty());
  CHECK(problems.front().code() == ErrorCode::BrokenReference);
}

TEST_CASE("results are materialized once") {
  auto w = sample::build();
  CHECK(w.cached_results("peakCrimes") == nullptr);
  const auto& r = w.materialize_results("peakCrimes");
  CHECK(r.size() == 3);
  CHECK(&w.materialize_results("peakCrimes") == &r);
  w.clear_cached_results();
  CHECK(w.cached_results("peakCrimes") == nullptr);
}

TEST_CASE("attached tables must match the declared schema") {
  auto w = sample::build();
  CHECK(code_of([&] { w.attach_dataset(load_table("CrimeDate\n2015-01-01\n", "baltimoreCrime")); }) ==
        ErrorCode::SchemaMismatch);
}

TEST_CASE("random link operations keep the graph consistent") {
  auto w = sample::build();
  const std::vector<NodeRef> nodes = {dom("2015BaltimoreProtests"), ana("peakCrimes"),
                                      ana("crimeLocations"), {NodeFamily::insight, "johnsInsight"},
                                      {NodeFamily::insight, "protestsObjective"},
                                      {NodeFamily::task, "protestsTask"}};
  std::mt19937_64 rng(42);
  for (int i = 0; i < 500; ++i) {
    const auto& a = nodes[rng() % nodes.size()];
    const auto& b = nodes[rng() % nodes.size()];
    const auto kind = static_cast<LinkKind>(rng() % 3);
    if (a == b) {
      CHECK_THROWS_AS(w.link_nodes(a, b, kind), Error);
    } else if (rng() % 3 == 0) {
      w.unlink_nodes(a, b, kind);
      const bool still_there = kind == LinkKind::source && w.links(a).sources.contains(b);
      CHECK_FALSE(still_there);
    } else {
      w.link_nodes(a, b, kind, rng() % 2 ? EdgeLabel("l" + std::to_string(i)) : std::nullopt);
    }
    REQUIRE(w.audit_links().empty());
  }
}
