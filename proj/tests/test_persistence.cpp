#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "insightspec/error.hpp"
#include "insightspec/persistence.hpp"
#include "random_workspace.hpp"
#include "sample_workspace.hpp"

using namespace insightspec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path fixtures = FIXTURE_DIR;

}  // namespace

TEST_CASE("the fixture loads and re-serializes canonically") {
  const auto bytes = slurp(fixtures / "baltimore.insight.json");
  auto w = deserialize_workspace(bytes);
  CHECK(w.validate().empty());
  CHECK(load_datasets(w, fixtures).empty());
  CHECK(w.loaded_dataset("baltimoreCrime")->size() == 7);
  const auto once = serialize_workspace(w);
  CHECK(serialize_workspace(deserialize_workspace(once)) == once);
  CHECK(once.back() == '\n');
}

TEST_CASE("the fixture equals the workspace built in code") {
  auto built = sample::build();
  auto loaded = deserialize_workspace(slurp(fixtures / "baltimore.insight.json"));
  CHECK(serialize_workspace(built) == serialize_workspace(loaded));
}

TEST_CASE("random workspaces round-trip byte for byte") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto w = sample::RandomWorkspace(seed).make();
    const auto bytes = serialize_workspace(w);
    INFO("seed " << seed);
    CHECK(serialize_workspace(deserialize_workspace(bytes)) == bytes);
  }
}

TEST_CASE("cached results are embedded on request") {
  auto w = sample::build();
  w.materialize_results("peakCrimes");
  CHECK_FALSE(nlohmann::json::parse(serialize_workspace(w)).contains("cachedResults"));
  const auto bytes = serialize_workspace(w, {.embed_results = true});
  const auto j = nlohmann::json::parse(bytes);
  REQUIRE(j.contains("cachedResults"));
  auto back = deserialize_workspace(bytes);
  REQUIRE(back.cached_results("peakCrimes"));
  CHECK(back.cached_results("peakCrimes")->same_content(*w.cached_results("peakCrimes")));
  CHECK(serialize_workspace(back, {.embed_results = true}) == bytes);
}

TEST_CASE("links survive a round trip") {
  auto w = sample::build();
  w.link_nodes({NodeFamily::analytic, "peakCrimes"}, {NodeFamily::domain, "2015BaltimoreProtests"},
               LinkKind::source, "causing");
  w.link_nodes({NodeFamily::insight, "johnsInsight"}, {NodeFamily::analytic, "crimeLocations"},
               LinkKind::related);
  const auto back = deserialize_workspace(serialize_workspace(w));
  CHECK(back.audit_links().empty());
  CHECK(back.links({NodeFamily::domain, "2015BaltimoreProtests"}).targets.at({NodeFamily::analytic, "peakCrimes"}) ==
        "causing");
  CHECK(back.links({NodeFamily::analytic, "crimeLocations"}).related.contains({NodeFamily::insight, "johnsInsight"}));
}

TEST_CASE("dangling references refuse to serialize") {
  auto w = sample::build();
  w.remove_model("predictCrimeType");
  try {
    serialize_workspace(w);
    FAIL("expected BrokenReference");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BrokenReference);
  }
}

TEST_CASE("every malformed file fails with a typed error") {
  const std::map<std::string, ErrorCode> expected = {
      {"bad_expression", ErrorCode::FormatError},
      {"bad_link_family", ErrorCode::UnknownKind},
      {"bad_schema_type", ErrorCode::UnknownKind},
      {"bad_trained_state", ErrorCode::FormatError},
      {"concept_cycle", ErrorCode::FormatError},
      {"dangling_reference", ErrorCode::BrokenReference},
      {"duplicate_concept", ErrorCode::FormatError},
      {"empty", ErrorCode::FormatError},
      {"garbage", ErrorCode::FormatError},
      {"huge_number", ErrorCode::FormatError},
      {"missing_name", ErrorCode::FormatError},
      {"no_evidence", ErrorCode::FormatError},
      {"null_inside_list", ErrorCode::FormatError},
      {"pattern_without_wildcard", ErrorCode::FormatError},
      {"rank_before_orderby", ErrorCode::FormatError},
      {"self_link", ErrorCode::FormatError},
      {"task_with_objective_insight", ErrorCode::FormatError},
      {"timestamp_string", ErrorCode::FormatError},
      {"top_level_array", ErrorCode::FormatError},
      {"truncated", ErrorCode::FormatError},
      {"undeclared_metadata", ErrorCode::FormatError},
      {"unknown_model_kind", ErrorCode::UnknownKind},
      {"unknown_verb", ErrorCode::UnknownKind},
      {"wrong_version", ErrorCode::FormatError},
  };
  std::size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(fixtures / "malformed")) {
    const auto stem = entry.path().stem().string();
    INFO(stem);
    REQUIRE(expected.contains(stem));
    ++seen;
    try {
      deserialize_workspace(slurp(entry.path()));
      FAIL("loaded a malformed file");
    } catch (const Error& e) {
      CHECK(e.code() == expected.at(stem));
      CHECK_FALSE(e.location().empty());
    }
  }
  CHECK(seen == expected.size());
}

TEST_CASE("locations point into the document") {
  try {
    deserialize_workspace(slurp(fixtures / "malformed" / "dangling_reference.json"));
  } catch (const Error& e) {
    CHECK(e.location().starts_with("/insightNodes/0"));
  }
}

TEST_CASE("DOT export") {
  auto w = sample::build();
  w.link_nodes({NodeFamily::analytic, "peakCrimes"}, {NodeFamily::domain, "2015BaltimoreProtests"},
               LinkKind::related, "co-occurs");
  const auto dot = export_dot(w);
  CHECK(dot.starts_with("digraph"));
  CHECK(dot.find("\"concept/Protest\" -> \"domain/2015BaltimoreProtests\"") != std::string::npos);
  CHECK(dot.find("\"dataset/baltimoreCrime\" -> \"transformation/aggTransform\"") != std::string::npos);
  CHECK(dot.find("\"model/predictCrimeType\" -> \"analytic/crimeLocations\"") != std::string::npos);
  CHECK(dot.find("\"analytic/peakCrimes\" -> \"insight/johnsInsight\"") != std::string::npos);
  CHECK(dot.find("\"insight/protestsObjective\" -> \"task/protestsTask\"") != std::string::npos);
  CHECK(dot.find("dir=none") != std::string::npos);
  CHECK(dot.find("co-occurs") != std::string::npos);

  // Every statement line is a node or an edge between declared nodes.
  std::set<std::string> declared;
  const std::regex node_re(R"re(^\s*"([^"]+)" \[.*\];$)re");
  const std::regex edge_re(R"re(^\s*"([^"]+)" -> "([^"]+)"( \[.*\])?;$)re");
  std::istringstream in(dot);
  std::string line;
  std::vector<std::pair<std::string, std::string>> edges;
  int depth = 0;
  while (std::getline(in, line)) {
    std::smatch m;
    if (line.find('{') != std::string::npos) ++depth;
    if (line.find('}') != std::string::npos && line.find('"') == std::string::npos) --depth;
    if (std::regex_match(line, m, edge_re)) {
      edges.emplace_back(m[1], m[2]);
    } else if (std::regex_match(line, m, node_re)) {
      declared.insert(m[1]);
    }
  }
  CHECK(depth == 0);
  CHECK_FALSE(edges.empty());
  for (const auto& [a, b] : edges) {
    CHECK(declared.contains(a));
    CHECK(declared.contains(b));
  }
}
