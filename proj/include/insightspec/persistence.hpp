#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightspec/workspace.hpp"

namespace insightspec {

inline constexpr int workspace_format_version = 1;

struct SerializeOptions {
  /// Write memoized analytic results under "cachedResults".
  bool embed_results = false;
};

/// Throws Error(BrokenReference) when a cross-reference does not resolve.
nlohmann::json workspace_to_json(const Workspace& w, const SerializeOptions& options = {});
/// Canonical bytes: sorted keys, no whitespace, trailing LF.
std::string serialize_workspace(const Workspace& w, const SerializeOptions& options = {});

/// Every failure is an Error coded FormatError, BrokenReference or
/// UnknownKind, located by JSON pointer. Datasets are not loaded.
Workspace workspace_from_json(const nlohmann::json& j);
Workspace deserialize_workspace(std::string_view bytes);

/// Loads each registered dataset from its path (relative paths resolve
/// against `base_dir`) and attaches it. Returns one Error per failure.
std::vector<Error> load_datasets(Workspace& w, const std::filesystem::path& base_dir);

/// Graphviz digraph of every object, input edges and node links.
std::string export_dot(const Workspace& w);

}  // namespace insightspec
