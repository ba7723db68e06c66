// insightspec: command-line front end for workspace files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "insightspec/insightspec.hpp"

namespace fs = std::filesystem;
using namespace insightspec;

namespace {

struct Options {
  std::string workspace;
  std::string out;
  std::string metric = "accuracy";
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::vector<std::string> args;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnresolvedSource, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::UnresolvedSource, "cannot write '" + path + "'");
  out << bytes;
  if (!out.flush()) throw Error(ErrorCode::UnresolvedSource, "cannot write '" + path + "'");
}

void emit(const Options& o, const std::string& bytes) {
  if (o.out.empty()) {
    std::cout << bytes;
  } else {
    write_file(o.out, bytes);
    spdlog::info("wrote {}", o.out);
  }
}

struct Loaded {
  Workspace ws;
  fs::path base;
  bool had_cache = false;
};

Loaded open_workspace(const Options& o) {
  spdlog::debug("reading {}", o.workspace);
  const auto bytes = read_file(o.workspace);
  auto ws = deserialize_workspace(bytes);
  const bool cached = bytes.find("\"cachedResults\"") != std::string::npos;
  return {std::move(ws), fs::path(o.workspace).parent_path(), cached};
}

void load_one(Loaded& l, const std::string& dataset) {
  const auto& ref = l.ws.dataset_ref(dataset);
  if (l.ws.loaded_dataset(dataset)) return;
  fs::path p(ref.path);
  if (p.is_relative()) p = l.base / p;
  spdlog::debug("loading dataset {} from {}", dataset, p.string());
  l.ws.attach_dataset(load_table_file(p.string(), ref.name, ref.schema));
}

int cmd_validate(const Options& o) {
  auto l = open_workspace(o);
  auto problems = load_datasets(l.ws, l.base);
  for (auto& e : l.ws.validate()) problems.push_back(std::move(e));
  for (const auto& e : problems) std::cout << e.what() << "\n";
  spdlog::info("{} violation(s)", problems.size());
  return problems.empty() ? 0 : 1;
}

int cmd_run_transform(const Options& o) {
  auto l = open_workspace(o);
  const auto& t = l.ws.transformation(o.args.at(0));
  for (const auto& s : t.sources) load_one(l, s);
  auto result = execute_transformation(t, [&](std::string_view n) { return l.ws.loaded_dataset(n); });
  spdlog::info("{} rows", result.size());
  emit(o, to_csv(result));
  return 0;
}

int cmd_train(Options o) {
  auto l = open_workspace(o);
  auto m = l.ws.model(o.args.at(0));
  load_one(l, o.args.at(1));
  if (o.seed) m.seed = *o.seed;
  auto trained = train_model(m, l.ws.loaded_dataset(o.args.at(1))->records());
  l.ws.update_model(std::move(trained));
  if (o.out.empty()) o.out = o.workspace;
  emit(o, serialize_workspace(l.ws, {.embed_results = l.had_cache}));
  return 0;
}

int cmd_predict(const Options& o) {
  auto l = open_workspace(o);
  const auto& m = l.ws.model(o.args.at(0));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(o.args.at(1));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("record is not valid JSON: ") + e.what());
  }
  const auto record = record_from_json(j, m.inputs);
  const auto v = predict_record(m, record, {.strict = o.strict});
  emit(o, v.to_text() + "\n");
  return 0;
}

int cmd_evaluate(const Options& o) {
  auto l = open_workspace(o);
  const auto metric = metric_from_string(o.metric);
  if (!metric) throw CLI::ValidationError("--metric", "must be accuracy or rmse");
  const auto& m = l.ws.model(o.args.at(0));
  load_one(l, o.args.at(1));
  const double score =
      evaluate_accuracy(m, l.ws.loaded_dataset(o.args.at(1))->records(), *metric, {.strict = o.strict});
  emit(o, format_number(score) + "\n");
  return 0;
}

int cmd_match(const Options& o) {
  auto l = open_workspace(o);
  std::string lines;
  for (const auto& name : l.ws.matching_insights(o.args.at(0))) lines += name + "\n";
  emit(o, lines);
  return 0;
}

int cmd_export_dot(const Options& o) {
  auto l = open_workspace(o);
  emit(o, export_dot(l.ws));
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("insightspec");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::err);
  const char* env = std::getenv("INSIGHTSPEC_LOG");
  if (!env || !*env) return;
  const std::string level(env);
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::error("ignoring INSIGHTSPEC_LOG={} (expected error, info or debug)", level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Validate and run insight workspaces (.insight.json)."};
  app.require_subcommand(1);
  Options o;
  o.args.resize(2);  // bound by reference below; never resized
  std::function<int()> run;

  // Commands that emit a file also take the output path as a trailing positional.
  auto add = [&](const char* name, const char* help, std::vector<std::string> positional,
                 bool out_positional, std::function<int()> body) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("workspace,--workspace", o.workspace, "workspace file")->required();
    for (std::size_t i = 0; i < positional.size(); ++i) {
      sub->add_option(positional[i], o.args[i])->required();
    }
    if (out_positional) {
      sub->add_option("out,--out", o.out, "write output here instead of stdout");
    } else {
      sub->add_option("--out", o.out, "write output here instead of stdout");
    }
    sub->add_option("--metric", o.metric, "accuracy or rmse")->check(CLI::IsMember({"accuracy", "rmse"}));
    sub->add_option("--seed", o.seed, "RNG seed for isolation forests");
    sub->add_flag("--strict", o.strict, "fail on categories unseen in training");
    sub->callback([&run, body] { run = body; });
    return sub;
  };

  add("validate", "report every violation; exit 0 iff none", {}, false, [&] { return cmd_validate(o); });
  add("run-transform", "execute a transformation and write CSV", {"transformation"}, true,
      [&] { return cmd_run_transform(o); });
  add("train", "train a model and store its parameters in the workspace", {"model", "dataset"}, false,
      [&] { return cmd_train(o); });
  add("predict", "predict one record given as a JSON object", {"model", "record"}, false,
      [&] { return cmd_predict(o); });
  add("evaluate", "score a model on a dataset", {"model", "dataset"}, false,
      [&] { return cmd_evaluate(o); });
  add("match", "list concrete insights matching an objective", {"objective"}, false,
      [&] { return cmd_match(o); });
  add("export-dot", "write the workspace graph as Graphviz DOT", {}, true,
      [&] { return cmd_export_dot(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
