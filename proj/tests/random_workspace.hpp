#pragma once

// Random, valid workspaces for round-trip and matching properties.

#include <random>
#include <string>
#include <vector>

#include "insightspec/workspace.hpp"

namespace sample {

class RandomWorkspace {
 public:
  explicit RandomWorkspace(std::uint64_t seed) : rng_(seed) {}

  insightspec::Workspace make() {
    using namespace insightspec;
    Workspace w("ws" + std::to_string(pick(0, 999)));

    const int n_data = pick(1, 3);
    for (int i = 0; i < n_data; ++i) {
      Schema s = {{"q", AttributeType::quantitative}, {"c", AttributeType::nominal}};
      if (coin()) s.push_back({"t", AttributeType::temporal});
      if (coin()) s.push_back({"o", AttributeType::ordinal});
      w.add_dataset("data" + std::to_string(i), "data" + std::to_string(i) + ".csv", s);
    }
    const int n_trans = pick(0, 3);
    for (int i = 0; i < n_trans; ++i) {
      std::vector<TransformVerb> verbs;
      if (coin()) verbs.push_back(filter(col("q") > pick(-5, 5)));
      if (coin()) {
        verbs.push_back(group_by({"c"}));
        verbs.push_back(rollup({count("n"), aggregate("total", AggregateFn::sum, "q")}));
        verbs.push_back(order_by({desc("n")}));
        if (coin()) verbs.push_back(filter(rank() < pick(1, 4)));
      } else if (coin()) {
        verbs.push_back(derive("q2", col("q") * 2 + 0.5));
      }
      w.add_transformation("trans" + std::to_string(i),
                           {{"data" + std::to_string(pick(0, n_data - 1))}, std::move(verbs)});
    }
    const int n_models = pick(0, 2);
    for (int i = 0; i < n_models; ++i) {
      RelationshipModel m;
      m.name = "model" + std::to_string(i);
      switch (pick(0, 2)) {
        case 0:
          m.kind = RelationshipKind::LinearRegression;
          m.inputs = {{"x", AttributeType::quantitative}};
          m.output = Attribute{"y", AttributeType::quantitative};
          break;
        case 1:
          m.kind = RelationshipKind::KNNClassification;
          m.inputs = {{"x", AttributeType::quantitative}, {"c", AttributeType::nominal}};
          m.output = Attribute{"label", AttributeType::nominal};
          m.hyper = {{"k", pick(1, 5)}};
          break;
        default:
          m.kind = RelationshipKind::IsolationForest;
          m.inputs = {{"x", AttributeType::quantitative}};
          m.hyper = {{"trees", 3}, {"subsample", 8}};
          m.seed = static_cast<std::uint64_t>(pick(0, 1000));
          break;
      }
      if (coin()) {
        std::vector<Record> rows;
        for (int r = 0; r < 12; ++r) {
          const double x = r + 0.25 * pick(0, 3);
          rows.push_back({{"x", Value::quantitative(x)},
                          {"y", Value::quantitative(3 - x + pick(0, 2))},
                          {"c", Value::nominal(coin() ? "u" : "v")},
                          {"label", Value::nominal(x > 6 ? "big" : "small")}});
        }
        m = train_model(m, rows);
      }
      w.add_model(std::move(m));
    }

    const int n_concepts = pick(1, 5);
    for (int i = 0; i < n_concepts; ++i) {
      std::vector<std::string> parents;
      for (int p = 0; p < i; ++p) {
        if (pick(0, 3) == 0) parents.push_back("concept" + std::to_string(p));
      }
      w.create_concept("concept" + std::to_string(i), parents);
    }
    const int n_domain = pick(0, 3);
    for (int i = 0; i < n_domain; ++i) {
      Metadata meta;
      if (coin()) {
        meta.attributes = {{"url", AttributeType::nominal}, {"size", AttributeType::quantitative}};
        meta.values = {{"url", Value::nominal("http://example.org/" + std::to_string(i))}};
        if (coin()) meta.values["size"] = Value::quantitative(pick(0, 100) / 4.0);
      }
      std::vector<std::string> relevant;
      if (coin()) relevant.push_back("concept0");
      w.create_domain_node("domain" + std::to_string(i), "concept" + std::to_string(pick(0, n_concepts - 1)),
                           meta, relevant);
      domain_.push_back("domain" + std::to_string(i));
    }
    for (int i = 0; i < pick(0, 4); ++i) {
      std::optional<std::string> t, m;
      if (n_trans > 0 && coin()) t = "trans" + std::to_string(pick(0, n_trans - 1));
      if (n_models > 0 && (!t || coin())) m = "model" + std::to_string(pick(0, n_models - 1));
      if (!t && !m) continue;
      const std::string name = "analytic" + std::to_string(i);
      w.create_analytic_node(name, 1430438400000LL + pick(0, 9) * 1000, t, m, t && coin(),
                             coin() ? std::optional<std::string>("note " + std::to_string(i)) : std::nullopt);
      analytic_.push_back(name);
    }
    std::vector<std::string> concrete, objectives;
    for (int i = 0; i < pick(0, 5); ++i) {
      const std::string name = "insight" + std::to_string(i);
      auto d = domain_slot();
      auto a = analytic_slot();
      w.create_insight(name, d, a, coin() ? std::optional<std::string>("why " + name) : std::nullopt);
      (w.is_objective(name) ? objectives : concrete).push_back(name);
    }
    for (std::size_t i = 0; i < objectives.size(); ++i) {
      if (!coin()) continue;
      std::vector<std::string> members;
      for (const auto& c : concrete) {
        if (coin()) members.push_back(c);
      }
      w.create_task("task" + std::to_string(i), objectives[i], members);
    }

    std::vector<NodeRef> nodes;
    for (const auto& [n, _] : w.domain_nodes()) nodes.push_back({NodeFamily::domain, n});
    for (const auto& [n, _] : w.analytic_nodes()) nodes.push_back({NodeFamily::analytic, n});
    for (const auto& [n, _] : w.insights()) nodes.push_back({NodeFamily::insight, n});
    for (const auto& [n, _] : w.tasks()) nodes.push_back({NodeFamily::task, n});
    if (nodes.size() >= 2) {
      for (int i = 0; i < pick(0, 6); ++i) {
        const auto& a = nodes[pick(0, static_cast<int>(nodes.size()) - 1)];
        const auto& b = nodes[pick(0, static_cast<int>(nodes.size()) - 1)];
        if (a == b) continue;
        w.link_nodes(a, b, static_cast<LinkKind>(pick(0, 2)),
                     coin() ? EdgeLabel("label " + std::to_string(i)) : std::nullopt);
      }
    }
    return w;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }

  insightspec::DomainSlot domain_slot() {
    using namespace insightspec;
    if (pick(0, 4) == 0) return Wildcard{};
    std::vector<DomainElement> out;
    for (const auto& d : domain_) {
      if (coin()) out.push_back(d);
    }
    if (pick(0, 4) == 0) out.push_back(Wildcard{});
    return out;
  }

  insightspec::AnalyticSlot analytic_slot() {
    using namespace insightspec;
    if (pick(0, 4) == 0) return Wildcard{};
    std::vector<AnalyticElement> out;
    for (const auto& a : analytic_) {
      if (coin()) out.push_back(a);
    }
    if (pick(0, 5) == 0) out.push_back(AnalyticPattern{nlohmann::json{{"relationship", {{"kind", "*"}}}}});
    if (pick(0, 5) == 0) {
      out.push_back(AnalyticPattern{nlohmann::json{{"transformation", {{"sources", "*"}, {"transforms", "*"}}}}});
    }
    if (pick(0, 4) == 0) out.push_back(Wildcard{});
    return out;
  }

  std::mt19937_64 rng_;
  std::vector<std::string> domain_;
  std::vector<std::string> analytic_;
};

}  // namespace sample
