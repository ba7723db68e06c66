#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insightspec/dataset.hpp"
#include "insightspec/error.hpp"
#include "insightspec/insight.hpp"
#include "insightspec/knowledge_graph.hpp"
#include "insightspec/relationship.hpp"
#include "insightspec/transform.hpp"

namespace insightspec {

/// A dataset known by path and schema. The table itself is attached
/// separately (see `Workspace::attach_dataset`).
struct DatasetRef {
  std::string name;
  std::string path;
  Schema schema;
};

/// Container for every object of an analysis: datasets, concepts, the four
/// node families, transformations and relationship models.
///
/// Mutations require exclusive access. `remove_*` never cascades, so a
/// workspace can hold dangling references; `validate` reports them and
/// serialization refuses them.
class Workspace {
 public:
  explicit Workspace(std::string name = "workspace");

  const std::string& name() const noexcept { return name_; }

  // -- datasets, transformations, models ------------------------------------

  const DatasetRef& add_dataset(std::string name, std::string path, Schema schema);
  /// Supplies the table for a registered dataset; its schema must equal the
  /// declared one.
  void attach_dataset(const Dataset& table);
  const DatasetRef& dataset_ref(std::string_view name) const;
  const Dataset* loaded_dataset(std::string_view name) const;

  const DataTransformation& add_transformation(std::string name, DataTransformation t);
  const DataTransformation& transformation(std::string_view name) const;

  const RelationshipModel& add_model(RelationshipModel m);
  const RelationshipModel& model(std::string_view name) const;
  /// Replaces a registered model (same name and kind), e.g. after training.
  void update_model(RelationshipModel m);

  // -- concepts --------------------------------------------------------------

  const Concept& create_concept(std::string name, std::vector<std::string> parents = {});
  void add_concept_parent(std::string_view name, std::string_view parent);
  const Concept& concept_named(std::string_view name) const;
  /// Reflexive, transitive.
  bool concept_is_a(std::string_view c, std::string_view ancestor) const;

  // -- nodes -----------------------------------------------------------------

  const DomainKnowledgeNode& create_domain_node(std::string name, std::string core_concept,
                                                Metadata metadata = {},
                                                std::vector<std::string> relevant_concepts = {});
  const AnalyticKnowledgeNode& create_analytic_node(std::string name, std::int64_t timestamp,
                                                    std::optional<std::string> transformation,
                                                    std::optional<std::string> relationship,
                                                    bool results = false,
                                                    std::optional<std::string> description = {});
  const InsightNode& create_insight(std::string name, DomainSlot domain_knowledge,
                                    AnalyticSlot analytic_knowledge,
                                    std::optional<std::string> description = {});
  const SimpleTaskNode& create_task(std::string name, std::string objective,
                                    std::vector<std::string> insights);

  const DomainKnowledgeNode& domain_node(std::string_view name) const;
  const AnalyticKnowledgeNode& analytic_node(std::string_view name) const;
  const InsightNode& insight(std::string_view name) const;
  const SimpleTaskNode& task(std::string_view name) const;
  bool contains(const NodeRef& r) const;

  // -- links -----------------------------------------------------------------

  /// `source`: b becomes a source of a (and a a target of b). Idempotent; a
  /// repeated call replaces the label.
  void link_nodes(const NodeRef& a, const NodeRef& b, LinkKind kind, EdgeLabel label = {});
  void unlink_nodes(const NodeRef& a, const NodeRef& b, LinkKind kind);
  const LinkSet& links(const NodeRef& r) const;
  /// Duality, symmetry and self-link violations; empty when consistent.
  std::vector<std::string> audit_links() const;
  /// A directed source->target cycle, if one exists. Cycles are legal.
  std::optional<std::vector<NodeRef>> find_directed_cycle() const;

  // -- insights and tasks ----------------------------------------------------

  bool is_objective(std::string_view insight) const;
  /// Throws KindMismatch unless `objective` is an objective and `insight`
  /// is concrete.
  bool match_objective(std::string_view objective, std::string_view insight) const;
  /// Concrete insights matching the objective, sorted by name.
  std::vector<std::string> matching_insights(std::string_view objective) const;
  /// Insights of the task that do not match its objective.
  std::vector<std::string> validate_task(std::string_view task) const;

  // -- results ---------------------------------------------------------------

  /// Output of the node's transformation; computed once, then memoized.
  const Dataset& materialize_results(std::string_view analytic);
  const Dataset* cached_results(std::string_view analytic) const;
  void set_cached_results(std::string_view analytic, Dataset d);
  void clear_cached_results();

  // -- removal (no cascade) --------------------------------------------------

  void remove_dataset(std::string_view name);
  void remove_transformation(std::string_view name);
  void remove_model(std::string_view name);
  void remove_concept(std::string_view name);
  /// Also drops the node's edges from its neighbours' link sets.
  void remove_node(const NodeRef& r);

  // -- auditing --------------------------------------------------------------

  /// Every broken reference and invariant violation, one Error each.
  std::vector<Error> validate() const;

  // -- read access for serializers ------------------------------------------

  const std::map<std::string, DatasetRef, std::less<>>& datasets() const { return datasets_; }
  const std::map<std::string, DataTransformation, std::less<>>& transformations() const {
    return transformations_;
  }
  const std::map<std::string, RelationshipModel, std::less<>>& models() const { return models_; }
  const std::map<std::string, Concept, std::less<>>& concepts() const { return concepts_; }
  const std::map<std::string, DomainKnowledgeNode, std::less<>>& domain_nodes() const {
    return domain_nodes_;
  }
  const std::map<std::string, AnalyticKnowledgeNode, std::less<>>& analytic_nodes() const {
    return analytic_nodes_;
  }
  const std::map<std::string, InsightNode, std::less<>>& insights() const { return insights_; }
  const std::map<std::string, SimpleTaskNode, std::less<>>& tasks() const { return tasks_; }

 private:
  LinkSet& links_mut(const NodeRef& r);
  bool analytic_matches(const AnalyticElement& e, const AnalyticKnowledgeNode& node) const;
  bool slot_matches_domain(const DomainSlot& o, const DomainSlot& i) const;
  bool slot_matches_analytic(const AnalyticSlot& o, const AnalyticSlot& i) const;
  void check_insight_refs(const InsightNode& n) const;

  std::string name_;
  std::map<std::string, DatasetRef, std::less<>> datasets_;
  std::map<std::string, Dataset, std::less<>> loaded_;
  std::map<std::string, DataTransformation, std::less<>> transformations_;
  std::map<std::string, RelationshipModel, std::less<>> models_;
  std::map<std::string, Concept, std::less<>> concepts_;
  std::map<std::string, DomainKnowledgeNode, std::less<>> domain_nodes_;
  std::map<std::string, AnalyticKnowledgeNode, std::less<>> analytic_nodes_;
  std::map<std::string, InsightNode, std::less<>> insights_;
  std::map<std::string, SimpleTaskNode, std::less<>> tasks_;
  std::map<std::string, Dataset, std::less<>> results_cache_;
};

}  // namespace insightspec
