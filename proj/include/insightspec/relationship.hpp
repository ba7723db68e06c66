#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "insightspec/dataset.hpp"

namespace insightspec {

enum class RelationshipKind {
  LinearRegression,
  DecisionTreeClassification,
  KNNClassification,
  NaiveBayesClassification,
  KernelDensity,
  IsolationForest,
};

std::string_view to_string(RelationshipKind kind) noexcept;
std::optional<RelationshipKind> relationship_kind_from_string(std::string_view text);
bool is_classifier(RelationshipKind kind) noexcept;

/// Kind-specific knobs. Recognised keys:
///   DecisionTreeClassification: max_depth (default 16, <= 0 means unbounded)
///   KNNClassification:          k (default 3)
///   NaiveBayesClassification:   alpha (default 1)
///   KernelDensity:              bandwidth (default Silverman's rule)
///   IsolationForest:            trees (default 100), subsample (default 256)
using Hyperparameters = std::map<std::string, double, std::less<>>;

namespace trained {

/// Intercept first, then one weight per input.
struct LinearRegression {
  Eigen::VectorXd coefficients;
};

struct TreeNode {
  std::string majority;
  std::size_t count = 0;
  std::optional<std::string> attribute;  // empty for leaves
  bool numeric = false;
  double threshold = 0;                  // numeric: x <= threshold goes left
  std::size_t left = 0, right = 0;
  std::map<std::string, std::size_t> children;  // categorical: value -> node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct KNearestNeighbors {
  std::size_t k = 3;
  std::vector<std::string> numeric_inputs;
  std::vector<std::string> categorical_inputs;
  Eigen::RowVectorXd means;
  Eigen::RowVectorXd scales;
  Eigen::MatrixXd points;  // standardized numeric inputs, one row per record
  std::vector<std::vector<std::string>> categories;  // per record
  std::vector<std::string> labels;
};

struct NaiveBayes {
  double alpha = 1.0;
  std::map<std::string, std::size_t> class_counts;
  /// Per input: class -> category -> count.
  std::vector<std::map<std::string, std::map<std::string, std::size_t>>> feature_counts;
  /// Per input: distinct categories seen in training.
  std::vector<std::size_t> vocabulary;
};

struct KernelDensity {
  Eigen::VectorXd samples;
  double bandwidth = 1.0;
};

struct IsolationNode {
  int attribute = -1;  // -1 for external nodes
  double split = 0;    // x < split goes left
  std::size_t left = 0, right = 0;
  std::size_t size = 0;
};

struct IsolationForest {
  std::size_t subsample = 256;
  std::uint64_t seed = 0;
  std::vector<std::vector<IsolationNode>> trees;
};

}  // namespace trained

using TrainedParameters =
    std::variant<trained::LinearRegression, trained::DecisionTree, trained::KNearestNeighbors,
                 trained::NaiveBayes, trained::KernelDensity, trained::IsolationForest>;

struct RelationshipModel {
  std::string name;
  RelationshipKind kind = RelationshipKind::LinearRegression;
  std::vector<Attribute> inputs;
  std::optional<Attribute> output;
  Hyperparameters hyper;
  std::uint64_t seed = 0;
  std::optional<TrainedParameters> trained;

  bool is_trained() const noexcept { return trained.has_value(); }
};

/// Throws Error(TypeConstraintViolation) when inputs, output or
/// hyperparameters do not suit the kind.
void check_model_spec(const RelationshipModel& m);

/// Returns a trained copy. Records with Null in a used attribute are skipped.
RelationshipModel train_model(const RelationshipModel& m, std::span<const Record> records);

struct PredictOptions {
  bool strict = false;  // unseen categories raise UnseenCategory
};

/// Class label (classifiers), number (regression), density (KDE) or anomaly
/// score in (0, 1) (isolation forest).
Value predict_record(const RelationshipModel& m, const Record& record,
                     const PredictOptions& options = {});

/// Naive-Bayes posterior over every training class; sums to 1.
std::map<std::string, double> class_posteriors(const RelationshipModel& m, const Record& record);

enum class Metric { accuracy, rmse };
std::string_view to_string(Metric m) noexcept;
std::optional<Metric> metric_from_string(std::string_view text);

double evaluate_accuracy(const RelationshipModel& m, std::span<const Record> records, Metric metric,
                         const PredictOptions& options = {});

/// Spec without trained state; this is what objective patterns match.
nlohmann::json model_spec_to_json(const RelationshipModel& m);
/// Spec plus a "trained" key (null when untrained).
nlohmann::json model_to_json(const RelationshipModel& m);
RelationshipModel model_from_json(const nlohmann::json& j);

}  // namespace insightspec
