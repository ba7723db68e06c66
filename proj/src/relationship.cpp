#include "insightspec/relationship.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "insightspec/error.hpp"
#include "insightspec/numeric.hpp"
#include "json_util.hpp"

namespace insightspec {

std::string_view to_string(RelationshipKind kind) noexcept {
  switch (kind) {
    case RelationshipKind::LinearRegression: return "LinearRegression";
    case RelationshipKind::DecisionTreeClassification: return "DecisionTreeClassification";
    case RelationshipKind::KNNClassification: return "KNNClassification";
    case RelationshipKind::NaiveBayesClassification: return "NaiveBayesClassification";
    case RelationshipKind::KernelDensity: return "KernelDensity";
    case RelationshipKind::IsolationForest: return "IsolationForest";
  }
  return "LinearRegression";
}

std::optional<RelationshipKind> relationship_kind_from_string(std::string_view text) {
  for (auto k : {RelationshipKind::LinearRegression, RelationshipKind::DecisionTreeClassification,
                 RelationshipKind::KNNClassification, RelationshipKind::NaiveBayesClassification,
                 RelationshipKind::KernelDensity, RelationshipKind::IsolationForest}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

bool is_classifier(RelationshipKind kind) noexcept {
  return kind == RelationshipKind::DecisionTreeClassification ||
         kind == RelationshipKind::KNNClassification ||
         kind == RelationshipKind::NaiveBayesClassification;
}

std::string_view to_string(Metric m) noexcept { return m == Metric::accuracy ? "accuracy" : "rmse"; }

std::optional<Metric> metric_from_string(std::string_view text) {
  if (text == "accuracy") return Metric::accuracy;
  if (text == "rmse") return Metric::rmse;
  return std::nullopt;
}

namespace {

[[noreturn]] void violation(const RelationshipModel& m, const std::string& msg) {
  throw Error(ErrorCode::TypeConstraintViolation,
              std::string(to_string(m.kind)) + " '" + m.name + "': " + msg);
}

double hyper_or(const RelationshipModel& m, std::string_view key, double fallback) {
  auto it = m.hyper.find(key);
  return it == m.hyper.end() ? fallback : it->second;
}

std::set<std::string_view> allowed_hyper(RelationshipKind kind) {
  switch (kind) {
    case RelationshipKind::LinearRegression: return {};
    case RelationshipKind::DecisionTreeClassification: return {"max_depth"};
    case RelationshipKind::KNNClassification: return {"k"};
    case RelationshipKind::NaiveBayesClassification: return {"alpha"};
    case RelationshipKind::KernelDensity: return {"bandwidth"};
    case RelationshipKind::IsolationForest: return {"trees", "subsample"};
  }
  return {};
}

std::vector<Attribute> used_attributes(const RelationshipModel& m) {
  std::vector<Attribute> out = m.inputs;
  if (m.output) out.push_back(*m.output);
  return out;
}

// Rows whose used attributes are all non-null, after type checks.
std::vector<const Record*> usable_rows(const RelationshipModel& m, std::span<const Record> records) {
  const auto used = used_attributes(m);
  std::vector<const Record*> rows;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const Record& rec = records[r];
    bool complete = true;
    for (const auto& a : used) {
      auto it = rec.find(a.name);
      if (it == rec.end()) {
        throw Error(ErrorCode::MissingInput, "record lacks attribute '" + a.name + "'",
                    "row " + std::to_string(r));
      }
      if (it->second.is_null()) {
        complete = false;
        continue;
      }
      if (!it->second.conforms_to(a.type)) {
        throw Error(ErrorCode::TypeConstraintViolation,
                    "value '" + it->second.to_text() + "' is not " +
                        std::string(to_string(a.type)) + " for '" + a.name + "'",
                    "row " + std::to_string(r));
      }
    }
    if (complete) rows.push_back(&rec);
  }
  return rows;
}

const Value& input_value(const Record& rec, const Attribute& a) {
  auto it = rec.find(a.name);
  if (it == rec.end() || it->second.is_null()) {
    throw Error(ErrorCode::MissingInput, "record lacks a value for '" + a.name + "'");
  }
  if (!it->second.conforms_to(a.type)) {
    throw Error(ErrorCode::TypeConstraintViolation,
                "value '" + it->second.to_text() + "' is not " + std::string(to_string(a.type)) +
                    " for '" + a.name + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Linear regression

trained::LinearRegression train_linear(const RelationshipModel& m,
                                       const std::vector<const Record*>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(m.inputs.size());
  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) design(i, j + 1) = rows[i]->at(m.inputs[j].name).as_number();
    target(i) = rows[i]->at(m.output->name).as_number();
  }
  auto beta = numeric::solve_normal_equations(design, target);
  if (!beta) {
    throw Error(ErrorCode::DegenerateData, "design matrix of '" + m.name + "' is singular");
  }
  return {std::move(*beta)};
}

// ---------------------------------------------------------------------------
// Decision tree

std::string majority_label(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [label, c] : counts) {  // sorted, so ties keep the smallest label
    if (c > best_count) {
      best = label;
      best_count = c;
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const RelationshipModel& m, const std::vector<const Record*>& rows)
      : model_(m), rows_(rows) {
    const double depth = hyper_or(m, "max_depth", 16);
    max_depth_ = depth <= 0 ? std::numeric_limits<std::size_t>::max()
                            : static_cast<std::size_t>(depth);
    for (const auto* r : rows) {
      const auto& label = r->at(m.output->name).as_string();
      if (!label_index_.contains(label)) {
        label_index_.emplace(label, static_cast<Eigen::Index>(label_index_.size()));
      }
    }
  }

  trained::DecisionTree build() {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return {std::move(nodes_)};
  }

 private:
  struct Candidate {
    double impurity = std::numeric_limits<double>::infinity();
    std::size_t input = 0;
    bool numeric = false;
    double threshold = 0;
  };

  const std::string& label(std::size_t i) const { return rows_[i]->at(model_.output->name).as_string(); }

  Eigen::VectorXi class_counts(const std::vector<std::size_t>& idx) const {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(label_index_.size()));
    for (auto i : idx) ++counts(label_index_.at(label(i)));
    return counts;
  }

  double weighted_gini(const std::vector<std::vector<std::size_t>>& parts, double total) const {
    double g = 0;
    for (const auto& part : parts) {
      g += static_cast<double>(part.size()) / total * numeric::gini_impurity(class_counts(part));
    }
    return g;
  }

  std::size_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    std::map<std::string, std::size_t> counts;
    for (auto i : idx) ++counts[label(i)];
    nodes_[id].majority = majority_label(counts);
    nodes_[id].count = idx.size();
    if (counts.size() <= 1 || depth >= max_depth_) return id;

    Candidate best;
    const double total = static_cast<double>(idx.size());
    for (std::size_t j = 0; j < model_.inputs.size(); ++j) {
      const Attribute& a = model_.inputs[j];
      if (is_categorical(a.type)) {
        std::map<std::string, std::vector<std::size_t>> parts;
        for (auto i : idx) parts[rows_[i]->at(a.name).as_string()].push_back(i);
        if (parts.size() < 2) continue;
        std::vector<std::vector<std::size_t>> groups;
        for (auto& [_, g] : parts) groups.push_back(g);
        const double g = weighted_gini(groups, total);
        if (g < best.impurity) best = {g, j, false, 0};
      } else {
        std::vector<std::pair<double, std::size_t>> sorted;
        for (auto i : idx) sorted.emplace_back(rows_[i]->at(a.name).as_number(), i);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t s = 1; s < sorted.size(); ++s) {
          if (sorted[s].first == sorted[s - 1].first) continue;
          const double threshold = sorted[s - 1].first + (sorted[s].first - sorted[s - 1].first) / 2;
          std::vector<std::vector<std::size_t>> groups(2);
          for (const auto& [x, i] : sorted) groups[x <= threshold ? 0 : 1].push_back(i);
          const double g = weighted_gini(groups, total);
          if (g < best.impurity) best = {g, j, true, threshold};
        }
      }
    }
    if (!std::isfinite(best.impurity)) return id;  // identical inputs throughout

    const Attribute& a = model_.inputs[best.input];
    nodes_[id].attribute = a.name;
    nodes_[id].numeric = best.numeric;
    if (best.numeric) {
      nodes_[id].threshold = best.threshold;
      std::vector<std::size_t> left, right;
      for (auto i : idx) (rows_[i]->at(a.name).as_number() <= best.threshold ? left : right).push_back(i);
      const auto l = grow(left, depth + 1);
      const auto r = grow(right, depth + 1);
      nodes_[id].left = l;
      nodes_[id].right = r;
    } else {
      std::map<std::string, std::vector<std::size_t>> parts;
      for (auto i : idx) parts[rows_[i]->at(a.name).as_string()].push_back(i);
      for (auto& [value, part] : parts) {
        const auto child = grow(part, depth + 1);
        nodes_[id].children.emplace(value, child);
      }
    }
    return id;
  }

  const RelationshipModel& model_;
  const std::vector<const Record*>& rows_;
  std::size_t max_depth_ = 16;
  std::map<std::string, Eigen::Index> label_index_;
  std::vector<trained::TreeNode> nodes_;
};

Value predict_tree(const RelationshipModel& m, const trained::DecisionTree& tree, const Record& rec,
                   const PredictOptions& options) {
  std::size_t at = 0;
  while (true) {
    const auto& node = tree.nodes.at(at);
    if (!node.attribute) return Value::nominal(node.majority);
    auto attr = std::find_if(m.inputs.begin(), m.inputs.end(),
                             [&](const Attribute& a) { return a.name == *node.attribute; });
    const Value& v = input_value(rec, *attr);
    if (node.numeric) {
      at = v.as_number() <= node.threshold ? node.left : node.right;
      continue;
    }
    auto it = node.children.find(v.as_string());
    if (it == node.children.end()) {
      if (options.strict) {
        throw Error(ErrorCode::UnseenCategory,
                    "category '" + v.as_string() + "' of '" + *node.attribute + "' unseen in training");
      }
      return Value::nominal(node.majority);
    }
    at = it->second;
  }
}

// ---------------------------------------------------------------------------
// K nearest neighbours

trained::KNearestNeighbors train_knn(const RelationshipModel& m,
                                     const std::vector<const Record*>& rows) {
  trained::KNearestNeighbors out;
  const double k = hyper_or(m, "k", 3);
  if (k < 1 || std::trunc(k) != k) violation(m, "k must be a positive integer");
  out.k = static_cast<std::size_t>(k);
  for (const auto& a : m.inputs) {
    (is_categorical(a.type) ? out.categorical_inputs : out.numeric_inputs).push_back(a.name);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto q = static_cast<Eigen::Index>(out.numeric_inputs.size());
  Eigen::MatrixXd raw(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) raw(i, j) = rows[i]->at(out.numeric_inputs[j]).as_number();
    std::vector<std::string> cats;
    for (const auto& c : out.categorical_inputs) cats.push_back(rows[i]->at(c).as_string());
    out.categories.push_back(std::move(cats));
    out.labels.push_back(rows[i]->at(m.output->name).as_string());
  }
  out.means = raw.colwise().mean();
  const Eigen::MatrixXd centered = raw.rowwise() - out.means;
  out.scales = (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index j = 0; j < q; ++j) {
    if (!(out.scales(j) > 0)) out.scales(j) = 1.0;
  }
  out.points = centered.array().rowwise() / out.scales.array();
  return out;
}

Value predict_knn(const RelationshipModel& m, const trained::KNearestNeighbors& knn,
                  const Record& rec) {
  const auto q = static_cast<Eigen::Index>(knn.numeric_inputs.size());
  Eigen::RowVectorXd query(q);
  std::vector<std::string> cats;
  for (const auto& a : m.inputs) {
    const Value& v = input_value(rec, a);
    if (is_categorical(a.type)) {
      cats.push_back(v.as_string());
    } else {
      auto pos = std::find(knn.numeric_inputs.begin(), knn.numeric_inputs.end(), a.name) -
                 knn.numeric_inputs.begin();
      query(pos) = v.as_number();
    }
  }
  query = (query - knn.means).array() / knn.scales.array();

  const std::size_t n = knn.labels.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = q > 0 ? (knn.points.row(static_cast<Eigen::Index>(i)) - query).norm() : 0.0;
    for (std::size_t c = 0; c < cats.size(); ++c) d += knn.categories[i][c] == cats[c] ? 0.0 : 1.0;
    dist[i] = {d, i};
  }
  const std::size_t k = std::min(knn.k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::map<std::string, std::size_t> votes;
  for (std::size_t i = 0; i < k; ++i) ++votes[knn.labels[dist[i].second]];
  std::size_t top = 0;
  for (const auto& [_, v] : votes) top = std::max(top, v);
  // Vote ties go to the tied label whose nearest member is closest.
  for (std::size_t i = 0; i < k; ++i) {
    const auto& label = knn.labels[dist[i].second];
    if (votes[label] == top) return Value::nominal(label);
  }
  return Value::null();
}

// ---------------------------------------------------------------------------
// Naive Bayes

trained::NaiveBayes train_naive_bayes(const RelationshipModel& m,
                                      const std::vector<const Record*>& rows) {
  trained::NaiveBayes nb;
  nb.alpha = hyper_or(m, "alpha", 1.0);
  if (!(nb.alpha > 0)) violation(m, "alpha must be positive");
  nb.feature_counts.resize(m.inputs.size());
  std::vector<std::set<std::string>> vocab(m.inputs.size());
  for (const auto* r : rows) {
    const auto& c = r->at(m.output->name).as_string();
    ++nb.class_counts[c];
    for (std::size_t j = 0; j < m.inputs.size(); ++j) {
      const auto& v = r->at(m.inputs[j].name).as_string();
      ++nb.feature_counts[j][c][v];
      vocab[j].insert(v);
    }
  }
  for (const auto& v : vocab) nb.vocabulary.push_back(v.size());
  return nb;
}

std::map<std::string, double> naive_bayes_posteriors(const RelationshipModel& m,
                                                     const trained::NaiveBayes& nb,
                                                     const Record& rec) {
  std::vector<std::string> x;
  for (const auto& a : m.inputs) x.push_back(input_value(rec, a).as_string());
  double total = 0;
  for (const auto& [_, c] : nb.class_counts) total += static_cast<double>(c);

  std::map<std::string, double> log_post;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [label, c] : nb.class_counts) {
    double lp = std::log(static_cast<double>(c) / total);
    for (std::size_t j = 0; j < x.size(); ++j) {
      std::size_t count = 0;
      const auto& by_class = nb.feature_counts[j];
      if (auto ci = by_class.find(label); ci != by_class.end()) {
        if (auto vi = ci->second.find(x[j]); vi != ci->second.end()) count = vi->second;
      }
      lp += std::log((static_cast<double>(count) + nb.alpha) /
                     (static_cast<double>(c) + nb.alpha * static_cast<double>(nb.vocabulary[j])));
    }
    log_post[label] = lp;
    top = std::max(top, lp);
  }
  double z = 0;
  for (auto& [_, lp] : log_post) z += std::exp(lp - top);
  for (auto& [_, lp] : log_post) lp = std::exp(lp - top) / z;
  return log_post;
}

// ---------------------------------------------------------------------------
// Kernel density

trained::KernelDensity train_kde(const RelationshipModel& m, const std::vector<const Record*>& rows) {
  trained::KernelDensity kde;
  kde.samples.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    kde.samples(static_cast<Eigen::Index>(i)) = rows[i]->at(m.inputs[0].name).as_number();
  }
  if (auto it = m.hyper.find("bandwidth"); it != m.hyper.end()) {
    if (!(it->second > 0)) violation(m, "bandwidth must be positive");
    kde.bandwidth = it->second;
  } else {
    kde.bandwidth = numeric::silverman_bandwidth(kde.samples);
    if (!(kde.bandwidth > 0) || !std::isfinite(kde.bandwidth)) {
      throw Error(ErrorCode::DegenerateData,
                  "Silverman bandwidth of '" + m.name + "' is zero; supply \"bandwidth\"");
    }
  }
  return kde;
}

// ---------------------------------------------------------------------------
// Isolation forest

class IsolationTreeBuilder {
 public:
  IsolationTreeBuilder(const Eigen::MatrixXd& data, std::mt19937_64& rng, std::size_t height_limit)
      : data_(data), rng_(rng), height_limit_(height_limit) {}

  std::vector<trained::IsolationNode> build(std::vector<Eigen::Index> rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  std::size_t grow(const std::vector<Eigen::Index>& rows, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({-1, 0, 0, 0, rows.size()});
    if (depth >= height_limit_ || rows.size() <= 1) return id;

    std::vector<int> candidates;
    Eigen::RowVectorXd lo = Eigen::RowVectorXd::Constant(data_.cols(), std::numeric_limits<double>::infinity());
    Eigen::RowVectorXd hi = -lo;
    for (auto r : rows) {
      lo = lo.cwiseMin(data_.row(r));
      hi = hi.cwiseMax(data_.row(r));
    }
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      if (hi(j) > lo(j)) candidates.push_back(static_cast<int>(j));
    }
    if (candidates.empty()) return id;

    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const int attr = candidates[pick(rng_)];
    std::uniform_real_distribution<double> cut(lo(attr), hi(attr));
    double split = cut(rng_);
    if (split <= lo(attr)) split = std::nextafter(lo(attr), hi(attr));

    std::vector<Eigen::Index> left, right;
    for (auto r : rows) (data_(r, attr) < split ? left : right).push_back(r);
    nodes_[id].attribute = attr;
    nodes_[id].split = split;
    const auto l = grow(left, depth + 1);
    const auto rr = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = rr;
    return id;
  }

  const Eigen::MatrixXd& data_;
  std::mt19937_64& rng_;
  std::size_t height_limit_;
  std::vector<trained::IsolationNode> nodes_;
};

trained::IsolationForest train_isolation_forest(const RelationshipModel& m,
                                                const std::vector<const Record*>& rows) {
  const double trees = hyper_or(m, "trees", 100);
  const double subsample = hyper_or(m, "subsample", 256);
  if (trees < 1 || std::trunc(trees) != trees) violation(m, "trees must be a positive integer");
  if (subsample < 2 || std::trunc(subsample) != subsample) {
    violation(m, "subsample must be an integer >= 2");
  }
  if (rows.size() < 2) {
    throw Error(ErrorCode::DegenerateData, "isolation forest needs at least two records");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto q = static_cast<Eigen::Index>(m.inputs.size());
  Eigen::MatrixXd data(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) data(i, j) = rows[i]->at(m.inputs[j].name).as_number();
  }

  trained::IsolationForest forest;
  forest.seed = m.seed;
  forest.subsample = std::min<std::size_t>(static_cast<std::size_t>(subsample), rows.size());
  const auto height_limit =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(forest.subsample))));

  std::mt19937_64 rng(m.seed);
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  IsolationTreeBuilder builder(data, rng, height_limit);
  for (std::size_t t = 0; t < static_cast<std::size_t>(trees); ++t) {
    // Partial Fisher-Yates: the first `subsample` slots become the sample.
    for (std::size_t i = 0; i < forest.subsample; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<Eigen::Index> sample(pool.begin(),
                                     pool.begin() + static_cast<std::ptrdiff_t>(forest.subsample));
    std::sort(sample.begin(), sample.end());
    forest.trees.push_back(builder.build(std::move(sample)));
  }
  return forest;
}

double isolation_score(const RelationshipModel& m, const trained::IsolationForest& forest,
                       const Record& rec) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(m.inputs.size()));
  for (std::size_t j = 0; j < m.inputs.size(); ++j) {
    x(static_cast<Eigen::Index>(j)) = input_value(rec, m.inputs[j]).as_number();
  }
  double total = 0;
  for (const auto& tree : forest.trees) {
    std::size_t at = 0;
    double depth = 0;
    while (tree.at(at).attribute >= 0) {
      const auto& node = tree[at];
      at = x(node.attribute) < node.split ? node.left : node.right;
      depth += 1;
    }
    total += depth + numeric::average_path_length(tree[at].size);
  }
  const double mean_path = total / static_cast<double>(forest.trees.size());
  return std::exp2(-mean_path / numeric::average_path_length(forest.subsample));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface

void check_model_spec(const RelationshipModel& m) {
  if (m.name.empty()) violation(m, "model name is empty");
  if (m.inputs.empty()) violation(m, "at least one input attribute is required");
  std::set<std::string_view> names;
  for (const auto& a : used_attributes(m)) {
    if (a.name.empty() || a.name == "*") violation(m, "invalid attribute name '" + a.name + "'");
    if (!names.insert(a.name).second) violation(m, "attribute '" + a.name + "' used twice");
  }
  const auto allowed = allowed_hyper(m.kind);
  for (const auto& [key, value] : m.hyper) {
    if (!allowed.contains(key)) violation(m, "unknown hyperparameter '" + key + "'");
    if (!std::isfinite(value)) violation(m, "hyperparameter '" + key + "' is not finite");
  }
  auto all_inputs = [&](auto pred) {
    return std::all_of(m.inputs.begin(), m.inputs.end(), [&](const Attribute& a) { return pred(a.type); });
  };
  switch (m.kind) {
    case RelationshipKind::LinearRegression:
      if (!all_inputs([](AttributeType t) { return t == AttributeType::quantitative; })) {
        violation(m, "inputs must be quantitative");
      }
      if (!m.output || m.output->type != AttributeType::quantitative) {
        violation(m, "output must be quantitative");
      }
      break;
    case RelationshipKind::DecisionTreeClassification:
    case RelationshipKind::KNNClassification:
      if (!m.output || !is_categorical(m.output->type)) {
        violation(m, "output must be nominal or ordinal");
      }
      break;
    case RelationshipKind::NaiveBayesClassification:
      if (!m.output || !is_categorical(m.output->type)) {
        violation(m, "output must be nominal or ordinal");
      }
      if (!all_inputs(is_categorical)) violation(m, "inputs must be nominal or ordinal");
      break;
    case RelationshipKind::KernelDensity:
      if (m.inputs.size() != 1 || m.inputs[0].type != AttributeType::quantitative) {
        violation(m, "exactly one quantitative input is required");
      }
      if (m.output) violation(m, "density models have no output attribute");
      break;
    case RelationshipKind::IsolationForest:
      if (!all_inputs([](AttributeType t) { return t == AttributeType::quantitative; })) {
        violation(m, "inputs must be quantitative");
      }
      if (m.output) violation(m, "outlier models have no output attribute");
      break;
  }
}

RelationshipModel train_model(const RelationshipModel& m, std::span<const Record> records) {
  check_model_spec(m);
  if (records.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training records");
  const auto rows = usable_rows(m, records);
  if (rows.empty()) {
    throw Error(ErrorCode::EmptyTrainingSet, "every training record has a missing value");
  }
  RelationshipModel out = m;
  switch (m.kind) {
    case RelationshipKind::LinearRegression: out.trained = train_linear(m, rows); break;
    case RelationshipKind::DecisionTreeClassification: out.trained = TreeBuilder(m, rows).build(); break;
    case RelationshipKind::KNNClassification: out.trained = train_knn(m, rows); break;
    case RelationshipKind::NaiveBayesClassification: out.trained = train_naive_bayes(m, rows); break;
    case RelationshipKind::KernelDensity: out.trained = train_kde(m, rows); break;
    case RelationshipKind::IsolationForest: out.trained = train_isolation_forest(m, rows); break;
  }
  return out;
}

namespace {

template <class T>
const T& state(const RelationshipModel& m) {
  if (!m.trained) throw Error(ErrorCode::UntrainedModel, "model '" + m.name + "' is not trained");
  const T* s = std::get_if<T>(&*m.trained);
  if (!s) throw Error(ErrorCode::KindMismatch, "trained state does not match kind");
  return *s;
}

}  // namespace

Value predict_record(const RelationshipModel& m, const Record& record, const PredictOptions& options) {
  switch (m.kind) {
    case RelationshipKind::LinearRegression: {
      const auto& lr = state<trained::LinearRegression>(m);
      double y = lr.coefficients(0);
      for (std::size_t j = 0; j < m.inputs.size(); ++j) {
        y += lr.coefficients(static_cast<Eigen::Index>(j + 1)) * input_value(record, m.inputs[j]).as_number();
      }
      return std::isfinite(y) ? Value::quantitative(y) : Value::null();
    }
    case RelationshipKind::DecisionTreeClassification:
      return predict_tree(m, state<trained::DecisionTree>(m), record, options);
    case RelationshipKind::KNNClassification:
      return predict_knn(m, state<trained::KNearestNeighbors>(m), record);
    case RelationshipKind::NaiveBayesClassification: {
      const auto post = naive_bayes_posteriors(m, state<trained::NaiveBayes>(m), record);
      auto best = std::max_element(post.begin(), post.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; });
      return Value::nominal(best->first);
    }
    case RelationshipKind::KernelDensity: {
      const auto& kde = state<trained::KernelDensity>(m);
      return Value::quantitative(
          numeric::gaussian_kde(kde.samples, kde.bandwidth, input_value(record, m.inputs[0]).as_number()));
    }
    case RelationshipKind::IsolationForest:
      return Value::quantitative(isolation_score(m, state<trained::IsolationForest>(m), record));
  }
  return Value::null();
}

std::map<std::string, double> class_posteriors(const RelationshipModel& m, const Record& record) {
  if (m.kind != RelationshipKind::NaiveBayesClassification) {
    throw Error(ErrorCode::KindMismatch, "posteriors are defined for naive Bayes models only");
  }
  return naive_bayes_posteriors(m, state<trained::NaiveBayes>(m), record);
}

double evaluate_accuracy(const RelationshipModel& m, std::span<const Record> records, Metric metric,
                         const PredictOptions& options) {
  const bool fits = metric == Metric::accuracy ? is_classifier(m.kind)
                                               : m.kind == RelationshipKind::LinearRegression;
  if (!fits) {
    throw Error(ErrorCode::MetricKindMismatch, std::string(to_string(metric)) +
                                                   " does not apply to " +
                                                   std::string(to_string(m.kind)));
  }
  if (!m.trained) throw Error(ErrorCode::UntrainedModel, "model '" + m.name + "' is not trained");
  const auto rows = usable_rows(m, records);
  if (rows.empty()) throw Error(ErrorCode::EmptyEvaluationSet, "no complete records to evaluate");
  if (metric == Metric::accuracy) {
    std::size_t hits = 0;
    for (const auto* r : rows) {
      if (predict_record(m, *r, options) == r->at(m.output->name)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rows.size());
  }
  double sq = 0;
  for (const auto* r : rows) {
    const double e = predict_record(m, *r, options).as_number() - r->at(m.output->name).as_number();
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(rows.size()));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;
namespace ju = json_util;

template <class Derived>
json vector_json(const Eigen::DenseBase<Derived>& v) {
  auto out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const json& j, const std::string& where) {
  ju::array(j, where);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = ju::number(j[i], ju::child(where, i));
  return v;
}

json trained_to_json(const TrainedParameters& t) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, trained::LinearRegression>) {
          return {{"coefficients", vector_json(s.coefficients)}};
        } else if constexpr (std::is_same_v<T, trained::DecisionTree>) {
          auto nodes = json::array();
          for (const auto& n : s.nodes) {
            json node{{"majority", n.majority}, {"count", n.count}, {"split", nullptr}};
            if (n.attribute) {
              if (n.numeric) {
                node["split"] = {{"attribute", *n.attribute}, {"threshold", n.threshold},
                                 {"left", n.left}, {"right", n.right}};
              } else {
                node["split"] = {{"attribute", *n.attribute}, {"children", n.children}};
              }
            }
            nodes.push_back(std::move(node));
          }
          return {{"nodes", std::move(nodes)}};
        } else if constexpr (std::is_same_v<T, trained::KNearestNeighbors>) {
          auto points = json::array();
          for (Eigen::Index i = 0; i < s.points.rows(); ++i) points.push_back(vector_json(s.points.row(i)));
          return {{"k", s.k},
                  {"numericInputs", s.numeric_inputs},
                  {"categoricalInputs", s.categorical_inputs},
                  {"means", vector_json(s.means)},
                  {"scales", vector_json(s.scales)},
                  {"points", std::move(points)},
                  {"categories", s.categories},
                  {"labels", s.labels}};
        } else if constexpr (std::is_same_v<T, trained::NaiveBayes>) {
          return {{"alpha", s.alpha},
                  {"classCounts", s.class_counts},
                  {"featureCounts", s.feature_counts},
                  {"vocabulary", s.vocabulary}};
        } else if constexpr (std::is_same_v<T, trained::KernelDensity>) {
          return {{"samples", vector_json(s.samples)}, {"bandwidth", s.bandwidth}};
        } else {
          auto trees = json::array();
          for (const auto& tree : s.trees) {
            auto nodes = json::array();
            for (const auto& n : tree) {
              nodes.push_back({{"attribute", n.attribute}, {"split", n.split}, {"left", n.left},
                               {"right", n.right}, {"size", n.size}});
            }
            trees.push_back(std::move(nodes));
          }
          return {{"subsample", s.subsample}, {"seed", s.seed}, {"trees", std::move(trees)}};
        }
      },
      t);
}

std::map<std::string, std::size_t> count_map(const json& j, const std::string& where) {
  ju::object(j, where);
  std::map<std::string, std::size_t> out;
  for (const auto& [k, v] : j.items()) out[k] = ju::unsigned_integer(v, ju::child(where, k));
  return out;
}

TrainedParameters trained_from_json(const RelationshipModel& m, const json& j, const std::string& where) {
  ju::object(j, where);
  auto f = [&](const char* key) -> const json& { return ju::field(j, key, where); };
  auto at = [&](const char* key) { return ju::child(where, key); };
  switch (m.kind) {
    case RelationshipKind::LinearRegression: {
      trained::LinearRegression lr{vector_from(f("coefficients"), at("coefficients"))};
      if (lr.coefficients.size() != static_cast<Eigen::Index>(m.inputs.size() + 1)) {
        ju::fail(at("coefficients"), "expected one coefficient per input plus an intercept");
      }
      return lr;
    }
    case RelationshipKind::DecisionTreeClassification: {
      trained::DecisionTree tree;
      const auto& nodes = ju::array(f("nodes"), at("nodes"));
      if (nodes.empty()) ju::fail(at("nodes"), "tree has no nodes");
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto w = ju::child(at("nodes"), i);
        trained::TreeNode n;
        n.majority = ju::string(ju::field(nodes[i], "majority", w), w + "/majority");
        n.count = ju::unsigned_integer(ju::field(nodes[i], "count", w), w + "/count");
        const auto& split = ju::field(nodes[i], "split", w);
        if (!split.is_null()) {
          const auto sw = w + "/split";
          n.attribute = ju::string(ju::field(split, "attribute", sw), sw + "/attribute");
          if (std::none_of(m.inputs.begin(), m.inputs.end(),
                           [&](const Attribute& a) { return a.name == *n.attribute; })) {
            ju::fail(sw + "/attribute", "split on an attribute that is not an input");
          }
          auto check_child = [&](std::uint64_t c, const std::string& cw) {
            // Children always follow their parent, which also rules out cycles.
            if (c <= i || c >= nodes.size()) ju::fail(cw, "child index out of range");
            return static_cast<std::size_t>(c);
          };
          if (split.contains("threshold")) {
            n.numeric = true;
            n.threshold = ju::number(split["threshold"], sw + "/threshold");
            n.left = check_child(ju::unsigned_integer(ju::field(split, "left", sw), sw + "/left"), sw + "/left");
            n.right = check_child(ju::unsigned_integer(ju::field(split, "right", sw), sw + "/right"), sw + "/right");
          } else {
            const auto& children = ju::object(ju::field(split, "children", sw), sw + "/children");
            for (const auto& [k, v] : children.items()) {
              const auto cw = ju::child(sw + "/children", k);
              n.children[k] = check_child(ju::unsigned_integer(v, cw), cw);
            }
          }
        }
        tree.nodes.push_back(std::move(n));
      }
      return tree;
    }
    case RelationshipKind::KNNClassification: {
      trained::KNearestNeighbors knn;
      knn.k = ju::unsigned_integer(f("k"), at("k"));
      if (knn.k == 0) ju::fail(at("k"), "k must be positive");
      for (const auto& s : ju::array(f("numericInputs"), at("numericInputs"))) {
        knn.numeric_inputs.push_back(ju::string(s, at("numericInputs")));
      }
      for (const auto& s : ju::array(f("categoricalInputs"), at("categoricalInputs"))) {
        knn.categorical_inputs.push_back(ju::string(s, at("categoricalInputs")));
      }
      if (knn.numeric_inputs.size() + knn.categorical_inputs.size() != m.inputs.size()) {
        ju::fail(where, "input partition does not match the model inputs");
      }
      for (const auto& a : m.inputs) {
        const auto& bucket = is_categorical(a.type) ? knn.categorical_inputs : knn.numeric_inputs;
        if (std::find(bucket.begin(), bucket.end(), a.name) == bucket.end()) {
          ju::fail(where, "input '" + a.name + "' missing from the trained partition");
        }
      }
      const auto q = static_cast<Eigen::Index>(knn.numeric_inputs.size());
      knn.means = vector_from(f("means"), at("means")).transpose();
      knn.scales = vector_from(f("scales"), at("scales")).transpose();
      if (knn.means.size() != q || knn.scales.size() != q) ju::fail(where, "means/scales width mismatch");
      const auto& labels = ju::array(f("labels"), at("labels"));
      const auto& points = ju::array(f("points"), at("points"));
      const auto& cats = ju::array(f("categories"), at("categories"));
      if (labels.empty() || points.size() != labels.size() || cats.size() != labels.size()) {
        ju::fail(where, "points, categories and labels must be non-empty and equally long");
      }
      knn.points.resize(static_cast<Eigen::Index>(points.size()), q);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = vector_from(points[i], ju::child(at("points"), i));
        if (row.size() != q) ju::fail(ju::child(at("points"), i), "point width mismatch");
        knn.points.row(static_cast<Eigen::Index>(i)) = row.transpose();
        const auto cw = ju::child(at("categories"), i);
        std::vector<std::string> c;
        for (const auto& s : ju::array(cats[i], cw)) c.push_back(ju::string(s, cw));
        if (c.size() != knn.categorical_inputs.size()) ju::fail(cw, "category width mismatch");
        knn.categories.push_back(std::move(c));
        knn.labels.push_back(ju::string(labels[i], ju::child(at("labels"), i)));
      }
      return knn;
    }
    case RelationshipKind::NaiveBayesClassification: {
      trained::NaiveBayes nb;
      nb.alpha = ju::number(f("alpha"), at("alpha"));
      if (!(nb.alpha > 0)) ju::fail(at("alpha"), "alpha must be positive");
      nb.class_counts = count_map(f("classCounts"), at("classCounts"));
      if (nb.class_counts.empty()) ju::fail(at("classCounts"), "no classes");
      for (const auto& [_, c] : nb.class_counts) {
        if (c == 0) ju::fail(at("classCounts"), "class counts must be positive");
      }
      const auto& fc = ju::array(f("featureCounts"), at("featureCounts"));
      const auto& vocab = ju::array(f("vocabulary"), at("vocabulary"));
      if (fc.size() != m.inputs.size() || vocab.size() != m.inputs.size()) {
        ju::fail(where, "one count table and vocabulary size per input expected");
      }
      for (std::size_t i = 0; i < fc.size(); ++i) {
        const auto w = ju::child(at("featureCounts"), i);
        std::map<std::string, std::map<std::string, std::size_t>> table;
        for (const auto& [label, counts] : ju::object(fc[i], w).items()) {
          table[label] = count_map(counts, ju::child(w, label));
        }
        nb.feature_counts.push_back(std::move(table));
        nb.vocabulary.push_back(ju::unsigned_integer(vocab[i], ju::child(at("vocabulary"), i)));
      }
      return nb;
    }
    case RelationshipKind::KernelDensity: {
      trained::KernelDensity kde{vector_from(f("samples"), at("samples")),
                                 ju::number(f("bandwidth"), at("bandwidth"))};
      if (kde.samples.size() == 0) ju::fail(at("samples"), "no samples");
      if (!(kde.bandwidth > 0)) ju::fail(at("bandwidth"), "bandwidth must be positive");
      return kde;
    }
    case RelationshipKind::IsolationForest: {
      trained::IsolationForest forest;
      forest.subsample = ju::unsigned_integer(f("subsample"), at("subsample"));
      if (forest.subsample < 2) ju::fail(at("subsample"), "subsample must be at least 2");
      forest.seed = ju::unsigned_integer(f("seed"), at("seed"));
      const auto& trees = ju::array(f("trees"), at("trees"));
      if (trees.empty()) ju::fail(at("trees"), "forest has no trees");
      for (std::size_t t = 0; t < trees.size(); ++t) {
        const auto tw = ju::child(at("trees"), t);
        const auto& nodes = ju::array(trees[t], tw);
        if (nodes.empty()) ju::fail(tw, "tree has no nodes");
        std::vector<trained::IsolationNode> tree;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          const auto w = ju::child(tw, i);
          trained::IsolationNode n;
          const auto attr = ju::integer(ju::field(nodes[i], "attribute", w), w + "/attribute");
          if (attr < -1 || attr >= static_cast<std::int64_t>(m.inputs.size())) {
            ju::fail(w + "/attribute", "attribute index out of range");
          }
          n.attribute = static_cast<int>(attr);
          n.split = ju::number(ju::field(nodes[i], "split", w), w + "/split");
          n.left = ju::unsigned_integer(ju::field(nodes[i], "left", w), w + "/left");
          n.right = ju::unsigned_integer(ju::field(nodes[i], "right", w), w + "/right");
          n.size = ju::unsigned_integer(ju::field(nodes[i], "size", w), w + "/size");
          if (n.attribute >= 0 && (n.left <= i || n.right <= i || n.left >= nodes.size() ||
                                   n.right >= nodes.size())) {
            ju::fail(w, "child index out of range");
          }
          tree.push_back(n);
        }
        forest.trees.push_back(std::move(tree));
      }
      return forest;
    }
  }
  ju::fail(where, "unknown kind");
}

}  // namespace

json model_spec_to_json(const RelationshipModel& m) {
  auto inputs = json::array();
  for (const auto& a : m.inputs) inputs.push_back(attribute_to_json(a));
  json hyper = json::object();
  for (const auto& [k, v] : m.hyper) hyper[k] = v;
  return {{"kind", to_string(m.kind)},
          {"name", m.name},
          {"inputs", std::move(inputs)},
          {"output", m.output ? attribute_to_json(*m.output) : json(nullptr)},
          {"hyper", std::move(hyper)},
          {"seed", m.seed}};
}

json model_to_json(const RelationshipModel& m) {
  json j = model_spec_to_json(m);
  j["trained"] = m.trained ? trained_to_json(*m.trained) : json(nullptr);
  return j;
}

RelationshipModel model_from_json(const json& j) {
  const std::string where;
  ju::object(j, where);
  RelationshipModel m;
  const auto kind_text = ju::string(ju::field(j, "kind", where), "/kind");
  const auto kind = relationship_kind_from_string(kind_text);
  if (!kind) throw Error(ErrorCode::UnknownKind, "unknown relationship kind '" + kind_text + "'", "/kind");
  m.kind = *kind;
  m.name = ju::string(ju::field(j, "name", where), "/name");
  const auto& inputs = ju::array(ju::field(j, "inputs", where), "/inputs");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    m.inputs.push_back(ju::located(ju::child("/inputs", i), [&] { return attribute_from_json(inputs[i]); }));
  }
  if (j.contains("output") && !j["output"].is_null()) {
    m.output = ju::located("/output", [&] { return attribute_from_json(j["output"]); });
  }
  if (j.contains("hyper")) {
    for (const auto& [k, v] : ju::object(j["hyper"], "/hyper").items()) {
      m.hyper[k] = ju::number(v, ju::child("/hyper", k));
    }
  }
  if (j.contains("seed")) m.seed = ju::unsigned_integer(j["seed"], "/seed");
  ju::located("", [&] {
    check_model_spec(m);
    return 0;
  });
  if (j.contains("trained") && !j["trained"].is_null()) {
    m.trained = trained_from_json(m, j["trained"], "/trained");
  }
  return m;
}

}  // namespace insightspec
