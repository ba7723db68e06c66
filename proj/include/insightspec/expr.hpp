#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightspec/dataset.hpp"
#include "insightspec/value.hpp"

namespace insightspec {

enum class CompareOp { lt, le, eq, ne, ge, gt };
enum class ArithOp { add, sub, mul, div };
enum class LogicOp { and_, or_, not_ };

class Expr;

namespace expr_node {
struct Literal {
  Value value;
};
struct Column {
  std::string name;
};
/// Zero-based position of the row in the current (ordered) table.
struct Rank {};
struct Compare;
struct Arith;
struct Logic;
}  // namespace expr_node

/// Immutable, serializable expression tree. Copies share structure.
///
/// Operators build trees rather than compare them: `rank() <= 2` is an
/// `Expr`. Use `expr_to_json` to test two trees for equality.
class Expr {
 public:
  using Node = std::variant<expr_node::Literal, expr_node::Column, expr_node::Rank,
                            expr_node::Compare, expr_node::Arith, expr_node::Logic>;

  Expr(double x);  // NOLINT: literal promotion is the point
  Expr(int x) : Expr(static_cast<double>(x)) {}  // NOLINT
  Expr(const char* s);  // NOLINT
  Expr(Value v);  // NOLINT

  const Node& node() const;

  static Expr make(Node&& n);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

namespace expr_node {
struct Compare {
  CompareOp op;
  Expr lhs, rhs;
};
struct Arith {
  ArithOp op;
  Expr lhs, rhs;
};
struct Logic {
  LogicOp op;
  std::vector<Expr> operands;
};
}  // namespace expr_node

inline const Expr::Node& Expr::node() const { return *node_; }

Expr lit(Value v);
Expr col(std::string name);
Expr rank();
Expr compare(CompareOp op, Expr lhs, Expr rhs);
Expr arith(ArithOp op, Expr lhs, Expr rhs);
Expr logic(LogicOp op, std::vector<Expr> operands);

inline Expr operator<(Expr a, Expr b) { return compare(CompareOp::lt, std::move(a), std::move(b)); }
inline Expr operator<=(Expr a, Expr b) { return compare(CompareOp::le, std::move(a), std::move(b)); }
inline Expr operator>(Expr a, Expr b) { return compare(CompareOp::gt, std::move(a), std::move(b)); }
inline Expr operator>=(Expr a, Expr b) { return compare(CompareOp::ge, std::move(a), std::move(b)); }
inline Expr operator==(Expr a, Expr b) { return compare(CompareOp::eq, std::move(a), std::move(b)); }
inline Expr operator!=(Expr a, Expr b) { return compare(CompareOp::ne, std::move(a), std::move(b)); }
inline Expr operator+(Expr a, Expr b) { return arith(ArithOp::add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return arith(ArithOp::sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return arith(ArithOp::mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return arith(ArithOp::div, std::move(a), std::move(b)); }
inline Expr operator&&(Expr a, Expr b) { return logic(LogicOp::and_, {std::move(a), std::move(b)}); }
inline Expr operator||(Expr a, Expr b) { return logic(LogicOp::or_, {std::move(a), std::move(b)}); }
inline Expr operator!(Expr a) { return logic(LogicOp::not_, {std::move(a)}); }

struct EvalContext {
  std::optional<std::int64_t> rank;
};

/// Null operands propagate Null, except comparisons which yield false.
/// Booleans are the quantitative values 1 and 0. Division by zero is Null.
///
/// Throws Error(UnknownColumn), Error(RankOutsideOrderedContext) when the
/// context has no rank, Error(EvaluationError) on ill-typed operands.
Value eval_expr(const Expr& e, const Record& row, const EvalContext& ctx = {});

bool uses_rank(const Expr& e);
std::set<std::string> referenced_columns(const Expr& e);

/// {"op":"col","name":..} | {"op":"lit","value":..[,"type":"temporal"]} |
/// {"op":"rank"} | {"op":"<"|..|"+"|..|"and"|"or"|"not","args":[..]}
nlohmann::json expr_to_json(const Expr& e);
/// Throws Error(MalformedExpr) with a JSON-pointer location.
Expr expr_from_json(const nlohmann::json& j);

}  // namespace insightspec
