#include "insightspec/expr.hpp"

#include <cmath>

#include "insightspec/error.hpp"

namespace insightspec {

Expr Expr::make(Node&& n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr::Expr(double x) : Expr(lit(Value::quantitative(x))) {}
Expr::Expr(const char* s) : Expr(lit(Value::nominal(s))) {}
Expr::Expr(Value v) : Expr(lit(std::move(v))) {}

Expr lit(Value v) { return Expr::make(expr_node::Literal{std::move(v)}); }
Expr col(std::string name) { return Expr::make(expr_node::Column{std::move(name)}); }
Expr rank() { return Expr::make(expr_node::Rank{}); }
Expr compare(CompareOp op, Expr lhs, Expr rhs) {
  return Expr::make(expr_node::Compare{op, std::move(lhs), std::move(rhs)});
}
Expr arith(ArithOp op, Expr lhs, Expr rhs) {
  return Expr::make(expr_node::Arith{op, std::move(lhs), std::move(rhs)});
}
Expr logic(LogicOp op, std::vector<Expr> operands) {
  return Expr::make(expr_node::Logic{op, std::move(operands)});
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::string_view compare_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::ge: return ">=";
    case CompareOp::gt: return ">";
  }
  return "?";
}

constexpr std::string_view arith_symbol(ArithOp op) {
  switch (op) {
    case ArithOp::add: return "+";
    case ArithOp::sub: return "-";
    case ArithOp::mul: return "*";
    case ArithOp::div: return "/";
  }
  return "?";
}

constexpr std::string_view logic_symbol(LogicOp op) {
  switch (op) {
    case LogicOp::and_: return "and";
    case LogicOp::or_: return "or";
    case LogicOp::not_: return "not";
  }
  return "?";
}

Value eval_compare(CompareOp op, const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return Value::truth(false);
  if (a.is_numeric() != b.is_numeric()) {
    throw Error(ErrorCode::EvaluationError, "cannot compare '" + a.to_text() + "' with '" +
                                                b.to_text() + "'");
  }
  const auto c = compare_values(a, b);
  switch (op) {
    case CompareOp::lt: return Value::truth(c < 0);
    case CompareOp::le: return Value::truth(c <= 0);
    case CompareOp::eq: return Value::truth(c == 0);
    case CompareOp::ne: return Value::truth(c != 0);
    case CompareOp::ge: return Value::truth(c >= 0);
    case CompareOp::gt: return Value::truth(c > 0);
  }
  return Value::truth(false);
}

Value eval_arith(ArithOp op, const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return Value::null();
  if (!a.is_numeric() || !b.is_numeric()) {
    throw Error(ErrorCode::EvaluationError, "arithmetic on non-numeric value");
  }
  const double x = a.as_number();
  const double y = b.as_number();
  double r = 0;
  switch (op) {
    case ArithOp::add: r = x + y; break;
    case ArithOp::sub: r = x - y; break;
    case ArithOp::mul: r = x * y; break;
    case ArithOp::div: r = x / y; break;
  }
  if (!std::isfinite(r)) return Value::null();
  return Value::quantitative(r);
}

bool truth_of(const Value& v) {
  if (v.is_nominal()) throw Error(ErrorCode::EvaluationError, "string used as a condition");
  return v.is_true();
}

}  // namespace

Value eval_expr(const Expr& e, const Record& row, const EvalContext& ctx) {
  return std::visit(
      overloaded{
          [](const expr_node::Literal& l) { return l.value; },
          [&](const expr_node::Column& c) {
            auto it = row.find(c.name);
            if (it == row.end()) {
              throw Error(ErrorCode::UnknownColumn, "unknown column '" + c.name + "'");
            }
            return it->second;
          },
          [&](const expr_node::Rank&) {
            if (!ctx.rank) {
              throw Error(ErrorCode::RankOutsideOrderedContext, "rank() used without an ordering");
            }
            return Value::quantitative(static_cast<double>(*ctx.rank));
          },
          [&](const expr_node::Compare& c) {
            return eval_compare(c.op, eval_expr(c.lhs, row, ctx), eval_expr(c.rhs, row, ctx));
          },
          [&](const expr_node::Arith& a) {
            return eval_arith(a.op, eval_expr(a.lhs, row, ctx), eval_expr(a.rhs, row, ctx));
          },
          [&](const expr_node::Logic& l) {
            std::vector<Value> vals;
            vals.reserve(l.operands.size());
            for (const auto& o : l.operands) vals.push_back(eval_expr(o, row, ctx));
            for (const auto& v : vals) {
              if (v.is_null()) return Value::null();
            }
            switch (l.op) {
              case LogicOp::not_: return Value::truth(!truth_of(vals.at(0)));
              case LogicOp::and_: {
                bool r = true;
                for (const auto& v : vals) r = truth_of(v) && r;
                return Value::truth(r);
              }
              case LogicOp::or_: {
                bool r = false;
                for (const auto& v : vals) r = truth_of(v) || r;
                return Value::truth(r);
              }
            }
            return Value::null();
          },
      },
      e.node());
}

namespace {

template <class F>
void walk(const Expr& e, F&& f) {
  f(e);
  std::visit(overloaded{
                 [&](const expr_node::Compare& c) {
                   walk(c.lhs, f);
                   walk(c.rhs, f);
                 },
                 [&](const expr_node::Arith& a) {
                   walk(a.lhs, f);
                   walk(a.rhs, f);
                 },
                 [&](const expr_node::Logic& l) {
                   for (const auto& o : l.operands) walk(o, f);
                 },
                 [](const auto&) {},
             },
             e.node());
}

}  // namespace

bool uses_rank(const Expr& e) {
  bool found = false;
  walk(e, [&](const Expr& x) { found = found || std::holds_alternative<expr_node::Rank>(x.node()); });
  return found;
}

std::set<std::string> referenced_columns(const Expr& e) {
  std::set<std::string> out;
  walk(e, [&](const Expr& x) {
    if (const auto* c = std::get_if<expr_node::Column>(&x.node())) out.insert(c->name);
  });
  return out;
}

nlohmann::json expr_to_json(const Expr& e) {
  return std::visit(
      overloaded{
          [](const expr_node::Literal& l) {
            nlohmann::json j{{"op", "lit"}, {"value", value_to_json(l.value)}};
            if (l.value.is_temporal()) j["type"] = "temporal";
            return j;
          },
          [](const expr_node::Column& c) { return nlohmann::json{{"op", "col"}, {"name", c.name}}; },
          [](const expr_node::Rank&) { return nlohmann::json{{"op", "rank"}}; },
          [](const expr_node::Compare& c) {
            return nlohmann::json{{"op", compare_symbol(c.op)},
                                  {"args", {expr_to_json(c.lhs), expr_to_json(c.rhs)}}};
          },
          [](const expr_node::Arith& a) {
            return nlohmann::json{{"op", arith_symbol(a.op)},
                                  {"args", {expr_to_json(a.lhs), expr_to_json(a.rhs)}}};
          },
          [](const expr_node::Logic& l) {
            auto args = nlohmann::json::array();
            for (const auto& o : l.operands) args.push_back(expr_to_json(o));
            return nlohmann::json{{"op", logic_symbol(l.op)}, {"args", std::move(args)}};
          },
      },
      e.node());
}

namespace {

Expr decode(const nlohmann::json& j, const std::string& where) {
  auto malformed = [&](const std::string& msg) {
    return Error(ErrorCode::MalformedExpr, msg, where);
  };
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw malformed("expression must be an object with a string \"op\"");
  }
  const auto op = j["op"].get<std::string>();
  if (op == "lit") {
    if (!j.contains("value")) throw malformed("literal without \"value\"");
    const auto& v = j["value"];
    if (j.contains("type")) {
      if (j["type"] != "temporal" || !v.is_number_integer()) {
        throw malformed("only integer temporal literals carry a \"type\"");
      }
      return lit(Value::temporal(v.get<std::int64_t>()));
    }
    if (v.is_null()) return lit(Value::null());
    if (v.is_string()) return lit(Value::nominal(v.get<std::string>()));
    if (v.is_number()) return lit(Value::quantitative(v.get<double>()));
    if (v.is_boolean()) return lit(Value::truth(v.get<bool>()));
    throw malformed("literal must be a scalar");
  }
  if (op == "col") {
    if (!j.contains("name") || !j["name"].is_string()) throw malformed("column without \"name\"");
    return col(j["name"].get<std::string>());
  }
  if (op == "rank") return rank();

  if (!j.contains("args") || !j["args"].is_array()) throw malformed("operator without \"args\"");
  const auto& args = j["args"];
  std::vector<Expr> operands;
  for (std::size_t i = 0; i < args.size(); ++i) {
    operands.push_back(decode(args[i], where + "/args/" + std::to_string(i)));
  }
  for (CompareOp c : {CompareOp::lt, CompareOp::le, CompareOp::eq, CompareOp::ne, CompareOp::ge,
                      CompareOp::gt}) {
    if (op == compare_symbol(c)) {
      if (operands.size() != 2) throw malformed("'" + op + "' takes two arguments");
      return compare(c, operands[0], operands[1]);
    }
  }
  for (ArithOp a : {ArithOp::add, ArithOp::sub, ArithOp::mul, ArithOp::div}) {
    if (op == arith_symbol(a)) {
      if (operands.size() != 2) throw malformed("'" + op + "' takes two arguments");
      return arith(a, operands[0], operands[1]);
    }
  }
  if (op == "not") {
    if (operands.size() != 1) throw malformed("'not' takes one argument");
    return logic(LogicOp::not_, std::move(operands));
  }
  if (op == "and" || op == "or") {
    if (operands.empty()) throw malformed("'" + op + "' needs at least one argument");
    return logic(op == "and" ? LogicOp::and_ : LogicOp::or_, std::move(operands));
  }
  throw malformed("unknown operator '" + op + "'");
}

}  // namespace

Expr expr_from_json(const nlohmann::json& j) { return decode(j, ""); }

}  // namespace insightspec
