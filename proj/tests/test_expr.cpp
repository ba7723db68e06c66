#include <doctest.h>

#include <random>

#include "insightspec/error.hpp"
#include "insightspec/expr.hpp"

using namespace insightspec;

namespace {

Record row() {
  return {{"n", Value::quantitative(4)},
          {"z", Value::quantitative(0)},
          {"s", Value::nominal("abc")},
          {"t", Value::temporal(1000)},
          {"gap", Value::null()}};
}

ErrorCode code_of(const Expr& e, EvalContext ctx = {}) {
  try {
    eval_expr(e, row(), ctx);
  } catch (const Error& err) {
    return err.code();
  }
  FAIL("expected an Error");
  return ErrorCode::FormatError;
}

}  // namespace

TEST_CASE("arithmetic and comparisons") {
  CHECK(eval_expr(col("n") * 2 + 1, row()) == Value::quantitative(9));
  CHECK(eval_expr(col("n") / col("z"), row()).is_null());
  CHECK(eval_expr(col("n") > 3, row()) == Value::truth(true));
  CHECK(eval_expr(col("s") == "abc", row()) == Value::truth(true));
  CHECK(eval_expr(col("t") < lit(Value::temporal(2000)), row()) == Value::truth(true));
  CHECK(eval_expr(col("t") < 2000, row()) == Value::truth(true));  // temporal vs number
}

TEST_CASE("null handling") {
  CHECK(eval_expr(col("gap") + 1, row()).is_null());
  CHECK(eval_expr(col("gap") == col("gap"), row()) == Value::truth(false));
  CHECK(eval_expr(col("gap") != 1, row()) == Value::truth(false));
  CHECK(eval_expr(!(col("gap") > 1), row()) == Value::truth(true));
  CHECK(eval_expr(logic(LogicOp::and_, {lit(Value::null()), col("n") > 0}), row()).is_null());
}

TEST_CASE("ill-typed expressions fail with codes") {
  CHECK(code_of(col("s") + 1) == ErrorCode::EvaluationError);
  CHECK(code_of(col("s") < 1) == ErrorCode::EvaluationError);
  CHECK(code_of(col("s") && (col("n") > 1)) == ErrorCode::EvaluationError);
  CHECK(code_of(col("missing") > 1) == ErrorCode::UnknownColumn);
  CHECK(code_of(rank() <= 2) == ErrorCode::RankOutsideOrderedContext);
  CHECK(eval_expr(rank() <= 2, row(), {.rank = 2}) == Value::truth(true));
}

TEST_CASE("referenced columns and rank use") {
  const auto e = (col("a") + col("b") > 1) || (rank() == 0);
  CHECK(referenced_columns(e) == std::set<std::string>{"a", "b"});
  CHECK(uses_rank(e));
  CHECK_FALSE(uses_rank(col("a") > 1));
}

TEST_CASE("JSON encoding round-trips") {
  const std::vector<Expr> cases = {
      col("a"),
      lit(Value::null()),
      lit(Value::temporal(-5)),
      rank() <= 2,
      !((col("x") * 1.5 - "q") != col("y")),
      logic(LogicOp::or_, {col("a") > 1, col("b") < 2, col("c") == "z"}),
  };
  for (const auto& e : cases) {
    const auto j = expr_to_json(e);
    CHECK(expr_to_json(expr_from_json(j)) == j);
  }
  CHECK(expr_to_json(rank() <= 2) ==
        nlohmann::json::parse(R"({"op":"<=","args":[{"op":"rank"},{"op":"lit","value":2.0}]})"));
}

TEST_CASE("malformed JSON is located") {
  const auto bad = nlohmann::json::parse(R"({"op":"and","args":[{"op":">","args":[{"op":"col"}]}]})");
  try {
    expr_from_json(bad);
    FAIL("expected MalformedExpr");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedExpr);
    CHECK(e.location() == "/args/0/args/0");
  }
  for (const char* text : {R"("x")", R"({"op":"lit"})", R"({"op":"lit","value":[1]})",
                           R"({"op":"pow","args":[]})", R"({"op":"not","args":[]})",
                           R"({"op":"lit","value":"x","type":"temporal"})"}) {
    CHECK_THROWS_AS(expr_from_json(nlohmann::json::parse(text)), Error);
  }
}

TEST_CASE("random expression trees survive encoding") {
  std::mt19937_64 rng(3);
  std::function<Expr(int)> gen = [&](int depth) -> Expr {
    const int k = std::uniform_int_distribution<int>(0, depth > 0 ? 6 : 2)(rng);
    switch (k) {
      case 0: return col("c" + std::to_string(rng() % 3));
      case 1: return lit(Value::quantitative(static_cast<double>(rng() % 100) / 8));
      case 2: return rank();
      case 3: return gen(depth - 1) + gen(depth - 1);
      case 4: return gen(depth - 1) < gen(depth - 1);
      case 5: return !gen(depth - 1);
      default: return gen(depth - 1) && gen(depth - 1);
    }
  };
  for (int i = 0; i < 200; ++i) {
    const auto j = expr_to_json(gen(4));
    CHECK(expr_to_json(expr_from_json(j)) == j);
  }
}
