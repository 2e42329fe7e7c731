/*  Copyright 2026 The refl authors.

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License. */

#include <random>

#include "doctest.h"
#include "gen.hpp"
#include "refl/semlib.hpp"

using namespace refl;

namespace {

Cond cond_of(const std::string& text) {
  auto defs = parse_refl("REFACTORING r()\n    X\n    -----\n    X\nWHEN " + text + "\n");
  return *std::get<RefactoringDef>(defs[0]).chain[0].rule.when;
}

NodeRef first_node(const SemanticGraph& g, const std::function<bool(const Expr&)>& pred) {
  NodeRef out;
  walk(g.module(0).root, [&](const Expr& e) {
    if (!out.valid() && pred(e)) out = e.ref;
    return !out.valid();
  });
  REQUIRE(out.valid());
  return out;
}

std::vector<std::string> names(const Value& v) {
  std::vector<std::string> out;
  for (const auto& x : as_list(v)) out.push_back(*as_atom(x));
  return out;
}

}  // namespace

TEST_CASE("eval_condition: matching conditions bind") {
  SemanticGraph g({parse_module("-module(m).\nf() -> foo(1, 2).\nfoo(A, B) -> A + B.\n")});
  NodeRef call = first_node(g, [](const Expr& e) { return e.kind == Kind::Call; });
  EvalContext ctx{&g, call, call, {}};
  Bindings b;
  b.bind("Fun", Value::syntax(g.node(call).kids[0]), Origin::Pattern);
  auto [ok, out] = eval_condition(cond_of("atom(Fun) AND Mod = module(THIS)"), b, ctx);
  CHECK(ok);
  REQUIRE(out.get("Mod"));
  CHECK(value_equal(*out.get("Mod"), Value::atom("m")));
  // A bound left operand compares instead.
  Bindings pinned = b;
  pinned.bind("Mod", Value::atom("other"), Origin::Param);
  CHECK_FALSE(eval_condition(cond_of("atom(Fun) AND Mod = module(THIS)"), pinned, ctx).first);
}

TEST_CASE("eval_condition: function_exists") {
  SemanticGraph g({parse_module("-module(m).\nf(A) -> A + 1.\ng() -> f(1).\n")});
  NodeRef call = first_node(g, [](const Expr& e) { return e.kind == Kind::Call; });
  EvalContext ctx{&g, call, call, {}};
  Bindings b;
  b.bind("Args", Value::list_of({Value::syntax(make_int(1))}), Origin::Pattern);
  b.bind("NewName", Value::atom("h"), Origin::Param);
  Cond c = cond_of("NOT function_exists(module(THIS), NewName, length(Args..))");
  CHECK(eval_condition(c, b, ctx).first);
  Bindings taken = b;
  taken.erase("NewName");
  taken.bind("NewName", Value::atom("f"), Origin::Param);
  CHECK_FALSE(eval_condition(c, taken, ctx).first);
  CHECK(as_bool(call_semantic("function_exists", {Value::atom("m"), Value::atom("f"), Value::integer(1)}, ctx)).value());
}

TEST_CASE("eval_condition: list metavariables bound from semantic functions") {
  Expr lc = parse_expr("[{X, Z} || X <- L, Y <- L]");
  Bindings b;
  b.bind("Head", Value::syntax(lc.kids[0]), Origin::Pattern);
  b.bind("GeneratorsFilters", Value::list_of({Value::syntax(lc.kids[1]), Value::syntax(lc.kids[2])}), Origin::Pattern);
  EvalContext ctx;
  auto [ok, out] = eval_condition(cond_of("Vars.. = intersect(bound_vars(GeneratorsFilters..), vars(Head))"), b, ctx);
  CHECK(ok);
  CHECK(names(*out.get("Vars")) == std::vector<std::string>{"X"});
}

TEST_CASE("vars, bound_vars and intersect against brute enumeration") {
  EvalContext ctx;
  Value sum = Value::syntax(parse_expr("X + Y"));
  Value gen = Value::syntax(parse_expr("[1 || X <- L]").kids[1]);
  CHECK(names(call_semantic("vars", {sum}, ctx)) == std::vector<std::string>{"X", "Y"});
  CHECK(names(call_semantic("bound_vars", {gen}, ctx)) == std::vector<std::string>{"X"});
  Value both = call_semantic("intersect", {call_semantic("vars", {sum}, ctx), call_semantic("bound_vars", {gen}, ctx)}, ctx);
  CHECK(names(both) == std::vector<std::string>{"X"});

  testgen::TreeGen tg(11);
  for (int i = 0; i < 1000; ++i) {
    Expr e = tg.expr(3);
    std::vector<std::string> oracle;
    walk(e, [&](const Expr& n) {
      if (n.kind == Kind::Var && n.text != "_" && std::find(oracle.begin(), oracle.end(), n.text) == oracle.end())
        oracle.push_back(n.text);
      return true;
    });
    CHECK(names(call_semantic("vars", {Value::syntax(e)}, ctx)) == oracle);
    Expr f = tg.expr(3);
    Value a = call_semantic("vars", {Value::syntax(e)}, ctx), c = call_semantic("vars", {Value::syntax(f)}, ctx);
    auto inter = names(call_semantic("intersect", {a, c}, ctx));
    auto an = names(a), cn = names(c);
    std::vector<std::string> expected;
    for (const auto& n : an)
      if (std::find(cn.begin(), cn.end(), n) != cn.end()) expected.push_back(n);
    CHECK(inter == expected);
  }
}

TEST_CASE("fresh generates names outside the target scope") {
  SemanticGraph g({parse_module("-module(m).\nf(X) -> [g(1) | X].\ng(V) -> V.\n")});
  NodeRef cons = first_node(g, [](const Expr& e) { return e.kind == Kind::Cons; });
  EvalContext ctx{&g, cons, cons, {}};
  auto [ok, out] = eval_condition(cond_of("fresh(Var)"), {}, ctx);
  CHECK(ok);
  CHECK(out.get("Var")->s == "V");
  auto [ok2, out2] = eval_condition(cond_of("fresh(A) AND fresh(B)"), {}, ctx);
  CHECK(ok2);
  CHECK(out2.get("A")->s == "V");
  CHECK(out2.get("B")->s == "V1");
  Bindings bound;
  bound.bind("Var", Value::name("X"), Origin::Param);
  CHECK_FALSE(eval_condition(cond_of("fresh(Var)"), bound, ctx).first);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    std::string vars;
    std::set<std::string> used;
    for (int k = 0; k < 4; ++k) {
      std::string n = rng() % 2 ? "V" : "V" + std::to_string(rng() % 4);
      if (n == "V0") n = "W";
      used.insert(n);
      vars += ", " + n;
    }
    SemanticGraph h({parse_module("-module(m).\nf(Z) -> {Z" + vars + "} = {Z" + vars + "}, here.\n")});
    NodeRef here = first_node(h, [](const Expr& e) { return e.kind == Kind::Atom && e.text == "here"; });
    EvalContext hc{&h, here, here, {}};
    auto [fine, res] = eval_condition(cond_of("fresh(N)"), {}, hc);
    CHECK(fine);
    CHECK_FALSE(h.scope_names(here).count(res.get("N")->s));
    CHECK_FALSE(used.count(res.get("N")->s));
  }
}

TEST_CASE("pure and determinism") {
  SemanticGraph g({parse_module("-module(m).\nf() -> apple.\ng() -> io:format(x).\n")});
  NodeRef apple = first_node(g, [](const Expr& e) { return e.kind == Kind::Atom && e.text == "apple"; });
  NodeRef io = first_node(g, [](const Expr& e) { return e.kind == Kind::RemoteCall; });
  EvalContext ctx{&g, apple, apple, {}};
  CHECK(as_bool(call_semantic("pure", {node_value(g, apple)}, ctx)).value());
  CHECK_FALSE(as_bool(call_semantic("pure", {node_value(g, io)}, ctx)).value());
  Cond c = cond_of("fresh(V) AND Mod = module(THIS) AND pure(THIS)");
  auto a = eval_condition(c, {}, ctx), b = eval_condition(c, {}, ctx);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("semantic function errors") {
  EvalContext ctx;
  CHECK_THROWS_AS(call_semantic("length", {}, ctx), SemanticError);
  CHECK_THROWS_AS(call_semantic("no_such_thing", {}, ctx), SemanticError);
  CHECK_THROWS_AS(eval_condition(cond_of("length(X)"), {}, ctx), SemanticError);
}
