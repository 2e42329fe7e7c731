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

#include "doctest.h"
#include "gen.hpp"
#include "refl/matcher.hpp"
#include "refl/syntax.hpp"

using namespace refl;

namespace {

Expr pat(const std::string& text) { return detach(parse_expr(text, {.metavars = true})); }
Expr code(const std::string& text) { return parse_expr(text); }

Expr body(const std::string& text) {
  auto toks = lex(text, {.metavars = true});
  ExprParser p(toks);
  return detach(p.parse_pattern_body());
}

std::string shown(const Bindings& b, const std::string& key) {
  const Value* v = b.get(key);
  REQUIRE(v);
  return to_string(*v);
}

// Abstracts random subtrees of `e` into fresh metavariables and random runs of
// sequence children into list metavariables.
Expr abstract(const Expr& e, testgen::TreeGen& gen, int& counter) {
  if (gen.pick(5) == 0) return make_var("M" + std::to_string(counter++));
  if (e.kind == Kind::Cons) {
    const Expr* tail = nullptr;
    auto elems = list_elements(e, &tail);
    std::vector<Expr> out;
    for (const Expr* el : elems) out.push_back(abstract(*el, gen, counter));
    if (gen.pick(3) == 0) {
      std::size_t i = static_cast<std::size_t>(gen.pick(static_cast<int>(out.size()) + 1));
      std::size_t j = i + static_cast<std::size_t>(gen.pick(static_cast<int>(out.size() - i) + 1));
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(j));
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(i), make_varlist("L" + std::to_string(counter++)));
    }
    return make_list(std::move(out), abstract(*tail, gen, counter));
  }
  Expr r(e.kind, e.text, e.value);
  for (const auto& k : e.kids) r.kids.push_back(abstract(k, gen, counter));
  int fp = fixed_prefix(e.kind);
  if (fp >= 0 && gen.pick(3) == 0) {
    std::size_t n = r.kids.size() - static_cast<std::size_t>(fp);
    std::size_t i = static_cast<std::size_t>(fp + gen.pick(static_cast<int>(n) + 1));
    std::size_t j = i + static_cast<std::size_t>(gen.pick(static_cast<int>(r.kids.size() - i) + 1));
    r.kids.erase(r.kids.begin() + static_cast<std::ptrdiff_t>(i), r.kids.begin() + static_cast<std::ptrdiff_t>(j));
    r.kids.insert(r.kids.begin() + static_cast<std::ptrdiff_t>(i), make_varlist("L" + std::to_string(counter++)));
  }
  return r;
}

}  // namespace

TEST_CASE("match: list head and tail") {
  auto rs = match(pat("[ HeadExpr | TailExpr ]"), code("[f(X) | T]"), {});
  REQUIRE(rs.size() == 1);
  CHECK(shown(rs[0], "HeadExpr") == "f(X)");
  CHECK(shown(rs[0], "TailExpr") == "T");
}

TEST_CASE("match: callee and argument list") {
  auto rs = match(pat("Fun(Args..)"), code("foo(1, 2)"), {});
  REQUIRE(rs.size() == 1);
  CHECK(shown(rs[0], "Fun") == "foo");
  CHECK(shown(rs[0], "Args") == "[1, 2]");
  CHECK(match(pat("Fun(Args..)"), code("m:foo(1)"), {}).empty());
}

TEST_CASE("match: two list metavariables enumerate every split") {
  auto rs = match(pat("{A.., B..}"), code("{1, 2, 3}"), {});
  REQUIRE(rs.size() == 4);
  for (std::size_t i = 0; i < rs.size(); ++i) CHECK(as_list(*rs[i].get("A")).size() == i);
}

TEST_CASE("match: bound metavariables constrain") {
  Bindings seed;
  seed.bind("X", Value::atom("a"), Origin::Param);
  CHECK(match(pat("{X, Y}"), code("{a, b}"), seed).size() == 1);
  CHECK(match(pat("{X, Y}"), code("{b, b}"), seed).empty());
  CHECK(match(pat("{Y, Y}"), code("{f(1), f(1)}"), {}).size() == 1);
  CHECK(match(pat("{Y, Y}"), code("{f(1), f(2)}"), {}).empty());
}

TEST_CASE("match: clause heads") {
  Expr clause = parse_module("-module(m).\nf(A, B) -> A, B.\n").root.kids[1].kids[0];
  Expr cp = body("Name(Args.., Last) -> Body..");
  auto rs = match(cp, clause, {});
  REQUIRE(rs.size() == 1);
  CHECK(shown(rs[0], "Last") == "B");
  CHECK(shown(rs[0], "Body") == "[A, B]");
}

TEST_CASE("instantiate") {
  Bindings b;
  b.bind("Var", Value::name("V"), Origin::Condition);
  b.bind("HeadExpr", Value::syntax(code("g(1)")), Origin::Pattern);
  b.bind("TailExpr", Value::syntax(code("T")), Origin::Pattern);
  CHECK(print(instantiate(body("Var = HeadExpr, [Var | TailExpr]"), b)) == "V = g(1), [V | T]");

  Bindings q;
  q.bind("Mod", Value::atom("m"), Origin::Condition);
  q.bind("Fun", Value::syntax(code("foo")), Origin::Pattern);
  q.bind("Args", Value::list_of({Value::syntax(code("1")), Value::syntax(code("2"))}), Origin::Pattern);
  CHECK(print(instantiate(pat("Mod:Fun(Args..)"), q)) == "m:foo(1, 2)");

  Bindings t;
  t.bind("Name", Value::name("f"), Origin::Param);
  t.bind("Args", Value::list_of({Value::syntax(code("A")), Value::syntax(code("B"))}), Origin::Pattern);
  CHECK(print(instantiate(pat("Name({Args..})"), t)) == "f({A, B})");
  CHECK(print(instantiate(pat("[Args.. | Name]"), t)) == "[A, B | f]");
  CHECK_THROWS_AS(instantiate(pat("Q"), t), InstantiateError);
}

TEST_CASE("value coercions") {
  CHECK(value_equal(Value::atom("foo"), Value::syntax(code("foo"))));
  CHECK(value_equal(Value::integer(3), Value::syntax(code("3"))));
  CHECK_FALSE(value_equal(Value::integer(3), Value::atom("3")));
  CHECK(value_equal(Value::semantic(NodeRef{7}, "m"), Value::atom("m")));
  CHECK_FALSE(value_equal(Value::syntax(code("f(a)")), Value::atom("f")));
}

TEST_CASE("match/instantiate roundtrip on random trees") {
  testgen::TreeGen gen(31337);
  int matched = 0;
  for (int i = 0; i < 1500; ++i) {
    Expr e = gen.expr(4);
    int counter = 0;
    Expr p = abstract(e, gen, counter);
    auto rs = match(p, e, {});
    CHECK_FALSE(rs.empty());
    for (const auto& b : rs) {
      CHECK(structurally_equal(instantiate(p, b), e));
      ++matched;
    }
  }
  CHECK(matched >= 1500);
}

TEST_CASE("list split count is n + 1") {
  for (int k = 0; k <= 24; ++k) {
    std::vector<Expr> elems;
    for (int i = 0; i < k; ++i) elems.push_back(make_int(i));
    Expr t = make_tuple(elems);
    CHECK(match(pat("{A.., B..}"), t, {}).size() == static_cast<std::size_t>(k + 1));
    CHECK(match(pat("{A.., B.., C..}"), t, {}).size() == static_cast<std::size_t>((k + 1) * (k + 2) / 2));
    CHECK(match(pat("{A..}"), t, {}).size() == 1);
  }
  testgen::TreeGen gen(5);
  for (int i = 0; i < 1000; ++i) {
    auto elems = gen.many(2, 0, 6, false);
    std::size_t n = elems.size();
    CHECK(match(pat("f(A.., B..)"), make_call(make_atom("f"), elems), {}).size() == n + 1);
  }
}

TEST_CASE("merge is commutative and associative up to conflict") {
  testgen::TreeGen gen(77);
  auto random_bindings = [&]() {
    Bindings b;
    int n = gen.pick(4);
    for (int i = 0; i < n; ++i) {
      std::string key = std::string(1, static_cast<char>('A' + gen.pick(4)));
      Value v = gen.coin() ? Value::atom(gen.coin() ? "a" : "b") : Value::syntax(gen.coin() ? make_atom("a") : make_int(1));
      b.bind(key, v, Origin::Pattern);
    }
    return b;
  };
  for (int i = 0; i < 1000; ++i) {
    Bindings a = random_bindings(), b = random_bindings(), c = random_bindings();
    auto ab = a.merge(b), ba = b.merge(a);
    REQUIRE(ab.has_value() == ba.has_value());
    if (ab) CHECK(*ab == *ba);
    std::optional<Bindings> left = ab ? ab->merge(c) : std::nullopt;
    auto bc = b.merge(c);
    std::optional<Bindings> right = bc ? a.merge(*bc) : std::nullopt;
    REQUIRE(left.has_value() == right.has_value());
    if (left) CHECK(*left == *right);
  }
}
