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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "refl/syntax.hpp"

using namespace refl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> sample_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(std::string(REFL_SOURCE_DIR) + "/samples"))
    if (e.path().extension() == ".erl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void check_nesting(const Expr& e, const std::string& text) {
  if (e.span.valid()) CHECK(e.span.end <= text.size());
  const Expr* prev = nullptr;
  for (const auto& k : e.kids) {
    if (!k.span.valid()) continue;
    if (e.span.valid()) CHECK(e.span.contains(k.span));
    if (prev && prev->span.end > prev->span.begin && k.span.end > k.span.begin) CHECK(prev->span.end <= k.span.begin);
    prev = &k;
    check_nesting(k, text);
  }
}

}  // namespace

TEST_CASE("parse_module: minimal module") {
  SourceModule m = parse_module("-module(m).\n-export([f/0]).\nf() -> apple.");
  CHECK(m.name == "m");
  REQUIRE(m.functions().size() == 1);
  const Expr& f = *m.functions()[0];
  CHECK(f.kids[0].kids[0].text == "f");
  CHECK(clause_patterns(f.kids[0]).empty());
  CHECK(m.exports() == std::vector<std::pair<std::string, int>>{{"f", 0}});
}

TEST_CASE("parse_module: fun bound and applied through a variable") {
  SourceModule m = parse_module("-module(m).\nf() -> X = fun() -> apple end, atom_to_list(X()).");
  const Expr& clause = m.functions()[0]->kids[0];
  REQUIRE(clause_body(clause).size() == 2);
  const Expr& match = clause_body(clause)[0];
  CHECK(match.kind == Kind::Match);
  CHECK(match.kids[1].kind == Kind::Fun);
  const Expr& call = clause_body(clause)[1];
  CHECK(call.kind == Kind::Call);
  CHECK(call.kids[0].text == "atom_to_list");
  CHECK(call.kids[1].kind == Kind::Call);
  CHECK(call.kids[1].kids[0].kind == Kind::Var);
}

TEST_CASE("parse_module: dangling case is an error with a position") {
  try {
    parse_module("-module(m).\nf() -> case");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
    CHECK(e.col() == 12);
    CHECK(!e.expected().empty());
  }
}

TEST_CASE("parse_module: module attribute is required once") {
  CHECK_THROWS_AS(parse_module("f() -> a."), SyntaxError);
  CHECK_THROWS_AS(parse_module("-module(a).\n-module(b).\n"), SyntaxError);
}

TEST_CASE("parse_module: clauses of one form share name and arity") {
  CHECK_THROWS_AS(parse_module("-module(m).\nf(0) -> a; g(1) -> b."), SyntaxError);
  CHECK_THROWS_AS(parse_module("-module(m).\nf(0) -> a; f(1, 2) -> b."), SyntaxError);
}

TEST_CASE("parse_expr examples") {
  Expr c = parse_expr("[X | Xs]");
  CHECK(structurally_equal(c, make_cons(make_var("X"), make_var("Xs"))));
  Expr b = parse_expr("begin X = 1, X end");
  REQUIRE(b.kind == Kind::Block);
  CHECK(b.kids[0].kind == Kind::Match);
  CHECK(b.kids[1].kind == Kind::Var);
  CHECK_THROWS_AS(parse_expr("f("), SyntaxError);
  CHECK(parse_expr("a, b").kind == Kind::Block);
  CHECK(parse_expr("apply(G, [])").kids.size() == 3);
}

TEST_CASE("patterns reject non-constructor nodes") {
  CHECK_THROWS_AS(parse_expr("f(X) = 1"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("case a of g() -> b end"), SyntaxError);
  CHECK_NOTHROW(parse_expr("{A, [B | C]} = x"));
}

TEST_CASE("metavariable lexing") {
  Expr e = parse_expr("Name(Args ..)", {true});
  REQUIRE(e.kind == Kind::Call);
  REQUIRE(e.kids.size() == 2);
  CHECK(e.kids[1].kind == Kind::VarList);
  CHECK(e.kids[1].text == "Args");
  CHECK(print(e) == "Name(Args..)");
  CHECK_THROWS_AS(parse_expr("Name(Args ..)"), SyntaxError);
}

TEST_CASE("print examples") {
  CHECK(print(make_list({make_atom("a")})) == "[a]");
  Expr block = make_block({make_match(make_var("V"), make_call(make_atom("g"), {make_int(1)})),
                           make_cons(make_var("V"), make_var("T"))});
  CHECK(print(block) == "begin V = g(1), [V | T] end");
  Expr cs = parse_expr("case H of 1 -> 2; 3 -> 4 end");
  CHECK(print(cs) == "case H of 1 -> 2; 3 -> 4 end");
  CHECK(print(parse_expr("m:foo(1,2)")) == "m:foo(1, 2)");
  CHECK(print(parse_expr("(fun() -> x end)()")) == "(fun() -> x end)()");
  CHECK(print(parse_expr("(1 + 2) * 3")) == "(1 + 2) * 3");
  CHECK(print(parse_expr("1 - (2 - 3)")) == "1 - (2 - 3)");
  CHECK(print(parse_expr("[a] ++ [b] ++ [c]")) == "[a] ++ [b] ++ [c]");
  CHECK(print(make_atom("end")) == "'end'");
  CHECK(print(make_atom("tmp_name")) == "tmp_name");
}

TEST_CASE("print/parse roundtrip on random trees") {
  testgen::TreeGen gen(20261014);
  for (int i = 0; i < 2000; ++i) {
    Expr e = gen.expr(1 + i % 6);
    std::string text = print(e);
    Expr back;
    try {
      back = parse_expr(text);
    } catch (const SyntaxError& err) {
      FAIL_CHECK(text << " : " << err.what());
      continue;
    }
    if (!structurally_equal(e, back)) FAIL_CHECK(text << " reprints as " << print(back));
  }
}

TEST_CASE("lossless roundtrip and span nesting on samples") {
  auto files = sample_files();
  REQUIRE(!files.empty());
  for (const auto& p : files) {
    std::string text = slurp(p);
    SourceModule m = parse_module(text, p.string());
    CHECK(splice(text, {}) == text);
    check_nesting(m.root, text);
  }
}

TEST_CASE("splice replaces only the edited bytes") {
  std::string src = "-module(m).\nf() ->\n    X = fun() -> apple end,\n    atom_to_list(X()).\n";
  SourceModule m = parse_module(src);
  const Expr& body0 = clause_body(m.functions()[0]->kids[0])[0];
  const Expr& apple = body0.kids[1].kids[0].kids[2].kids[0];
  REQUIRE(apple.kind == Kind::Atom);
  std::string out = splice(src, {{apple.span, make_atom("pear")}});
  CHECK(out == "-module(m).\nf() ->\n    X = fun() -> pear end,\n    atom_to_list(X()).\n");

  const Expr& call = clause_body(m.functions()[0]->kids[0])[1].kids[1];
  std::string two = splice(src, {{call.span, make_var("X")}, {body0.kids[1].span, make_atom("apple")}});
  CHECK(two == "-module(m).\nf() ->\n    X = apple,\n    atom_to_list(X).\n");
}

TEST_CASE("splice rejects overlapping edits and re-indents") {
  std::string src = "-module(m).\nf() -> a.\n";
  SourceModule m = parse_module(src);
  const Expr& form = *m.functions()[0];
  const Expr& a = clause_body(form.kids[0])[0];
  CHECK_THROWS_AS(splice(src, {{form.span, make_atom("x")}, {a.span, make_atom("y")}}), Error);
  Expr two = parse_module("-module(x).\ng() -> 1;\ng() -> 2.").root.kids[1];
  std::string out = splice("  X", {{Span{2, 3}, two}});
  CHECK(out == "  g() -> 1;\n  g() -> 2.");
}

TEST_CASE("lookup helpers") {
  std::string text = "ab\ncd";
  CHECK(line_col(text, 3) == std::pair<int, int>{2, 1});
  CHECK(offset_of(text, 2, 2) == 4u);
  CHECK(offset_of(text, 5, 1) == Span::npos);
}
