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

#include <chrono>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "refl/verifier.hpp"

using namespace refl;
using namespace refl::testing;

namespace {

// Expression template: the named program variables become value math
// variables of the same name in lowercase.
Expr templ(const std::string& text, std::set<std::string> metas) {
  Expr e = parse_expr(text);
  walk_mut(e, [&](Expr& x) {
    if (x.kind == Kind::Var && metas.count(x.text)) {
      std::string n = x.text;
      for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      x = make_mathvar(n, MathSort::Value);
    }
    return true;
  });
  return e;
}

const RuleDef& local_rule(const std::vector<Definition>& defs, const std::string& name) {
  for (const auto& d : defs)
    if (const auto* r = std::get_if<RefactoringDef>(&d); r && r->name == name) return r->chain.at(0).rule;
  throw Error("no rule " + name);
}

std::vector<Definition> local_defs() { return parse_refl(slurp(source_path("definitions/local.refl"))); }

const SchemeDef& scheme(const std::vector<Definition>& defs, const std::string& name) {
  for (const auto& d : defs)
    if (const auto* s = std::get_if<SchemeDef>(&d); s && s->name == name) return *s;
  throw Error("no scheme " + name);
}

std::vector<std::string> tags(const ProofResult& r) {
  std::vector<std::string> out;
  for (const auto& t : r.trace) out.push_back(t.tag + "@" + side_name(t.side));
  return out;
}

Expr random_ground(std::mt19937_64& rng) { return random_arguments(1, rng).at(0); }

SourceModule module_text(const std::string& text) { return parse_module(text); }

}  // namespace

TEST_CASE("verifier: extract_listhead goal is the paper-shaped eq configuration and proves in five steps") {
  auto defs = local_defs();
  ProofGoal g = goal_from_rule(local_rule(defs, "extract_listhead"));
  CHECK(print(g.lhs.cfg1.code) == "[h | t]");
  CHECK(print(g.lhs.cfg2.code) == "begin v = h, [v | t] end");
  CHECK(g.lhs.cfg1.env.frame == "e1");
  CHECK(g.lhs.cfg2.env.frame == "e1");
  CHECK(g.lhs.cfg1.defs.frame == "d1");
  REQUIRE(g.condition.size() == 1);
  CHECK(to_string(g.condition[0]) == "fresh(v)");
  CHECK(g.unaxiomatised.empty());
  auto t0 = std::chrono::steady_clock::now();
  ProofResult r = scc_prove(g);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.status == ProofResult::Status::Proved);
  CHECK(tags(r) == std::vector<std::string>{"R1@cfg2", "R2@cfg2", "AX-fresh@cfg2", "R3@cfg2", "SUBSUME@cfg"});
  CHECK(r.derive_steps <= 16);
  CHECK(secs < 5.0);
  CHECK(replay(g, r));
  std::string text = format_trace(r);
  CHECK(text.find("3. AX-fresh @ cfg2 | constraints: v notin keys(e1), isVar(v)") != std::string::npos);
  CHECK(text.substr(text.size() - 4) == "QED\n");
}

TEST_CASE("verifier: add_module_qualifier proves through the qualified-call axiom") {
  auto defs = local_defs();
  ProofGoal g = goal_from_rule(local_rule(defs, "add_module_qualifier"));
  CHECK(print(g.lhs.cfg2.code) == "m:f(a..)");
  CHECK_FALSE(g.notes.empty());
  ProofResult r = scc_prove(g);
  CHECK(r.status == ProofResult::Status::Proved);
  CHECK(replay(g, r));
  // Without the module equation the qualified call is a foreign one.
  g.condition.pop_back();
  CHECK(scc_prove(g).status == ProofResult::Status::Unknown);
}

TEST_CASE("verifier: listcomprehension_to_map stays unknown and lists the unaxiomatised condition") {
  auto defs = local_defs();
  ProofGoal g = goal_from_rule(local_rule(defs, "listcomprehension_to_map"));
  REQUIRE(g.unaxiomatised.size() == 1);
  CHECK(g.unaxiomatised[0].find("intersect") != std::string::npos);
  ProofResult r = scc_prove(g);
  CHECK(r.status == ProofResult::Status::Unknown);
  CHECK_FALSE(r.frontier.empty());
  CHECK(format_trace(r).find("UNKNOWN depth=") != std::string::npos);
}

TEST_CASE("verifier: rule goals need local rules") {
  auto defs = parse_refl(slurp(source_path("definitions/rename_extensive.refl")));
  bool threw = false;
  for (const auto& d : defs)
    if (const auto* r = std::get_if<RefactoringDef>(&d))
      for (const auto& s : r->chain)
        if (s.rule.modifier) {
          CHECK_THROWS_AS(goal_from_rule(s.rule), VerifyError);
          threw = true;
        }
  CHECK(threw);
}

TEST_CASE("verifier: dataflow goals for fun2value and common_tail") {
  auto defs = parse_refl(slurp(source_path("definitions/schemes.refl")));
  auto f2v = goals_from_dataflow(scheme(defs, "fun2value"));
  REQUIRE(f2v.size() == 2);
  CHECK(print(f2v[0].lhs.cfg1.code) == "(fun() -> e end)()");
  CHECK(print(f2v[1].lhs.cfg1.code) == "apply(fun() -> e end, [])");
  for (const auto& g : f2v) {
    CHECK(print(g.lhs.cfg2.code) == "e");
    REQUIRE(g.condition.size() == 1);
    CHECK(to_string(g.condition[0]) == "pure(e)");
    ProofResult r = scc_prove(g);
    CHECK(r.status == ProofResult::Status::Proved);
    CHECK(replay(g, r));
  }
  auto ct = goals_from_dataflow(scheme(defs, "common_tail"));
  REQUIRE(ct.size() == 1);
  CHECK(print(ct[0].lhs.cfg1.code) == "[x | xs]");
  CHECK(print(ct[0].lhs.cfg2.code) == "[x | xs]");
  ProofResult r = scc_prove(ct[0]);
  CHECK(r.status == ProofResult::Status::Proved);
  CHECK(r.derive_steps == 0);
  CHECK_THROWS_AS(goals_from_dataflow(scheme(defs, "rename_function")), VerifyError);
}

TEST_CASE("verifier: interpreter examples") {
  Env env;
  env.entries.emplace_back(make_var("X"), make_int(1));
  Defs defs = defs_of(module_text("-module(t).\nf(A) -> A + 1.\n"));
  InterpResult r = interpret(parse_expr("[f(X) | [2, 3]]"), env, defs, 100);
  REQUIRE(r.status == InterpResult::Status::Value);
  CHECK(print(r.value) == "[2, 2, 3]");
  r = interpret(parse_expr("case a of b -> c end"), env, defs, 100);
  CHECK(r.status == InterpResult::Status::Stuck);
  Defs loop = defs_of(module_text("-module(t).\nf(A) -> f(A).\n"));
  r = interpret(parse_expr("f(1)"), Env{}, loop, 50);
  CHECK(r.status == InterpResult::Status::Cutoff);
  r = interpret(parse_expr("[{X, X + 1} || X <- [1, 2]]"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "[{1, 2}, {2, 3}]");
  r = interpret(parse_expr("lists:map(fun(X) -> X * 2 end, [1, 2])"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "[2, 4]");
  r = interpret(parse_expr("begin X = 2, Y = X + 1, {X, Y} end"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "{2, 3}");
  r = interpret(parse_expr("apply(fun(A, B) -> B end, [1, 2])"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "2");
  r = interpret(parse_expr("{atom_to_list(ab), length([a])}"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "{[97, 98], 1}");
  r = interpret(parse_expr("[X || X <- [1, 2, 3], X > 1]"), Env{}, Defs{}, 200);
  CHECK(print(r.value) == "[2, 3]");
}

TEST_CASE("verifier: application goals on apple are proved and a wrong result is disproved") {
  SourceModule before = parse_module(slurp(source_path("samples/apple.erl")));
  SourceModule after = module_text(
      "-module(apple).\n-export([f/0]).\nf() ->\n    X = apple,\n    N = length([1, 2, 3]),\n    {atom_to_list(X), N}.\n");
  auto goals = goals_from_application(before, after);
  REQUIRE(goals.size() == 1);
  ProofResult r = scc_prove(goals[0]);
  CHECK(r.status == ProofResult::Status::Proved);
  CHECK(replay(goals[0], r));
  SourceModule wrong = module_text("-module(apple).\n-export([f/0]).\nf() -> {[112], 3}.\n");
  r = scc_prove(goals_from_application(before, wrong)[0]);
  CHECK(r.status == ProofResult::Status::Disproved);
  CHECK_FALSE(r.counterexample.empty());
  CHECK(dynamic_verify(before, wrong, 5, 1).divergences == 5);
  SourceModule other = module_text("-module(apple).\n-export([g/0]).\ng() -> 1.\n");
  CHECK_THROWS_AS(goals_from_application(before, other), VerifyError);
}

TEST_CASE("verifier: recursion closes by circularity") {
  SourceModule before = module_text("-module(r).\n-export([len/1]).\nlen([]) -> 0;\nlen([_ | T]) -> 1 + len(T).\n");
  SourceModule after = module_text(
      "-module(r).\n-export([len/1]).\nlen([]) -> 0;\nlen([_ | T]) -> begin N = len(T), 1 + N end.\n");
  auto goals = goals_from_application(before, after);
  ProofResult r = scc_prove(goals[0]);
  CHECK(r.status == ProofResult::Status::Proved);
  CHECK(format_trace(r).find("CIRC") != std::string::npos);
  CHECK(replay(goals[0], r));
}

TEST_CASE("verifier: entailment") {
  ProofGoal g;
  g.lhs.cfg1 = Config{templ("[H | T]", {"H", "T"}), Env{{}, "e1"}, Defs{}};
  g.lhs.cfg2 = g.lhs.cfg1;
  PurePattern q = rhs_pattern(g);
  CHECK(entails(g.lhs, {}, q));
  EqConfig different = g.lhs;
  different.cfg2.env.frame = "e3";
  CHECK_FALSE(entails(different, {}, q));
  // Weakening: dropping a conjunct keeps entailment.
  Expr x = make_mathvar("x", MathSort::Value);
  Expr y = make_mathvar("y", MathSort::Value);
  Constraint a{CKind::Neq, {x, y}, {}, 0};
  Constraint b = is_var_c(make_mathvar("v", MathSort::Expr));
  q.condition = {a};
  CHECK(entails(g.lhs, {a, b}, q));
  q.condition = {a, b};
  CHECK_FALSE(entails(g.lhs, {a}, q));
  // x /= y does not entail x = y.
  q.condition = {Constraint{CKind::Eq, {x, y}, {}, 0}};
  CHECK_FALSE(entails(g.lhs, {a}, q));
}

TEST_CASE("verifier: aggregation doubles the catalog and keeps the other cell") {
  auto rules = semantics_rules();
  CHECK(rules.size() == 11);
  auto agg = aggregate(rules);
  REQUIRE(agg.size() == 2 * rules.size());
  std::mt19937_64 rng(7);
  const char* codes[] = {"begin X = 1, X end", "begin 1 end", "case a of a -> b end", "X", "X = 3",
                         "f(1)",               "(fun() -> 1 end)()", "apply(fun(A) -> A end, [2])",
                         "[f(1) | []]",        "1 + 2", "[A || A <- [1]]"};
  Defs defs = defs_of(module_text("-module(t).\nf(A) -> {A}.\n"));
  int cases = 0;
  for (int i = 0; i < 150; ++i) {
    for (const auto& r : agg) {
      EqConfig s;
      s.cfg1 = Config{parse_expr(codes[rng() % 11]), Env{{{make_var("X"), random_ground(rng)}}, ""}, defs};
      s.cfg2 = Config{parse_expr(codes[rng() % 11]), Env{{{make_var("X"), random_ground(rng)}}, ""}, defs};
      EqConfig out;
      RuleResult res = apply_to(r, s, {}, &out);
      if (res.status != RuleResult::Status::Applied) continue;
      const Config& kept = r.side == Side::Cfg1 ? out.cfg2 : out.cfg1;
      const Config& orig = r.side == Side::Cfg1 ? s.cfg2 : s.cfg1;
      CHECK(structurally_equal(kept.code, orig.code));
      CHECK(kept.env.entries.size() == orig.env.entries.size());
      ++cases;
    }
  }
  CHECK(cases > 200);
}

TEST_CASE("property: symbolic rule steps agree with concrete steps on ground instances") {
  struct Case {
    const char* tag;
    const char* code;
    bool env_x;
  };
  const Case cases[] = {
      {"R1", "begin X = V, {X, W} end", false},
      {"R2", "begin V end", false},
      {"R2", "begin V, W end", false},
      {"R3", "case V of X -> {X, W} end", false},
      {"R4", "X", true},
      {"R5", "X = V", false},
      {"R6", "f(V)", false},
      {"R7", "(fun(A) -> [A, W] end)(V)", false},
      {"R8", "apply(fun(A) -> A end, [V])", false},
      {"R9(R6)", "[f(V) | W]", false},
      {"R9(R7)", "{V, (fun(A) -> A end)(W)}", false},
      {"R10", "[V] ++ W", false},
      {"R11", "[A || A <- [V, W]]", false},
      {"R6", "t:f(V)", false},
  };
  Defs defs = defs_of(module_text("-module(t).\nf(A) -> {A, A}.\n"));
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (const auto& c : cases) {
    Config sym{templ(c.code, {"V", "W"}), Env{}, defs};
    if (c.env_x) sym.env.entries.emplace_back(make_var("X"), make_mathvar("v", MathSort::Value));
    RuleResult s = step(sym, {});
    REQUIRE_MESSAGE(s.status == RuleResult::Status::Applied, std::string(c.code));
    CHECK_MESSAGE(s.tag == c.tag, std::string(c.code));
    for (int i = 0; i < 100; ++i) {
      Valuation rho;
      rho.terms["v"] = random_ground(rng);
      rho.terms["w"] = random_ground(rng);
      Config ground = instantiate_config(sym, rho);
      RuleResult g = step(ground, {});
      REQUIRE(g.status == RuleResult::Status::Applied);
      Config expect = instantiate_config(s.branches[0].cfg, rho);
      CHECK_MESSAGE(structurally_equal(g.branches[0].cfg.code, expect.code), std::string(c.code));
      CHECK(g.branches[0].cfg.env.entries.size() == expect.env.entries.size());
      CHECK(g.tag == s.tag);
      ++checked;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("property: satisfaction of basic patterns") {
  const char* patterns[] = {"[V | W]", "{V, f(W), V}", "case V of a -> W end", "begin X = V, [X | W] end"};
  std::mt19937_64 rng(99);
  int cases = 0;
  for (int i = 0; i < 1000; ++i) {
    Config pi{templ(patterns[i % 4], {"V", "W"}), Env{{}, "e1"}, Defs{}};
    Valuation rho;
    rho.terms["v"] = random_ground(rng);
    rho.terms["w"] = random_ground(rng);
    rho.envs["e1"] = Env{{{make_var("Y"), random_ground(rng)}}, ""};
    Config gamma = instantiate_config(pi, rho);
    CHECK(satisfies(gamma, rho, pi));
    // Perturbing one subterm falsifies it.
    Config bad = gamma;
    bad.code.kids[0] = make_tuple({bad.code.kids[0]});
    CHECK_FALSE(satisfies(bad, rho, pi));
    Config bad_env = gamma;
    bad_env.env.entries[0].second = make_tuple({bad_env.env.entries[0].second});
    CHECK_FALSE(satisfies(bad_env, rho, pi));
    ++cases;
  }
  CHECK(cases == 1000);
}

TEST_CASE("property: ground goals agree with the interpreter and proofs replay") {
  // Random ground expressions: equal results are proved, unequal disproved.
  const char* forms[] = {"A + B", "B + A", "hd([A, B])", "length([A, B])", "(fun(X) -> X + B end)(A)",
                         "case A of 0 -> B; _ -> A + B end", "[X + A || X <- [B]]", "apply(fun(X) -> X end, [A + B])"};
  std::mt19937_64 rng(5);
  int proved = 0, disproved = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string a = std::to_string(rng() % 5), b = std::to_string(rng() % 5);
    auto inst = [&](const char* f) {
      std::string s = f;
      for (std::size_t p; (p = s.find('A')) != std::string::npos;) s.replace(p, 1, a);
      for (std::size_t p; (p = s.find('B')) != std::string::npos;) s.replace(p, 1, b);
      return s;
    };
    std::string l = inst(forms[rng() % 8]), r = inst(forms[rng() % 8]);
    SourceModule m1 = module_text("-module(q).\n-export([f/0]).\nf() -> " + l + ".\n");
    SourceModule m2 = module_text("-module(q).\n-export([f/0]).\nf() -> " + r + ".\n");
    ProofGoal g = goals_from_application(m1, m2).at(0);
    ProofResult res = scc_prove(g);
    InterpResult v1 = interpret(parse_expr("f()"), Env{}, defs_of(m1), 1000);
    InterpResult v2 = interpret(parse_expr("f()"), Env{}, defs_of(m2), 1000);
    bool same = v1.status == v2.status && structurally_equal(v1.value, v2.value);
    if (same) {
      CHECK_MESSAGE(res.status == ProofResult::Status::Proved, l << " vs " << r);
      CHECK(replay(g, res));
      ++proved;
    } else {
      CHECK_MESSAGE(res.status == ProofResult::Status::Disproved, l << " vs " << r);
      ++disproved;
    }
  }
  CHECK(proved > 100);
  CHECK(disproved > 100);
  CHECK(proved + disproved == 1000);
}

TEST_CASE("property: proved local rules hold on their applications") {
  // Soundness spot-check: the rewritten samples agree under execution.
  Library lib = library_of({"local.refl"});
  struct App {
    const char* sample;
    const char* rule;
    const char* target;
  };
  const App apps[] = {{"listhead", "extract_listhead", "[g(1) | T]"},
                      {"m", "add_module_qualifier", "foo(1, 2)"},
                      {"listcomp", "listcomprehension_to_map", "[{X, X + 1} || X <- L]"}};
  for (const auto& a : apps) {
    SemanticGraph g = sample_graph(a.sample);
    SourceModule before = g.module(0);
    Engine eng(g, lib);
    Outcome o = eng.run(a.rule, find_printed(g, a.target), {});
    REQUIRE_MESSAGE(o.ok, o.reason);
    SourceModule after = parse_module(g.render(0));
    DynamicReport rep = dynamic_verify(before, after, 100, 11);
    CHECK_MESSAGE(rep.divergences == 0, std::string(a.rule));
    CHECK(rep.runs >= 100);
  }
}
