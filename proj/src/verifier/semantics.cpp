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

#include <algorithm>

#include "internal.hpp"

namespace refl {

using namespace verify_detail;

namespace {

using Status = RuleResult::Status;
using Cs = std::vector<Constraint>;

RuleResult no_match() { return RuleResult{}; }

RuleResult applied(Config c, std::string tag) {
  RuleResult r;
  r.status = Status::Applied;
  r.tag = std::move(tag);
  r.branches.push_back(Branch{std::move(c), {}, {}});
  return r;
}

RuleResult stuck(std::string why, std::string tag, bool definite = false) {
  RuleResult r;
  r.status = Status::Stuck;
  r.definite = definite;
  r.tag = std::move(tag);
  r.reason = std::move(why);
  return r;
}

// An undecided match: the narrowing alternative and its negation.
RuleResult undecided(const MatchResult& m, const std::optional<Constraint>& negative, const Config& c, std::string tag,
                     std::string why) {
  RuleResult r;
  r.status = Status::Undecided;
  r.tag = std::move(tag);
  r.reason = std::move(why);
  if (!m.narrowing.empty()) {
    r.branches.push_back(Branch{c, {}, m.narrowing});
    Branch neg{c, {}, {}};
    if (negative) neg.added.push_back(*negative);
    r.branches.push_back(std::move(neg));
  }
  return r;
}

// Narrowing of a value math variable into the empty or a non-empty list.
RuleResult undecided_list(const Expr& v, const Config& c, std::string tag) {
  RuleResult r;
  r.status = Status::Undecided;
  r.tag = std::move(tag);
  r.reason = "unknown list " + print(v);
  if (v.kind != Kind::MathVar || v.value != static_cast<std::int64_t>(MathSort::Value)) return r;
  r.branches.push_back(Branch{c, {}, {{v.text, make_nil()}}});
  r.branches.push_back(
      Branch{c, {}, {{v.text, make_cons(make_mathvar("?0", MathSort::Value), make_mathvar("?1", MathSort::Value))}}});
  return r;
}

bool all_values(const std::vector<Expr>& v, std::size_t from) {
  for (std::size_t i = from; i < v.size(); ++i)
    if (!is_value(v[i])) return false;
  return true;
}

bool has_seq(const std::vector<Expr>& v, std::size_t from) {
  for (std::size_t i = from; i < v.size(); ++i)
    if (v[i].kind == Kind::MathVar && v[i].value == static_cast<std::int64_t>(MathSort::Seq)) return true;
  return false;
}

Expr with_body(const Expr& clause, const std::vector<std::pair<Expr, Expr>>& b) {
  std::vector<Expr> body;
  for (const auto& x : clause_body(clause)) body.push_back(subst_vars(x, b));
  return seq_to_code(std::move(body));
}

// Selects the first clause whose patterns match the arguments; clause
// variables start unbound.
RuleResult select_clause(const std::vector<const Expr*>& clauses, const std::vector<Expr>& args, const Config& c,
                         const Cs& cs, const std::string& tag) {
  Expr actual = make_tuple(args);
  for (const Expr* cl : clauses) {
    if (clause_patterns(*cl).size() != args.size()) continue;
    Expr formal = make_tuple(clause_patterns(*cl));
    std::optional<Constraint> neg;
    MatchResult m = match_with_negative(actual, formal, Env{}, cs, &neg);
    if (m.status == MatchResult::Status::No) continue;
    if (m.status == MatchResult::Status::Undecided)
      return undecided(m, neg, c, tag, "clause selection for " + print(actual));
    Config out = c;
    out.code = with_body(*cl, m.bindings);
    return applied(std::move(out), tag);
  }
  return stuck("no clause matches " + print(actual), tag, true);
}

// begin pat = exp, exps end => case exp of pat -> begin exps end end
RuleResult r1(const Config& c, const Cs&) {
  const Expr& e = c.code;
  if (e.kind != Kind::Block || e.kids.size() < 2 || e.kids[0].kind != Kind::Match) return no_match();
  std::vector<Expr> rest(e.kids.begin() + 1, e.kids.end());
  Config out = c;
  out.code = make_case(e.kids[0].kids[1], {make_clause(make_none(), {e.kids[0].kids[0]}, {make_block(std::move(rest))})});
  return applied(std::move(out), "R1");
}

// begin e end => e; begin v, exps end => begin exps end
RuleResult r2(const Config& c, const Cs&) {
  const Expr& e = c.code;
  if (e.kind != Kind::Block) return no_match();
  Config out = c;
  if (e.kids.size() == 1) {
    out.code = e.kids[0];
    return applied(std::move(out), "R2");
  }
  if (e.kids.size() >= 2 && is_value(e.kids[0])) {
    out.code = make_block(std::vector<Expr>(e.kids.begin() + 1, e.kids.end()));
    return applied(std::move(out), "R2");
  }
  return no_match();
}

// case v of p1 -> b1; ... end, first matching clause in source order
RuleResult r3(const Config& c, const Cs& cs) {
  const Expr& e = c.code;
  if (e.kind != Kind::Case || !is_value(e.kids[0])) return no_match();
  const Expr& v = e.kids[0];
  for (std::size_t i = 1; i < e.kids.size(); ++i) {
    const Expr& cl = e.kids[i];
    if (cl.kind != Kind::Clause || clause_patterns(cl).size() != 1) return stuck("malformed case clause", "R3");
    std::optional<Constraint> neg;
    MatchResult m = match_with_negative(v, clause_patterns(cl)[0], c.env, cs, &neg);
    if (m.status == MatchResult::Status::No) continue;
    if (m.status == MatchResult::Status::Undecided)
      return undecided(m, neg, c, "R3", "isMatching(" + print(v) + ", " + print(clause_patterns(cl)[0]) + ")");
    Config out = c;
    out.code = with_body(cl, m.bindings);
    return applied(std::move(out), "R3");
  }
  return stuck("no case clause matches " + print(v), "R3", true);
}

// Variable lookup.
RuleResult r4(const Config& c, const Cs& cs) {
  const Expr& e = c.code;
  if (e.kind != Kind::Var) return no_match();
  if (const Expr* v = c.env.lookup(e)) {
    Config out = c;
    out.code = *v;
    return applied(std::move(out), "R4");
  }
  if (c.env.frame.empty() || has_constraint(cs, not_in_keys(e, c.env.frame)))
    return stuck("unbound variable " + e.text, "R4");
  Config out = c;
  out.code = make_mathvar(c.env.frame + "(" + e.text + ")", MathSort::Value);
  return applied(std::move(out), "R4");
}

// pat = v extends the environment.
RuleResult r5(const Config& c, const Cs& cs) {
  const Expr& e = c.code;
  if (e.kind != Kind::Match || !is_value(e.kids[1])) return no_match();
  std::optional<Constraint> neg;
  MatchResult m = match_with_negative(e.kids[1], e.kids[0], c.env, cs, &neg);
  if (m.status == MatchResult::Status::No) return stuck("no match of " + print(e.kids[1]), "R5", true);
  if (m.status == MatchResult::Status::Undecided) return undecided(m, neg, c, "R5", "match " + print(e));
  Config out = c;
  out.code = e.kids[1];
  for (auto& kv : m.bindings) out.env.entries.push_back(std::move(kv));
  return applied(std::move(out), "R5");
}

bool is_builtin(const std::string& name, std::size_t arity) {
  return (name == "atom_to_list" || name == "length" || name == "hd" || name == "tl") && arity == 1;
}

bool is_remote_builtin(const Expr& e) {
  return e.kids[0].kind == Kind::Atom && e.kids[1].kind == Kind::Atom && e.kids[0].text == "lists" &&
         e.kids[1].text == "map" && e.kids.size() == 4;
}

bool own_module(const Expr& m, const Defs& d, const Cs& cs) {
  if (m.kind == Kind::Atom) return !d.module.empty() && m.text == d.module;
  if (m.kind != Kind::MathVar || d.frame.empty()) return false;
  return has_constraint(cs, Constraint{CKind::Eq, {m, module_of_defs(d.frame)}, {}, 0});
}

// Call unfolding through the definitions cell; a qualified call naming the
// module of the definitions acts as the local call.
RuleResult r6(const Config& c, const Cs& cs) {
  const Expr& e = c.code;
  if (e.kind == Kind::RemoteCall) {
    if (is_remote_builtin(e) || !own_module(e.kids[0], c.defs, cs)) return no_match();
    Config out = c;
    out.code = make_call(e.kids[1], std::vector<Expr>(e.kids.begin() + 2, e.kids.end()));
    return applied(std::move(out), "R6");
  }
  if (e.kind != Kind::Call || e.kids[0].kind != Kind::Atom) return no_match();
  const std::string& name = e.kids[0].text;
  std::size_t arity = e.kids.size() - 1;
  if (name == "apply" || is_builtin(name, arity) || !all_values(e.kids, 1)) return no_match();
  if (has_seq(e.kids, 1)) return stuck("call with unknown arity", "R6");
  const Expr* f = c.defs.find(name, arity);
  if (!f) return stuck("undefined function " + name + "/" + std::to_string(arity), "R6");
  std::vector<const Expr*> clauses;
  for (const auto& cl : f->kids) clauses.push_back(&cl);
  return select_clause(clauses, std::vector<Expr>(e.kids.begin() + 1, e.kids.end()), c, cs, "R6");
}

// (fun(ps) -> body end)(vs)
RuleResult r7(const Config& c, const Cs& cs) {
  const Expr& e = c.code;
  if (e.kind != Kind::Call || e.kids[0].kind != Kind::Fun || !all_values(e.kids, 1)) return no_match();
  if (has_seq(e.kids, 1)) return stuck("call with unknown arity", "R7");
  std::vector<const Expr*> clauses;
  for (const auto& cl : e.kids[0].kids)
    if (cl.kind == Kind::Clause) clauses.push_back(&cl);
  return select_clause(clauses, std::vector<Expr>(e.kids.begin() + 1, e.kids.end()), c, cs, "R7");
}

// apply(F, [vs]) => F(vs); apply(M, F, [vs]) => M:F(vs)
RuleResult r8(const Config& c, const Cs&) {
  const Expr& e = c.code;
  if (e.kind != Kind::Call || e.kids[0].kind != Kind::Atom || e.kids[0].text != "apply") return no_match();
  if ((e.kids.size() != 3 && e.kids.size() != 4) || !all_values(e.kids, 1)) return no_match();
  const Expr& list = e.kids.back();
  if (!is_proper_list(list)) {
    if (list.kind == Kind::MathVar) return undecided_list(list, c, "R8");
    return stuck("apply needs a proper list", "R8");
  }
  const Expr* tail = nullptr;
  std::vector<Expr> args;
  for (const Expr* x : list_elements(list, &tail)) args.push_back(*x);
  Config out = c;
  out.code = e.kids.size() == 3 ? make_call(e.kids[1], std::move(args)) : make_remote(e.kids[1], e.kids[2], std::move(args));
  return applied(std::move(out), "R8");
}

RuleResult r1_to_r11_at(const Config& c, const Cs& cs);

enum class PosKind : std::uint8_t { Value, Redex, Stuck };
struct Pos {
  PosKind kind = PosKind::Stuck;
  std::vector<std::size_t> path;
};

Pos decompose(const Expr& e) {
  if (is_value(e)) return Pos{PosKind::Value, {}};
  auto strict = [&](std::size_t i, Pos* out) {
    Pos p = decompose(e.kids[i]);
    if (p.kind == PosKind::Value) return false;
    p.path.insert(p.path.begin(), i);
    *out = std::move(p);
    return true;
  };
  Pos p;
  switch (e.kind) {
    case Kind::Var:
      return Pos{PosKind::Redex, {}};
    case Kind::Cons:
    case Kind::Tuple:
      for (std::size_t i = 0; i < e.kids.size(); ++i)
        if (strict(i, &p)) return p;
      return Pos{PosKind::Stuck, {}};
    case Kind::BinOp:
    case Kind::RemoteCall:
      for (std::size_t i = 0; i < e.kids.size(); ++i)
        if (strict(i, &p)) return p;
      return Pos{PosKind::Redex, {}};
    case Kind::Call:
      for (std::size_t i = e.kids[0].kind == Kind::Atom ? 1 : 0; i < e.kids.size(); ++i)
        if (strict(i, &p)) return p;
      return Pos{PosKind::Redex, {}};
    case Kind::Match:
      if (strict(1, &p)) return p;
      return Pos{PosKind::Redex, {}};
    case Kind::Case:
      if (strict(0, &p)) return p;
      return Pos{PosKind::Redex, {}};
    case Kind::Block:
      if (e.kids.size() == 1 || e.kids[0].kind == Kind::Match) return Pos{PosKind::Redex, {}};
      if (strict(0, &p)) return p;
      return Pos{PosKind::Redex, {}};
    case Kind::ListComp:
      if (e.kids.size() > 1 && e.kids[1].kind == Kind::Generator) {
        Pos q = decompose(e.kids[1].kids[1]);
        if (q.kind != PosKind::Value) {
          q.path.insert(q.path.begin(), {1, 1});
          return q;
        }
      }
      return Pos{PosKind::Redex, {}};
    default:
      return Pos{PosKind::Stuck, {}};
  }
}

// Left-to-right congruence: the redex below the root, reduced in place.
RuleResult r9(const Config& c, const Cs& cs) {
  Pos p = decompose(c.code);
  if (p.kind != PosKind::Redex || p.path.empty()) return no_match();
  Config sub = c;
  sub.code = at(c.code, p.path);
  RuleResult r = r1_to_r11_at(sub, cs);
  if (r.status == Status::NoMatch) return r;
  for (auto& b : r.branches) b.cfg.code = replace_at(c.code, p.path, std::move(b.cfg.code));
  r.tag = "R9(" + r.tag + ")";
  r.path = std::move(p.path);
  return r;
}

std::optional<Expr> char_list(const std::string& s) {
  std::vector<Expr> cs;
  for (unsigned char ch : s) cs.push_back(make_int(ch));
  return make_list(std::move(cs));
}

std::optional<bool> compare(const std::string& op, const Expr& a, const Expr& b) {
  if (op == "==" || op == "=:=") return structurally_equal(a, b);
  if (op == "/=" || op == "=/=") return !structurally_equal(a, b);
  if (a.kind != Kind::Integer || b.kind != Kind::Integer) return std::nullopt;
  if (op == "<") return a.value < b.value;
  if (op == ">") return a.value > b.value;
  if (op == "=<") return a.value <= b.value;
  if (op == ">=") return a.value >= b.value;
  return std::nullopt;
}

// Primitive operations: integer arithmetic, comparison, list append and a
// few built-in functions.
RuleResult r10(const Config& c, const Cs&) {
  const Expr& e = c.code;
  Config out = c;
  if (e.kind == Kind::BinOp) {
    const Expr& a = e.kids[0];
    const Expr& b = e.kids[1];
    if (!is_value(a) || !is_value(b)) return no_match();
    // Append moves one cons cell per step.
    if (e.text == "++") {
      if (a.kind == Kind::MathVar) return undecided_list(a, c, "R10");
      if (a.kind == Kind::Nil) {
        out.code = b;
        return applied(std::move(out), "R10");
      }
      if (a.kind != Kind::Cons) return stuck("bad append operand", "R10");
      out.code = make_cons(a.kids[0], make_binop("++", a.kids[1], b));
      return applied(std::move(out), "R10");
    }
    if (has_mathvars(a) || has_mathvars(b)) return stuck("symbolic operands of " + e.text, "R10");
    if (e.text == "+" || e.text == "-" || e.text == "*") {
      if (a.kind != Kind::Integer || b.kind != Kind::Integer) return stuck("bad arithmetic operands", "R10");
      std::int64_t v = e.text == "+" ? a.value + b.value : e.text == "-" ? a.value - b.value : a.value * b.value;
      out.code = make_int(v);
      return applied(std::move(out), "R10");
    }
    if (auto r = compare(e.text, a, b)) {
      out.code = make_atom(*r ? "true" : "false");
      return applied(std::move(out), "R10");
    }
    return stuck("unsupported operator " + e.text, "R10");
  }
  if (e.kind == Kind::Call && e.kids[0].kind == Kind::Atom && is_builtin(e.kids[0].text, e.kids.size() - 1)) {
    const Expr& a = e.kids[1];
    if (!is_value(a)) return no_match();
    const std::string& f = e.kids[0].text;
    if (f == "atom_to_list") {
      if (a.kind != Kind::Atom) return stuck("atom_to_list needs an atom", "R10");
      out.code = *char_list(a.text);
    } else if (f == "length") {
      if (a.kind == Kind::MathVar) return undecided_list(a, c, "R10");
      if (!is_proper_list(a) || has_mathvars(a)) {
        const Expr* tail = nullptr;
        auto xs = list_elements(a, &tail);
        if (tail->kind == Kind::MathVar) return undecided_list(*tail, c, "R10");
        if (!is_proper_list(a)) return stuck("length needs a proper list", "R10");
      }
      const Expr* tail = nullptr;
      out.code = make_int(static_cast<std::int64_t>(list_elements(a, &tail).size()));
    } else {
      if (a.kind == Kind::MathVar) return undecided_list(a, c, "R10");
      if (a.kind != Kind::Cons) return stuck(f + " needs a non-empty list", "R10");
      out.code = f == "hd" ? a.kids[0] : a.kids[1];
    }
    return applied(std::move(out), "R10");
  }
  if (e.kind == Kind::RemoteCall && is_remote_builtin(e)) {
    if (!all_values(e.kids, 2)) return no_match();
    const Expr& fn = e.kids[2];
    const Expr& list = e.kids[3];
    if (list.kind == Kind::Nil) {
      out.code = make_nil();
    } else if (list.kind == Kind::Cons) {
      out.code = make_cons(make_call(fn, {list.kids[0]}), make_remote(e.kids[0], e.kids[1], {fn, list.kids[1]}));
    } else if (list.kind == Kind::MathVar) {
      return undecided_list(list, c, "R10");
    } else {
      return stuck("lists:map needs a list", "R10");
    }
    return applied(std::move(out), "R10");
  }
  return no_match();
}

// List comprehension unfolding, one qualifier at a time.
RuleResult r11(const Config& c, const Cs&) {
  const Expr& e = c.code;
  if (e.kind != Kind::ListComp) return no_match();
  const Expr& head = e.kids[0];
  Config out = c;
  if (e.kids.size() == 1) {
    out.code = make_list({head});
    return applied(std::move(out), "R11");
  }
  const Expr& q = e.kids[1];
  std::vector<Expr> rest(e.kids.begin() + 2, e.kids.end());
  if (q.kind == Kind::MathVar) return stuck("unknown qualifiers " + print(q), "R11");
  if (q.kind != Kind::Generator) {
    out.code = make_case(q, {make_clause(make_none(), {make_atom("true")}, {make_listcomp(head, rest)}),
                             make_clause(make_none(), {make_var("_")}, {make_nil()})});
    return applied(std::move(out), "R11");
  }
  const Expr& pat = q.kids[0];
  const Expr& list = q.kids[1];
  if (!is_value(list)) return no_match();
  if (list.kind == Kind::Nil) {
    out.code = make_nil();
    return applied(std::move(out), "R11");
  }
  if (list.kind == Kind::MathVar) return undecided_list(list, c, "R11");
  if (list.kind != Kind::Cons) return stuck("generator needs a list", "R11");
  std::vector<Expr> next{make_generator(pat, list.kids[1])};
  next.insert(next.end(), rest.begin(), rest.end());
  Expr first = make_case(list.kids[0], {make_clause(make_none(), {pat}, {make_listcomp(head, rest)}),
                                        make_clause(make_none(), {make_var("_")}, {make_nil()})});
  out.code = make_binop("++", std::move(first), make_listcomp(head, std::move(next)));
  return applied(std::move(out), "R11");
}

using RuleFn = RuleResult (*)(const Config&, const Cs&);

struct Entry {
  const char* tag;
  const char* description;
  RuleFn fn;
};

const Entry kRules[] = {
    {"R1", "block with a leading match becomes a case", r1},
    {"R2", "begin-end elimination", r2},
    {"R3", "case step on a matching clause", r3},
    {"R4", "variable lookup in the environment", r4},
    {"R5", "match extends the environment", r5},
    {"R6", "call unfolding through the definitions", r6},
    {"R7", "application of a fun expression", r7},
    {"R8", "apply desugaring", r8},
    {"R9", "left-to-right congruence", r9},
    {"R10", "primitive operations", r10},
    {"R11", "list comprehension unfolding", r11},
};

RuleResult r1_to_r11_at(const Config& c, const Cs& cs) {
  for (const auto& en : kRules) {
    if (en.fn == r9) continue;
    RuleResult r = en.fn(c, cs);
    if (r.status != Status::NoMatch) return r;
  }
  return no_match();
}

}  // namespace

std::optional<std::vector<std::size_t>> verify_detail::redex_path(const Expr& code) {
  Pos p = decompose(code);
  if (p.kind != PosKind::Redex) return std::nullopt;
  return p.path;
}

std::vector<ReachabilityRule> semantics_rules() {
  std::vector<ReachabilityRule> out;
  for (const auto& en : kRules) out.push_back(ReachabilityRule{en.tag, en.description, Side::Single, en.fn});
  return out;
}

std::vector<ReachabilityRule> aggregate(const std::vector<ReachabilityRule>& rules) {
  std::vector<ReachabilityRule> out;
  for (Side s : {Side::Cfg1, Side::Cfg2})
    for (const auto& r : rules) {
      ReachabilityRule a = r;
      a.side = s;
      out.push_back(std::move(a));
    }
  return out;
}

RuleResult apply_to(const ReachabilityRule& r, const EqConfig& s, const std::vector<Constraint>& cs, EqConfig* out) {
  if (r.side == Side::Single) throw VerifyError("apply_to needs an aggregated rule");
  const Config& c = r.side == Side::Cfg1 ? s.cfg1 : s.cfg2;
  RuleResult res = r.apply(c, cs);
  if (res.status == Status::Applied && out) {
    *out = s;
    (r.side == Side::Cfg1 ? out->cfg1 : out->cfg2) = res.branches[0].cfg;
  }
  return res;
}

RuleResult step(const Config& c, const std::vector<Constraint>& cs) {
  if (is_value(c.code)) return stuck("value", "");
  Pos p = decompose(c.code);
  if (p.kind == PosKind::Stuck) return stuck("no redex in " + print(c.code), "");
  RuleResult r = p.path.empty() ? r1_to_r11_at(c, cs) : r9(c, cs);
  if (r.status == Status::NoMatch) r = stuck("no rule applies to " + print(at(c.code, p.path)), "");
  if (r.status == Status::Stuck && !has_mathvars(at(c.code, p.path))) r.definite = true;
  return r;
}

std::optional<std::pair<Expr, std::vector<std::size_t>>> eliminate_block(const Expr& code) {
  std::optional<std::vector<std::size_t>> found;
  std::vector<std::size_t> path;
  std::function<void(const Expr&)> go = [&](const Expr& e) {
    if (found) return;
    if (e.kind == Kind::Block && e.kids.size() == 1) {
      found = path;
      return;
    }
    for (std::size_t i = 0; i < e.kids.size() && !found; ++i) {
      path.push_back(i);
      go(e.kids[i]);
      path.pop_back();
    }
  };
  go(code);
  if (!found) return std::nullopt;
  Expr inner = at(code, *found).kids[0];
  return std::make_pair(replace_at(code, *found, std::move(inner)), *found);
}

InterpResult interpret(const Expr& code, const Env& env, const Defs& defs, int fuel) {
  InterpResult out;
  Config c{code, env, defs};
  for (;;) {
    if (is_value(c.code)) {
      out.status = InterpResult::Status::Value;
      out.value = c.code;
      break;
    }
    if (out.steps >= fuel) {
      out.status = InterpResult::Status::Cutoff;
      break;
    }
    RuleResult r = step(c, {});
    if (r.status != Status::Applied) {
      out.status = InterpResult::Status::Stuck;
      out.reason = r.reason.empty() ? "undecided on a ground term" : r.reason;
      break;
    }
    c = std::move(r.branches[0].cfg);
    ++out.steps;
  }
  out.residual = std::move(c);
  return out;
}

}  // namespace refl
