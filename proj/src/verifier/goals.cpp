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
#include <cctype>

#include "internal.hpp"

namespace refl {

using namespace verify_detail;

namespace {

const char* const kEnv = "e1";
const char* const kDefs = "d1";

void binding_positions(const Expr& e, std::set<std::string>& out) {
  auto names = [&](const Expr& p) {
    walk(p, [&](const Expr& x) {
      if (x.kind == Kind::Var) out.insert(x.text);
      return true;
    });
  };
  walk(e, [&](const Expr& x) {
    if (x.kind == Kind::Match) names(x.kids[0]);
    if (x.kind == Kind::Generator) names(x.kids[0]);
    if (x.kind == Kind::Clause)
      for (const auto& p : clause_patterns(x)) names(p);
    return true;
  });
}

void metavars_of(const Expr& e, std::vector<std::string>& out) {
  walk(e, [&](const Expr& x) {
    if ((x.kind == Kind::Var && x.text != "_") || x.kind == Kind::VarList) out.push_back(x.text);
    return true;
  });
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Metavariables become math variables named by their lowercase initial, or
// the whole lowercase name where initials collide.
class Mathifier {
 public:
  Mathifier(const std::vector<std::string>& metas, std::set<std::string> binding) : binding_(std::move(binding)) {
    std::vector<std::string> uniq;
    for (const auto& m : metas)
      if (std::find(uniq.begin(), uniq.end(), m) == uniq.end()) uniq.push_back(m);
    std::map<std::string, int> initials;
    for (const auto& m : uniq) ++initials[lower(m.substr(0, 1))];
    std::set<std::string> used{kEnv, kDefs, "c2", "e2"};
    for (const auto& m : uniq) {
      std::string n = lower(m.substr(0, 1));
      if (initials[n] > 1 || used.count(n)) n = lower(m);
      while (used.count(n)) n += "'";
      used.insert(n);
      names_[m] = n;
    }
  }

  Expr var(const std::string& meta, bool list) const {
    MathSort sort = list ? MathSort::Seq : binding_.count(meta) ? MathSort::Expr : MathSort::Value;
    return make_mathvar(names_.at(meta), sort);
  }

  Expr operator()(const Expr& e) const {
    if (e.kind == Kind::Var && e.text != "_") return var(e.text, false);
    if (e.kind == Kind::VarList) return var(e.text, true);
    Expr out(e.kind, e.text, e.value);
    for (const auto& k : e.kids) out.kids.push_back((*this)(k));
    return out;
  }

  std::optional<Expr> term(const Term& t) const {
    switch (t.kind) {
      case Term::Kind::Meta:
        if (!names_.count(t.name)) return std::nullopt;
        return var(t.name, false);
      case Term::Kind::MetaList:
        if (!names_.count(t.name)) return std::nullopt;
        return var(t.name, true);
      case Term::Kind::Atom:
        return make_atom(t.name);
      case Term::Kind::Int:
        return make_int(t.value);
      default:
        return std::nullopt;
    }
  }

 private:
  std::set<std::string> binding_;
  std::map<std::string, std::string> names_;
};

Expr code_of(const Expr& pattern, const Mathifier& m) {
  if (pattern.kind == Kind::Seq) {
    std::vector<Expr> items;
    for (const auto& k : pattern.kids) items.push_back(m(k));
    return seq_to_code(std::move(items));
  }
  return m(pattern);
}

void translate(const Cond& c, const Mathifier& m, ProofGoal& g) {
  auto drop = [&] { g.unaxiomatised.push_back(print_cond(c)); };
  switch (c.kind) {
    case Cond::Kind::And:
      translate(c.kids[0], m, g);
      translate(c.kids[1], m, g);
      return;
    case Cond::Kind::Pred: {
      const Term& t = c.lhs;
      if (t.kind != Term::Kind::Call || t.args.size() != 1) return drop();
      auto x = m.term(t.args[0]);
      if (!x) return drop();
      if (t.name == "fresh") {
        g.condition.push_back(fresh_c(*x, kEnv));
      } else if (t.name == "pure") {
        g.condition.push_back(Constraint{CKind::Pure, {*x}, {}, 0});
      } else if (t.name == "atom") {
        g.condition.push_back(Constraint{CKind::IsAtom, {*x}, {}, 0});
      } else if (t.name == "is_var") {
        g.condition.push_back(is_var_c(*x));
      } else {
        return drop();
      }
      return;
    }
    case Cond::Kind::Assign: {
      auto x = m.term(c.lhs);
      const Term& r = c.rhs;
      if (x && r.kind == Term::Kind::Call && r.name == "module" && r.args.size() == 1 &&
          r.args[0].kind == Term::Kind::This) {
        g.condition.push_back(Constraint{CKind::Eq, {*x, module_of_defs(kDefs)}, {}, 0});
        g.notes.push_back("module(THIS) is read through the qualified-call axiom of the definitions cell");
        return;
      }
      if (auto y = m.term(r); x && y) {
        g.condition.push_back(Constraint{CKind::Eq, {*x, *y}, {}, 0});
        return;
      }
      return drop();
    }
    case Cond::Kind::Eq:
    case Cond::Kind::Neq: {
      auto x = m.term(c.lhs);
      auto y = m.term(c.rhs);
      if (!x || !y) return drop();
      g.condition.push_back(Constraint{c.kind == Cond::Kind::Eq ? CKind::Eq : CKind::Neq, {*x, *y}, {}, 0});
      return;
    }
    default:
      return drop();
  }
}

Expr substitute_meta(const Expr& e, const std::string& meta, const Expr& by) {
  if (e.kind == Kind::Var && e.text == meta) return by;
  Expr out = e;
  for (auto& k : out.kids) k = substitute_meta(k, meta, by);
  return out;
}

Expr single(const Expr& pattern) {
  if (pattern.kind == Kind::Seq && pattern.kids.size() == 1) return pattern.kids[0];
  if (pattern.kind == Kind::Seq) return make_block(pattern.kids);
  return pattern;
}

}  // namespace

std::string to_string(const ProofGoal& g) {
  std::string out = to_string(g.lhs);
  if (!g.condition.empty()) out += " /\\ " + to_string(g.condition);
  out += g.rhs == Criterion::SameState ? " => <<c2>code <e2>env ...>cfg1 <<c2>code <e2>env ...>cfg2"
                                       : " => <<c2>code ...>cfg1 <<c2>code ...>cfg2, c2 a value";
  return out;
}

PurePattern rhs_pattern(const ProofGoal& g) {
  PurePattern q;
  bool state = g.rhs == Criterion::SameState;
  Expr c2 = make_mathvar("c2", state ? MathSort::Expr : MathSort::Value);
  q.cfg1.code = c2;
  q.cfg2.code = c2;
  if (state) {
    q.cfg1.env = Env{{}, "e2"};
    q.cfg2.env = Env{{}, "e2"};
  }
  q.exists = {"c2", "e2"};
  return q;
}

ProofGoal goal_from_rule(const RuleDef& rule, const std::string& name) {
  if (rule.modifier) throw VerifyError("a proof goal needs a local rule without ON or IN");
  std::vector<std::string> metas;
  metavars_of(rule.matching, metas);
  metavars_of(rule.replacement, metas);
  if (rule.when) collect_metavars(*rule.when, metas);
  std::set<std::string> binding;
  binding_positions(rule.matching, binding);
  binding_positions(rule.replacement, binding);
  Mathifier m(metas, binding);
  ProofGoal g;
  g.name = name;
  Env env{{}, kEnv};
  Defs defs;
  defs.frame = kDefs;
  g.lhs.cfg1 = Config{code_of(rule.matching, m), env, defs};
  g.lhs.cfg2 = Config{code_of(rule.replacement, m), env, defs};
  if (rule.when) translate(*rule.when, m, g);
  return g;
}

std::vector<ProofGoal> goals_from_dataflow(const SchemeDef& scheme) {
  if (scheme.kind == SchemeKind::Signature) throw VerifyError("a signature scheme has no dataflow goals");
  std::vector<ProofGoal> out;
  Expr def_match = single(scheme.rule.matching);
  Expr def_repl = single(scheme.rule.replacement);
  for (const auto& ref : scheme.references) {
    RuleDef r;
    r.matching = substitute_meta(single(ref.rule.matching), ref.meta, def_match);
    r.replacement = substitute_meta(single(ref.rule.replacement), ref.meta, def_repl);
    if (scheme.rule.when && ref.rule.when) {
      Cond both;
      both.kind = Cond::Kind::And;
      both.kids = {*scheme.rule.when, *ref.rule.when};
      r.when = both;
    } else if (scheme.rule.when) {
      r.when = scheme.rule.when;
    } else {
      r.when = ref.rule.when;
    }
    out.push_back(goal_from_rule(r, scheme.name + "/" + ref.meta));
  }
  return out;
}

std::vector<ProofGoal> goals_from_application(const SourceModule& before, const SourceModule& after) {
  auto e1 = before.exports();
  auto e2 = after.exports();
  std::sort(e1.begin(), e1.end());
  std::sort(e2.begin(), e2.end());
  if (e1 != e2) throw VerifyError("export sets differ between the two versions of " + before.name);
  std::vector<ProofGoal> out;
  Defs d1 = defs_of(before);
  Defs d2 = defs_of(after);
  for (const auto& [name, arity] : e1) {
    std::vector<Expr> args;
    for (int i = 1; i <= arity; ++i) args.push_back(make_mathvar("x" + std::to_string(i), MathSort::Value));
    Expr call = make_call(make_atom(name), args);
    ProofGoal g;
    g.name = name + "/" + std::to_string(arity);
    g.rhs = Criterion::SameValue;
    g.lhs.cfg1 = Config{call, Env{}, d1};
    g.lhs.cfg2 = Config{call, Env{}, d2};
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace refl
