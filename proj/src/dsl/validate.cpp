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

#include <functional>
#include <map>
#include <set>

#include "refl/dsl.hpp"
#include "refl/matcher.hpp"

namespace refl {

namespace {

std::string label(const Definition& d) {
  return definition_name(d) + "/" + std::to_string(definition_arity(d));
}

// List metavariables may stand only where a sequence is legal.
void check_list_positions(const Expr& e, bool allowed, const std::string& where, std::vector<std::string>& out) {
  if (e.kind == Kind::VarList && !allowed) out.push_back(where + ": list metavariable " + e.text + ".. in a non-sequence position");
  int fp = fixed_prefix(e.kind);
  for (std::size_t i = 0; i < e.kids.size(); ++i) {
    bool ok = (fp >= 0 && i >= static_cast<std::size_t>(fp)) || (e.kind == Kind::Cons && i == 0);
    check_list_positions(e.kids[i], ok, where, out);
  }
}

void pattern_metas(const Expr& p, std::set<std::string>& out) {
  for (auto& m : metavariables(p)) out.insert(m);
}

// Names a condition may bind: assignment targets and fresh-name generators.
void condition_binders(const Cond& c, std::set<std::string>& out) {
  for (const auto& k : c.kids) condition_binders(k, out);
  if (c.kind == Cond::Kind::Assign && (c.lhs.kind == Term::Kind::Meta || c.lhs.kind == Term::Kind::MetaList))
    out.insert(c.lhs.name);
  if (c.kind == Cond::Kind::Pred && c.lhs.kind == Term::Kind::Call && c.lhs.name == "fresh")
    for (const auto& a : c.lhs.args)
      if (a.kind == Term::Kind::Meta) out.insert(a.name);
}

void check_assignments(const Cond& c, const std::set<std::string>& params, std::map<std::string, int>& assigned,
                       const std::string& where, std::vector<std::string>& out) {
  for (const auto& k : c.kids) check_assignments(k, params, assigned, where, out);
  if (c.kind != Cond::Kind::Assign) return;
  if (c.lhs.kind != Term::Kind::Meta && c.lhs.kind != Term::Kind::MetaList) {
    out.push_back(where + ": left operand of = must be a metavariable");
    return;
  }
  if (params.count(c.lhs.name)) out.push_back(where + ": parameter " + c.lhs.name + " is reassigned");
  if (++assigned[c.lhs.name] == 2) out.push_back(where + ": metavariable " + c.lhs.name + " is assigned twice");
}

void check_rules(const std::vector<const RuleDef*>& rules, std::set<std::string> bindable,
                 const std::vector<std::string>& params, const std::string& where, std::vector<std::string>& out) {
  std::set<std::string> param_set(params.begin(), params.end());
  std::map<std::string, int> assigned;
  for (const RuleDef* r : rules) {
    pattern_metas(r->matching, bindable);
    if (r->when) condition_binders(*r->when, bindable);
    check_list_positions(r->matching, false, where, out);
    check_list_positions(r->replacement, false, where, out);
    if (r->when) check_assignments(*r->when, param_set, assigned, where, out);
  }
  std::set<std::string> reported;
  for (const RuleDef* r : rules) {
    std::vector<std::string> used = metavariables(r->replacement);
    if (r->when) collect_metavars(*r->when, used);
    if (r->modifier) collect_metavars(r->modifier->target, used);
    for (const auto& m : used)
      if (!bindable.count(m) && reported.insert(m).second) out.push_back(where + ": " + m + " unbindable");
  }
}

}  // namespace

std::vector<std::string> validate(const std::vector<Definition>& defs) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::map<std::string, const CompositeDef*> composites;
  for (const auto& d : defs) {
    std::string where = label(d);
    if (!seen.insert(where).second) out.push_back(where + ": duplicate definition");
    if (const auto* r = std::get_if<RefactoringDef>(&d)) {
      std::vector<const RuleDef*> rules;
      for (const auto& s : r->chain) rules.push_back(&s.rule);
      check_rules(rules, {r->params.begin(), r->params.end()}, r->params, where, out);
    } else if (const auto* s = std::get_if<SchemeDef>(&d)) {
      std::vector<const RuleDef*> rules{&s->rule};
      std::set<std::string> bindable(s->params.begin(), s->params.end());
      for (const auto& ref : s->references) {
        rules.push_back(&ref.rule);
        bindable.insert(ref.meta);
        auto lhs = metavariables(ref.rule.matching), rhs = metavariables(ref.rule.replacement);
        bool both = std::find(lhs.begin(), lhs.end(), ref.meta) != lhs.end() &&
                    std::find(rhs.begin(), rhs.end(), ref.meta) != rhs.end();
        if (!both) out.push_back(where + ": reference metavariable " + ref.meta + " must occur on both sides");
      }
      if (s->kind != SchemeKind::Signature && s->references.empty())
        out.push_back(where + ": dataflow scheme without reference rules");
      check_rules(rules, bindable, s->params, where, out);
    } else if (const auto* c = std::get_if<CompositeDef>(&d)) {
      composites[c->name] = c;
      std::set<std::string> locals(c->params.begin(), c->params.end());
      for (const auto& st : c->body) {
        std::vector<std::string> used;
        collect_metavars(st.expr, used);
        if (st.on) collect_metavars(*st.on, used);
        for (const auto& m : used)
          if (!locals.count(m)) out.push_back(where + ": " + m + " unbindable");
        if (st.bind && !locals.insert(*st.bind).second) out.push_back(where + ": local " + *st.bind + " is rebound");
      }
    } else {
      const auto& sel = std::get<SelectorDef>(d);
      if (sel.replacement) out.push_back(where + ": selector has a replacement");
      check_list_positions(sel.matching, false, where, out);
      std::set<std::string> bindable(sel.params.begin(), sel.params.end());
      pattern_metas(sel.matching, bindable);
      if (sel.when) condition_binders(*sel.when, bindable);
      if (!bindable.count(sel.ret)) out.push_back(where + ": " + sel.ret + " unbindable");
    }
  }
  // Composite calls must not form a cycle.
  std::map<std::string, std::set<std::string>> calls;
  std::function<void(const Term&, std::set<std::string>&)> callees = [&](const Term& t, std::set<std::string>& acc) {
    if ((t.kind == Term::Kind::Call || t.kind == Term::Kind::Dot) && composites.count(t.name)) acc.insert(t.name);
    for (const auto& a : t.args) callees(a, acc);
  };
  for (const auto& [name, c] : composites)
    for (const auto& st : c->body) {
      callees(st.expr, calls[name]);
      if (st.on) callees(*st.on, calls[name]);
    }
  std::map<std::string, int> state;
  std::set<std::string> reported;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    state[n] = 1;
    for (const auto& m : calls[n]) {
      if (state[m] == 1) {
        if (reported.insert(m).second) out.push_back(m + ": recursive composition");
      } else if (state[m] == 0) {
        visit(m);
      }
    }
    state[n] = 2;
  };
  for (const auto& [name, c] : composites)
    if (state[name] == 0) visit(name);
  return out;
}

}  // namespace refl
