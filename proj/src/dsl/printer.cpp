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

#include "refl/dsl.hpp"

namespace refl {

namespace {

int cond_prec(const Cond& c) {
  switch (c.kind) {
    case Cond::Kind::Or:
      return 1;
    case Cond::Kind::And:
      return 2;
    case Cond::Kind::Not:
      return 3;
    default:
      return 4;
  }
}

std::string cond_text(const Cond& c, int min_prec) {
  std::string out;
  switch (c.kind) {
    case Cond::Kind::Or:
      out = cond_text(c.kids[0], 1) + " OR " + cond_text(c.kids[1], 2);
      break;
    case Cond::Kind::And:
      out = cond_text(c.kids[0], 2) + " AND " + cond_text(c.kids[1], 3);
      break;
    case Cond::Kind::Not:
      out = "NOT " + cond_text(c.kids[0], 3);
      break;
    case Cond::Kind::Pred:
      out = print_term(c.lhs);
      break;
    case Cond::Kind::Assign:
      out = print_term(c.lhs) + " = " + print_term(c.rhs);
      break;
    case Cond::Kind::Eq:
      out = print_term(c.lhs) + " == " + print_term(c.rhs);
      break;
    case Cond::Kind::Neq:
      out = print_term(c.lhs) + " /= " + print_term(c.rhs);
      break;
  }
  return cond_prec(c) < min_prec ? "(" + out + ")" : out;
}

std::string indented(const Expr& e) {
  std::string out;
  bool line_start = true;
  for (char c : print(e)) {
    if (line_start && c != '\n') out += "    ";
    out += c;
    line_start = c == '\n';
  }
  return out + "\n";
}

std::string params_text(const std::string& name, const std::vector<std::string>& params) {
  std::string out = print_atom(name) + "(";
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
  return out + ")";
}

std::string rule_text(const RuleDef& r) {
  std::string out;
  if (r.modifier)
    out += std::string(r.modifier->kind == Modifier::Kind::On ? "ON " : "IN ") + print_term(r.modifier->target) + "\n";
  out += indented(r.matching);
  out += "    -----";
  if (r.when && r.inline_when) out += " WHEN " + print_cond(*r.when);
  out += "\n" + indented(r.replacement);
  if (r.when && !r.inline_when) out += "WHEN " + print_cond(*r.when) + "\n";
  return out;
}

bool terms_equal(const Term& a, const Term& b) {
  if (a.kind != b.kind || a.name != b.name || a.value != b.value || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!terms_equal(a.args[i], b.args[i])) return false;
  return true;
}

bool conds_equal(const Cond& a, const Cond& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!conds_equal(a.kids[i], b.kids[i])) return false;
  if (a.kind == Cond::Kind::And || a.kind == Cond::Kind::Or || a.kind == Cond::Kind::Not) return true;
  return terms_equal(a.lhs, b.lhs) && (a.kind == Cond::Kind::Pred || terms_equal(a.rhs, b.rhs));
}

template <class T, class F>
bool opt_equal(const std::optional<T>& a, const std::optional<T>& b, F eq) {
  if (a.has_value() != b.has_value()) return false;
  return !a || eq(*a, *b);
}

bool rules_equal(const RuleDef& a, const RuleDef& b) {
  return opt_equal(a.modifier, b.modifier,
                   [](const Modifier& x, const Modifier& y) { return x.kind == y.kind && terms_equal(x.target, y.target); }) &&
         structurally_equal(a.matching, b.matching) && structurally_equal(a.replacement, b.replacement) &&
         opt_equal(a.when, b.when, conds_equal);
}

}  // namespace

std::string print_term(const Term& t) {
  auto arg_list = [&](std::size_t from) {
    std::string out = "(";
    for (std::size_t i = from; i < t.args.size(); ++i) out += (i > from ? ", " : "") + print_term(t.args[i]);
    return out + ")";
  };
  switch (t.kind) {
    case Term::Kind::Meta:
      return t.name;
    case Term::Kind::MetaList:
      return t.name + "..";
    case Term::Kind::This:
      return "THIS";
    case Term::Kind::Atom:
      return print_atom(t.name);
    case Term::Kind::Int:
      return std::to_string(t.value);
    case Term::Kind::Call:
      return print_atom(t.name) + arg_list(0);
    case Term::Kind::Dot:
      return print_term(t.args[0]) + "." + print_atom(t.name) + arg_list(1);
  }
  return {};
}

std::string print_cond(const Cond& c) { return cond_text(c, 0); }

std::string print_refl(const Definition& d) {
  if (const auto* r = std::get_if<RefactoringDef>(&d)) {
    std::string out = "REFACTORING " + params_text(r->name, r->params) + "\n";
    for (const auto& step : r->chain) {
      if (step.op != Combinator::First) {
        out += step.op == Combinator::Then ? "THEN" : "OR";
        out += step.rule.modifier ? " " : "\n";
      }
      out += rule_text(step.rule);
    }
    return out;
  }
  if (const auto* s = std::get_if<SchemeDef>(&d)) {
    if (s->kind == SchemeKind::Signature)
      return "FUNCTION SIGNATURE REFACTORING\n    " + params_text(s->name, s->params) + "\n" + rule_text(s->rule);
    std::string out = s->kind == SchemeKind::ForwardDataflow ? "FORWARD" : "BACKWARD";
    out += " DATAFLOW REFACTORING " + params_text(s->name, s->params) + "\nDEFINITION\n" + rule_text(s->rule);
    for (const auto& ref : s->references) out += "REFERENCE " + ref.meta + "\n" + rule_text(ref.rule);
    return out;
  }
  if (const auto* c = std::get_if<CompositeDef>(&d)) {
    std::string out = "REFACTORING " + params_text(c->name, c->params) + "\nDO\n";
    for (const auto& st : c->body) {
      out += "    ";
      if (st.bind) out += *st.bind + " = ";
      out += print_term(st.expr);
      if (st.on) out += " ON " + print_term(*st.on);
      out += "\n";
    }
    return out;
  }
  const auto& s = std::get<SelectorDef>(d);
  std::string out = "SELECTOR " + params_text(s.name, s.params) + "\n" + indented(s.matching);
  if (s.replacement) out += "    -----\n" + indented(*s.replacement);
  if (s.when) out += "WHEN " + print_cond(*s.when) + "\n";
  return out + "RETURN " + s.ret + "\n";
}

std::string print_refl(const std::vector<Definition>& defs) {
  std::string out;
  for (std::size_t i = 0; i < defs.size(); ++i) out += (i ? "\n" : "") + print_refl(defs[i]);
  return out;
}

bool definitions_equal(const Definition& a, const Definition& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<RefactoringDef>(&a)) {
    const auto& y = std::get<RefactoringDef>(b);
    if (x->name != y.name || x->params != y.params || x->chain.size() != y.chain.size()) return false;
    for (std::size_t i = 0; i < x->chain.size(); ++i)
      if (x->chain[i].op != y.chain[i].op || !rules_equal(x->chain[i].rule, y.chain[i].rule)) return false;
    return true;
  }
  if (const auto* x = std::get_if<SchemeDef>(&a)) {
    const auto& y = std::get<SchemeDef>(b);
    if (x->kind != y.kind || x->name != y.name || x->params != y.params || !rules_equal(x->rule, y.rule) ||
        x->references.size() != y.references.size())
      return false;
    for (std::size_t i = 0; i < x->references.size(); ++i)
      if (x->references[i].meta != y.references[i].meta || !rules_equal(x->references[i].rule, y.references[i].rule))
        return false;
    return true;
  }
  if (const auto* x = std::get_if<CompositeDef>(&a)) {
    const auto& y = std::get<CompositeDef>(b);
    if (x->name != y.name || x->params != y.params || x->body.size() != y.body.size()) return false;
    for (std::size_t i = 0; i < x->body.size(); ++i) {
      const auto &p = x->body[i], &q = y.body[i];
      if (p.bind != q.bind || !terms_equal(p.expr, q.expr) || !opt_equal(p.on, q.on, terms_equal)) return false;
    }
    return true;
  }
  const auto& x = std::get<SelectorDef>(a);
  const auto& y = std::get<SelectorDef>(b);
  return x.name == y.name && x.params == y.params && x.ret == y.ret && structurally_equal(x.matching, y.matching) &&
         opt_equal(x.when, y.when, conds_equal) &&
         opt_equal(x.replacement, y.replacement, [](const Expr& p, const Expr& q) { return structurally_equal(p, q); });
}

void collect_metavars(const Term& t, std::vector<std::string>& out) {
  if (t.kind == Term::Kind::Meta || t.kind == Term::Kind::MetaList) out.push_back(t.name);
  for (const auto& a : t.args) collect_metavars(a, out);
}

void collect_metavars(const Cond& c, std::vector<std::string>& out) {
  for (const auto& k : c.kids) collect_metavars(k, out);
  if (c.kind == Cond::Kind::And || c.kind == Cond::Kind::Or || c.kind == Cond::Kind::Not) return;
  collect_metavars(c.lhs, out);
  if (c.kind != Cond::Kind::Pred) collect_metavars(c.rhs, out);
}

}  // namespace refl
