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
#include <array>
#include <set>

#include "refl/semlib.hpp"

namespace refl {

namespace {

constexpr std::array<std::string_view, 20> kCatalog = {
    "fresh",    "atom",          "pure",        "length",     "module",           "name",     "function",
    "function_exists", "function_clauses", "function_references", "definition", "vars", "bound_vars",
    "intersect", "copy", "exported_functions", "is_var", "arity", "clauses", "body"};

const SemanticGraph& graph_of(const EvalContext& ctx) {
  if (!ctx.graph) throw SemanticError("semantic function needs a program graph");
  return *ctx.graph;
}

void arity_check(const std::string& name, const std::vector<Value>& args, std::size_t n) {
  if (args.size() != n)
    throw SemanticError(name + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + ", got " +
                        std::to_string(args.size()));
}

// Graph node named by a value, if it still exists.
NodeRef live_ref(const SemanticGraph& g, const Value& v) {
  if (v.is_node() && v.node.valid() && g.alive(v.node)) return v.node;
  return {};
}

NodeRef function_node(const SemanticGraph& g, const Value& v, const std::string& who) {
  NodeRef n = live_ref(g, v);
  if (!n.valid()) throw SemanticError(who + ": expected a program node, got " + to_string(v));
  NodeRef f = g.function_of(n);
  if (!f.valid()) throw SemanticError(who + ": node is outside any function");
  return f;
}

std::size_t module_of_value(const SemanticGraph& g, const Value& v, const std::string& who) {
  if (NodeRef n = live_ref(g, v); n.valid()) return g.module_index(n);
  if (auto a = as_atom(v))
    if (auto mi = g.find_module(*a)) return *mi;
  throw SemanticError(who + ": expected a module, got " + to_string(v));
}

const Expr& term_of(const SemanticGraph* g, const Value& v, const std::string& who) {
  if (v.is_syntax()) return *v.term;
  if (g && v.is_semantic()) {
    const SemNode& s = g->sem(v.node);
    if (s.kind == SemKind::Function) return g->node(s.form);
  }
  throw SemanticError(who + ": expected a syntactic node, got " + to_string(v));
}

void var_names(const Expr& e, std::vector<std::string>& out) {
  walk(e, [&](const Expr& n) {
    if (n.kind == Kind::Var && n.text != "_" && std::find(out.begin(), out.end(), n.text) == out.end())
      out.push_back(n.text);
    return true;
  });
}

void bound_names(const Expr& e, std::vector<std::string>& out) {
  walk(e, [&](const Expr& n) {
    if (n.kind == Kind::Generator || n.kind == Kind::Match) var_names(n.kids[0], out);
    if (n.kind == Kind::Clause)
      for (const auto& p : clause_patterns(n)) var_names(p, out);
    return true;
  });
}

Value names_value(const std::vector<std::string>& names) {
  std::vector<Value> items;
  for (const auto& n : names) items.push_back(Value::name(n));
  return Value::list_of(std::move(items));
}

std::set<std::string> taken_names(const EvalContext& ctx, const Bindings& b) {
  std::set<std::string> taken;
  const SemanticGraph* gp = ctx.live && ctx.live->alive(ctx.target) ? ctx.live : ctx.graph;
  if (gp && ctx.target.valid() && gp->alive(ctx.target)) {
    const SemanticGraph& g = *gp;
    NodeRef at = ctx.target;
    if (g.is_semantic(at) && g.sem(at).kind == SemKind::Function) {
      taken = g.function_names(at);
    } else if (!g.is_semantic(at)) {
      taken = g.scope_names(at);
      auto all = g.function_names(at);
      taken.insert(all.begin(), all.end());
    }
  }
  // Names generated earlier in the same definition are taken as well.
  for (const auto& [k, bind] : b.entries())
    if (bind.value.tag == Value::Tag::Name) taken.insert(bind.value.s);
  return taken;
}

}  // namespace

std::string fresh_name(const std::set<std::string>& taken) {
  if (!taken.count("V")) return "V";
  for (int i = 1;; ++i) {
    std::string n = "V" + std::to_string(i);
    if (!taken.count(n)) return n;
  }
}

bool is_semantic_function(const std::string& name) {
  return std::find(kCatalog.begin(), kCatalog.end(), name) != kCatalog.end();
}

Value node_value(const SemanticGraph& g, NodeRef n) {
  if (g.is_semantic(n)) return Value::semantic(n, g.sem(n).name);
  return Value::syntax(g.node(n));
}

Value call_semantic(const std::string& name, const std::vector<Value>& args, const EvalContext& ctx) {
  if (name == "atom") {
    arity_check(name, args, 1);
    const Value& v = args[0];
    return Value::boolean(v.tag == Value::Tag::Atom || (v.is_syntax() && v.term->kind == Kind::Atom));
  }
  if (name == "is_var") {
    arity_check(name, args, 1);
    const Value& v = args[0];
    return Value::boolean(v.tag == Value::Tag::Name || (v.is_syntax() && v.term->kind == Kind::Var));
  }
  if (name == "length") {
    arity_check(name, args, 1);
    if (args[0].tag != Value::Tag::List) throw SemanticError("length: expected a list, got " + to_string(args[0]));
    return Value::integer(static_cast<std::int64_t>(args[0].list.size()));
  }
  if (name == "vars" || name == "bound_vars") {
    std::vector<std::string> out;
    for (const auto& a : args)
      for (const auto& item : as_list(a)) {
        const Expr& e = term_of(ctx.graph, item, name);
        if (name == "vars")
          var_names(e, out);
        else
          bound_names(e, out);
      }
    return names_value(out);
  }
  if (name == "intersect") {
    arity_check(name, args, 2);
    std::vector<Value> out;
    auto right = as_list(args[1]);
    for (const auto& x : as_list(args[0]))
      if (std::any_of(right.begin(), right.end(), [&](const Value& y) { return value_equal(x, y); })) out.push_back(x);
    return Value::list_of(std::move(out));
  }
  if (name == "copy") {
    arity_check(name, args, 1);
    Value v = Value::syntax(copy_tree(term_of(ctx.graph, args[0], name)));
    v.node = NodeRef{};
    return v;
  }

  const SemanticGraph& g = graph_of(ctx);
  if (name == "pure") {
    arity_check(name, args, 1);
    if (NodeRef n = live_ref(g, args[0]); n.valid() && !g.is_semantic(n)) return Value::boolean(g.is_pure(n));
    std::size_t mi = ctx.this_node.valid() ? g.module_index(ctx.this_node) : 0;
    if (args[0].is_syntax()) return Value::boolean(g.is_pure_expr(*args[0].term, mi));
    return Value::boolean(true);
  }
  if (name == "module") {
    arity_check(name, args, 1);
    NodeRef m = g.module_node(module_of_value(g, args[0], name));
    return node_value(g, m);
  }
  if (name == "function") {
    arity_check(name, args, 1);
    return node_value(g, function_node(g, args[0], name));
  }
  if (name == "name") {
    arity_check(name, args, 1);
    if (NodeRef n = live_ref(g, args[0]); n.valid() && g.is_semantic(n)) return Value::atom(g.sem(n).name);
    if (auto a = as_atom(args[0])) return Value::atom(*a);
    throw SemanticError("name: expected a named entity, got " + to_string(args[0]));
  }
  if (name == "arity") {
    arity_check(name, args, 1);
    return Value::integer(g.sem(function_node(g, args[0], name)).arity);
  }
  if (name == "function_exists") {
    arity_check(name, args, 3);
    std::size_t mi = module_of_value(g, args[0], name);
    auto fname = as_atom(args[1]);
    auto ar = as_int(args[2]);
    if (!fname || !ar) throw SemanticError("function_exists: expected a name and an arity");
    return Value::boolean(g.find_function(mi, *fname, static_cast<int>(*ar)).valid());
  }
  if (name == "function_clauses" || name == "clauses") {
    arity_check(name, args, 1);
    std::vector<Value> out;
    for (NodeRef c : g.sem(function_node(g, args[0], name)).clauses) out.push_back(node_value(g, c));
    return Value::list_of(std::move(out));
  }
  if (name == "function_references") {
    arity_check(name, args, 1);
    std::vector<Value> out;
    for (const auto& r : g.function_refs(function_node(g, args[0], name)))
      if (r.kind != RefKind::ExportEntry) out.push_back(node_value(g, r.node));
    return Value::list_of(std::move(out));
  }
  if (name == "definition") {
    arity_check(name, args, 1);
    return node_value(g, g.sem(function_node(g, args[0], name)).form);
  }
  if (name == "body") {
    arity_check(name, args, 1);
    NodeRef n = live_ref(g, args[0]);
    if (!n.valid() || g.is_semantic(n) || g.node(n).kind != Kind::Clause)
      throw SemanticError("body: expected a clause, got " + to_string(args[0]));
    std::vector<Value> out;
    for (const auto& e : clause_body(g.node(n))) out.push_back(node_value(g, e.ref));
    return Value::list_of(std::move(out));
  }
  if (name == "exported_functions") {
    arity_check(name, args, 1);
    std::vector<Value> out;
    for (NodeRef f : g.exported_functions(module_of_value(g, args[0], name))) out.push_back(node_value(g, f));
    return Value::list_of(std::move(out));
  }
  throw SemanticError("unknown semantic function " + name + "/" + std::to_string(args.size()));
}

Value eval_term(const Term& t, const Bindings& b, const EvalContext& ctx) {
  switch (t.kind) {
    case Term::Kind::Meta:
    case Term::Kind::MetaList: {
      const Value* v = b.get(t.name);
      if (!v) throw SemanticError("metavariable " + t.name + " is unbound");
      return *v;
    }
    case Term::Kind::This:
      if (!ctx.graph || !ctx.this_node.valid()) throw SemanticError("THIS is not set");
      return node_value(*ctx.graph, ctx.this_node);
    case Term::Kind::Atom:
      return Value::atom(t.name);
    case Term::Kind::Int:
      return Value::integer(t.value);
    case Term::Kind::Call:
    case Term::Kind::Dot: {
      std::vector<Value> args;
      for (const auto& a : t.args) args.push_back(eval_term(a, b, ctx));
      if (t.kind == Term::Kind::Call && is_semantic_function(t.name) && t.name != "fresh")
        return call_semantic(t.name, args, ctx);
      if (ctx.external) {
        std::optional<Value> v;
        if (t.kind == Term::Kind::Dot) {
          std::vector<Value> rest(args.begin() + 1, args.end());
          v = ctx.external(t.name, &args[0], rest);
        } else {
          v = ctx.external(t.name, nullptr, args);
        }
        if (v) return *v;
      }
      if (is_semantic_function(t.name) && t.name != "fresh") return call_semantic(t.name, args, ctx);
      throw SemanticError("unknown semantic function " + t.name + "/" + std::to_string(args.size()));
    }
  }
  throw SemanticError("bad term");
}

std::pair<bool, Bindings> eval_condition(const Cond& c, const Bindings& b, const EvalContext& ctx) {
  switch (c.kind) {
    case Cond::Kind::And: {
      auto [ok, nb] = eval_condition(c.kids[0], b, ctx);
      if (!ok) return {false, b};
      return eval_condition(c.kids[1], nb, ctx);
    }
    case Cond::Kind::Or: {
      auto left = eval_condition(c.kids[0], b, ctx);
      if (left.first) return left;
      return eval_condition(c.kids[1], b, ctx);
    }
    case Cond::Kind::Not:
      return {!eval_condition(c.kids[0], b, ctx).first, b};
    case Cond::Kind::Assign: {
      if (c.lhs.kind != Term::Kind::Meta && c.lhs.kind != Term::Kind::MetaList)
        throw SemanticError("left operand of = must be a metavariable");
      Value v = eval_term(c.rhs, b, ctx);
      Bindings nb = b;
      if (!nb.bind(c.lhs.name, std::move(v), Origin::Condition)) return {false, b};
      return {true, nb};
    }
    case Cond::Kind::Eq:
    case Cond::Kind::Neq: {
      bool eq = value_equal(eval_term(c.lhs, b, ctx), eval_term(c.rhs, b, ctx));
      return {eq == (c.kind == Cond::Kind::Eq), b};
    }
    case Cond::Kind::Pred:
      break;
  }
  const Term& t = c.lhs;
  if (t.kind == Term::Kind::Call && t.name == "fresh") {
    if (t.args.size() != 1 || t.args[0].kind != Term::Kind::Meta)
      throw SemanticError("fresh takes one metavariable");
    const std::string& meta = t.args[0].name;
    std::set<std::string> taken = taken_names(ctx, b);
    if (const Value* v = b.get(meta)) {
      auto n = as_atom(*v);
      if (!n) throw SemanticError("fresh: " + meta + " is not a name");
      Bindings others = b;
      others.erase(meta);
      taken = taken_names(ctx, others);
      return {!taken.count(*n), b};
    }
    Bindings nb = b;
    nb.bind(meta, Value::name(fresh_name(taken)), Origin::Condition);
    return {true, nb};
  }
  Value v = eval_term(t, b, ctx);
  auto truth = as_bool(v);
  if (!truth) throw SemanticError("condition " + print_term(t) + " is not a truth value: " + to_string(v));
  return {*truth, b};
}

}  // namespace refl
