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
#include <fstream>
#include <sstream>

#include "internal.hpp"

namespace refl {

void Library::add(Definition d) {
  const std::string& n = definition_name(d);
  std::size_t a = definition_arity(d);
  for (auto& x : defs_)
    if (definition_name(x) == n && definition_arity(x) == a) {
      x = std::move(d);
      return;
    }
  defs_.push_back(std::move(d));
}

void Library::add_all(std::vector<Definition> defs) {
  for (auto& d : defs) add(std::move(d));
}

void Library::load_text(std::string_view text) {
  auto defs = parse_refl(text);
  auto diags = validate(defs);
  if (!diags.empty()) throw RefactoringError("invalid definitions: " + diags.front());
  add_all(std::move(defs));
}

void Library::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str());
}

const Definition* Library::find(const std::string& name, std::size_t arity) const {
  for (const auto& d : defs_)
    if (definition_name(d) == name && definition_arity(d) == arity) return &d;
  return nullptr;
}

const Definition* Library::find(const std::string& name) const {
  for (const auto& d : defs_)
    if (definition_name(d) == name) return &d;
  return nullptr;
}

Bindings bind_params(const std::vector<std::string>& params, const std::vector<Value>& args, const std::string& name) {
  if (params.size() != args.size())
    throw RefactoringError(name + " expects " + std::to_string(params.size()) + " arguments, got " +
                           std::to_string(args.size()));
  Bindings b;
  for (std::size_t i = 0; i < params.size(); ++i) b.bind(params[i], args[i], Origin::Param);
  return b;
}

Bindings without(const Bindings& b, const std::vector<std::string>& names) {
  Bindings out = b;
  for (const auto& n : names) out.erase(n);
  return out;
}

std::string describe(const Expr& e) {
  std::string s = print(e);
  std::replace(s.begin(), s.end(), '\n', ' ');
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

namespace {

// Bindings learnt by every application join the shared environment only
// when all applications agree on them.
void join(Bindings& shared, const std::vector<Bindings>& learned) {
  if (learned.empty()) return;
  for (const auto& [k, b] : learned.front().entries()) {
    bool agreed = std::all_of(learned.begin() + 1, learned.end(), [&](const Bindings& o) {
      const Value* v = o.get(k);
      return v && value_equal(*v, b.value);
    });
    if (agreed && !shared.has(k)) shared.bind(k, b.value, Origin::Condition);
  }
}

void preorder(const Expr& e, std::vector<NodeRef>& out) {
  if (e.ref.valid()) out.push_back(e.ref);
  for (const auto& k : e.kids) preorder(k, out);
}

}  // namespace

Outcome Engine::run(const std::string& name, NodeRef target, const std::vector<Value>& args) {
  const Definition* d = lib_.find(name, args.size());
  if (!d) {
    Outcome out;
    out.reason = "undefined refactoring " + name + "/" + std::to_string(args.size());
    return out;
  }
  return run(*d, target, args);
}

Outcome Engine::run(const Definition& def, NodeRef target, const std::vector<Value>& args) {
  constexpr int kMaxDepth = 64;
  Outcome out;
  if (depth_ >= kMaxDepth) {
    out.reason = "composition nested too deeply";
    return out;
  }
  std::size_t base = g_.txn_depth();
  std::size_t before = g_.mutation_count();
  g_.txn_begin();
  ++depth_;
  try {
    if (!target.valid() || !g_.alive(target)) throw RefactoringError("target node does not exist");
    out = dispatch(def, target, args);
  } catch (const Error& e) {
    out = Outcome{};
    out.reason = e.what();
  }
  --depth_;
  while (g_.txn_depth() > base + 1) g_.txn_rollback();
  if (out.ok) {
    out.rewrites = g_.mutation_count() - before;
    g_.txn_commit();
  } else {
    g_.txn_rollback();
    out.rewrites = 0;
  }
  return out;
}

Outcome Engine::dispatch(const Definition& def, NodeRef target, const std::vector<Value>& args) {
  if (auto* r = std::get_if<RefactoringDef>(&def)) return run_refactoring(*r, target, args);
  if (auto* s = std::get_if<SelectorDef>(&def)) return run_selector(*s, target, args);
  if (auto* c = std::get_if<CompositeDef>(&def)) return run_composite(*c, target, args);
  const auto& sch = std::get<SchemeDef>(def);
  switch (sch.kind) {
    case SchemeKind::Signature:
      return run_signature(sch, target, args);
    case SchemeKind::ForwardDataflow:
      return run_forward(sch, target, args);
    case SchemeKind::BackwardDataflow:
      return run_backward(sch, target, args);
  }
  throw RefactoringError("unknown scheme");
}

NodeRef Engine::syntactic(NodeRef n) const {
  if (!g_.is_semantic(n)) return n;
  const SemNode& s = g_.sem(n);
  switch (s.kind) {
    case SemKind::Function:
      return s.form;
    case SemKind::Module:
      return g_.module(s.module).root.ref;
    case SemKind::Variable:
      if (!s.binders.empty()) return s.binders.front();
      break;
  }
  throw RefactoringError("semantic node " + s.name + " has no syntactic form");
}

EvalContext Engine::context(Frame& f, NodeRef target) {
  EvalContext ctx;
  bool snap_ok = f.snap && f.snap->alive(f.this_node) && (!target.valid() || f.snap->alive(target));
  ctx.graph = snap_ok ? f.snap.get() : &g_;
  ctx.live = &g_;
  ctx.this_node = f.this_node;
  ctx.target = target;
  NodeRef self = f.this_node;
  ctx.external = [this, self](const std::string& name, const Value* receiver,
                              const std::vector<Value>& args) -> std::optional<Value> {
    const Definition* d = lib_.find(name, args.size());
    if (!d) return std::nullopt;
    NodeRef at = self;
    if (receiver) {
      if (!receiver->is_node() || !receiver->node.valid())
        throw RefactoringError(name + ": receiver is not a node: " + to_string(*receiver));
      at = receiver->node;
    }
    Outcome o = run(*d, at, args);
    if (!o.ok) throw RefactoringError(name + " failed: " + o.reason);
    if (o.value) return *o.value;
    if (o.result.valid() && g_.alive(o.result)) return node_value(g_, o.result);
    return Value::boolean(true);
  };
  return ctx;
}

std::vector<NodeRef> Engine::resolve_targets(const Term& t, Frame& f) {
  Value v = eval_term(t, f.shared, context(f, f.this_node));
  std::vector<NodeRef> out;
  for (const auto& item : as_list(v)) {
    if (!item.is_node() || !item.node.valid())
      throw RefactoringError("modifier target is not a program node: " + to_string(item));
    out.push_back(item.node);
  }
  return out;
}

NodeRef Engine::place(NodeRef at, Expr rep) {
  const Expr& cur = g_.node(at);
  if (rep.kind == Kind::Seq && cur.kind != Kind::Seq) {
    if (rep.kids.size() == 1) {
      Expr only = std::move(rep.kids.front());
      rep = std::move(only);
    } else {
      NodeRef p = g_.parent(at);
      bool splice = false;
      if (p.valid()) {
        Kind pk = g_.node(p).kind;
        NodeRef gp = g_.parent(p);
        splice = pk == Kind::Module || pk == Kind::Block ||
                 (pk == Kind::Seq && gp.valid() && g_.node(gp).kind == Kind::Clause && g_.child_index(p) == 2);
      }
      if (splice) {
        auto refs = g_.txn_replace_seq(at, std::move(rep.kids));
        return refs.empty() ? NodeRef{} : refs.front();
      }
      rep = make_block(std::move(rep.kids));
    }
  }
  return g_.txn_replace(at, std::move(rep));
}

std::optional<NodeRef> Engine::apply_at(const RuleDef& r, NodeRef at, Frame& f, Bindings* learned,
                                        std::string* why) {
  NodeRef n = syntactic(at);
  auto pmetas = metavariables(r.matching);
  Bindings seed = without(f.shared, pmetas);
  std::vector<NodeRef> cands{n};
  // A clause pattern addresses the clauses of a function form.
  if (r.matching.kind == Kind::Clause && g_.node(n).kind == Kind::Function) {
    cands.clear();
    for (const auto& c : g_.node(n).kids) cands.push_back(c.ref);
  }
  struct Hit {
    NodeRef node;
    Bindings b;
  };
  std::vector<Hit> hits;
  bool matched = false;
  for (NodeRef c : cands) {
    for (auto& m : match(r.matching, g_.node(c), seed)) {
      matched = true;
      if (!r.when) {
        hits.push_back({c, std::move(m)});
        continue;
      }
      auto [ok, nb] = eval_condition(*r.when, m, context(f, c));
      if (ok) hits.push_back({c, std::move(nb)});
    }
  }
  if (hits.empty()) {
    *why = (matched ? "condition does not hold at " : "pattern does not match ") + describe(g_.node(n));
    return std::nullopt;
  }
  Expr rep = instantiate(r.replacement, hits.front().b);
  for (std::size_t i = 1; i < hits.size(); ++i) {
    if (hits[i].node != hits.front().node || !structurally_equal(instantiate(r.replacement, hits[i].b), rep)) {
      *why = "ambiguous match: " + std::to_string(hits.size()) + " ways at " + describe(g_.node(n));
      return std::nullopt;
    }
  }
  Bindings mine;
  for (const auto& [k, b] : hits.front().b.entries())
    if (!seed.has(k) && std::find(pmetas.begin(), pmetas.end(), k) == pmetas.end()) mine.bind(k, b.value, b.origin);
  *learned = std::move(mine);
  return place(hits.front().node, std::move(rep));
}

bool Engine::run_step(const RuleDef& r, Frame& f, std::string* why) {
  std::vector<Bindings> learned;
  if (!r.modifier) {
    Bindings l;
    NodeRef at = f.this_node;
    auto res = apply_at(r, at, f, &l, why);
    if (!res) return false;
    learned.push_back(std::move(l));
    f.last = *res;
    if (res->valid() && !g_.alive(at)) f.this_node = *res;
    join(f.shared, learned);
    return true;
  }
  auto targets = resolve_targets(r.modifier->target, f);
  if (r.modifier->kind == Modifier::Kind::On) {
    for (NodeRef t : targets) {
      if (!g_.alive(t)) {
        *why = "target was removed by an earlier rewrite";
        return false;
      }
      Bindings l;
      auto res = apply_at(r, t, f, &l, why);
      if (!res) return false;
      learned.push_back(std::move(l));
      f.last = *res;
    }
    join(f.shared, learned);
    return true;
  }
  // IN: every node below the targets, visited in pre-order as they were
  // before this step; the step succeeds when at least one node was rewritten.
  std::size_t rewrites = 0;
  for (NodeRef root : targets) {
    if (!g_.alive(root)) continue;
    std::vector<NodeRef> order;
    preorder(g_.node(syntactic(root)), order);
    for (NodeRef n : order) {
      if (!g_.alive(n)) continue;
      Bindings l;
      std::string w;
      try {
        auto res = apply_at(r, n, f, &l, &w);
        if (!res) continue;
        learned.push_back(std::move(l));
        f.last = *res;
        ++rewrites;
      } catch (const Error&) {
        continue;
      }
    }
  }
  if (rewrites == 0) {
    *why = "no node below the target was rewritten";
    return false;
  }
  join(f.shared, learned);
  return true;
}

Outcome Engine::run_refactoring(const RefactoringDef& d, NodeRef target, const std::vector<Value>& args) {
  Frame f{std::make_shared<const SemanticGraph>(g_), target, bind_params(d.params, args, d.name), {}};
  const Bindings start = f.shared;
  Outcome out;
  bool ok = false;
  std::string why;
  g_.txn_begin();
  for (const auto& step : d.chain) {
    if (step.op == Combinator::Then && !ok) continue;
    if (step.op == Combinator::Or) {
      if (ok) continue;
      g_.txn_rollback();
      g_.txn_begin();
      f.shared = start;
      f.this_node = target;
    }
    std::string w;
    ok = run_step(step.rule, f, &w);
    if (!ok) why = w;
  }
  g_.txn_commit();
  out.ok = ok;
  if (!ok) out.reason = d.name + ": " + why;
  out.result = f.last.valid() ? f.last : f.this_node;
  return out;
}

Outcome Engine::run_selector(const SelectorDef& d, NodeRef target, const std::vector<Value>& args) {
  Frame f{std::make_shared<const SemanticGraph>(g_), target, bind_params(d.params, args, d.name), {}};
  NodeRef n = syntactic(target);
  std::vector<NodeRef> cands{n};
  if (d.matching.kind == Kind::Clause && g_.node(n).kind == Kind::Function) {
    cands.clear();
    for (const auto& c : g_.node(n).kids) cands.push_back(c.ref);
  }
  std::vector<Bindings> hits;
  for (NodeRef c : cands)
    for (auto& m : match(d.matching, g_.node(c), f.shared)) {
      if (!d.when) {
        hits.push_back(std::move(m));
        continue;
      }
      auto [ok, nb] = eval_condition(*d.when, m, context(f, c));
      if (ok) hits.push_back(std::move(nb));
    }
  Outcome out;
  if (hits.size() != 1) {
    out.reason = d.name + ": selector matched " + std::to_string(hits.size()) + " times at " + describe(g_.node(n));
    return out;
  }
  const Value* v = hits.front().get(d.ret);
  if (!v) {
    out.reason = d.name + ": " + d.ret + " is unbound";
    return out;
  }
  out.ok = true;
  out.value = *v;
  return out;
}

Outcome Engine::run_composite(const CompositeDef& d, NodeRef target, const std::vector<Value>& args) {
  Bindings env = bind_params(d.params, args, d.name);
  NodeRef self = target;
  Outcome out;
  std::optional<Value> last;
  // A node replaced by a step is followed to its replacement.
  auto follow = [&](NodeRef old, NodeRef now) {
    if (!now.valid() || old == now || g_.alive(old)) return;
    if (self == old) self = now;
    Bindings moved;
    for (const auto& [k, b] : env.entries())
      moved.bind(k, b.value.is_node() && b.value.node == old ? node_value(g_, now) : b.value, b.origin);
    env = std::move(moved);
  };
  for (const auto& st : d.body) {
    Frame f{std::make_shared<const SemanticGraph>(g_), self, env, {}};
    EvalContext ctx = context(f, self);
    const Term& e = st.expr;
    bool method = e.kind == Term::Kind::Dot;
    std::size_t arity = method ? e.args.size() - 1 : e.args.size();
    const Definition* def = nullptr;
    if (e.kind == Term::Kind::Call || method) def = lib_.find(e.name, arity);
    if (e.kind == Term::Kind::Call && is_semantic_function(e.name) && !st.on) def = nullptr;
    Value v;
    if (!def) {
      if (st.on) throw RefactoringError(d.name + ": undefined refactoring " + e.name + "/" + std::to_string(arity));
      v = eval_term(e, env, ctx);
    } else {
      std::vector<Value> argv;
      for (std::size_t i = method ? 1 : 0; i < e.args.size(); ++i) argv.push_back(eval_term(e.args[i], env, ctx));
      std::vector<NodeRef> targets;
      if (st.on || method) {
        Value t = eval_term(st.on ? *st.on : e.args[0], env, ctx);
        for (const auto& item : as_list(t)) {
          if (!item.is_node() || !item.node.valid())
            throw RefactoringError(d.name + ": " + e.name + " target is not a program node: " + to_string(item));
          targets.push_back(item.node);
        }
      } else {
        targets.push_back(self);
      }
      std::vector<Value> results;
      for (NodeRef t : targets) {
        Outcome o = run(*def, t, argv);
        if (!o.ok) throw RefactoringError(d.name + ": step " + print_term(e) + " failed: " + o.reason);
        out.rewrites += o.rewrites;
        follow(t, o.result);
        if (o.value)
          results.push_back(*o.value);
        else if (o.result.valid() && g_.alive(o.result))
          results.push_back(node_value(g_, o.result));
        else
          results.push_back(Value::boolean(true));
      }
      v = results.size() == 1 ? results.front() : Value::list_of(std::move(results));
    }
    if (st.bind && !env.bind(*st.bind, v, Origin::Local))
      throw RefactoringError(d.name + ": " + *st.bind + " is already bound");
    last = v;
  }
  out.ok = true;
  out.value = last;
  if (last && last->is_node() && last->node.valid()) out.result = last->node;
  return out;
}

}  // namespace refl
