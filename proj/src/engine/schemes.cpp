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
#include <deque>
#include <functional>
#include <map>
#include <set>

#include "internal.hpp"

namespace refl {

namespace {

// ---- signature contract --------------------------------------------------

bool is_meta(const Expr& e) { return (e.kind == Kind::Var && e.text != "_") || e.kind == Kind::VarList; }

ContractResult violated(std::string clause, std::string detail) { return {false, std::move(clause), std::move(detail)}; }

// Replacement arguments may only be matching arguments, possibly grouped
// into non-empty tuples and proper lists.
std::optional<ContractResult> check_arg(const Expr& e, const std::map<std::string, Kind>& formals,
                                        std::set<std::string>& used) {
  if (e.kind == Kind::Var || e.kind == Kind::VarList) {
    auto it = formals.find(e.text);
    if (it == formals.end())
      return violated("argument operations", e.text + " is not an argument of the matching pattern");
    if (it->second != e.kind)
      return violated("argument operations", e.text + " changes between a single and a list metavariable");
    used.insert(e.text);
    return std::nullopt;
  }
  std::vector<const Expr*> items;
  if (e.kind == Kind::Tuple) {
    for (const auto& k : e.kids) items.push_back(&k);
  } else if (e.kind == Kind::Cons && is_proper_list(e)) {
    items = list_elements(e, nullptr);
  } else {
    return violated("argument operations", "`" + print(e) + "` is not a swap, duplication or grouping of arguments");
  }
  if (items.empty()) return violated("argument operations", "empty group `" + print(e) + "`");
  for (const Expr* k : items)
    if (auto bad = check_arg(*k, formals, used)) return bad;
  return std::nullopt;
}

// Argument shape used by the reachability search.
struct Shape {
  int sym = -1;     // leaf symbol, or -1 for a group
  char group = 0;   // 't' tuple, 'l' list
  std::vector<Shape> kids;
};

std::string encode(const std::vector<Shape>& seq);

std::string encode(const Shape& s) {
  if (s.sym >= 0) return std::to_string(s.sym);
  return std::string(1, s.group == 't' ? '{' : '[') + encode(s.kids) + (s.group == 't' ? '}' : ']');
}

std::string encode(const std::vector<Shape>& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) out += (i ? "," : "") + encode(seq[i]);
  return out;
}

std::optional<Shape> shape_of(const Expr& e, const std::map<std::string, int>& syms) {
  Shape s;
  if (e.kind == Kind::Var || e.kind == Kind::VarList) {
    auto it = syms.find(e.text);
    if (it == syms.end()) return std::nullopt;
    s.sym = it->second;
    return s;
  }
  std::vector<const Expr*> items;
  if (e.kind == Kind::Tuple) {
    s.group = 't';
    for (const auto& k : e.kids) items.push_back(&k);
  } else if ((e.kind == Kind::Cons && is_proper_list(e)) || e.kind == Kind::Nil) {
    s.group = 'l';
    if (e.kind == Kind::Cons) items = list_elements(e, nullptr);
  } else {
    return std::nullopt;
  }
  for (const Expr* k : items) {
    auto ks = shape_of(*k, syms);
    if (!ks) return std::nullopt;
    s.kids.push_back(std::move(*ks));
  }
  return s;
}

void count(const std::vector<Shape>& seq, int& leaves, int& groups) {
  for (const auto& s : seq) {
    if (s.sym >= 0) {
      ++leaves;
    } else {
      ++groups;
      count(s.kids, leaves, groups);
    }
  }
}

// Every sequence of a state, addressed for in-place edits.
void sequences(std::vector<Shape>& seq, std::vector<std::vector<Shape>*>& out) {
  out.push_back(&seq);
  for (auto& s : seq)
    if (s.sym < 0) sequences(s.kids, out);
}

}  // namespace

ContractResult check_signature_contract(const RuleDef& rule, const std::vector<std::string>& params) {
  const Expr& m = rule.matching;
  const Expr& r = rule.replacement;
  if (m.kind != Kind::Call || m.kids[0].kind != Kind::Var)
    return violated("matching pattern", "must be a call Name(Args) with a metavariable name");
  std::map<std::string, Kind> formals;
  for (std::size_t i = 1; i < m.kids.size(); ++i) {
    const Expr& a = m.kids[i];
    if (!is_meta(a)) return violated("linear arguments", "`" + print(a) + "` is not a metavariable");
    if (a.text == m.kids[0].text || !formals.emplace(a.text, a.kind).second)
      return violated("linear arguments", a.text + " occurs more than once");
  }
  if (r.kind != Kind::Call) return violated("replacement pattern", "must be a call");
  const Expr& callee = r.kids[0];
  bool callee_ok = callee.kind == Kind::Atom ||
                   (callee.kind == Kind::Var && (callee.text == m.kids[0].text ||
                                                 std::find(params.begin(), params.end(), callee.text) != params.end()));
  if (!callee_ok) return violated("callee", "`" + print(callee) + "` is neither the matched name nor a parameter");
  std::set<std::string> used;
  for (std::size_t i = 1; i < r.kids.size(); ++i)
    if (auto bad = check_arg(r.kids[i], formals, used)) return *bad;
  for (const auto& [name, kind] : formals)
    if (!used.count(name)) return violated("must-appear", name + " does not appear in the replacement");
  return {true, {}, {}};
}

bool signature_reachable(const RuleDef& rule, int depth) {
  const Expr& m = rule.matching;
  const Expr& r = rule.replacement;
  if (m.kind != Kind::Call || r.kind != Kind::Call) return false;
  std::map<std::string, int> syms;
  std::vector<Shape> start;
  for (std::size_t i = 1; i < m.kids.size(); ++i) {
    if (!is_meta(m.kids[i]) || !syms.emplace(m.kids[i].text, static_cast<int>(syms.size())).second) return false;
    Shape s;
    s.sym = syms.at(m.kids[i].text);
    start.push_back(s);
  }
  std::vector<Shape> goal;
  for (std::size_t i = 1; i < r.kids.size(); ++i) {
    auto s = shape_of(r.kids[i], syms);
    if (!s) return false;
    goal.push_back(std::move(*s));
  }
  int goal_leaves = 0, goal_groups = 0;
  count(goal, goal_leaves, goal_groups);
  const std::string target = encode(goal);
  std::set<std::string> seen{encode(start)};
  std::deque<std::pair<std::vector<Shape>, int>> work{{start, 0}};
  while (!work.empty()) {
    auto [state, d] = work.front();
    work.pop_front();
    if (encode(state) == target) return true;
    if (d == depth) continue;
    auto push = [&](std::vector<Shape> next) {
      int leaves = 0, groups = 0;
      count(next, leaves, groups);
      // Nothing is ever removed, so overshooting the goal is a dead end.
      if (leaves > goal_leaves || groups > goal_groups) return;
      if (seen.insert(encode(next)).second) work.emplace_back(std::move(next), d + 1);
    };
    std::vector<std::vector<Shape>*> seqs;
    sequences(state, seqs);
    for (std::size_t si = 0; si < seqs.size(); ++si) {
      std::size_t n = seqs[si]->size();
      auto edited = [&](const std::function<void(std::vector<Shape>&)>& edit) {
        std::vector<Shape> copy = state;
        std::vector<std::vector<Shape>*> cs;
        sequences(copy, cs);
        edit(*cs[si]);
        push(std::move(copy));
      };
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edited([&](std::vector<Shape>& s) { std::swap(s[i], s[j]); });
      for (std::size_t i = 0; i < n; ++i)
        edited([&](std::vector<Shape>& s) { s.insert(s.begin() + static_cast<std::ptrdiff_t>(i) + 1, s[i]); });
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j)
          for (char g : {'t', 'l'})
            edited([&](std::vector<Shape>& s) {
              Shape grp;
              grp.group = g;
              grp.kids.assign(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(j));
              s.erase(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(j));
              s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), std::move(grp));
            });
    }
  }
  return false;
}

namespace {

// Pre-order position of every node of a module, for inner-first ordering.
std::map<std::uint32_t, std::size_t> preorder_index(const Expr& root) {
  std::map<std::uint32_t, std::size_t> out;
  walk(root, [&](const Expr& e) {
    out.emplace(e.ref.id, out.size());
    return true;
  });
  return out;
}

void inner_first(const SemanticGraph& g, std::vector<NodeRef>& refs) {
  std::map<std::size_t, std::map<std::uint32_t, std::size_t>> order;
  for (NodeRef r : refs) {
    std::size_t mi = g.module_index(r);
    if (!order.count(mi)) order[mi] = preorder_index(g.module(mi).root);
  }
  std::stable_sort(refs.begin(), refs.end(), [&](NodeRef a, NodeRef b) {
    std::size_t ma = g.module_index(a), mb = g.module_index(b);
    if (ma != mb) return ma < mb;
    return order[ma].at(a.id) > order[mb].at(b.id);
  });
}

bool inside(const SemanticGraph& g, NodeRef n, NodeRef root) {
  for (NodeRef cur = n; cur.valid(); cur = g.parent(cur))
    if (cur == root) return true;
  return false;
}

// Structural agreement of two bound values.
bool same_value(const Value& a, const Value& b) {
  if (a.is_syntax() && b.is_syntax()) return structurally_equal(*a.term, *b.term);
  if (a.tag == Value::Tag::List && b.tag == Value::Tag::List) {
    if (a.list.size() != b.list.size()) return false;
    for (std::size_t i = 0; i < a.list.size(); ++i)
      if (!same_value(a.list[i], b.list[i])) return false;
    return true;
  }
  return value_equal(a, b);
}

Outcome failure(const std::string& who, const std::string& why) {
  Outcome o;
  o.reason = who + ": " + why;
  return o;
}

}  // namespace

// ---- function signature scheme --------------------------------------------

Outcome Engine::run_signature(const SchemeDef& d, NodeRef target, const std::vector<Value>& args) {
  ContractResult c = check_signature_contract(d.rule, d.params);
  if (!c.ok) return failure(d.name, "signature contract violated (" + c.clause + "): " + c.detail);
  Bindings params = bind_params(d.params, args, d.name);
  NodeRef fn = g_.function_of(target);
  if (!fn.valid()) return failure(d.name, "target is not inside a function");
  const SemNode s = g_.sem(fn);
  for (NodeRef u : g_.opaque_uses(fn))
    return failure(d.name, "opaque use of " + s.name + "/" + std::to_string(s.arity) + " at " + describe(g_.node(u)));

  // The call a clause head stands for, and the call a rewrite produces.
  auto rewrite = [&](Expr call, const std::string& what) -> Expr {
    auto ms = match(d.rule.matching, call, params);
    if (ms.size() != 1) throw RefactoringError(what + " `" + describe(call) + "` does not match the signature rule");
    Expr out = instantiate(d.rule.replacement, ms.front());
    if (out.kids[0].kind != Kind::Atom) throw RefactoringError("new function name is not an atom");
    return out;
  };
  auto head_call = [&](const Expr& clause) {
    std::vector<Expr> pats;
    for (const auto& p : clause_patterns(clause)) pats.push_back(p);
    return make_call(clause.kids[0], std::move(pats));
  };
  Expr probe = rewrite(head_call(g_.node(s.clauses.front())), "clause head");
  const std::string new_name = probe.kids[0].text;
  const int new_arity = static_cast<int>(probe.kids.size()) - 1;
  NodeRef clash = g_.find_function(s.module, new_name, new_arity);
  if (clash.valid() && clash != fn)
    return failure(d.name, "function " + new_name + "/" + std::to_string(new_arity) + " already exists");

  Frame f{std::make_shared<const SemanticGraph>(g_), target, params, {}};
  std::vector<NodeRef> refs;
  std::map<std::uint32_t, RefKind> kinds;
  for (const auto& r : g_.function_refs(fn)) {
    refs.push_back(r.node);
    kinds[r.node.id] = r.kind;
  }
  inner_first(g_, refs);
  for (NodeRef r : refs) {
    const Expr& e = g_.node(r);
    switch (kinds.at(r.id)) {
      case RefKind::ExportEntry: {
        Expr entry(Kind::ExportEntry, new_name, new_arity);
        g_.txn_replace(r, entry);
        break;
      }
      case RefKind::LocalCall:
        g_.txn_replace(r, rewrite(e, "call"));
        break;
      case RefKind::RemoteCall: {
        std::vector<Expr> a(e.kids.begin() + 2, e.kids.end());
        Expr nw = rewrite(make_call(e.kids[1], std::move(a)), "call");
        std::vector<Expr> na(nw.kids.begin() + 1, nw.kids.end());
        g_.txn_replace(r, make_remote(copy_tree(e.kids[0]), nw.kids[0], std::move(na)));
        break;
      }
      case RefKind::Apply: {
        std::size_t fi = e.kids.size() == 3 ? 1 : 2;
        std::vector<Expr> a;
        for (const Expr* x : list_elements(e.kids[fi + 1], nullptr)) a.push_back(*x);
        Expr nw = rewrite(make_call(e.kids[fi], std::move(a)), "call");
        std::vector<Expr> na(nw.kids.begin() + 1, nw.kids.end());
        Expr call = copy_tree(e);
        call.kids[fi] = nw.kids[0];
        call.kids[fi + 1] = make_list(std::move(na));
        g_.txn_replace(r, std::move(call));
        break;
      }
    }
  }
  for (NodeRef cl : s.clauses) {
    Expr nw = rewrite(head_call(g_.node(cl)), "clause head");
    const Expr& clause = g_.node(cl);
    NodeRef name = clause.kids[0].ref;
    NodeRef pats = clause.kids[1].ref;
    g_.txn_replace(name, nw.kids[0]);
    std::vector<Expr> np(nw.kids.begin() + 1, nw.kids.end());
    g_.txn_replace(pats, make_seq(std::move(np)));
  }
  Outcome out;
  out.ok = true;
  out.result = g_.find_function(s.module, new_name, new_arity);
  return out;
}

// ---- forward dataflow scheme ----------------------------------------------

namespace {

struct RefPlan {
  const ReferenceRule* rule = nullptr;
  NodeRef anchor;  // node the reference rule rewrites
  NodeRef use;     // flow node bound to the reference metavariable
};

}  // namespace

Outcome Engine::run_forward(const SchemeDef& d, NodeRef target, const std::vector<Value>& args) {
  Frame f{std::make_shared<const SemanticGraph>(g_), target, bind_params(d.params, args, d.name), {}};
  NodeRef n = syntactic(target);

  // The definition rule must apply at the target before anything moves.
  std::size_t hits = 0;
  bool matched = false;
  for (auto& m : match(d.rule.matching, g_.node(n), without(f.shared, metavariables(d.rule.matching)))) {
    matched = true;
    if (!d.rule.when || eval_condition(*d.rule.when, m, context(f, n)).first) ++hits;
  }
  if (hits != 1)
    return failure(d.name, std::string(matched ? "definition condition does not hold at " : "definition does not match ") +
                               describe(g_.node(n)));

  auto fwd = g_.flow_forward(n);
  std::set<NodeRef> path(fwd.begin(), fwd.end());
  path.insert(n);
  std::vector<RefPlan> plan;
  for (NodeRef x : fwd) {
    for (NodeRef s : g_.flow_sources(x))
      if (!path.count(s))
        return failure(d.name, "extra data source " + describe(g_.node(s)) + " reaches " + describe(g_.node(x)));
    // Nodes passing the value on need no rewrite; the uses where it ends do.
    if (!g_.flow_successors(x).empty()) continue;
    bool covered = false;
    NodeRef a = x;
    for (int up = 0; up < 3 && a.valid() && !covered; ++up, a = g_.parent(a)) {
      for (const auto& rr : d.references) {
        Bindings seed = without(f.shared, metavariables(rr.rule.matching));
        for (auto& m : match(rr.rule.matching, g_.node(a), seed)) {
          const Value* v = m.get(rr.meta);
          if (!v || v->node != x) continue;
          if (rr.rule.when && !eval_condition(*rr.rule.when, m, context(f, a)).first) continue;
          plan.push_back({&rr, a, x});
          covered = true;
          break;
        }
        if (covered) break;
      }
    }
    if (!covered) return failure(d.name, "use " + describe(g_.node(x)) + " is not covered by a reference rule");
  }

  std::vector<NodeRef> anchors;
  std::map<std::uint32_t, RefPlan> by_anchor;
  for (const auto& p : plan)
    if (by_anchor.emplace(p.anchor.id, p).second) anchors.push_back(p.anchor);
  inner_first(g_, anchors);
  for (NodeRef a : anchors) {
    const RefPlan& p = by_anchor.at(a.id);
    Bindings seed = without(f.shared, metavariables(p.rule->rule.matching));
    std::optional<Bindings> chosen;
    for (auto& m : match(p.rule->rule.matching, g_.node(a), seed)) {
      const Value* v = m.get(p.rule->meta);
      if (v && v->node == p.use) {
        chosen = m;
        break;
      }
    }
    if (!chosen) return failure(d.name, "use " + describe(g_.node(a)) + " changed before it was rewritten");
    if (p.rule->rule.when) chosen = eval_condition(*p.rule->rule.when, *chosen, context(f, a)).second;
    place(a, instantiate(p.rule->rule.replacement, *chosen));
  }
  Bindings l;
  std::string why;
  auto res = apply_at(d.rule, n, f, &l, &why);
  if (!res) return failure(d.name, why);
  Outcome out;
  out.ok = true;
  out.result = *res;
  return out;
}

// ---- backward dataflow scheme ---------------------------------------------

Outcome Engine::run_backward(const SchemeDef& d, NodeRef target, const std::vector<Value>& args) {
  Frame f{std::make_shared<const SemanticGraph>(g_), target, bind_params(d.params, args, d.name), {}};
  NodeRef n = syntactic(target);

  const ReferenceRule* ref = nullptr;
  for (const auto& rr : d.references) {
    Bindings seed = without(f.shared, metavariables(rr.rule.matching));
    for (auto& m : match(rr.rule.matching, g_.node(n), seed)) {
      const Value* v = m.get(rr.meta);
      if (v && v->node == n) ref = &rr;
    }
    if (ref) break;
  }
  if (!ref) return failure(d.name, "no reference rule matches " + describe(g_.node(n)));

  auto sources = g_.flow_sources(n);
  if (sources.empty()) return failure(d.name, describe(g_.node(n)) + " has no data sources");
  for (NodeRef s : sources) {
    auto succ = g_.flow_successors(s);
    if (succ.size() != 1 || succ.front() != n)
      return failure(d.name, "source " + describe(g_.node(s)) + " has another consumer");
  }

  // Metavariables the definition drops travel to the reference site and
  // must agree across all sources.
  auto def_metas = metavariables(d.rule.matching);
  auto rep_metas = metavariables(d.rule.replacement);
  std::vector<std::string> globals;
  for (const auto& m : def_metas)
    if (std::find(rep_metas.begin(), rep_metas.end(), m) == rep_metas.end()) globals.push_back(m);

  Bindings seed = without(f.shared, def_metas);
  std::vector<std::pair<NodeRef, Bindings>> per_source;
  Bindings shared_globals;
  for (NodeRef s : sources) {
    std::vector<Bindings> hits;
    for (auto& m : match(d.rule.matching, g_.node(s), seed)) {
      if (!d.rule.when) {
        hits.push_back(std::move(m));
        continue;
      }
      auto [ok, nb] = eval_condition(*d.rule.when, m, context(f, s));
      if (ok) hits.push_back(std::move(nb));
    }
    if (hits.size() != 1)
      return failure(d.name, "definition " + std::string(hits.empty() ? "does not match " : "is ambiguous at ") +
                                 describe(g_.node(s)));
    for (const auto& gname : globals) {
      const Value* v = hits.front().get(gname);
      if (!v) continue;
      if (const Value* prev = shared_globals.get(gname)) {
        if (!same_value(*prev, *v))
          return failure(d.name, "metavariable " + gname + " differs between sources: " + to_string(*prev) + " vs " +
                                     to_string(*v));
      } else {
        shared_globals.bind(gname, *v, Origin::Pattern);
      }
    }
    per_source.emplace_back(s, hits.front());
  }

  // Moved subtrees may only use variables bound outside the target.
  for (const auto& [gname, b] : shared_globals.entries()) {
    for (const auto& item : as_list(b.value)) {
      if (!item.is_syntax()) continue;
      std::optional<std::string> captured;
      walk(*item.term, [&](const Expr& e) {
        if (captured || e.kind != Kind::Var || !e.ref.valid() || !g_.alive(e.ref)) return !captured;
        NodeRef var = g_.variable_of(e.ref);
        if (!var.valid()) return true;
        for (NodeRef binder : g_.sem(var).binders)
          if (inside(g_, binder, n)) captured = e.text;
        return !captured;
      });
      if (captured)
        return failure(d.name, "name capture: " + *captured + " in " + gname + " is bound inside " +
                                   describe(g_.node(n)));
    }
  }

  std::vector<NodeRef> order;
  std::map<std::uint32_t, Bindings> binds;
  for (auto& [s, b] : per_source) {
    order.push_back(s);
    binds.emplace(s.id, b);
  }
  inner_first(g_, order);
  for (NodeRef s : order) place(s, instantiate(d.rule.replacement, binds.at(s.id)));

  Bindings rb = without(f.shared, metavariables(ref->rule.matching));
  rb.bind(ref->meta, Value::syntax(g_.node(n)), Origin::Pattern);
  for (const auto& [gname, b] : shared_globals.entries()) rb.bind(gname, b.value, Origin::Pattern);
  if (ref->rule.when) {
    auto [ok, nb] = eval_condition(*ref->rule.when, rb, context(f, n));
    if (!ok) return failure(d.name, "reference condition does not hold");
    rb = nb;
  }
  Outcome out;
  out.ok = true;
  out.result = place(n, instantiate(ref->rule.replacement, rb));
  return out;
}

}  // namespace refl
