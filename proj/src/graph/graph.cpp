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

#include "refl/graph.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <sstream>

namespace refl {

namespace {

using Env = std::map<std::string, std::uint32_t>;

std::set<std::string> env_names(const Env& env) {
  std::set<std::string> out;
  for (const auto& [k, v] : env) out.insert(k);
  return out;
}

}  // namespace

// Scope and dataflow analysis of one function form at a time.
class GraphAnalyser {
 public:
  GraphAnalyser(SemanticGraph& g, std::size_t module, std::uint32_t fn) : g_(g), module_(module), fn_(fn) {}

  void function_form(const Expr& form) {
    for (const auto& clause : form.kids) {
      if (clause.kind != Kind::Clause) continue;
      Env env;
      std::set<std::string> here;
      g_.scope_[clause.ref.id] = {};
      for (const auto& p : clause_patterns(clause)) bind(p, env, true, here);
      body(clause.kids[2], env);
    }
  }

 private:
  void edge(const Expr& from, const Expr& to) {
    g_.flow_succ_[from.ref.id].push_back(to.ref.id);
    g_.flow_pred_[to.ref.id].push_back(from.ref.id);
  }

  std::uint32_t new_variable(const Expr& binder) {
    std::uint32_t id = g_.sem_id("var:" + std::to_string(binder.ref.id));
    SemNode v;
    v.kind = SemKind::Variable;
    v.name = binder.text;
    v.module = module_;
    v.binders.push_back(binder.ref);
    v.function = NodeRef{fn_};
    g_.sem_[id] = std::move(v);
    g_.var_of_[binder.ref.id] = id;
    return id;
  }

  void occurrence(const Expr& e, std::uint32_t var) {
    g_.sem_[var].occurrences.push_back(e.ref);
    g_.var_of_[e.ref.id] = var;
  }

  // Binds the variables of pattern p. With `shadow`, names already in `env`
  // are rebound instead of matched, except names first bound by this pattern.
  void bind(const Expr& p, Env& env, bool shadow, std::set<std::string>& here) {
    g_.scope_[p.ref.id] = env_names(env);
    switch (p.kind) {
      case Kind::Var: {
        if (p.text == "_") return;
        auto it = env.find(p.text);
        if (it != env.end() && (!shadow || here.count(p.text))) {
          occurrence(p, it->second);
          return;
        }
        env[p.text] = new_variable(p);
        here.insert(p.text);
        return;
      }
      case Kind::Cons:
      case Kind::Tuple:
        for (const auto& k : p.kids) bind(k, env, shadow, here);
        return;
      default:
        return;
    }
  }

  void body(const Expr& seq, Env& env) {
    g_.scope_[seq.ref.id] = env_names(env);
    for (const auto& e : seq.kids) expr(e, env);
  }

  void expr(const Expr& e, Env& env) {
    g_.scope_[e.ref.id] = env_names(env);
    switch (e.kind) {
      case Kind::Var: {
        auto it = env.find(e.text);
        if (it == env.end()) {
          g_.diagnostics_.push_back({e.ref, "unbound variable " + e.text});
          return;
        }
        occurrence(e, it->second);
        return;
      }
      case Kind::Match: {
        expr(e.kids[1], env);
        std::set<std::string> here;
        bind(e.kids[0], env, false, here);
        edge(e.kids[1], e.kids[0]);
        return;
      }
      case Kind::Block:
        for (const auto& k : e.kids) expr(k, env);
        if (!e.kids.empty()) edge(e.kids.back(), e);
        return;
      case Kind::Case: {
        expr(e.kids[0], env);
        std::vector<Env> branches;
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          const Expr& c = e.kids[i];
          if (c.kind != Kind::Clause) continue;
          Env local = env;
          std::set<std::string> here;
          g_.scope_[c.ref.id] = env_names(env);
          for (const auto& p : clause_patterns(c)) {
            bind(p, local, false, here);
            edge(e.kids[0], p);
          }
          body(c.kids[2], local);
          if (!clause_body(c).empty()) edge(clause_body(c).back(), e);
          branches.push_back(std::move(local));
        }
        merge_branches(branches, env);
        return;
      }
      case Kind::Fun:
        for (const auto& c : e.kids) {
          if (c.kind != Kind::Clause) continue;
          Env local = env;
          std::set<std::string> here;
          g_.scope_[c.ref.id] = env_names(env);
          for (const auto& p : clause_patterns(c)) bind(p, local, true, here);
          body(c.kids[2], local);
        }
        return;
      case Kind::ListComp: {
        Env local = env;
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          const Expr& q = e.kids[i];
          if (q.kind == Kind::Generator) {
            g_.scope_[q.ref.id] = env_names(local);
            expr(q.kids[1], local);
            std::set<std::string> here;
            bind(q.kids[0], local, true, here);
          } else {
            expr(q, local);
          }
        }
        expr(e.kids[0], local);
        return;
      }
      case Kind::Call:
        if (e.kids[0].kind != Kind::Atom) expr(e.kids[0], env);
        for (std::size_t i = 1; i < e.kids.size(); ++i) expr(e.kids[i], env);
        return;
      default:
        for (const auto& k : e.kids) expr(k, env);
        return;
    }
  }

  // A name bound in every branch is visible after the case and denotes one
  // variable whose binders are the per-branch binders.
  void merge_branches(const std::vector<Env>& branches, Env& env) {
    if (branches.empty()) return;
    for (const auto& [name, first] : branches.front()) {
      if (env.count(name)) continue;
      bool everywhere = std::all_of(branches.begin() + 1, branches.end(),
                                    [&](const Env& b) { return b.count(name) && !env.count(name); });
      if (!everywhere) continue;
      SemNode& target = g_.sem_[first];
      for (std::size_t i = 1; i < branches.size(); ++i) {
        std::uint32_t other = branches[i].at(name);
        if (other == first) continue;
        SemNode moved = g_.sem_[other];
        for (auto b : moved.binders) {
          target.binders.push_back(b);
          g_.var_of_[b.id] = first;
        }
        for (auto o : moved.occurrences) {
          target.occurrences.push_back(o);
          g_.var_of_[o.id] = first;
        }
        g_.sem_.erase(other);
      }
      env[name] = first;
    }
  }

  SemanticGraph& g_;
  std::size_t module_;
  std::uint32_t fn_;
};

SemanticGraph::SemanticGraph(std::vector<SourceModule> modules) : modules_(std::move(modules)) {
  if (modules_.empty()) throw GraphError("a graph needs at least one module");
  std::set<std::string> names;
  for (const auto& m : modules_)
    if (!names.insert(m.name).second) throw GraphError("duplicate module " + m.name);
  reanalyse();
}

SemanticGraph::SemanticGraph(const SemanticGraph& o)
    : modules_(o.modules_), next_id_(o.next_id_), sem_keys_(o.sem_keys_), mutations_(o.mutations_) {
  reanalyse();
}

SemanticGraph& SemanticGraph::operator=(const SemanticGraph& o) {
  if (this == &o) return *this;
  modules_ = o.modules_;
  next_id_ = o.next_id_;
  sem_keys_ = o.sem_keys_;
  mutations_ = o.mutations_;
  txn_stack_.clear();
  reanalyse();
  return *this;
}

std::uint32_t SemanticGraph::sem_id(const std::string& key) {
  auto it = sem_keys_.find(key);
  if (it != sem_keys_.end()) return it->second;
  std::uint32_t id = next_id_++;
  sem_keys_[key] = id;
  return id;
}

void SemanticGraph::assign_ids(Expr& e) {
  if (!e.ref.valid()) e.ref = NodeRef{next_id_++};
  for (auto& k : e.kids) assign_ids(k);
}

void SemanticGraph::index_tree(const Expr& e, std::uint32_t parent, std::uint32_t index, std::size_t module,
                               std::uint32_t fn) {
  Loc loc;
  loc.node = &e;
  loc.parent = parent;
  loc.index = index;
  loc.module = module;
  loc.function = fn;
  index_[e.ref.id] = loc;
  for (std::uint32_t i = 0; i < e.kids.size(); ++i) index_tree(e.kids[i], e.ref.id, i, module, fn);
}

void SemanticGraph::reanalyse() {
  index_.clear();
  sem_.clear();
  module_sem_.clear();
  function_table_.clear();
  var_of_.clear();
  scope_.clear();
  flow_succ_.clear();
  flow_pred_.clear();
  diagnostics_.clear();
  for (auto& m : modules_) assign_ids(m.root);
  for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
    const SourceModule& m = modules_[mi];
    std::uint32_t mid = sem_id("mod:" + m.name);
    SemNode ms;
    ms.kind = SemKind::Module;
    ms.name = m.name;
    ms.module = mi;
    sem_[mid] = ms;
    module_sem_.push_back(NodeRef{mid});
    index_tree(m.root, 0, 0, mi, 0);
    for (std::uint32_t fi = 0; fi < m.root.kids.size(); ++fi) {
      const Expr& form = m.root.kids[fi];
      if (form.kind != Kind::Function || form.kids.empty() || form.kids[0].kind != Kind::Clause) continue;
      const Expr& first = form.kids[0];
      std::string name = first.kids[0].text;
      int arity = static_cast<int>(clause_patterns(first).size());
      auto key = std::make_tuple(mi, name, arity);
      if (function_table_.count(key))
        throw GraphError("duplicate definition of " + name + "/" + std::to_string(arity) + " in module " + m.name);
      // A function is identified by its signature; a signature change makes
      // a different semantic node.
      std::uint32_t fid = sem_id("fun:" + m.name + ":" + name + "/" + std::to_string(arity));
      SemNode fs;
      fs.kind = SemKind::Function;
      fs.name = name;
      fs.module = mi;
      fs.arity = arity;
      fs.form = form.ref;
      for (const auto& c : form.kids) fs.clauses.push_back(c.ref);
      sem_[fid] = fs;
      function_table_[key] = NodeRef{fid};
      index_tree(form, m.root.ref.id, fi, mi, fid);
    }
  }
  for (std::size_t mi = 0; mi < modules_.size(); ++mi) analyse_module(mi);
  compute_purity();
}

void SemanticGraph::analyse_module(std::size_t mi) {
  const SourceModule& m = modules_[mi];
  for (const auto& form : m.root.kids) {
    if (form.kind == Kind::Attribute && form.text == "export") {
      for (const auto& e : form.kids)
        if (!function_table_.count(std::make_tuple(mi, e.text, static_cast<int>(e.value))))
          diagnostics_.push_back({e.ref, "export of undefined function " + e.text + "/" + std::to_string(e.value)});
      continue;
    }
    if (form.kind != Kind::Function) continue;
    GraphAnalyser a(*this, mi, index_.at(form.ref.id).function);
    a.function_form(form);
  }
  // Variable flow: every binder reaches every occurrence.
  for (const auto& [id, s] : sem_) {
    if (s.kind != SemKind::Variable || s.module != mi) continue;
    for (auto b : s.binders)
      for (auto o : s.occurrences) {
        flow_succ_[b.id].push_back(o.id);
        flow_pred_[o.id].push_back(b.id);
      }
  }
}

namespace {

const std::set<std::pair<std::string, int>> kPureBuiltins = {{"atom_to_list", 1}, {"length", 1}};
const std::set<std::tuple<std::string, std::string, int>> kPureRemote = {{"lists", "map", 2}};

}  // namespace

bool SemanticGraph::is_pure_expr(const Expr& e, std::size_t module) const {
  bool pure = true;
  walk(e, [&](const Expr& n) {
    if (!pure) return false;
    if (n.kind == Kind::Call && n.kids[0].kind == Kind::Atom) {
      const std::string& name = n.kids[0].text;
      int arity = static_cast<int>(n.kids.size()) - 1;
      if (name == "apply" && arity == 2 && n.kids[1].kind == Kind::Atom && is_proper_list(n.kids[2])) {
        int n_args = static_cast<int>(list_elements(n.kids[2], nullptr).size());
        auto it = function_table_.find(std::make_tuple(module, n.kids[1].text, n_args));
        pure = it != function_table_.end() && sem_.at(it->second.id).pure;
      } else if (name == "apply" && (arity == 2 || arity == 3)) {
        // Dynamic applications of fun values: the applied fun body is checked where it occurs.
      } else {
        auto it = function_table_.find(std::make_tuple(module, name, arity));
        if (it != function_table_.end())
          pure = sem_.at(it->second.id).pure;
        else
          pure = kPureBuiltins.count({name, arity}) != 0;
      }
    } else if (n.kind == Kind::RemoteCall) {
      if (n.kids[0].kind != Kind::Atom || n.kids[1].kind != Kind::Atom) {
        pure = false;
      } else {
        int arity = static_cast<int>(n.kids.size()) - 2;
        auto mod = find_module(n.kids[0].text);
        if (mod) {
          auto it = function_table_.find(std::make_tuple(*mod, n.kids[1].text, arity));
          pure = it != function_table_.end() && sem_.at(it->second.id).pure;
        } else {
          pure = kPureRemote.count({n.kids[0].text, n.kids[1].text, arity}) != 0;
        }
      }
    }
    return pure;
  });
  return pure;
}

void SemanticGraph::compute_purity() {
  // Greatest fixpoint: start optimistic and only ever lower.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [id, s] : sem_) {
      if (s.kind != SemKind::Function || !s.pure) continue;
      if (!is_pure_expr(*index_.at(s.form.id).node, s.module)) {
        s.pure = false;
        changed = true;
      }
    }
  }
}

bool SemanticGraph::alive(NodeRef n) const { return index_.count(n.id) || sem_.count(n.id); }

const Expr& SemanticGraph::node(NodeRef n) const {
  auto it = index_.find(n.id);
  if (it == index_.end()) {
    if (sem_.count(n.id)) throw GraphError("node " + std::to_string(n.id) + " is semantic, not syntactic");
    throw GraphError("node " + std::to_string(n.id) + " is retired or unknown");
  }
  return *it->second.node;
}

const SemNode& SemanticGraph::sem(NodeRef n) const {
  auto it = sem_.find(n.id);
  if (it == sem_.end()) throw GraphError("node " + std::to_string(n.id) + " is not a semantic node");
  return it->second;
}

NodeRef SemanticGraph::parent(NodeRef n) const {
  node(n);
  return NodeRef{index_.at(n.id).parent};
}

std::size_t SemanticGraph::child_index(NodeRef n) const {
  node(n);
  return index_.at(n.id).index;
}

std::size_t SemanticGraph::module_index(NodeRef n) const {
  auto it = index_.find(n.id);
  if (it != index_.end()) return it->second.module;
  return sem(n).module;
}

bool SemanticGraph::is_top_level_expr(NodeRef n) const {
  NodeRef p = parent(n);
  if (!p.valid()) return false;
  NodeRef gp = parent(p);
  if (!gp.valid()) return false;
  const Expr& clause = node(gp);
  return node(p).kind == Kind::Seq && clause.kind == Kind::Clause && child_index(p) == 2 &&
         node(parent(gp)).kind == Kind::Function;
}

std::optional<std::size_t> SemanticGraph::find_module(const std::string& key) const {
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    const auto& m = modules_[i];
    if (m.name == key || m.path == key) return i;
    if (!m.path.empty() && std::filesystem::path(m.path).filename() == std::filesystem::path(key).filename() &&
        key.find('/') == std::string::npos)
      return i;
  }
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    std::error_code ec;
    if (!modules_[i].path.empty() && std::filesystem::equivalent(modules_[i].path, key, ec)) return i;
  }
  return std::nullopt;
}

NodeRef SemanticGraph::module_node(std::size_t module) const { return module_sem_.at(module); }

NodeRef SemanticGraph::module_of(NodeRef n) const { return module_sem_.at(module_index(n)); }

NodeRef SemanticGraph::function_of(NodeRef n) const {
  auto it = sem_.find(n.id);
  if (it != sem_.end()) {
    if (it->second.kind == SemKind::Function) return n;
    if (it->second.kind == SemKind::Variable) return it->second.function;
    return {};
  }
  node(n);
  return NodeRef{index_.at(n.id).function};
}

NodeRef SemanticGraph::function_of_form(NodeRef form) const {
  auto it = index_.find(form.id);
  if (it == index_.end()) return {};
  if (it->second.node->kind != Kind::Function) return {};
  return NodeRef{it->second.function};
}

NodeRef SemanticGraph::find_function(std::size_t module, const std::string& name, int arity) const {
  auto it = function_table_.find(std::make_tuple(module, name, arity));
  return it == function_table_.end() ? NodeRef{} : it->second;
}

std::vector<NodeRef> SemanticGraph::functions(std::size_t module) const {
  std::vector<NodeRef> out;
  for (const auto& form : modules_.at(module).root.kids)
    if (form.kind == Kind::Function) out.push_back(function_of_form(form.ref));
  return out;
}

std::vector<NodeRef> SemanticGraph::exported_functions(std::size_t module) const {
  std::vector<NodeRef> out;
  for (const auto& [name, arity] : modules_.at(module).exports()) {
    NodeRef f = find_function(module, name, arity);
    if (f.valid() && std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

std::vector<FunctionRef> SemanticGraph::function_refs(NodeRef f) const {
  const SemNode& fs = sem(f);
  if (fs.kind != SemKind::Function) throw GraphError("function_refs needs a function node");
  const std::string& mod_name = modules_[fs.module].name;
  std::vector<FunctionRef> out;
  for (std::size_t mi = 0; mi < modules_.size(); ++mi) {
    bool local = mi == fs.module;
    walk(modules_[mi].root, [&](const Expr& n) {
      if (local && n.kind == Kind::ExportEntry && n.text == fs.name && n.value == fs.arity) {
        out.push_back({n.ref, RefKind::ExportEntry});
      } else if (n.kind == Kind::Call && n.kids[0].kind == Kind::Atom) {
        const std::string& callee = n.kids[0].text;
        int n_args = static_cast<int>(n.kids.size()) - 1;
        if (local && callee == fs.name && n_args == fs.arity && callee != "apply") {
          out.push_back({n.ref, RefKind::LocalCall});
        } else if (callee == "apply" && n_args == 2 && local && n.kids[1].kind == Kind::Atom &&
                   n.kids[1].text == fs.name && is_proper_list(n.kids[2]) &&
                   static_cast<int>(list_elements(n.kids[2], nullptr).size()) == fs.arity) {
          out.push_back({n.ref, RefKind::Apply});
        } else if (callee == "apply" && n_args == 3 && n.kids[1].kind == Kind::Atom && n.kids[1].text == mod_name &&
                   n.kids[2].kind == Kind::Atom && n.kids[2].text == fs.name && is_proper_list(n.kids[3]) &&
                   static_cast<int>(list_elements(n.kids[3], nullptr).size()) == fs.arity) {
          out.push_back({n.ref, RefKind::Apply});
        }
      } else if (n.kind == Kind::RemoteCall && n.kids[0].kind == Kind::Atom && n.kids[1].kind == Kind::Atom &&
                 n.kids[0].text == mod_name && n.kids[1].text == fs.name &&
                 static_cast<int>(n.kids.size()) - 2 == fs.arity) {
        out.push_back({n.ref, RefKind::RemoteCall});
      }
      return true;
    });
  }
  return out;
}

std::vector<NodeRef> SemanticGraph::opaque_uses(NodeRef f) const {
  const SemNode& fs = sem(f);
  std::vector<NodeRef> out;
  // True when an atom spelling the function name reaches `e` through flow edges.
  auto carries_name = [&](const Expr& e) {
    if (e.kind == Kind::Atom) return e.text == fs.name;
    std::deque<std::uint32_t> work{e.ref.id};
    std::set<std::uint32_t> seen{e.ref.id};
    while (!work.empty()) {
      std::uint32_t cur = work.front();
      work.pop_front();
      const Expr& n = *index_.at(cur).node;
      if (n.kind == Kind::Atom && n.text == fs.name) return true;
      auto it = flow_pred_.find(cur);
      if (it == flow_pred_.end()) continue;
      for (auto p : it->second)
        if (seen.insert(p).second) work.push_back(p);
    }
    return false;
  };
  walk(modules_[fs.module].root, [&](const Expr& n) {
    if (n.kind != Kind::Call) return true;
    int n_args = static_cast<int>(n.kids.size()) - 1;
    if (n.kids[0].kind == Kind::Var && n_args == fs.arity && carries_name(n.kids[0])) {
      out.push_back(n.ref);
    } else if (n.kids[0].kind == Kind::Atom && n.kids[0].text == "apply" && n_args == 2 &&
               n.kids[1].kind != Kind::Atom && carries_name(n.kids[1])) {
      out.push_back(n.ref);
    } else if (n.kids[0].kind == Kind::Atom && n.kids[0].text == "apply" && n_args == 3 &&
               (n.kids[1].kind != Kind::Atom || n.kids[2].kind != Kind::Atom) && carries_name(n.kids[2])) {
      out.push_back(n.ref);
    }
    return true;
  });
  return out;
}

NodeRef SemanticGraph::variable_of(NodeRef occurrence) const {
  auto it = var_of_.find(occurrence.id);
  return it == var_of_.end() ? NodeRef{} : NodeRef{it->second};
}

std::set<std::string> SemanticGraph::scope_names(NodeRef n) const {
  NodeRef cur = n;
  while (cur.valid()) {
    auto it = scope_.find(cur.id);
    if (it != scope_.end()) return it->second;
    cur = parent(cur);
  }
  return {};
}

std::set<std::string> SemanticGraph::function_names(NodeRef n) const {
  std::set<std::string> out;
  NodeRef f = function_of(n);
  if (!f.valid()) return out;
  walk(node(sem(f).form), [&](const Expr& e) {
    if (e.kind == Kind::Var) out.insert(e.text);
    return true;
  });
  return out;
}

std::vector<NodeRef> SemanticGraph::flow_successors(NodeRef e) const {
  std::vector<NodeRef> out;
  auto it = flow_succ_.find(e.id);
  if (it != flow_succ_.end())
    for (auto s : it->second) out.push_back(NodeRef{s});
  return out;
}

std::vector<NodeRef> SemanticGraph::flow_sources(NodeRef e) const {
  node(e);
  std::vector<NodeRef> out;
  auto it = flow_pred_.find(e.id);
  if (it != flow_pred_.end())
    for (auto s : it->second) out.push_back(NodeRef{s});
  return out;
}

std::vector<NodeRef> SemanticGraph::flow_forward(NodeRef e) const {
  node(e);
  // Breadth-first from e; successors of one node are visited in source order.
  std::vector<NodeRef> out;
  std::set<std::uint32_t> seen{e.id};
  std::deque<std::uint32_t> work{e.id};
  while (!work.empty()) {
    std::uint32_t cur = work.front();
    work.pop_front();
    auto it = flow_succ_.find(cur);
    if (it == flow_succ_.end()) continue;
    std::vector<std::uint32_t> next = it->second;
    std::sort(next.begin(), next.end(), [&](std::uint32_t a, std::uint32_t b) {
      return index_.at(a).node->span.begin < index_.at(b).node->span.begin;
    });
    for (auto s : next) {
      if (!seen.insert(s).second) continue;
      out.push_back(NodeRef{s});
      work.push_back(s);
    }
  }
  return out;
}

bool SemanticGraph::is_flow_node(NodeRef e) const { return flow_succ_.count(e.id) || flow_pred_.count(e.id); }

bool SemanticGraph::is_pure(NodeRef e) const {
  if (is_semantic(e)) {
    const SemNode& s = sem(e);
    return s.kind != SemKind::Function || s.pure;
  }
  return is_pure_expr(node(e), module_index(e));
}

NodeRef SemanticGraph::lookup_at(const std::string& file, int line, int col) const {
  auto mi = find_module(file);
  if (!mi) throw GraphError("no module loaded from " + file);
  const SourceModule& m = modules_[*mi];
  std::uint32_t off = offset_of(m.text, line, col);
  if (off == Span::npos || off >= m.text.size())
    throw GraphError("position " + std::to_string(line) + ":" + std::to_string(col) + " is outside " + file);
  const Expr* cur = &m.root;
  const Expr* best = nullptr;
  for (;;) {
    const Expr* next = nullptr;
    for (const auto& k : cur->kids) {
      if (k.span.valid() && k.span.begin <= off && off < k.span.end) {
        next = &k;
        break;
      }
    }
    if (!next) break;
    cur = next;
    if (cur->kind != Kind::Seq && cur->kind != Kind::None) best = cur;
  }
  if (!best || best->kind == Kind::Module)
    throw GraphError("position " + std::to_string(line) + ":" + std::to_string(col) + " is not inside an expression");
  return best->ref;
}

std::string SemanticGraph::to_dot() const {
  std::ostringstream out;
  auto label = [&](std::uint32_t id) {
    std::string text;
    auto it = index_.find(id);
    if (it != index_.end()) {
      text = std::string(kind_name(it->second.node->kind)) + " " + print(*it->second.node);
    } else {
      const SemNode& s = sem_.at(id);
      const char* k = s.kind == SemKind::Module ? "module" : s.kind == SemKind::Function ? "function" : "variable";
      text = std::string(k) + " " + s.name;
      if (s.kind == SemKind::Function) text += "/" + std::to_string(s.arity) + (s.pure ? " pure" : " impure");
    }
    if (text.size() > 40) text = text.substr(0, 37) + "...";
    std::string esc;
    for (char c : text) {
      if (c == '"' || c == '\\') esc += '\\';
      if (c == '\n') {
        esc += "\\n";
        continue;
      }
      esc += c;
    }
    return esc;
  };
  std::set<std::uint32_t> nodes;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, std::string>> edges;
  std::vector<std::uint32_t> sem_ids;
  for (const auto& [id, s] : sem_) sem_ids.push_back(id);
  std::sort(sem_ids.begin(), sem_ids.end());
  for (auto id : sem_ids) {
    const SemNode& s = sem_.at(id);
    nodes.insert(id);
    if (s.kind == SemKind::Function) {
      edges.emplace_back(module_sem_[s.module].id, id, "defines");
      for (auto c : s.clauses) edges.emplace_back(id, c.id, "defines");
      for (const auto& r : function_refs(NodeRef{id})) edges.emplace_back(id, r.node.id, "ref");
    } else if (s.kind == SemKind::Variable) {
      for (auto b : s.binders) edges.emplace_back(id, b.id, "defines");
      for (auto o : s.occurrences) edges.emplace_back(id, o.id, "ref");
    }
  }
  std::vector<std::uint32_t> flow_ids;
  for (const auto& [from, tos] : flow_succ_) flow_ids.push_back(from);
  std::sort(flow_ids.begin(), flow_ids.end());
  for (auto from : flow_ids)
    for (auto to : flow_succ_.at(from)) edges.emplace_back(from, to, "flow");
  for (const auto& [a, b, l] : edges) {
    nodes.insert(a);
    nodes.insert(b);
  }
  out << "digraph refl {\n";
  for (auto id : nodes) out << "  n" << id << " [label=\"" << label(id) << "\"];\n";
  for (const auto& [a, b, l] : edges) out << "  n" << a << " -> n" << b << " [label=\"" << l << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace refl
