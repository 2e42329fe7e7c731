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
#include <set>

#include "refl/matcher.hpp"
#include "refl/syntax.hpp"

namespace refl {

Value Value::boolean(bool v) {
  Value r;
  r.tag = Tag::Bool;
  r.b = v;
  return r;
}

Value Value::integer(std::int64_t v) {
  Value r;
  r.tag = Tag::Int;
  r.i = v;
  return r;
}

Value Value::atom(std::string a) {
  Value r;
  r.tag = Tag::Atom;
  r.s = std::move(a);
  return r;
}

Value Value::name(std::string n) {
  Value r;
  r.tag = Tag::Name;
  r.s = std::move(n);
  return r;
}

Value Value::syntax(const Expr& e) {
  Value r;
  r.tag = Tag::Node;
  r.node = e.ref;
  r.term = std::make_shared<const Expr>(e);
  return r;
}

Value Value::semantic(NodeRef n, std::string name) {
  Value r;
  r.tag = Tag::Node;
  r.node = n;
  r.s = std::move(name);
  return r;
}

Value Value::list_of(std::vector<Value> items) {
  Value r;
  r.tag = Tag::List;
  r.list = std::move(items);
  return r;
}

std::optional<std::string> as_atom(const Value& v) {
  switch (v.tag) {
    case Value::Tag::Atom:
    case Value::Tag::Name:
      return v.s;
    case Value::Tag::Bool:
      return std::string(v.b ? "true" : "false");
    case Value::Tag::Node:
      if (!v.term) return v.s;
      if (v.term->kind == Kind::Atom || v.term->kind == Kind::Var) return v.term->text;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::optional<std::int64_t> as_int(const Value& v) {
  if (v.tag == Value::Tag::Int) return v.i;
  if (v.is_syntax() && v.term->kind == Kind::Integer) return v.term->value;
  return std::nullopt;
}

std::optional<bool> as_bool(const Value& v) {
  if (v.tag == Value::Tag::Bool) return v.b;
  auto a = as_atom(v);
  if (a && (*a == "true" || *a == "false") && v.tag != Value::Tag::Name) return *a == "true";
  return std::nullopt;
}

std::vector<Value> as_list(const Value& v) {
  if (v.tag == Value::Tag::List) return v.list;
  return {v};
}

namespace {

bool constant_node(const Value& v) {
  return v.is_syntax() && (v.term->kind == Kind::Atom || v.term->kind == Kind::Integer || v.term->kind == Kind::Var);
}

}  // namespace

bool value_equal(const Value& a, const Value& b) {
  if (a.is_syntax() && b.is_syntax()) return structurally_equal(*a.term, *b.term);
  if (a.is_semantic() && b.is_semantic()) return a.node == b.node;
  if (a.tag == Value::Tag::List || b.tag == Value::Tag::List) {
    if (a.tag != b.tag || a.list.size() != b.list.size()) return false;
    for (std::size_t i = 0; i < a.list.size(); ++i)
      if (!value_equal(a.list[i], b.list[i])) return false;
    return true;
  }
  if ((a.is_syntax() && !constant_node(a)) || (b.is_syntax() && !constant_node(b))) return false;
  if (auto ia = as_int(a)) {
    auto ib = as_int(b);
    return ib && *ia == *ib;
  }
  if (as_int(b)) return false;
  auto sa = as_atom(a), sb = as_atom(b);
  return sa && sb && *sa == *sb;
}

std::string to_string(const Value& v) {
  switch (v.tag) {
    case Value::Tag::Bool:
      return v.b ? "true" : "false";
    case Value::Tag::Int:
      return std::to_string(v.i);
    case Value::Tag::Atom:
      return print_atom(v.s);
    case Value::Tag::Name:
      return v.s;
    case Value::Tag::Node:
      return v.term ? print(*v.term) : "<" + v.s + ">";
    case Value::Tag::List: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.list.size(); ++i) out += (i ? ", " : "") + to_string(v.list[i]);
      return out + "]";
    }
  }
  return {};
}

const Value* Bindings::get(const std::string& name) const {
  auto it = map_.find(name);
  return it == map_.end() ? nullptr : &it->second.value;
}

bool Bindings::bind(const std::string& name, Value v, Origin origin) {
  auto it = map_.find(name);
  if (it != map_.end()) return value_equal(it->second.value, v);
  map_.emplace(name, Binding{std::move(v), origin});
  return true;
}

std::optional<Bindings> Bindings::merge(const Bindings& other) const {
  Bindings out = *this;
  for (const auto& [k, b] : other.map_)
    if (!out.bind(k, b.value, b.origin)) return std::nullopt;
  return out;
}

bool Bindings::operator==(const Bindings& o) const {
  if (map_.size() != o.map_.size()) return false;
  for (const auto& [k, b] : map_) {
    const Value* v = o.get(k);
    if (!v || !value_equal(b.value, *v)) return false;
  }
  return true;
}

namespace {

using Out = std::vector<Bindings>;

bool cons_has_varlist(const Expr& p) {
  for (const Expr* c = &p; c->kind == Kind::Cons; c = &c->kids[1])
    if (c->kids[0].kind == Kind::VarList) return true;
  return false;
}

void match_into(const Expr& p, const Expr& e, const Bindings& b, Out& out);

void match_seq(const std::vector<const Expr*>& ps, std::size_t pi, const std::vector<const Expr*>& es,
               std::size_t ei, const Bindings& b, Out& out) {
  if (pi == ps.size()) {
    if (ei == es.size()) out.push_back(b);
    return;
  }
  const Expr& p = *ps[pi];
  if (p.kind == Kind::VarList) {
    const Value* bound = b.get(p.text);
    for (std::size_t len = 0; ei + len <= es.size(); ++len) {
      std::vector<Value> items;
      for (std::size_t k = 0; k < len; ++k) items.push_back(Value::syntax(*es[ei + k]));
      Bindings nb = b;
      if (bound ? !value_equal(*bound, Value::list_of(items)) : !nb.bind(p.text, Value::list_of(std::move(items)), Origin::Pattern))
        continue;
      match_seq(ps, pi + 1, es, ei + len, nb, out);
    }
    return;
  }
  if (ei == es.size()) return;
  Out heads;
  match_into(p, *es[ei], b, heads);
  for (const auto& h : heads) match_seq(ps, pi + 1, es, ei + 1, h, out);
}

std::vector<const Expr*> pointers(const std::vector<Expr>& v) {
  std::vector<const Expr*> out;
  for (const auto& e : v) out.push_back(&e);
  return out;
}

void match_into(const Expr& p, const Expr& e, const Bindings& b, Out& out) {
  if (p.kind == Kind::Var) {
    if (p.text == "_") {
      out.push_back(b);
      return;
    }
    Bindings nb = b;
    if (nb.bind(p.text, Value::syntax(e), Origin::Pattern)) out.push_back(std::move(nb));
    return;
  }
  if (p.kind != e.kind || p.text != e.text || p.value != e.value) return;
  if (p.kind == Kind::Cons && cons_has_varlist(p)) {
    const Expr* pt = nullptr;
    const Expr* et = nullptr;
    auto pe = list_elements(p, &pt);
    auto ee = list_elements(e, &et);
    Out elems;
    match_seq(pe, 0, ee, 0, b, elems);
    for (const auto& eb : elems) match_into(*pt, *et, eb, out);
    return;
  }
  match_seq(pointers(p.kids), 0, pointers(e.kids), 0, b, out);
}

Expr inst(const Expr& p, const Bindings& b, bool callee);

void inst_seq(const Expr& p, const Bindings& b, std::vector<Expr>& out, std::size_t from = 0) {
  for (std::size_t i = from; i < p.kids.size(); ++i) {
    const Expr& k = p.kids[i];
    if (k.kind == Kind::VarList) {
      const Value* v = b.get(k.text);
      if (!v) throw InstantiateError("metavariable " + k.text + ".. is unbound");
      for (const auto& item : as_list(*v)) out.push_back(materialize(item, false));
    } else {
      out.push_back(inst(k, b, false));
    }
  }
}

bool callee_slot(Kind parent, std::size_t index) {
  return (parent == Kind::Call && index == 0) || (parent == Kind::RemoteCall && index < 2) ||
         (parent == Kind::Clause && index == 0);
}

Expr inst(const Expr& p, const Bindings& b, bool callee) {
  if (p.kind == Kind::Var && p.text != "_") {
    const Value* v = b.get(p.text);
    if (!v) throw InstantiateError("metavariable " + p.text + " is unbound");
    return materialize(*v, callee);
  }
  if (p.kind == Kind::VarList) throw InstantiateError("list metavariable " + p.text + ".. outside a sequence");
  if (p.kind == Kind::Cons && cons_has_varlist(p)) {
    const Expr* tail = nullptr;
    auto elems = list_elements(p, &tail);
    Expr holder(Kind::Seq);
    for (const Expr* el : elems) holder.kids.push_back(*el);
    std::vector<Expr> items;
    inst_seq(holder, b, items);
    return make_list(std::move(items), inst(*tail, b, false));
  }
  Expr r(p.kind, p.text, p.value);
  for (std::size_t i = 0; i < p.kids.size(); ++i) {
    const Expr& k = p.kids[i];
    if (k.kind == Kind::VarList) {
      const Value* v = b.get(k.text);
      if (!v) throw InstantiateError("metavariable " + k.text + ".. is unbound");
      for (const auto& item : as_list(*v)) r.kids.push_back(materialize(item, false));
    } else {
      r.kids.push_back(inst(k, b, callee_slot(p.kind, i)));
    }
  }
  return r;
}

}  // namespace

std::vector<Bindings> match(const Expr& pattern, const Expr& e, const Bindings& seed) {
  Out out;
  match_into(pattern, e, seed, out);
  return out;
}

Expr instantiate(const Expr& pattern, const Bindings& b) { return inst(pattern, b, false); }

Expr materialize(const Value& v, bool callee_position) {
  switch (v.tag) {
    case Value::Tag::Bool:
      return make_atom(v.b ? "true" : "false");
    case Value::Tag::Int:
      return make_int(v.i);
    case Value::Tag::Atom:
      return make_atom(v.s);
    case Value::Tag::Name:
      if (callee_position || v.s.empty() || !(std::isupper(static_cast<unsigned char>(v.s[0])) || v.s[0] == '_'))
        return make_atom(v.s);
      return make_var(v.s);
    case Value::Tag::Node:
      if (!v.term) return make_atom(v.s);
      return copy_tree(*v.term);
    case Value::Tag::List: {
      std::vector<Expr> items;
      for (const auto& item : v.list) items.push_back(materialize(item, false));
      return make_list(std::move(items));
    }
  }
  throw InstantiateError("value has no expression form");
}

std::vector<std::string> metavariables(const Expr& pattern) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  walk(pattern, [&](const Expr& e) {
    if ((e.kind == Kind::Var && e.text != "_") || e.kind == Kind::VarList)
      if (seen.insert(e.text).second) out.push_back(e.text);
    return true;
  });
  return out;
}

}  // namespace refl
