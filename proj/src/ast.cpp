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

#include "refl/ast.hpp"

namespace refl {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Atom: return "Atom";
    case Kind::Integer: return "Integer";
    case Kind::Var: return "Var";
    case Kind::Nil: return "Nil";
    case Kind::Cons: return "Cons";
    case Kind::Tuple: return "Tuple";
    case Kind::Match: return "Match";
    case Kind::BinOp: return "BinOp";
    case Kind::Case: return "Case";
    case Kind::Fun: return "Fun";
    case Kind::Call: return "Call";
    case Kind::RemoteCall: return "RemoteCall";
    case Kind::Block: return "Block";
    case Kind::ListComp: return "ListComp";
    case Kind::Generator: return "Generator";
    case Kind::Clause: return "Clause";
    case Kind::Seq: return "Seq";
    case Kind::None: return "None";
    case Kind::Function: return "Function";
    case Kind::Attribute: return "Attribute";
    case Kind::ExportEntry: return "ExportEntry";
    case Kind::Module: return "Module";
    case Kind::VarList: return "VarList";
    case Kind::MathVar: return "MathVar";
  }
  return "?";
}

Expr make_atom(std::string name) { return Expr(Kind::Atom, std::move(name)); }
Expr make_int(std::int64_t v) { return Expr(Kind::Integer, {}, v); }
Expr make_var(std::string name) { return Expr(Kind::Var, std::move(name)); }
Expr make_varlist(std::string name) { return Expr(Kind::VarList, std::move(name)); }
Expr make_nil() { return Expr(Kind::Nil); }
Expr make_none() { return Expr(Kind::None); }

Expr make_cons(Expr head, Expr tail) {
  return Expr(Kind::Cons, {}, 0, {std::move(head), std::move(tail)});
}

Expr make_list(std::vector<Expr> elems, Expr tail) {
  Expr out = std::move(tail);
  for (auto it = elems.rbegin(); it != elems.rend(); ++it) out = make_cons(std::move(*it), std::move(out));
  return out;
}

Expr make_tuple(std::vector<Expr> elems) { return Expr(Kind::Tuple, {}, 0, std::move(elems)); }

Expr make_match(Expr pat, Expr e) {
  return Expr(Kind::Match, {}, 0, {std::move(pat), std::move(e)});
}

Expr make_binop(std::string op, Expr l, Expr r) {
  return Expr(Kind::BinOp, std::move(op), 0, {std::move(l), std::move(r)});
}

Expr make_call(Expr callee, std::vector<Expr> args) {
  Expr c(Kind::Call);
  c.kids.reserve(args.size() + 1);
  c.kids.push_back(std::move(callee));
  for (auto& a : args) c.kids.push_back(std::move(a));
  return c;
}

Expr make_remote(Expr mod, Expr name, std::vector<Expr> args) {
  Expr c(Kind::RemoteCall);
  c.kids.push_back(std::move(mod));
  c.kids.push_back(std::move(name));
  for (auto& a : args) c.kids.push_back(std::move(a));
  return c;
}

Expr make_block(std::vector<Expr> body) { return Expr(Kind::Block, {}, 0, std::move(body)); }
Expr make_seq(std::vector<Expr> elems) { return Expr(Kind::Seq, {}, 0, std::move(elems)); }

Expr make_clause(Expr name, std::vector<Expr> pats, std::vector<Expr> body) {
  return Expr(Kind::Clause, {}, 0,
              {std::move(name), make_seq(std::move(pats)), make_seq(std::move(body))});
}

Expr make_case(Expr scrutinee, std::vector<Expr> clauses) {
  Expr c(Kind::Case);
  c.kids.push_back(std::move(scrutinee));
  for (auto& cl : clauses) c.kids.push_back(std::move(cl));
  return c;
}

Expr make_fun(std::vector<Expr> clauses) { return Expr(Kind::Fun, {}, 0, std::move(clauses)); }

Expr make_generator(Expr pat, Expr e) {
  return Expr(Kind::Generator, {}, 0, {std::move(pat), std::move(e)});
}

Expr make_listcomp(Expr head, std::vector<Expr> quals) {
  Expr c(Kind::ListComp);
  c.kids.push_back(std::move(head));
  for (auto& q : quals) c.kids.push_back(std::move(q));
  return c;
}

Expr make_mathvar(std::string name, MathSort sort) {
  return Expr(Kind::MathVar, std::move(name), static_cast<std::int64_t>(sort));
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text || a.value != b.value || a.kids.size() != b.kids.size())
    return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!structurally_equal(a.kids[i], b.kids[i])) return false;
  return true;
}

int fixed_prefix(Kind k) {
  switch (k) {
    case Kind::Tuple:
    case Kind::Block:
    case Kind::Seq:
    case Kind::Fun:
    case Kind::Function:
    case Kind::Module:
    case Kind::Attribute:
      return 0;
    case Kind::Case:
    case Kind::Call:
    case Kind::ListComp:
      return 1;
    case Kind::RemoteCall:
      return 2;
    default:
      return -1;
  }
}

std::vector<Expr> call_args(const Expr& call) {
  std::size_t skip = call.kind == Kind::RemoteCall ? 2 : 1;
  if (call.kids.size() < skip) return {};
  return std::vector<Expr>(call.kids.begin() + static_cast<std::ptrdiff_t>(skip), call.kids.end());
}

std::vector<const Expr*> list_elements(const Expr& e, const Expr** tail) {
  std::vector<const Expr*> out;
  const Expr* cur = &e;
  while (cur->kind == Kind::Cons) {
    out.push_back(&cur->kids[0]);
    cur = &cur->kids[1];
  }
  if (tail) *tail = cur;
  return out;
}

bool is_proper_list(const Expr& e) {
  const Expr* tail = nullptr;
  list_elements(e, &tail);
  return tail->kind == Kind::Nil;
}

bool is_pattern(const Expr& e) {
  switch (e.kind) {
    case Kind::Var:
    case Kind::Atom:
    case Kind::Integer:
    case Kind::Nil:
    case Kind::VarList:
    case Kind::MathVar:
      return true;
    case Kind::Cons:
    case Kind::Tuple:
      for (const auto& k : e.kids)
        if (!is_pattern(k)) return false;
      return true;
    default:
      return false;
  }
}

void walk(const Expr& e, const std::function<bool(const Expr&)>& fn) {
  if (!fn(e)) return;
  for (const auto& k : e.kids) walk(k, fn);
}

void walk_mut(Expr& e, const std::function<bool(Expr&)>& fn) {
  if (!fn(e)) return;
  for (auto& k : e.kids) walk_mut(k, fn);
}

Expr copy_tree(const Expr& e) {
  Expr out = e;
  walk_mut(out, [](Expr& n) {
    n.ref = NodeRef{};
    return true;
  });
  return out;
}

Expr detach(const Expr& e) {
  Expr out = e;
  walk_mut(out, [](Expr& n) {
    n.ref = NodeRef{};
    n.span = Span{};
    n.slot = Span{};
    n.dirty = false;
    n.lead_sep = false;
    return true;
  });
  return out;
}

}  // namespace refl
