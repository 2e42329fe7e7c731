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

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refl {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Opaque node identity. Id 0 is "no node" (detached or fresh-unregistered).
struct NodeRef {
  std::uint32_t id = 0;
  bool valid() const { return id != 0; }
  auto operator<=>(const NodeRef&) const = default;
};

struct Span {
  static constexpr std::uint32_t npos = 0xffffffffu;
  std::uint32_t begin = npos;
  std::uint32_t end = npos;

  bool valid() const { return begin != npos; }
  bool contains(const Span& o) const {
    return valid() && o.valid() && begin <= o.begin && o.end <= end;
  }
  auto operator<=>(const Span&) const = default;
};

enum class Kind : std::uint8_t {
  // Leaves.
  Atom,
  Integer,
  Var,
  Nil,
  // Constructors and expressions.
  Cons,        // [head | tail]
  Tuple,       // {elems..}
  Match,       // pattern = expr
  BinOp,       // text holds the operator
  Case,        // kids[0] scrutinee, kids[1..] clauses
  Fun,         // kids = clauses
  Call,        // kids[0] callee, kids[1..] args
  RemoteCall,  // kids[0] module, kids[1] name, kids[2..] args
  Block,       // begin kids.. end
  ListComp,    // kids[0] head, kids[1..] qualifiers
  Generator,   // pattern <- expr
  Clause,      // kids[0] name (or None), kids[1] Seq patterns, kids[2] Seq body
  Seq,         // plain sequence holder used inside clauses
  None,        // placeholder for absent clause names
  // Module structure.
  Function,     // kids = named clauses
  Attribute,    // text = attribute name, kids = payload
  ExportEntry,  // text = function name, value = arity
  Module,       // kids = forms
  // Pattern and verifier extensions.
  VarList,  // list metavariable `Name..`
  MathVar,  // verifier variable; value holds the MathSort
};

enum class MathSort : std::int64_t { Expr = 0, Value = 1, Seq = 2 };

const char* kind_name(Kind k);

// Syntax tree node with value semantics. Layout fields (span, slot, dirty,
// lead_sep) describe where the node text came from and are ignored by
// structural equality.
struct Expr {
  Kind kind = Kind::None;
  std::string text;
  std::int64_t value = 0;
  std::vector<Expr> kids;

  NodeRef ref;
  Span span;   // source bytes of this subtree when it still reads as parsed
  Span slot;   // layout position of a fresh node that replaced a parsed one
  bool dirty = false;
  bool lead_sep = false;

  Expr() = default;
  Expr(Kind k, std::string t = {}, std::int64_t v = 0, std::vector<Expr> ks = {})
      : kind(k), text(std::move(t)), value(v), kids(std::move(ks)) {}

  bool is_leaf() const {
    return kind == Kind::Atom || kind == Kind::Integer || kind == Kind::Var ||
           kind == Kind::Nil || kind == Kind::None || kind == Kind::VarList ||
           kind == Kind::MathVar || kind == Kind::ExportEntry;
  }
};

// Constructors.
Expr make_atom(std::string name);
Expr make_int(std::int64_t v);
Expr make_var(std::string name);
Expr make_varlist(std::string name);
Expr make_nil();
Expr make_none();
Expr make_cons(Expr head, Expr tail);
Expr make_list(std::vector<Expr> elems, Expr tail = make_nil());
Expr make_tuple(std::vector<Expr> elems);
Expr make_match(Expr pat, Expr e);
Expr make_binop(std::string op, Expr l, Expr r);
Expr make_call(Expr callee, std::vector<Expr> args);
Expr make_remote(Expr mod, Expr name, std::vector<Expr> args);
Expr make_block(std::vector<Expr> body);
Expr make_seq(std::vector<Expr> elems);
Expr make_clause(Expr name, std::vector<Expr> pats, std::vector<Expr> body);
Expr make_case(Expr scrutinee, std::vector<Expr> clauses);
Expr make_fun(std::vector<Expr> clauses);
Expr make_generator(Expr pat, Expr e);
Expr make_listcomp(Expr head, std::vector<Expr> quals);
Expr make_mathvar(std::string name, MathSort sort);

// Structural equality ignoring identity and layout.
bool structurally_equal(const Expr& a, const Expr& b);

// Number of leading fixed children before the variadic sequence part;
// -1 when the kind has no sequence part.
int fixed_prefix(Kind k);

// Sequence view of a node: the children that a list metavariable may span.
inline bool has_sequence(Kind k) { return fixed_prefix(k) >= 0; }

// Clause accessors.
inline const std::vector<Expr>& clause_patterns(const Expr& c) { return c.kids[1].kids; }
inline const std::vector<Expr>& clause_body(const Expr& c) { return c.kids[2].kids; }
inline std::vector<Expr>& clause_patterns(Expr& c) { return c.kids[1].kids; }
inline std::vector<Expr>& clause_body(Expr& c) { return c.kids[2].kids; }

// Argument list of a Call/RemoteCall.
std::vector<Expr> call_args(const Expr& call);

// Flattens a cons chain into its elements; `tail` receives the final tail.
std::vector<const Expr*> list_elements(const Expr& e, const Expr** tail);
bool is_proper_list(const Expr& e);

// Pattern sub-language check: Var/Atom/Integer/Nil/Cons/Tuple (plus
// metavariable leaves).
bool is_pattern(const Expr& e);

// Pre-order traversal. The callback returns false to skip children.
void walk(const Expr& e, const std::function<bool(const Expr&)>& fn);
void walk_mut(Expr& e, const std::function<bool(Expr&)>& fn);

// Copy with node identities cleared; layout fields are kept so that an
// untouched copy still renders as its original text.
Expr copy_tree(const Expr& e);

// Copy with identity and layout cleared.
Expr detach(const Expr& e);

}  // namespace refl
