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

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "refl/ast.hpp"
#include "refl/syntax.hpp"

namespace refl {

// Selector expression: semantic function, selector or refactoring call,
// metavariable, THIS, constant, or a method-style call `Recv.name(args)`.
struct Term {
  enum class Kind : std::uint8_t { Meta, MetaList, This, Atom, Int, Call, Dot };

  Kind kind = Kind::Atom;
  std::string name;  // metavariable, atom, or callee name
  std::int64_t value = 0;
  std::vector<Term> args;  // Dot: args[0] is the receiver
};

struct Cond {
  enum class Kind : std::uint8_t { And, Or, Not, Pred, Assign, Eq, Neq };

  Kind kind = Kind::Pred;
  std::vector<Cond> kids;   // And/Or: 2, Not: 1
  Term lhs;                 // Pred term; Assign metavariable; Eq/Neq left
  Term rhs;                 // Assign/Eq/Neq right
};

struct Modifier {
  enum class Kind : std::uint8_t { On, In };

  Kind kind = Kind::On;
  Term target;
};

struct RuleDef {
  std::optional<Modifier> modifier;
  Expr matching;
  Expr replacement;
  std::optional<Cond> when;
  bool inline_when = false;  // layout only: `----- WHEN c` before the replacement
};

enum class Combinator : std::uint8_t { First, Then, Or };

struct RuleStep {
  Combinator op = Combinator::First;
  RuleDef rule;
};

struct RefactoringDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<RuleStep> chain;
};

enum class SchemeKind : std::uint8_t { Signature, ForwardDataflow, BackwardDataflow };

struct ReferenceRule {
  std::string meta;
  RuleDef rule;
};

struct SchemeDef {
  SchemeKind kind = SchemeKind::Signature;
  std::string name;
  std::vector<std::string> params;
  RuleDef rule;  // signature rule, or the dataflow DEFINITION rule
  std::vector<ReferenceRule> references;
};

struct Statement {
  std::optional<std::string> bind;  // `X = expr`
  Term expr;
  std::optional<Term> on;  // `refac(args) ON expr`
};

struct CompositeDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<Statement> body;
};

struct SelectorDef {
  std::string name;
  std::vector<std::string> params;
  Expr matching;
  std::optional<Cond> when;
  std::string ret;
  std::optional<Expr> replacement;  // never valid; kept so validate can report it
};

using Definition = std::variant<RefactoringDef, SchemeDef, CompositeDef, SelectorDef>;

const std::string& definition_name(const Definition& d);
std::size_t definition_arity(const Definition& d);

// Parses a definition file. Pattern bodies use mini-Erlang syntax with
// metavariables; layout is free except that a modifier or statement
// expression ends at the end of its line.
std::vector<Definition> parse_refl(std::string_view text);

// Structural diagnostics; empty when the definitions are well formed.
std::vector<std::string> validate(const std::vector<Definition>& defs);

// Canonical definition text; parse_refl(print_refl(d)) reproduces d.
std::string print_refl(const Definition& d);
std::string print_refl(const std::vector<Definition>& defs);
std::string print_term(const Term& t);
std::string print_cond(const Cond& c);

// Structural equality ignoring layout.
bool definitions_equal(const Definition& a, const Definition& b);

// Metavariables mentioned by a condition or term.
void collect_metavars(const Cond& c, std::vector<std::string>& out);
void collect_metavars(const Term& t, std::vector<std::string>& out);

}  // namespace refl
