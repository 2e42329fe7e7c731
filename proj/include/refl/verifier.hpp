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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "refl/dsl.hpp"
#include "refl/syntax.hpp"

namespace refl {

class VerifyError : public Error {
 public:
  using Error::Error;
};

// Variable environment: concrete entries plus an optional frame variable
// standing for the unknown rest. Keys are program variables or
// variable-name math variables.
struct Env {
  std::vector<std::pair<Expr, Expr>> entries;
  std::string frame;  // empty: nothing beyond the entries

  const Expr* lookup(const Expr& key) const;
};

// Function definitions: concrete forms plus an optional frame variable.
struct Defs {
  std::vector<Expr> functions;  // Function forms
  std::string frame;
  std::string module;  // module whose functions these are; may be empty

  const Expr* find(const std::string& name, std::size_t arity) const;
};

struct Config {
  Expr code;
  Env env;
  Defs defs;
};

struct EqConfig {
  Config cfg1;
  Config cfg2;
};

enum class CKind : std::uint8_t {
  Fresh,        // fresh(x) relative to env frame; expanded by its axiom
  NotInKeys,    // x not in keys(env)
  IsVar,        // x is a program variable name
  IsAtom,       // x is an atom
  LengthGT,     // length(t) > k
  Pure,         // pure(x); entailed in the pure subset
  Eq,
  Neq,
  IsMatching,   // value matches pattern
  NotMatching,
};

struct Constraint {
  CKind kind = CKind::Eq;
  std::vector<Expr> terms;
  std::string env;    // Fresh, NotInKeys, IsMatching
  std::int64_t k = 0;  // LengthGT
};

bool operator==(const Constraint& a, const Constraint& b);
std::string to_string(const Constraint& c);
std::string to_string(const std::vector<Constraint>& cs);
std::string to_string(const Config& c);
std::string to_string(const EqConfig& c);

Constraint fresh_c(Expr x, std::string env);
Constraint not_in_keys(Expr x, std::string env);
Constraint is_var_c(Expr x);

// Pattern over configurations; absent cells are unconstrained. Variables
// listed in `exists` are existentially quantified.
struct ConfigPattern {
  std::optional<Expr> code;
  std::optional<Env> env;
  std::optional<Defs> defs;
};

struct PurePattern {
  ConfigPattern cfg1;
  ConfigPattern cfg2;
  std::vector<Constraint> condition;
  std::vector<std::string> exists;
};

// Reachability rule of the single-configuration semantics, or one of its
// aggregated copies acting on one side of an eq configuration.
enum class Side : std::uint8_t { Single, Cfg1, Cfg2 };
const char* side_name(Side s);

struct Branch {
  Config cfg;
  std::vector<Constraint> added;
  std::map<std::string, Expr> narrowing;  // math variable refinement for the whole state
};

struct RuleResult {
  enum class Status : std::uint8_t { NoMatch, Applied, Undecided, Stuck };
  Status status = Status::NoMatch;
  std::vector<Branch> branches;  // Applied: one; Undecided: the narrowing alternatives
  std::string tag;               // the rule that fired (R9 reports the inner rule)
  std::vector<std::size_t> path;  // position of the redex in the code cell
  std::string reason;             // Stuck / Undecided explanation
  bool definite = false;          // Stuck: a real failure, not a symbolic limitation
};

struct ReachabilityRule {
  std::string tag;
  std::string description;
  Side side = Side::Single;
  std::function<RuleResult(const Config&, const std::vector<Constraint>&)> apply;
};

std::vector<ReachabilityRule> semantics_rules();
std::vector<ReachabilityRule> aggregate(const std::vector<ReachabilityRule>& rules);
// Applies a rule to its side of an eq configuration; the other side is kept.
RuleResult apply_to(const ReachabilityRule& r, const EqConfig& s, const std::vector<Constraint>& cs, EqConfig* out);

// Matching of a value against a pattern relative to an environment.
struct MatchResult {
  enum class Status : std::uint8_t { Yes, No, Undecided };
  Status status = Status::No;
  std::vector<std::pair<Expr, Expr>> bindings;  // pattern variable -> value
  std::map<std::string, Expr> narrowing;        // Undecided: refinement making progress
};
bool is_value(const Expr& e);
MatchResult is_matching(const Expr& value, const Expr& pat, const Env& env, const std::vector<Constraint>& cs);
// Capture-aware substitution of program variables and math variables.
Expr subst_vars(const Expr& e, const std::vector<std::pair<Expr, Expr>>& bindings);
// Replaces math variables by terms (list math variables splice).
Expr subst_math(const Expr& e, const std::map<std::string, Expr>& m);

// Deterministic small-step evaluation: the next redex and the rule firing
// there, as used by both the prover and the interpreter.
RuleResult step(const Config& c, const std::vector<Constraint>& cs);
// Begin-end elimination anywhere in the code cell.
std::optional<std::pair<Expr, std::vector<std::size_t>>> eliminate_block(const Expr& code);

struct InterpResult {
  enum class Status : std::uint8_t { Value, Cutoff, Stuck };
  Status status = Status::Stuck;
  Expr value;
  Config residual;
  std::string reason;
  int steps = 0;
};
InterpResult interpret(const Expr& code, const Env& env, const Defs& defs, int fuel);

// Ground valuation of math variables and cell frames.
struct Valuation {
  std::map<std::string, Expr> terms;  // list math variables map to a Seq
  std::map<std::string, Env> envs;
  std::map<std::string, Defs> defs;
};
Config instantiate_config(const Config& pattern, const Valuation& rho);
// (gamma, rho) satisfies pi iff rho(pi) = gamma.
bool satisfies(const Config& gamma, const Valuation& rho, const Config& pi);

enum class Criterion : std::uint8_t { SameState, SameValue };

struct ProofGoal {
  std::string name;
  EqConfig lhs;
  std::vector<Constraint> condition;
  Criterion rhs = Criterion::SameState;
  // Condition parts without an axiom; they are dropped, which only weakens
  // the hypothesis.
  std::vector<std::string> unaxiomatised;
  std::vector<std::string> notes;
};
std::string to_string(const ProofGoal& g);
PurePattern rhs_pattern(const ProofGoal& g);

ProofGoal goal_from_rule(const RuleDef& rule, const std::string& name = "rule");
std::vector<ProofGoal> goals_from_dataflow(const SchemeDef& scheme);
std::vector<ProofGoal> goals_from_application(const SourceModule& before, const SourceModule& after);

// Existential matching of q against p followed by constraint entailment.
bool entails(const EqConfig& p, const std::vector<Constraint>& pc, const PurePattern& q);

enum class StepKind : std::uint8_t { Derive, Structural, Axiom, Fork, Branch, Circularity, Subsume, Stop };

struct TraceStep {
  StepKind kind = StepKind::Derive;
  std::string tag;
  Side side = Side::Single;
  std::vector<std::size_t> path;
  std::string constraints;  // after the step
  std::size_t constraint = 0;                  // Axiom: index of the expanded atom
  std::vector<std::map<std::string, Expr>> alternatives;  // Fork
  std::vector<std::vector<Constraint>> added;             // Fork
  std::string detail;
};

struct ProofResult {
  enum class Status : std::uint8_t { Proved, Unknown, Disproved };
  Status status = Status::Unknown;
  std::vector<TraceStep> trace;
  int depth = 0;        // deepest derive count reached on any branch
  int derive_steps = 0;  // total over all branches
  std::string counterexample;
  std::vector<std::string> frontier;
};

struct ProverOptions {
  int max_depth = 32;
  int fork_budget = 64;
};

ProofResult scc_prove(const ProofGoal& goal, const ProverOptions& opts = {});
std::string format_trace(const ProofResult& r);
// Re-applies every recorded step and checks that each branch ends subsumed.
bool replay(const ProofGoal& goal, const ProofResult& r);

struct DynamicReport {
  int samples = 0;
  int runs = 0;
  int divergences = 0;
  int both_cutoff = 0;
  std::vector<std::string> details;
};
DynamicReport dynamic_verify(const SourceModule& before, const SourceModule& after, int samples, std::uint64_t seed);
// Ground argument tuples for dynamic verification.
std::vector<Expr> random_arguments(std::size_t arity, std::mt19937_64& rng);

Defs defs_of(const SourceModule& m);

}  // namespace refl
