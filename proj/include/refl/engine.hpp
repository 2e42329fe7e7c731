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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refl/dsl.hpp"
#include "refl/graph.hpp"
#include "refl/matcher.hpp"
#include "refl/semlib.hpp"

namespace refl {

class RefactoringError : public Error {
 public:
  using Error::Error;
};

// Definitions by name; later additions replace earlier ones of equal name
// and arity.
class Library {
 public:
  void add(Definition d);
  void add_all(std::vector<Definition> defs);
  // Parses and validates definition text; throws on diagnostics.
  void load_text(std::string_view text);
  void load_file(const std::string& path);
  const Definition* find(const std::string& name, std::size_t arity) const;
  const Definition* find(const std::string& name) const;
  const std::vector<Definition>& all() const { return defs_; }

 private:
  std::vector<Definition> defs_;
};

struct Outcome {
  bool ok = false;
  std::string reason;    // failure explanation
  NodeRef result;        // node that took the target's place, when any
  std::optional<Value> value;  // selector and composite results
  std::size_t rewrites = 0;
};

// One argument operation model for signature rules: the replacement
// arguments must arise from the matching ones by swapping, duplicating and
// grouping into tuples or lists.
struct ContractResult {
  bool ok = false;
  std::string clause;  // the violated requirement
  std::string detail;
};

ContractResult check_signature_contract(const RuleDef& rule, const std::vector<std::string>& params);
// Reachability search over the argument operations, bounded by depth.
bool signature_reachable(const RuleDef& rule, int depth);

// Executes definitions against a graph. Each run is atomic: on failure the
// graph is rolled back to its state before the run.
class Engine {
 public:
  Engine(SemanticGraph& g, const Library& lib) : g_(g), lib_(lib) {}

  // Runs the named definition with THIS = target.
  Outcome run(const std::string& name, NodeRef target, const std::vector<Value>& args);
  Outcome run(const Definition& def, NodeRef target, const std::vector<Value>& args);

  SemanticGraph& graph() { return g_; }

 private:
  struct Frame;

  Outcome dispatch(const Definition& def, NodeRef target, const std::vector<Value>& args);
  Outcome run_refactoring(const RefactoringDef& d, NodeRef target, const std::vector<Value>& args);
  Outcome run_selector(const SelectorDef& d, NodeRef target, const std::vector<Value>& args);
  Outcome run_composite(const CompositeDef& d, NodeRef target, const std::vector<Value>& args);
  Outcome run_signature(const SchemeDef& d, NodeRef target, const std::vector<Value>& args);
  Outcome run_forward(const SchemeDef& d, NodeRef target, const std::vector<Value>& args);
  Outcome run_backward(const SchemeDef& d, NodeRef target, const std::vector<Value>& args);

  bool run_step(const RuleDef& r, Frame& f, std::string* why);
  // Applies one rule at one node; returns the node that replaced it.
  std::optional<NodeRef> apply_at(const RuleDef& r, NodeRef at, Frame& f, Bindings* learned, std::string* why);
  std::vector<NodeRef> resolve_targets(const Term& t, Frame& f);
  EvalContext context(Frame& f, NodeRef target);
  NodeRef syntactic(NodeRef n) const;
  NodeRef place(NodeRef at, Expr replacement);

  SemanticGraph& g_;
  const Library& lib_;
  int depth_ = 0;
};

Bindings bind_params(const std::vector<std::string>& params, const std::vector<Value>& args, const std::string& name);

}  // namespace refl
