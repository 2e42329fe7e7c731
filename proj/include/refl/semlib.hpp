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

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "refl/dsl.hpp"
#include "refl/graph.hpp"
#include "refl/matcher.hpp"

namespace refl {

class SemanticError : public Error {
 public:
  using Error::Error;
};

// Calls outside the built-in catalog (selectors, refactorings); returns
// nothing when the name is unknown to the caller as well. `receiver` is set
// for method-style calls.
using ExternalCall = std::function<std::optional<Value>(const std::string& name, const Value* receiver,
                                                        const std::vector<Value>& args)>;

struct EvalContext {
  // Semantic queries read `graph`, the state at the start of the running
  // definition; fresh names are checked against `live` when set.
  const SemanticGraph* graph = nullptr;
  NodeRef this_node;  // THIS
  NodeRef target;     // current rule target; scope of fresh names
  ExternalCall external;
  const SemanticGraph* live = nullptr;
};

Value node_value(const SemanticGraph& g, NodeRef n);

// Built-in semantic functions and predicates.
Value call_semantic(const std::string& name, const std::vector<Value>& args, const EvalContext& ctx);
bool is_semantic_function(const std::string& name);

Value eval_term(const Term& t, const Bindings& b, const EvalContext& ctx);

// Left-to-right, short-circuit evaluation. Bindings made by `M = expr` and
// fresh-name generation are returned on success; NOT discards them.
std::pair<bool, Bindings> eval_condition(const Cond& c, const Bindings& b, const EvalContext& ctx);

// First name of the series V, V1, V2, ... outside `taken`.
std::string fresh_name(const std::set<std::string>& taken);

}  // namespace refl
