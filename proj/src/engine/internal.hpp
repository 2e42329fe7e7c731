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
#include <string>
#include <vector>

#include "refl/engine.hpp"

namespace refl {

// Execution state of one definition run. Semantic queries read snap, the
// graph as it was when the run started.
struct Engine::Frame {
  std::shared_ptr<const SemanticGraph> snap;
  NodeRef this_node;
  Bindings shared;
  NodeRef last;  // node produced by the latest rewrite
};

Bindings without(const Bindings& b, const std::vector<std::string>& names);
// Short text of a node for diagnostics.
std::string describe(const Expr& e);

}  // namespace refl
