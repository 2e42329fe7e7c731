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

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "refl/engine.hpp"

namespace refl::testing {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string source_path(const std::string& rel) { return std::string(REFL_SOURCE_DIR) + "/" + rel; }

inline SemanticGraph sample_graph(const std::string& name) {
  std::string path = source_path("samples/" + name + ".erl");
  return SemanticGraph({parse_module(slurp(path), path)});
}

inline SemanticGraph graph_of(const std::string& text) { return SemanticGraph({parse_module(text)}); }

inline Library library_of(std::initializer_list<const char*> files) {
  Library lib;
  for (const char* f : files) lib.load_file(source_path(std::string("definitions/") + f));
  return lib;
}

// The nth node of module 0 (pre-order) satisfying pred; invalid when absent.
inline NodeRef find_node(const SemanticGraph& g, const std::function<bool(const Expr&)>& pred, int nth = 0) {
  NodeRef out;
  int seen = 0;
  walk(g.module(0).root, [&](const Expr& e) {
    if (out.valid()) return false;
    if (pred(e) && seen++ == nth) out = e.ref;
    return !out.valid();
  });
  return out;
}

inline NodeRef find_printed(const SemanticGraph& g, const std::string& text, int nth = 0) {
  return find_node(g, [&](const Expr& e) { return e.kind != Kind::Seq && print(e) == text; }, nth);
}

// Equality of module texts up to layout: both are parsed and compared.
inline bool same_program(const std::string& a, const std::string& b) {
  return structurally_equal(parse_module(a).root, parse_module(b).root);
}

}  // namespace refl::testing
