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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "refl/ast.hpp"

namespace refl {

// Loosely typed value shared by metavariable bindings and semantic
// functions. A syntactic node value keeps a snapshot of its subtree so that
// it stays meaningful after later rewrites retire the original node.
struct Value {
  enum class Tag : std::uint8_t { Bool, Int, Atom, Name, Node, List };

  Tag tag = Tag::Bool;
  bool b = false;
  std::int64_t i = 0;
  std::string s;  // atom or name spelling; name of a semantic node
  NodeRef node;
  std::shared_ptr<const Expr> term;  // syntactic nodes only
  std::vector<Value> list;

  static Value boolean(bool v);
  static Value integer(std::int64_t v);
  static Value atom(std::string a);
  static Value name(std::string n);
  // Syntactic node: `e` is snapshotted with its layout.
  static Value syntax(const Expr& e);
  static Value semantic(NodeRef n, std::string name);
  static Value list_of(std::vector<Value> items);

  bool is_node() const { return tag == Tag::Node; }
  bool is_semantic() const { return tag == Tag::Node && !term; }
  bool is_syntax() const { return tag == Tag::Node && term != nullptr; }
};

// Coercions. Constants and constant nodes convert both ways; a semantic node
// reads as its name.
std::optional<std::string> as_atom(const Value& v);
std::optional<std::int64_t> as_int(const Value& v);
std::optional<bool> as_bool(const Value& v);
// Elements of a list value; a single non-list value reads as a singleton.
std::vector<Value> as_list(const Value& v);

// Equality after coercion; syntactic nodes compare structurally.
bool value_equal(const Value& a, const Value& b);
std::string to_string(const Value& v);

enum class Origin : std::uint8_t { Param, Pattern, Condition, Local };

struct Binding {
  Value value;
  Origin origin = Origin::Pattern;
};

// Single-assignment metavariable environment.
class Bindings {
 public:
  const Value* get(const std::string& name) const;
  bool has(const std::string& name) const { return map_.count(name) != 0; }
  // False on conflict with an existing non-equal value; equal rebinds keep
  // the first origin.
  bool bind(const std::string& name, Value v, Origin origin);
  void erase(const std::string& name) { map_.erase(name); }
  // Union of both environments, or nothing when a shared key disagrees.
  std::optional<Bindings> merge(const Bindings& other) const;
  const std::map<std::string, Binding>& entries() const { return map_; }
  std::size_t size() const { return map_.size(); }
  bool operator==(const Bindings& o) const;

 private:
  std::map<std::string, Binding> map_;
};

class InstantiateError : public Error {
 public:
  using Error::Error;
};

// Every consistent extension of `seed` under which `pattern` matches `e`,
// list metavariable splits enumerated left to right, shortest first. Node
// values carry the matched subtree's ref.
std::vector<Bindings> match(const Expr& pattern, const Expr& e, const Bindings& seed);

// Fresh tree from a replacement pattern. Bound subtrees are copied with
// their layout and without identities.
Expr instantiate(const Expr& pattern, const Bindings& b);

// Expression spelling of a value in a given position: names become atoms in
// callee positions or when not capitalised, and variables elsewhere.
Expr materialize(const Value& v, bool callee_position);

// Metavariable names occurring in a pattern (`Name..` included).
std::vector<std::string> metavariables(const Expr& pattern);

}  // namespace refl
