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
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "refl/ast.hpp"
#include "refl/syntax.hpp"

namespace refl {

class GraphError : public Error {
 public:
  using Error::Error;
};

class TxnError : public Error {
 public:
  using Error::Error;
};

enum class SemKind : std::uint8_t { Module, Function, Variable };

struct SemNode {
  SemKind kind = SemKind::Module;
  std::string name;
  std::size_t module = 0;
  int arity = 0;                   // functions
  bool pure = true;                // functions
  NodeRef form;                    // functions: defining form
  std::vector<NodeRef> clauses;    // functions
  std::vector<NodeRef> binders;    // variables
  std::vector<NodeRef> occurrences;  // variables
  NodeRef function;                // variables: enclosing function
};

enum class RefKind : std::uint8_t { LocalCall, RemoteCall, Apply, ExportEntry };

struct FunctionRef {
  NodeRef node;
  RefKind kind = RefKind::LocalCall;
};

struct Diagnostic {
  NodeRef node;
  std::string message;
};

// AST plus semantic nodes and edges. Every syntactic node carries a NodeRef;
// ids are never reused, so a replaced subtree's ids become retired.
class SemanticGraph {
 public:
  explicit SemanticGraph(std::vector<SourceModule> modules);

  // Copies rebuild their node index; transaction history is not copied.
  SemanticGraph(const SemanticGraph& o);
  SemanticGraph& operator=(const SemanticGraph& o);

  // Node access.
  bool alive(NodeRef n) const;
  bool is_semantic(NodeRef n) const { return sem_.count(n.id) != 0; }
  const Expr& node(NodeRef n) const;
  const SemNode& sem(NodeRef n) const;
  NodeRef parent(NodeRef n) const;
  std::size_t child_index(NodeRef n) const;
  std::size_t module_index(NodeRef n) const;
  // True when n is an element of a function clause body.
  bool is_top_level_expr(NodeRef n) const;

  std::size_t module_count() const { return modules_.size(); }
  const SourceModule& module(std::size_t i) const { return modules_[i]; }
  std::optional<std::size_t> find_module(const std::string& name_or_path) const;

  // Semantic queries.
  NodeRef module_node(std::size_t module) const;
  NodeRef module_of(NodeRef n) const;
  // Enclosing function semantic node; invalid when n is outside any function.
  NodeRef function_of(NodeRef n) const;
  NodeRef function_of_form(NodeRef form) const;
  NodeRef find_function(std::size_t module, const std::string& name, int arity) const;
  std::vector<NodeRef> functions(std::size_t module) const;
  std::vector<NodeRef> exported_functions(std::size_t module) const;
  std::vector<FunctionRef> function_refs(NodeRef f) const;
  std::vector<NodeRef> opaque_uses(NodeRef f) const;
  NodeRef variable_of(NodeRef occurrence) const;
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

  std::set<std::string> scope_names(NodeRef n) const;
  // Every variable name occurring in the function enclosing n.
  std::set<std::string> function_names(NodeRef n) const;

  std::vector<NodeRef> flow_forward(NodeRef e) const;
  std::vector<NodeRef> flow_sources(NodeRef e) const;
  std::vector<NodeRef> flow_successors(NodeRef e) const;
  bool is_flow_node(NodeRef e) const;

  bool is_pure(NodeRef e) const;
  bool is_pure_expr(const Expr& e, std::size_t module) const;

  NodeRef lookup_at(const std::string& file, int line, int col) const;

  // Transactions.
  void txn_begin();
  void txn_commit();
  void txn_rollback();
  std::size_t txn_depth() const { return txn_stack_.size(); }
  NodeRef txn_replace(NodeRef target, Expr replacement);
  // An ill-formed result throws TxnError and leaves the graph unchanged.
  // Replaces a sequence element by several elements; returns their refs.
  std::vector<NodeRef> txn_replace_seq(NodeRef target, std::vector<Expr> items);
  std::size_t mutation_count() const { return mutations_; }

  // Source text of a module reflecting all mutations.
  std::string render(std::size_t module) const;
  std::string to_dot() const;

 private:
  struct Loc {
    const Expr* node = nullptr;
    std::uint32_t parent = 0;
    std::uint32_t index = 0;
    std::size_t module = 0;
    std::uint32_t function = 0;  // enclosing function semantic id
  };
  struct Snapshot {
    std::vector<SourceModule> modules;
    std::size_t mutations;
  };

  void assign_ids(Expr& e);
  void reanalyse();
  void index_tree(const Expr& e, std::uint32_t parent, std::uint32_t index, std::size_t module, std::uint32_t fn);
  void analyse_module(std::size_t mi);
  void compute_purity();
  Expr* mutable_node(NodeRef n, std::size_t* module);
  void commit_mutation(std::size_t module, SourceModule saved);
  std::uint32_t sem_id(const std::string& key);
  void require_txn(const char* op) const;
  std::string render_node(const Expr& e, const std::string& text) const;

  std::vector<SourceModule> modules_;
  std::uint32_t next_id_ = 1;
  std::map<std::string, std::uint32_t> sem_keys_;
  std::unordered_map<std::uint32_t, Loc> index_;
  std::unordered_map<std::uint32_t, SemNode> sem_;
  std::vector<NodeRef> module_sem_;
  std::map<std::tuple<std::size_t, std::string, int>, NodeRef> function_table_;
  std::unordered_map<std::uint32_t, std::uint32_t> var_of_;  // occurrence/binder -> variable
  std::unordered_map<std::uint32_t, std::set<std::string>> scope_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> flow_succ_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> flow_pred_;
  std::vector<Diagnostic> diagnostics_;
  std::vector<Snapshot> txn_stack_;
  std::size_t mutations_ = 0;

  friend class GraphAnalyser;
};

}  // namespace refl
