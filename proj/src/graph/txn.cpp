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

#include <algorithm>

#include "refl/graph.hpp"

namespace refl {

namespace {

void clear_refs(Expr& e) {
  e.ref = NodeRef{};
  for (auto& k : e.kids) clear_refs(k);
}

// Merges a replacement into the node it replaces. Equal headers keep the old
// identity and layout and recurse pairwise; anything else becomes a fresh
// node placed in the old node's slot.
Expr reconcile(const Expr& old, Expr nw, bool* changed) {
  if (nw.span.valid() && nw.span == old.span && !nw.dirty && !old.dirty && structurally_equal(old, nw)) {
    *changed = false;
    return old;
  }
  *changed = true;
  Span position = old.slot.valid() ? old.slot : old.span;
  if (nw.kind != old.kind || nw.text != old.text || nw.value != old.value) {
    clear_refs(nw);
    nw.slot = position;
    nw.lead_sep = old.lead_sep;
    return nw;
  }
  Expr r(old.kind, old.text, old.value);
  r.ref = old.ref;
  r.span = old.span;
  r.slot = old.slot;
  r.lead_sep = old.lead_sep;
  std::size_t shared = std::min(old.kids.size(), nw.kids.size());
  bool any = false;
  for (std::size_t i = 0; i < shared; ++i) {
    bool c = false;
    r.kids.push_back(reconcile(old.kids[i], std::move(nw.kids[i]), &c));
    any = any || c;
  }
  for (std::size_t i = shared; i < nw.kids.size(); ++i) {
    Expr k = std::move(nw.kids[i]);
    clear_refs(k);
    k.slot = Span{};
    k.lead_sep = true;
    r.kids.push_back(std::move(k));
    any = true;
  }
  if (nw.kids.size() < old.kids.size()) {
    // Dropped children leave separators behind; print this node afresh.
    r.span = Span{};
    r.slot = position;
    any = true;
  }
  if (!any) {
    *changed = false;
    return old;
  }
  r.dirty = r.span.valid();
  return r;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

// Source rendering: untouched subtrees are copied byte for byte, touched
// ones are walked child by child with gap text taken from the original.
class Renderer {
 public:
  explicit Renderer(const std::string& text) : text_(text) {
    hook_ = [this](const Expr& e, std::string& out) { return this->hook(e, out); };
  }

  void node(const Expr& e, std::string& out) {
    if (e.span.valid() && !e.dirty) {
      out.append(text_, e.span.begin, e.span.end - e.span.begin);
      return;
    }
    if (e.span.valid() && walk(e, out)) return;
    canonical(e, out);
  }

 private:
  void canonical(const Expr& e, std::string& out) {
    skip_ = &e;
    out += print(e, hook_);
  }

  bool hook(const Expr& e, std::string& out) {
    if (skip_ == &e) {
      skip_ = nullptr;
      return false;
    }
    if (!e.span.valid()) return false;
    // An inner cons cell of a list literal has no standalone spelling.
    if (e.kind == Kind::Cons && text_[e.span.begin] != '[') return false;
    if (!e.dirty) {
      out.append(text_, e.span.begin, e.span.end - e.span.begin);
      return true;
    }
    return walk(e, out);
  }

  std::string separator(const Expr& parent, Span prev) const {
    switch (parent.kind) {
      case Kind::Module:
        return "\n\n";
      case Kind::Function:
        return ";\n";
      case Kind::Case:
      case Kind::Seq: {
        std::string sep = parent.kind == Kind::Case ? ";" : ",";
        if (!prev.valid()) return sep + " ";
        std::size_t ls = text_.rfind('\n', prev.begin == 0 ? 0 : prev.begin - 1);
        ls = (ls == std::string::npos || prev.begin == 0) ? 0 : ls + 1;
        std::string_view prefix(text_.data() + ls, prev.begin - ls);
        if (blank(prefix)) return sep + "\n" + std::string(prefix);
        return sep + " ";
      }
      default:
        return ", ";
    }
  }

  // Cursor walk over the children of a touched node. Fails (leaving `out`
  // untouched) when the children cannot be laid out in source order.
  bool walk(const Expr& e, std::string& out) {
    std::string buf;
    std::uint32_t cursor = e.span.begin;
    Span prev;
    for (const auto& k : e.kids) {
      if (k.slot.valid()) {
        if (k.slot.begin < cursor || k.slot.end > e.span.end) return false;
        buf.append(text_, cursor, k.slot.begin - cursor);
        content(k, buf);
        cursor = k.slot.end;
        prev = k.slot;
      } else if (k.lead_sep) {
        if (prev.valid() || cursor != e.span.begin) buf += separator(e, prev);
        content(k, buf);
      } else if (k.span.valid()) {
        if (k.span.begin < cursor || k.span.end > e.span.end) return false;
        buf.append(text_, cursor, k.span.begin - cursor);
        node(k, buf);
        cursor = k.span.end;
        prev = k.span;
      } else {
        return false;
      }
    }
    buf.append(text_, cursor, e.span.end - cursor);
    out += buf;
    return true;
  }

  // A child placed into a slot: its own span, if any, still names its text.
  void content(const Expr& k, std::string& out) {
    if (k.span.valid() && !k.dirty && !(k.kind == Kind::Cons && text_[k.span.begin] != '[')) {
      out.append(text_, k.span.begin, k.span.end - k.span.begin);
      return;
    }
    if (k.span.valid() && k.dirty && walk(k, out)) return;
    canonical(k, out);
  }

  const std::string& text_;
  PrintHook hook_;
  const Expr* skip_ = nullptr;
};

}  // namespace

std::string SemanticGraph::render(std::size_t module) const {
  const SourceModule& m = modules_.at(module);
  std::string out;
  Renderer(m.text).node(m.root, out);
  return out;
}

void SemanticGraph::require_txn(const char* op) const {
  if (txn_stack_.empty()) throw TxnError(std::string(op) + " outside a transaction");
}

void SemanticGraph::txn_begin() { txn_stack_.push_back(Snapshot{modules_, mutations_}); }

void SemanticGraph::txn_commit() {
  require_txn("txn_commit");
  txn_stack_.pop_back();
}

void SemanticGraph::txn_rollback() {
  require_txn("txn_rollback");
  modules_ = std::move(txn_stack_.back().modules);
  mutations_ = txn_stack_.back().mutations;
  txn_stack_.pop_back();
  reanalyse();
}

// A mutation that leaves the module ill-formed is undone before reporting.
void SemanticGraph::commit_mutation(std::size_t module, SourceModule saved) {
  try {
    reanalyse();
  } catch (const Error& e) {
    modules_[module] = std::move(saved);
    reanalyse();
    throw TxnError(std::string("replacement rejected: ") + e.what());
  }
  ++mutations_;
}

Expr* SemanticGraph::mutable_node(NodeRef n, std::size_t* module) {
  node(n);
  std::vector<std::uint32_t> path;
  std::uint32_t cur = n.id;
  while (index_.at(cur).parent != 0) {
    path.push_back(index_.at(cur).index);
    cur = index_.at(cur).parent;
  }
  *module = index_.at(n.id).module;
  Expr* e = &modules_[*module].root;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    if (e->span.valid()) e->dirty = true;
    e = &e->kids[*it];
  }
  return e;
}

NodeRef SemanticGraph::txn_replace(NodeRef target, Expr replacement) {
  require_txn("txn_replace");
  if (is_semantic(target)) throw TxnError("txn_replace needs a syntactic target");
  std::size_t module = index_.at(node(target).ref.id).module;
  SourceModule saved = modules_[module];
  Expr* slot = mutable_node(target, &module);
  bool changed = false;
  Expr merged = reconcile(*slot, std::move(replacement), &changed);
  *slot = std::move(merged);
  assign_ids(*slot);
  NodeRef result = slot->ref;
  commit_mutation(module, std::move(saved));
  return result;
}

std::vector<NodeRef> SemanticGraph::txn_replace_seq(NodeRef target, std::vector<Expr> items) {
  require_txn("txn_replace_seq");
  NodeRef p = parent(target);
  if (!p.valid()) throw TxnError("sequence replacement needs a parent");
  const Expr& parent_node = node(p);
  std::size_t at = child_index(target);
  int fixed = fixed_prefix(parent_node.kind);
  if (fixed < 0 || at < static_cast<std::size_t>(fixed))
    throw TxnError(std::string("cannot splice a sequence into ") + kind_name(parent_node.kind));
  std::size_t module = index_.at(p.id).module;
  SourceModule saved = modules_[module];
  Expr* par = mutable_node(p, &module);
  if (par->span.valid()) par->dirty = true;
  std::vector<Expr> fresh;
  if (items.empty()) {
    par->kids.erase(par->kids.begin() + static_cast<std::ptrdiff_t>(at));
    if (par->span.valid()) {
      par->slot = par->slot.valid() ? par->slot : par->span;
      par->span = Span{};
      par->dirty = false;
    }
  } else {
    bool changed = false;
    Expr first = reconcile(par->kids[at], std::move(items[0]), &changed);
    par->kids[at] = std::move(first);
    for (std::size_t i = 1; i < items.size(); ++i) {
      Expr k = std::move(items[i]);
      clear_refs(k);
      k.slot = Span{};
      k.lead_sep = true;
      par->kids.insert(par->kids.begin() + static_cast<std::ptrdiff_t>(at + i), std::move(k));
    }
  }
  assign_ids(modules_[module].root);
  std::vector<NodeRef> out;
  for (std::size_t i = 0; i < items.size(); ++i) out.push_back(par->kids[at + i].ref);
  commit_mutation(module, std::move(saved));
  return out;
}

}  // namespace refl
