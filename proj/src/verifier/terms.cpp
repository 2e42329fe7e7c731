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

#include "internal.hpp"

namespace refl {

const Expr* Env::lookup(const Expr& key) const {
  for (const auto& [k, v] : entries)
    if (k.kind == key.kind && k.text == key.text) return &v;
  return nullptr;
}

const Expr* Defs::find(const std::string& name, std::size_t arity) const {
  for (const auto& f : functions) {
    if (f.kind != Kind::Function || f.kids.empty()) continue;
    const Expr& c = f.kids[0];
    if (c.kids[0].kind == Kind::Atom && c.kids[0].text == name && clause_patterns(c).size() == arity) return &f;
  }
  return nullptr;
}

Defs defs_of(const SourceModule& m) {
  Defs d;
  d.module = m.name;
  for (const Expr* f : m.functions()) d.functions.push_back(detach(*f));
  return d;
}

const char* side_name(Side s) {
  switch (s) {
    case Side::Cfg1: return "cfg1";
    case Side::Cfg2: return "cfg2";
    default: return "cfg";
  }
}

bool operator==(const Constraint& a, const Constraint& b) {
  if (a.kind != b.kind || a.env != b.env || a.k != b.k || a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i)
    if (!structurally_equal(a.terms[i], b.terms[i])) return false;
  return true;
}

Constraint fresh_c(Expr x, std::string env) { return Constraint{CKind::Fresh, {std::move(x)}, std::move(env), 0}; }
Constraint not_in_keys(Expr x, std::string env) { return Constraint{CKind::NotInKeys, {std::move(x)}, std::move(env), 0}; }
Constraint is_var_c(Expr x) { return Constraint{CKind::IsVar, {std::move(x)}, {}, 0}; }

std::string to_string(const Constraint& c) {
  auto t = [&](std::size_t i) { return i < c.terms.size() ? print(c.terms[i]) : std::string("?"); };
  switch (c.kind) {
    case CKind::Fresh: return "fresh(" + t(0) + ")";
    case CKind::NotInKeys: return t(0) + " notin keys(" + c.env + ")";
    case CKind::IsVar: return "isVar(" + t(0) + ")";
    case CKind::IsAtom: return "isAtom(" + t(0) + ")";
    case CKind::LengthGT: return "length(" + t(0) + ") > " + std::to_string(c.k);
    case CKind::Pure: return "pure(" + t(0) + ")";
    case CKind::Eq: return t(0) + " = " + t(1);
    case CKind::Neq: return t(0) + " /= " + t(1);
    case CKind::IsMatching: return "isMatching(" + t(0) + ", " + t(1) + ")";
    case CKind::NotMatching: return "not isMatching(" + t(0) + ", " + t(1) + ")";
  }
  return "?";
}

std::string to_string(const std::vector<Constraint>& cs) {
  if (cs.empty()) return "true";
  std::string out;
  for (const auto& c : cs) out += (out.empty() ? "" : ", ") + to_string(c);
  return out;
}

namespace {

std::string env_string(const Env& e) {
  std::string out;
  for (const auto& [k, v] : e.entries) out += (out.empty() ? "" : ", ") + print(k) + " |-> " + print(v);
  if (!e.frame.empty()) out += (out.empty() ? "" : ", ") + e.frame;
  return out.empty() ? "{}" : out;
}

std::string defs_string(const Defs& d) {
  std::string out;
  for (const auto& f : d.functions) {
    const Expr& c = f.kids[0];
    out += (out.empty() ? "" : ", ") + print(c.kids[0]) + "/" + std::to_string(clause_patterns(c).size());
  }
  if (!d.frame.empty()) out += (out.empty() ? "" : ", ") + d.frame;
  if (out.empty()) out = "{}";
  return d.module.empty() ? out : d.module + ":{" + out + "}";
}

std::string flat(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string to_string(const Config& c) {
  return "<<" + flat(print(c.code)) + ">code <" + env_string(c.env) + ">env <" + defs_string(c.defs) + ">defs>";
}

std::string to_string(const EqConfig& c) { return to_string(c.cfg1) + "cfg1 " + to_string(c.cfg2) + "cfg2"; }

namespace verify_detail {

bool has_mathvars(const Expr& e) {
  bool found = false;
  walk(e, [&](const Expr& x) {
    if (x.kind == Kind::MathVar) found = true;
    return !found;
  });
  return found;
}

void collect_mathvars(const Expr& e, std::set<std::string>& out) {
  walk(e, [&](const Expr& x) {
    if (x.kind == Kind::MathVar) out.insert(x.text);
    return true;
  });
}

bool has_constraint(const std::vector<Constraint>& cs, const Constraint& c) {
  return std::find(cs.begin(), cs.end(), c) != cs.end();
}

Expr seq_to_code(std::vector<Expr> body) {
  if (body.size() == 1) return std::move(body[0]);
  return make_block(std::move(body));
}

const Expr& at(const Expr& e, const std::vector<std::size_t>& path) {
  const Expr* cur = &e;
  for (std::size_t i : path) cur = &cur->kids.at(i);
  return *cur;
}

Expr replace_at(Expr e, const std::vector<std::size_t>& path, Expr sub) {
  Expr* cur = &e;
  for (std::size_t i : path) cur = &cur->kids.at(i);
  *cur = std::move(sub);
  return e;
}

Expr module_of_defs(const std::string& frame) {
  return make_call(make_atom("module"), {make_mathvar(frame, MathSort::Expr)});
}

}  // namespace verify_detail

using namespace verify_detail;

bool is_value(const Expr& e) {
  switch (e.kind) {
    case Kind::Atom:
    case Kind::Integer:
    case Kind::Nil:
    case Kind::Fun:
      return true;
    case Kind::MathVar:
      return e.value != static_cast<std::int64_t>(MathSort::Expr);
    case Kind::Cons:
    case Kind::Tuple:
      return std::all_of(e.kids.begin(), e.kids.end(), [](const Expr& k) { return is_value(k); });
    default:
      return false;
  }
}

namespace {

using Status = MatchResult::Status;

Expr head_shape(const Expr& p) {
  switch (p.kind) {
    case Kind::Cons: return make_cons(make_var("_"), make_var("_"));
    case Kind::Tuple: {
      std::vector<Expr> ks(p.kids.size(), make_var("_"));
      return make_tuple(std::move(ks));
    }
    default: return p;
  }
}

bool same_head(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.text == b.text && a.value == b.value && a.kids.size() == b.kids.size();
}

bool is_constructor(const Expr& p) {
  return p.kind == Kind::Atom || p.kind == Kind::Integer || p.kind == Kind::Nil || p.kind == Kind::Cons ||
         p.kind == Kind::Tuple;
}

bool has_seq_kid(const Expr& e) {
  return std::any_of(e.kids.begin(), e.kids.end(), [](const Expr& k) {
    return k.kind == Kind::MathVar && k.value == static_cast<std::int64_t>(MathSort::Seq);
  });
}

class Matcher {
 public:
  Matcher(const Env& env, const std::vector<Constraint>& cs) : env_(env), cs_(cs) {}

  MatchResult run(const Expr& v, const Expr& p) {
    Status s = go(v, p);
    MatchResult r;
    r.status = saw_no_ ? Status::No : s;
    if (r.status == Status::Yes) r.bindings = std::move(bindings_);
    if (r.status == Status::Undecided) r.narrowing = std::move(narrowing_);
    return r;
  }

  std::optional<Constraint> negative;

 private:
  Status combine(Status a, Status b) {
    if (a == Status::No || b == Status::No) return Status::No;
    if (a == Status::Undecided || b == Status::Undecided) return Status::Undecided;
    return Status::Yes;
  }

  Status undecided() {
    return Status::Undecided;
  }

  Status no() {
    saw_no_ = true;
    return Status::No;
  }

  Status equal_values(const Expr& a, const Expr& b) {
    if (structurally_equal(a, b)) return Status::Yes;
    if (!has_mathvars(a) && !has_mathvars(b)) return no();
    if (has_constraint(cs_, Constraint{CKind::Neq, {a, b}, {}, 0}) ||
        has_constraint(cs_, Constraint{CKind::Neq, {b, a}, {}, 0}))
      return no();
    return undecided();
  }

  const Expr* bound(const Expr& p) const {
    for (const auto& [k, v] : bindings_)
      if (k.kind == p.kind && k.text == p.text) return &v;
    return nullptr;
  }

  Status bind_var(const Expr& v, const Expr& p) {
    if (const Expr* b = bound(p)) return equal_values(*b, v);
    if (const Expr* e = env_.lookup(p)) return equal_values(*e, v);
    if (p.kind == Kind::MathVar) {
      if (!has_constraint(cs_, is_var_c(p))) return undecided();
      if (!env_.entries.empty()) return undecided();
    }
    if (!env_.frame.empty() && !has_constraint(cs_, not_in_keys(p, env_.frame))) return undecided();
    bindings_.emplace_back(p, v);
    return Status::Yes;
  }

  // A value math variable against a constructor pattern: decided by the
  // recorded constraints, otherwise refined by narrowing.
  Status symbolic(const Expr& v, const Expr& p) {
    for (const auto& c : cs_) {
      if (c.kind == CKind::NotMatching && structurally_equal(c.terms[0], v) && same_head(c.terms[1], head_shape(p)))
        return no();
      if (c.kind == CKind::Eq && structurally_equal(c.terms[0], v) && is_constructor(c.terms[1])) return go(c.terms[1], p);
    }
    if (v.value == static_cast<std::int64_t>(MathSort::Seq)) return undecided();
    if (narrowing_.empty()) {
      Expr shape;
      switch (p.kind) {
        case Kind::Cons:
          shape = make_cons(make_mathvar("?0", MathSort::Value), make_mathvar("?1", MathSort::Value));
          break;
        case Kind::Tuple: {
          if (has_seq_kid(p)) return undecided();
          std::vector<Expr> ks;
          for (std::size_t i = 0; i < p.kids.size(); ++i) ks.push_back(make_mathvar("?" + std::to_string(i), MathSort::Value));
          shape = make_tuple(std::move(ks));
          break;
        }
        default:
          shape = p;
      }
      narrowing_[v.text] = shape;
      negative = Constraint{CKind::NotMatching, {v, head_shape(p)}, {}, 0};
    }
    return undecided();
  }

  Status go(const Expr& v, const Expr& p) {
    switch (p.kind) {
      case Kind::Var:
        if (p.text == "_") return Status::Yes;
        return bind_var(v, p);
      case Kind::MathVar:
        if (p.value == static_cast<std::int64_t>(MathSort::Expr)) return bind_var(v, p);
        return equal_values(v, p);
      case Kind::Match:
        return combine(go(v, p.kids[0]), go(v, p.kids[1]));
      case Kind::Atom:
      case Kind::Integer:
      case Kind::Nil:
      case Kind::Cons:
      case Kind::Tuple:
        break;
      default:
        return undecided();
    }
    if (v.kind == Kind::MathVar) return symbolic(v, p);
    if (!same_head(v, p)) {
      if (has_seq_kid(v) || has_seq_kid(p)) return undecided();
      return no();
    }
    if (has_seq_kid(v) || has_seq_kid(p)) return undecided();
    Status s = Status::Yes;
    for (std::size_t i = 0; i < p.kids.size(); ++i) s = combine(s, go(v.kids[i], p.kids[i]));
    return s;
  }

  const Env& env_;
  const std::vector<Constraint>& cs_;
  std::vector<std::pair<Expr, Expr>> bindings_;
  std::map<std::string, Expr> narrowing_;
  bool saw_no_ = false;
};

}  // namespace

MatchResult is_matching(const Expr& value, const Expr& pat, const Env& env, const std::vector<Constraint>& cs) {
  Matcher m(env, cs);
  return m.run(value, pat);
}

namespace verify_detail {

MatchResult match_with_negative(const Expr& value, const Expr& pat, const Env& env, const std::vector<Constraint>& cs,
                                std::optional<Constraint>* negative) {
  Matcher m(env, cs);
  MatchResult r = m.run(value, pat);
  *negative = m.negative;
  return r;
}

void pattern_names(const Expr& p, std::set<std::pair<Kind, std::string>>& out) {
  walk(p, [&](const Expr& x) {
    if (x.kind == Kind::Var || x.kind == Kind::MathVar) out.insert({x.kind, x.text});
    return true;
  });
}

}  // namespace verify_detail

namespace {

using Bind = std::vector<std::pair<Expr, Expr>>;

Bind without(const Bind& b, const std::set<std::pair<Kind, std::string>>& names) {
  Bind out;
  for (const auto& kv : b)
    if (!names.count({kv.first.kind, kv.first.text})) out.push_back(kv);
  return out;
}

Expr sv(const Expr& e, const Bind& b) {
  if (b.empty()) return e;
  switch (e.kind) {
    case Kind::Var:
    case Kind::MathVar:
      for (const auto& [k, v] : b)
        if (k.kind == e.kind && k.text == e.text) return v;
      return e;
    case Kind::Fun: {
      Expr out = e;
      for (auto& c : out.kids) {
        if (c.kind != Kind::Clause) continue;
        std::set<std::pair<Kind, std::string>> names;
        for (const auto& p : clause_patterns(c)) pattern_names(p, names);
        Bind inner = without(b, names);
        for (auto& x : clause_body(c)) x = sv(x, inner);
      }
      return out;
    }
    case Kind::ListComp: {
      Expr out = e;
      Bind cur = b;
      for (std::size_t i = 1; i < out.kids.size(); ++i) {
        Expr& q = out.kids[i];
        if (q.kind == Kind::Generator) {
          q.kids[1] = sv(q.kids[1], cur);
          std::set<std::pair<Kind, std::string>> names;
          pattern_names(q.kids[0], names);
          cur = without(cur, names);
        } else {
          q = sv(q, cur);
        }
      }
      out.kids[0] = sv(out.kids[0], cur);
      return out;
    }
    default: {
      Expr out = e;
      for (auto& k : out.kids) k = sv(k, b);
      return out;
    }
  }
}

}  // namespace

Expr subst_vars(const Expr& e, const std::vector<std::pair<Expr, Expr>>& bindings) { return sv(e, bindings); }

Expr subst_math(const Expr& e, const std::map<std::string, Expr>& m) {
  if (m.empty()) return e;
  if (e.kind == Kind::MathVar) {
    auto it = m.find(e.text);
    return it == m.end() ? e : it->second;
  }
  Expr out(e.kind, e.text, e.value);
  out.span = e.span;
  for (const auto& k : e.kids) {
    if (k.kind == Kind::MathVar && k.value == static_cast<std::int64_t>(MathSort::Seq)) {
      auto it = m.find(k.text);
      if (it != m.end() && it->second.kind == Kind::Seq) {
        for (const auto& x : it->second.kids) out.kids.push_back(x);
        continue;
      }
    }
    out.kids.push_back(subst_math(k, m));
  }
  return out;
}

namespace verify_detail {

Env subst_env(const Env& e, const std::map<std::string, Expr>& m) {
  Env out;
  out.frame = e.frame;
  for (const auto& [k, v] : e.entries) out.entries.emplace_back(subst_math(k, m), subst_math(v, m));
  return out;
}

Constraint subst_constraint(const Constraint& c, const std::map<std::string, Expr>& m) {
  Constraint out = c;
  for (auto& t : out.terms) t = subst_math(t, m);
  return out;
}

bool env_equal(const Env& a, const Env& b) {
  if (a.frame != b.frame || a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    if (!structurally_equal(a.entries[i].first, b.entries[i].first) ||
        !structurally_equal(a.entries[i].second, b.entries[i].second))
      return false;
  return true;
}

bool defs_equal(const Defs& a, const Defs& b) {
  if (a.frame != b.frame || a.module != b.module || a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i)
    if (!structurally_equal(a.functions[i], b.functions[i])) return false;
  return true;
}

}  // namespace verify_detail

Config instantiate_config(const Config& pattern, const Valuation& rho) {
  Config out;
  out.code = subst_math(pattern.code, rho.terms);
  out.env = subst_env(pattern.env, rho.terms);
  if (!pattern.env.frame.empty()) {
    auto it = rho.envs.find(pattern.env.frame);
    if (it != rho.envs.end()) {
      out.env.frame = it->second.frame;
      for (const auto& kv : it->second.entries) out.env.entries.push_back(kv);
    }
  }
  out.defs = pattern.defs;
  if (!pattern.defs.frame.empty()) {
    auto it = rho.defs.find(pattern.defs.frame);
    if (it != rho.defs.end()) {
      out.defs.frame = it->second.frame;
      for (const auto& f : it->second.functions) out.defs.functions.push_back(f);
      if (out.defs.module.empty()) out.defs.module = it->second.module;
    }
  }
  return out;
}

bool satisfies(const Config& gamma, const Valuation& rho, const Config& pi) {
  Config inst = instantiate_config(pi, rho);
  if (has_mathvars(inst.code)) return false;
  return structurally_equal(inst.code, gamma.code) && env_equal(inst.env, gamma.env) && defs_equal(inst.defs, gamma.defs);
}

}  // namespace refl
