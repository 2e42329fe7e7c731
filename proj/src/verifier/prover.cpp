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

using namespace verify_detail;

namespace {

using Cs = std::vector<Constraint>;
using Bindings = std::map<std::string, Expr>;

// One-way matching of pattern q (existential variables bind) against p.
class Entailer {
 public:
  explicit Entailer(const std::vector<std::string>& exists) : exists_(exists.begin(), exists.end()) {}

  bool code(const Expr& q, const Expr& p) {
    if (q.kind == Kind::MathVar && exists_.count(q.text)) {
      if (auto it = terms_.find(q.text); it != terms_.end()) return structurally_equal(it->second, p);
      if (q.value == static_cast<std::int64_t>(MathSort::Value) && !is_value(p)) return false;
      terms_[q.text] = p;
      return true;
    }
    if (q.kind != p.kind || q.text != p.text || q.value != p.value || q.kids.size() != p.kids.size()) return false;
    for (std::size_t i = 0; i < q.kids.size(); ++i)
      if (!code(q.kids[i], p.kids[i])) return false;
    return true;
  }

  bool env(const Env& q, const Env& p) {
    if (q.entries.empty() && exists_.count(q.frame)) {
      if (auto it = envs_.find(q.frame); it != envs_.end()) return env_equal(it->second, p);
      envs_[q.frame] = p;
      return true;
    }
    if (q.frame != p.frame || q.entries.size() != p.entries.size()) return false;
    for (std::size_t i = 0; i < q.entries.size(); ++i)
      if (!code(q.entries[i].first, p.entries[i].first) || !code(q.entries[i].second, p.entries[i].second)) return false;
    return true;
  }

  bool cell(const ConfigPattern& q, const Config& p) {
    if (q.code && !code(*q.code, p.code)) return false;
    if (q.env && !env(*q.env, p.env)) return false;
    if (q.defs && !defs_equal(*q.defs, p.defs)) return false;
    return true;
  }

  bool implied(const Constraint& raw, const Cs& pc) const {
    Constraint c = subst_constraint(raw, terms_);
    if (has_constraint(pc, c)) return true;
    switch (c.kind) {
      case CKind::Pure:
        return true;
      case CKind::Eq:
        return structurally_equal(c.terms[0], c.terms[1]) ||
               has_constraint(pc, Constraint{CKind::Eq, {c.terms[1], c.terms[0]}, {}, 0});
      case CKind::Neq:
        if (!has_mathvars(c.terms[0]) && !has_mathvars(c.terms[1])) return !structurally_equal(c.terms[0], c.terms[1]);
        return has_constraint(pc, Constraint{CKind::Neq, {c.terms[1], c.terms[0]}, {}, 0});
      case CKind::IsVar:
        return c.terms[0].kind == Kind::Var;
      case CKind::IsAtom:
        return c.terms[0].kind == Kind::Atom;
      case CKind::Fresh:
        return has_constraint(pc, not_in_keys(c.terms[0], c.env)) && has_constraint(pc, is_var_c(c.terms[0]));
      default:
        return false;
    }
  }

 private:
  std::set<std::string> exists_;
  Bindings terms_;
  std::map<std::string, Env> envs_;
};

struct State {
  EqConfig s;
  Cs cs;
  int derives = 0;
};

Config& side_of(EqConfig& s, Side side) { return side == Side::Cfg1 ? s.cfg1 : s.cfg2; }

State narrow(const State& st, const Bindings& m, const Cs& added) {
  State out = st;
  for (Config* c : {&out.s.cfg1, &out.s.cfg2}) {
    c->code = subst_math(c->code, m);
    c->env = subst_env(c->env, m);
  }
  for (auto& c : out.cs) c = subst_constraint(c, m);
  for (const auto& c : added) out.cs.push_back(subst_constraint(c, m));
  return out;
}

std::optional<std::size_t> first_fresh(const Cs& cs) {
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (cs[i].kind == CKind::Fresh) return i;
  return std::nullopt;
}

void expand_fresh(Cs& cs, std::size_t i) {
  Constraint f = cs.at(i);
  if (f.kind != CKind::Fresh) throw VerifyError("axiom step on a non-fresh constraint");
  cs.erase(cs.begin() + static_cast<std::ptrdiff_t>(i));
  cs.insert(cs.begin() + static_cast<std::ptrdiff_t>(i), {not_in_keys(f.terms[0], f.env), is_var_c(f.terms[0])});
}

// A call to the goal's own function at the redex of a side.
std::optional<std::vector<std::size_t>> goal_call(const Config& c, const std::string& fn, std::size_t arity) {
  auto p = redex_path(c.code);
  if (!p) return std::nullopt;
  const Expr& e = at(c.code, *p);
  if (e.kind != Kind::Call || e.kids[0].kind != Kind::Atom || e.kids[0].text != fn || e.kids.size() != arity + 1)
    return std::nullopt;
  for (std::size_t i = 1; i < e.kids.size(); ++i)
    if (!is_value(e.kids[i])) return std::nullopt;
  return p;
}

class Prover {
 public:
  Prover(const ProofGoal& g, const ProverOptions& o) : g_(g), o_(o), rhs_(rhs_pattern(g)) {
    for (const Config* c : {&g.lhs.cfg1, &g.lhs.cfg2}) {
      collect_mathvars(c->code, used_);
      for (const auto& kv : c->env.entries) {
        collect_mathvars(kv.first, used_);
        collect_mathvars(kv.second, used_);
      }
    }
    for (const auto& c : g.condition)
      for (const auto& t : c.terms) collect_mathvars(t, used_);
    const Expr& code = g.lhs.cfg1.code;
    if (g.rhs == Criterion::SameValue && code.kind == Kind::Call && code.kids[0].kind == Kind::Atom) {
      fn_ = code.kids[0].text;
      arity_ = code.kids.size() - 1;
    }
  }

  ProofResult run() {
    State st{g_.lhs, g_.condition, 0};
    Out o = branch(st);
    res_.status = o == Out::Proved ? ProofResult::Status::Proved
                  : o == Out::Disproved ? ProofResult::Status::Disproved
                                        : ProofResult::Status::Unknown;
    return std::move(res_);
  }

  // Mechanical re-execution of a recorded trace.
  bool replay(const std::vector<TraceStep>& trace) {
    std::size_t i = 0;
    State st{g_.lhs, g_.condition, 0};
    return replay_branch(st, trace, i) && i == trace.size();
  }

 private:
  enum class Out { Proved, Unknown, Disproved };

  std::string fresh_name(const std::string& prefix) {
    for (;;) {
      std::string n = prefix + std::to_string(++counter_);
      if (used_.insert(n).second) return n;
    }
  }

  Bindings rename_placeholders(const Bindings& m) {
    Bindings names;
    Bindings out;
    for (const auto& [v, shape] : m) {
      std::set<std::string> holes;
      collect_mathvars(shape, holes);
      for (const auto& h : holes)
        if (h[0] == '?' && !names.count(h)) names[h] = make_mathvar(fresh_name("n"), MathSort::Value);
      out[v] = subst_math(shape, names);
    }
    return out;
  }

  void record(StepKind k, std::string tag, Side side, const Cs& cs, std::vector<std::size_t> path = {}) {
    TraceStep t;
    t.kind = k;
    t.tag = std::move(tag);
    t.side = side;
    t.path = std::move(path);
    t.constraints = to_string(cs);
    res_.trace.push_back(std::move(t));
  }

  bool subsumed(const State& st) const {
    if (g_.rhs == Criterion::SameValue && same_outcome(st)) return true;
    Entailer e(rhs_.exists);
    if (!e.cell(rhs_.cfg1, st.s.cfg1) || !e.cell(rhs_.cfg2, st.s.cfg2)) return false;
    for (const auto& c : rhs_.condition)
      if (!e.implied(c, st.cs)) return false;
    return true;
  }

  // Value goals also close when both sides fail for certain, or when both
  // hold the same code that calls no defined function.
  bool same_outcome(const State& st) const {
    const Config& a = st.s.cfg1;
    const Config& b = st.s.cfg2;
    if (!is_value(a.code) && !is_value(b.code)) {
      RuleResult ra = step(a, st.cs);
      RuleResult rb = step(b, st.cs);
      if (ra.status == RuleResult::Status::Stuck && ra.definite && rb.status == RuleResult::Status::Stuck && rb.definite)
        return true;
    }
    return structurally_equal(a.code, b.code) && defs_free(a.code);
  }

  static bool defs_free(const Expr& e) {
    bool ok = true;
    walk(e, [&](const Expr& x) {
      if (x.kind == Kind::Fun || x.kind == Kind::RemoteCall) ok = false;
      if (x.kind == Kind::Call) {
        const Expr& f = x.kids[0];
        bool prim = f.kind == Kind::Atom && (f.text == "atom_to_list" || f.text == "length" || f.text == "hd" || f.text == "tl");
        if (!prim) ok = false;
      }
      return ok;
    });
    return ok;
  }

  bool circular(State& st, std::string* name) {
    if (fn_.empty() || st.derives < 1) return false;
    auto p1 = goal_call(st.s.cfg1, fn_, arity_);
    auto p2 = goal_call(st.s.cfg2, fn_, arity_);
    if (!p1 || !p2) return false;
    const Expr& a = at(st.s.cfg1.code, *p1);
    const Expr& b = at(st.s.cfg2.code, *p2);
    if (!structurally_equal(a, b)) return false;
    if (name->empty()) *name = fresh_name("r");
    Expr r = make_mathvar(*name, MathSort::Value);
    st.s.cfg1.code = replace_at(st.s.cfg1.code, *p1, r);
    st.s.cfg2.code = replace_at(st.s.cfg2.code, *p2, r);
    return true;
  }

  std::vector<Side> order(const State& st) const {
    if (!fn_.empty() && st.derives >= 1 && goal_call(st.s.cfg1, fn_, arity_)) return {Side::Cfg2, Side::Cfg1};
    return {Side::Cfg1, Side::Cfg2};
  }

  Out finish(const State& st, bool depth_hit) {
    const Expr& a = st.s.cfg1.code;
    const Expr& b = st.s.cfg2.code;
    if (!depth_hit && !has_mathvars(a) && !has_mathvars(b)) {
      bool va = is_value(a);
      bool vb = is_value(b);
      if ((va && vb && !structurally_equal(a, b)) || (g_.rhs == Criterion::SameValue && va != vb)) {
        std::string cex = "cfg1 " + (va ? print(a) : "stuck") + ", cfg2 " + (vb ? print(b) : "stuck");
        std::replace(cex.begin(), cex.end(), '\n', ' ');
        record(StepKind::Stop, "DISPROVED", Side::Single, st.cs);
        res_.trace.back().detail = cex;
        if (res_.counterexample.empty()) res_.counterexample = cex;
        return Out::Disproved;
      }
    }
    record(StepKind::Stop, "UNKNOWN", Side::Single, st.cs);
    res_.trace.back().detail = "depth=" + std::to_string(st.derives);
    res_.frontier.push_back(to_string(st.s) + " /\\ " + to_string(st.cs));
    return Out::Unknown;
  }

  Out branch(State st) {
    for (;;) {
      res_.depth = std::max(res_.depth, st.derives);
      if (subsumed(st)) {
        record(StepKind::Subsume, "SUBSUME", Side::Single, st.cs);
        return Out::Proved;
      }
      std::string circ;
      if (circular(st, &circ)) {
        record(StepKind::Circularity, "CIRC", Side::Single, st.cs);
        res_.trace.back().detail = circ;
        continue;
      }
      if (st.derives >= o_.max_depth) return finish(st, true);
      bool moved = false;
      for (Side side : {Side::Cfg1, Side::Cfg2}) {
        Config& c = side_of(st.s, side);
        if (auto e = eliminate_block(c.code)) {
          c.code = std::move(e->first);
          ++st.derives;
          ++res_.derive_steps;
          record(StepKind::Structural, "R2", side, st.cs, e->second);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      std::optional<std::pair<Side, RuleResult>> pending;
      for (Side side : order(st)) {
        Config& c = side_of(st.s, side);
        RuleResult r = step(c, st.cs);
        if (r.status == RuleResult::Status::Applied) {
          c = std::move(r.branches[0].cfg);
          ++st.derives;
          ++res_.derive_steps;
          record(StepKind::Derive, r.tag, side, st.cs, r.path);
          moved = true;
          break;
        }
        if (r.status == RuleResult::Status::Undecided && !pending) pending.emplace(side, std::move(r));
      }
      if (moved) continue;
      if (!pending) return finish(st, false);
      if (auto i = first_fresh(st.cs)) {
        expand_fresh(st.cs, *i);
        record(StepKind::Axiom, "AX-fresh", pending->first, st.cs);
        res_.trace.back().constraint = *i;
        continue;
      }
      RuleResult& r = pending->second;
      if (r.branches.empty() || forks_ >= o_.fork_budget) return finish(st, false);
      ++forks_;
      TraceStep fork;
      fork.kind = StepKind::Fork;
      fork.tag = "FORK";
      fork.side = pending->first;
      fork.constraints = to_string(st.cs);
      fork.detail = r.tag + ": " + r.reason;
      for (const auto& b : r.branches) {
        fork.alternatives.push_back(rename_placeholders(b.narrowing));
        fork.added.push_back(b.added);
      }
      res_.trace.push_back(fork);
      Out total = Out::Proved;
      for (std::size_t i = 0; i < fork.alternatives.size(); ++i) {
        State sb = narrow(st, fork.alternatives[i], fork.added[i]);
        std::string what;
        for (const auto& [v, t] : fork.alternatives[i]) what += (what.empty() ? "" : ", ") + v + " := " + print(t);
        for (const auto& c : fork.added[i]) what += (what.empty() ? "" : ", ") + to_string(c);
        record(StepKind::Branch, "BRANCH " + std::to_string(i + 1) + "/" + std::to_string(fork.alternatives.size()),
               pending->first, sb.cs);
        res_.trace.back().detail = what;
        Out o = branch(std::move(sb));
        if (o == Out::Disproved) return o;
        if (o == Out::Unknown) total = Out::Unknown;
      }
      return total;
    }
  }

  bool replay_branch(State st, const std::vector<TraceStep>& trace, std::size_t& i) {
    while (i < trace.size()) {
      const TraceStep& t = trace[i++];
      switch (t.kind) {
        case StepKind::Subsume:
          return subsumed(st);
        case StepKind::Stop:
        case StepKind::Branch:
          return false;
        case StepKind::Structural: {
          Config& c = side_of(st.s, t.side);
          auto e = eliminate_block(c.code);
          if (!e || e->second != t.path) return false;
          c.code = std::move(e->first);
          break;
        }
        case StepKind::Derive: {
          Config& c = side_of(st.s, t.side);
          RuleResult r = step(c, st.cs);
          if (r.status != RuleResult::Status::Applied || r.tag != t.tag || r.path != t.path) return false;
          c = std::move(r.branches[0].cfg);
          break;
        }
        case StepKind::Axiom:
          if (t.constraint >= st.cs.size() || st.cs[t.constraint].kind != CKind::Fresh) return false;
          expand_fresh(st.cs, t.constraint);
          break;
        case StepKind::Circularity: {
          std::string name = t.detail;
          if (!circular(st, &name)) return false;
          break;
        }
        case StepKind::Fork:
          for (std::size_t b = 0; b < t.alternatives.size(); ++b) {
            if (i >= trace.size() || trace[i].kind != StepKind::Branch) return false;
            ++i;
            if (!replay_branch(narrow(st, t.alternatives[b], t.added[b]), trace, i)) return false;
          }
          return true;
      }
      ++st.derives;
    }
    return false;
  }

  const ProofGoal& g_;
  ProverOptions o_;
  PurePattern rhs_;
  ProofResult res_;
  std::set<std::string> used_;
  int counter_ = 0;
  int forks_ = 0;
  std::string fn_;
  std::size_t arity_ = 0;
};

}  // namespace

bool entails(const EqConfig& p, const std::vector<Constraint>& pc, const PurePattern& q) {
  Entailer e(q.exists);
  if (!e.cell(q.cfg1, p.cfg1) || !e.cell(q.cfg2, p.cfg2)) return false;
  for (const auto& c : q.condition)
    if (!e.implied(c, pc)) return false;
  return true;
}

ProofResult scc_prove(const ProofGoal& goal, const ProverOptions& opts) { return Prover(goal, opts).run(); }

bool replay(const ProofGoal& goal, const ProofResult& r) {
  if (r.status != ProofResult::Status::Proved) return false;
  return Prover(goal, ProverOptions{}).replay(r.trace);
}

std::string format_trace(const ProofResult& r) {
  std::string out;
  int n = 0;
  for (const auto& t : r.trace) {
    out += std::to_string(++n) + ". " + t.tag;
    if (!t.detail.empty()) out += " " + t.detail;
    bool on_side = t.side == Side::Cfg1 || t.side == Side::Cfg2;
    out += std::string(" @ ") + (on_side ? side_name(t.side) : "eq") + " | constraints: " + t.constraints + "\n";
  }
  switch (r.status) {
    case ProofResult::Status::Proved:
      out += "QED\n";
      break;
    case ProofResult::Status::Unknown:
      out += "UNKNOWN depth=" + std::to_string(r.depth) + "\n";
      break;
    case ProofResult::Status::Disproved:
      out += "DISPROVED " + r.counterexample + "\n";
      break;
  }
  return out;
}

}  // namespace refl
