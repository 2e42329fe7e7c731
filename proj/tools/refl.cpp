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

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "refl/engine.hpp"
#include "refl/verifier.hpp"

using namespace refl;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUnknown = 2;
constexpr int kUsage = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SourceModule load_module(const std::string& path) { return parse_module(slurp(path), path); }

bool is_refl(const std::string& p) { return p.size() > 5 && p.compare(p.size() - 5, 5, ".refl") == 0; }

// Positional words: definition files first, then a definition name and its
// actual arguments.
struct Words {
  std::vector<std::string> refl;
  std::string name;
  std::vector<std::string> args;
};

Words split_words(const std::vector<std::string>& pos) {
  Words w;
  std::size_t i = 0;
  while (i < pos.size() && is_refl(pos[i])) w.refl.push_back(pos[i++]);
  if (w.refl.empty()) throw UsageError("expected at least one .refl file");
  if (i == pos.size()) throw UsageError("expected a definition name");
  w.name = pos[i++];
  w.args.assign(pos.begin() + static_cast<std::ptrdiff_t>(i), pos.end());
  return w;
}

Library load_library(const std::vector<std::string>& files) {
  Library lib;
  for (const auto& f : files) lib.load_text(slurp(f));
  return lib;
}

Value parse_arg(const std::string& a) {
  Expr e = parse_expr(a);
  if (e.kind == Kind::Atom) return Value::atom(e.text);
  if (e.kind == Kind::Integer) return Value::integer(e.value);
  return Value::syntax(e);
}

// Unified diff of two texts, three lines of context.
std::string unified_diff(const std::string& path, const std::string& a, const std::string& b) {
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
  };
  std::vector<std::string> x = lines(a), y = lines(b);
  std::size_t n = x.size(), m = y.size();
  std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = x[i] == y[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  struct Op {
    char tag;
    std::size_t i, j;
  };
  std::vector<Op> ops;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && x[i] == y[j]) {
      ops.push_back({' ', i++, j++});
    } else if (i < n && (j == m || lcs[i + 1][j] >= lcs[i][j + 1])) {
      ops.push_back({'-', i++, j});
    } else {
      ops.push_back({'+', i, j++});
    }
  }
  std::vector<std::size_t> changed;
  for (std::size_t k = 0; k < ops.size(); ++k)
    if (ops[k].tag != ' ') changed.push_back(k);
  std::string out;
  if (changed.empty()) return out;
  out += "--- a/" + path + "\n+++ b/" + path + "\n";
  const std::size_t ctx = 3;
  for (std::size_t c = 0; c < changed.size();) {
    std::size_t last = c;
    while (last + 1 < changed.size() && changed[last + 1] - changed[last] <= 2 * ctx + 1) ++last;
    std::size_t start = changed[c] >= ctx ? changed[c] - ctx : 0;
    std::size_t end = std::min(ops.size(), changed[last] + ctx + 1);
    std::size_t al = 0, bl = 0;
    std::string body;
    for (std::size_t t = start; t < end; ++t) {
      const Op& o = ops[t];
      if (o.tag != '+') ++al;
      if (o.tag != '-') ++bl;
      body += o.tag;
      body += (o.tag == '+' ? y[o.j] : x[o.i]) + "\n";
    }
    std::size_t a0 = ops[start].i, b0 = ops[start].j;
    out += "@@ -" + std::to_string(al ? a0 + 1 : a0) + "," + std::to_string(al) + " +" +
           std::to_string(bl ? b0 + 1 : b0) + "," + std::to_string(bl) + " @@\n" + body;
    c = last + 1;
  }
  return out;
}

NodeRef resolve_target(const SemanticGraph& g, const std::string& at, const std::string& fun, std::size_t module) {
  if (!at.empty()) {
    auto c2 = at.rfind(':');
    auto c1 = c2 == std::string::npos ? std::string::npos : at.rfind(':', c2 - 1);
    if (c1 == std::string::npos) throw UsageError("--at expects file:line:col");
    NodeRef n = g.lookup_at(at.substr(0, c1), std::stoi(at.substr(c1 + 1, c2 - c1 - 1)), std::stoi(at.substr(c2 + 1)));
    if (!n.valid()) throw UsageError("no node at " + at);
    return n;
  }
  auto slash = fun.rfind('/');
  if (slash == std::string::npos) throw UsageError("--fun expects name/arity");
  NodeRef f = g.find_function(module, fun.substr(0, slash), std::stoi(fun.substr(slash + 1)));
  if (!f.valid()) throw UsageError("no function " + fun);
  return g.sem(f).form;
}

int cmd_apply(const std::vector<std::string>& pos, const std::string& at, const std::string& fun,
              std::vector<std::string> sources, bool write) {
  if (at.empty() == fun.empty()) throw UsageError("apply needs exactly one of --at and --fun");
  Words w = split_words(pos);
  if (!at.empty()) {
    auto c2 = at.rfind(':');
    auto c1 = c2 == std::string::npos ? std::string::npos : at.rfind(':', c2 - 1);
    if (c1 == std::string::npos) throw UsageError("--at expects file:line:col");
    std::string file = at.substr(0, c1);
    if (std::find(sources.begin(), sources.end(), file) == sources.end()) sources.insert(sources.begin(), file);
  }
  if (sources.empty()) throw UsageError("--fun needs a --source file");
  Library lib = load_library(w.refl);
  std::vector<SourceModule> mods;
  for (const auto& s : sources) mods.push_back(load_module(s));
  SemanticGraph g(mods);
  std::vector<std::string> before;
  for (std::size_t i = 0; i < g.module_count(); ++i) before.push_back(g.render(i));
  NodeRef target = resolve_target(g, at, fun, 0);
  std::vector<Value> args;
  for (const auto& a : w.args) args.push_back(parse_arg(a));
  Engine eng(g, lib);
  Outcome o = eng.run(w.name, target, args);
  if (!o.ok) {
    std::cerr << "refactoring failed: " << o.reason << "\n";
    return kFailed;
  }
  for (std::size_t i = 0; i < g.module_count(); ++i) {
    std::string after = g.render(i);
    if (after == before[i]) continue;
    if (write) {
      std::ofstream out(sources[i], std::ios::binary);
      out << after;
    } else {
      std::cout << unified_diff(sources[i], before[i], after);
    }
  }
  return kOk;
}

int verdict(const std::vector<ProofResult>& rs) {
  bool disproved = false, unknown = false;
  for (const auto& r : rs) {
    disproved = disproved || r.status == ProofResult::Status::Disproved;
    unknown = unknown || r.status == ProofResult::Status::Unknown;
  }
  return disproved ? kFailed : unknown ? kUnknown : kOk;
}

const char* status_name(ProofResult::Status s) {
  switch (s) {
    case ProofResult::Status::Proved: return "PROVED";
    case ProofResult::Status::Disproved: return "DISPROVED";
    default: return "UNKNOWN";
  }
}

int prove_all(const std::vector<ProofGoal>& goals, bool trace, int depth) {
  std::vector<ProofResult> rs;
  ProverOptions opts;
  opts.max_depth = depth;
  for (const auto& g : goals) {
    ProofResult r = scc_prove(g, opts);
    std::cout << "goal " << g.name << ": " << status_name(r.status) << "\n";
    std::cout << "  " << to_string(g) << "\n";
    for (const auto& u : g.unaxiomatised) std::cout << "  no axiom (dropped): " << u << "\n";
    for (const auto& n : g.notes) std::cout << "  note: " << n << "\n";
    if (trace) std::cout << format_trace(r);
    rs.push_back(std::move(r));
  }
  return verdict(rs);
}

const Definition& find_def(const Library& lib, const std::string& name) {
  const Definition* d = lib.find(name);
  if (!d) throw UsageError("no definition named " + name);
  return *d;
}

int cmd_verify_rule(const std::vector<std::string>& pos, bool trace, int depth) {
  Words w = split_words(pos);
  Library lib = load_library(w.refl);
  const Definition& d = find_def(lib, w.name);
  std::vector<ProofGoal> goals;
  if (const auto* r = std::get_if<RefactoringDef>(&d)) {
    if (r->chain.size() != 1) throw UsageError(w.name + " is a rule chain; only single local rules have a goal");
    goals.push_back(goal_from_rule(r->chain[0].rule, r->name));
  } else if (const auto* s = std::get_if<SchemeDef>(&d)) {
    if (s->kind == SchemeKind::Signature) throw UsageError(w.name + " is a signature scheme; use check-contract");
    goals = goals_from_dataflow(*s);
  } else {
    throw UsageError(w.name + " has no proof goal");
  }
  return prove_all(goals, trace, depth);
}

int cmd_check_contract(const std::vector<std::string>& pos, bool trace, int depth) {
  Words w = split_words(pos);
  Library lib = load_library(w.refl);
  const auto* s = std::get_if<SchemeDef>(&find_def(lib, w.name));
  if (!s) throw UsageError(w.name + " is not a refactoring scheme");
  if (s->kind != SchemeKind::Signature) return prove_all(goals_from_dataflow(*s), trace, depth);
  ContractResult c = check_signature_contract(s->rule, s->params);
  if (c.ok) {
    std::cout << "contract holds: " << w.name << "\n";
    return kOk;
  }
  std::cout << "contract violated: " << c.clause << ": " << c.detail << "\n";
  return kFailed;
}

int cmd_verify_app(const std::vector<std::string>& files, bool trace, int depth) {
  if (files.size() != 2) throw UsageError("verify-app takes exactly two source paths");
  return prove_all(goals_from_application(load_module(files[0]), load_module(files[1])), trace, depth);
}

int cmd_test(const std::vector<std::string>& files, int samples, std::uint64_t seed) {
  if (files.size() != 2) throw UsageError("test takes exactly two source paths");
  DynamicReport r = dynamic_verify(load_module(files[0]), load_module(files[1]), samples, seed);
  std::cout << "samples " << r.samples << ", runs " << r.runs << ", divergences " << r.divergences << ", both cutoff "
            << r.both_cutoff << "\n";
  for (const auto& d : r.details) std::cout << "  " << d << "\n";
  return r.divergences == 0 ? kOk : kFailed;
}

int cmd_graph(const std::vector<std::string>& files, bool dot) {
  if (files.empty()) throw UsageError("graph needs source paths");
  std::vector<SourceModule> mods;
  for (const auto& f : files) mods.push_back(load_module(f));
  SemanticGraph g(mods);
  if (dot) {
    std::cout << g.to_dot();
    return kOk;
  }
  for (std::size_t m = 0; m < g.module_count(); ++m) {
    std::cout << "module " << g.module(m).name << "\n";
    for (NodeRef f : g.functions(m)) {
      const SemNode& s = g.sem(f);
      std::cout << "  " << s.name << "/" << s.arity << (s.pure ? "" : " impure") << ", "
                << g.function_refs(f).size() << " references\n";
    }
  }
  for (const auto& d : g.diagnostics()) std::cout << "diagnostic: " << d.message << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refl: refactoring definitions, application and verification for mini-Erlang"};
  app.require_subcommand(1);
  std::vector<std::string> pos, files, sources;
  std::string at, fun;
  bool write = false, trace = false, dot = false;
  int samples = 100, depth = ProverOptions{}.max_depth;
  std::uint64_t seed = 1;

  auto* apply = app.add_subcommand("apply", "apply a refactoring and print a unified diff");
  apply->add_option("words", pos, "rules.refl... name [args...]")->required();
  apply->add_option("--at", at, "target position file:line:col");
  apply->add_option("--fun", fun, "target function name/arity");
  apply->add_option("--source", sources, "additional source files");
  apply->add_flag("--write", write, "rewrite the files in place");

  auto* vrule = app.add_subcommand("verify-rule", "prove a local rule or a dataflow scheme");
  vrule->add_option("words", pos, "rules.refl... name")->required();
  vrule->add_flag("--trace", trace, "print proof traces");
  vrule->add_option("--depth", depth, "derive steps per branch");

  auto* contract = app.add_subcommand("check-contract", "check a scheme contract");
  contract->add_option("words", pos, "rules.refl... name")->required();
  contract->add_flag("--trace", trace, "print proof traces");
  contract->add_option("--depth", depth, "derive steps per branch");

  auto* vapp = app.add_subcommand("verify-app", "prove two versions of a module equivalent");
  vapp->add_option("files", files, "before.erl after.erl")->required();
  vapp->add_flag("--trace", trace, "print proof traces");
  vapp->add_option("--depth", depth, "derive steps per branch");

  auto* test = app.add_subcommand("test", "compare two versions of a module on random inputs");
  test->add_option("files", files, "before.erl after.erl")->required();
  test->add_option("--samples", samples, "number of samples");
  test->add_option("--seed", seed, "random seed");

  auto* graph = app.add_subcommand("graph", "print the semantic graph");
  graph->add_option("files", files, "source files")->required();
  graph->add_flag("--dot", dot, "Graphviz output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (apply->parsed()) return cmd_apply(pos, at, fun, sources, write);
    if (vrule->parsed()) return cmd_verify_rule(pos, trace, depth);
    if (contract->parsed()) return cmd_check_contract(pos, trace, depth);
    if (vapp->parsed()) return cmd_verify_app(files, trace, depth);
    if (test->parsed()) return cmd_test(files, samples, seed);
    if (graph->parsed()) return cmd_graph(files, dot);
  } catch (const RefactoringError& e) {
    std::cerr << "refactoring failed: " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
