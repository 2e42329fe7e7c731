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
#include <array>

#include "refl/dsl.hpp"

namespace refl {

namespace {

constexpr std::array<std::string_view, 12> kBoundaryKeywords = {
    "THEN", "OR", "WHEN", "REFACTORING", "FUNCTION", "FORWARD", "BACKWARD", "SELECTOR", "DEFINITION",
    "REFERENCE", "RETURN", "DO"};

constexpr std::array<std::string_view, 5> kDefinitionStarts = {"REFACTORING", "FUNCTION", "FORWARD", "BACKWARD",
                                                               "SELECTOR"};

// Removes DSL-text layout so pattern trees never alias definition bytes.
Expr strip(Expr e) { return detach(e); }

class DslParser {
 public:
  explicit DslParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Definition> file() {
    std::vector<Definition> out;
    while (!at_end()) out.push_back(definition());
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokKind::End; }
  bool at_kw(std::string_view k, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Keyword && peek(ahead).text == k;
  }
  bool at_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Punct && peek(ahead).text == p;
  }
  bool at_definition_start() const {
    return peek().kind == TokKind::Keyword &&
           std::find(kDefinitionStarts.begin(), kDefinitionStarts.end(), peek().text) != kDefinitionStarts.end();
  }
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) const {
    const Token& t = peek();
    std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.line, t.col, msg + " at " + found, std::move(expected));
  }
  void expect_kw(std::string_view k) {
    if (!at_kw(k)) fail("unexpected token", {std::string(k)});
    ++pos_;
  }
  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail("unexpected token", {std::string(p)});
    ++pos_;
  }
  std::string expect_kind(TokKind k, const char* what) {
    if (peek().kind != k) fail("unexpected token", {what});
    return toks_[pos_++].text;
  }

  Definition definition() {
    if (at_kw("REFACTORING")) {
      ++pos_;
      auto [name, params] = header();
      if (at_kw("DO")) {
        ++pos_;
        return composite(std::move(name), std::move(params));
      }
      RefactoringDef d{std::move(name), std::move(params), {}};
      d.chain.push_back(RuleStep{Combinator::First, rule()});
      while (at_kw("THEN") || at_kw("OR")) {
        Combinator op = at_kw("THEN") ? Combinator::Then : Combinator::Or;
        ++pos_;
        d.chain.push_back(RuleStep{op, rule()});
      }
      return d;
    }
    if (at_kw("FUNCTION")) {
      ++pos_;
      expect_kw("SIGNATURE");
      expect_kw("REFACTORING");
      auto [name, params] = header();
      return SchemeDef{SchemeKind::Signature, std::move(name), std::move(params), rule(), {}};
    }
    if (at_kw("FORWARD") || at_kw("BACKWARD")) {
      SchemeKind kind = at_kw("FORWARD") ? SchemeKind::ForwardDataflow : SchemeKind::BackwardDataflow;
      ++pos_;
      expect_kw("DATAFLOW");
      expect_kw("REFACTORING");
      auto [name, params] = header();
      expect_kw("DEFINITION");
      SchemeDef d{kind, std::move(name), std::move(params), rule(), {}};
      if (!at_kw("REFERENCE")) fail("a dataflow scheme needs a reference rule", {"REFERENCE"});
      while (at_kw("REFERENCE")) {
        ++pos_;
        std::string meta = expect_kind(TokKind::Var, "metavariable");
        d.references.push_back(ReferenceRule{std::move(meta), rule()});
      }
      return d;
    }
    if (at_kw("SELECTOR")) {
      ++pos_;
      auto [name, params] = header();
      SelectorDef d;
      d.name = std::move(name);
      d.params = std::move(params);
      d.matching = pattern();
      if (peek().kind == TokKind::Separator) {
        ++pos_;
        d.replacement = pattern();
      }
      if (at_kw("WHEN")) {
        ++pos_;
        d.when = cond();
      }
      expect_kw("RETURN");
      d.ret = expect_kind(TokKind::Var, "metavariable");
      return d;
    }
    bool scheme_like = peek().kind == TokKind::Var && peek(1).kind == TokKind::Keyword &&
                       (at_kw("REFACTORING", 1) || at_kw("DATAFLOW", 1) || at_kw("SIGNATURE", 1));
    if (peek().kind == TokKind::Keyword || scheme_like) fail("unknown scheme keyword", {"REFACTORING", "FUNCTION", "FORWARD", "BACKWARD", "SELECTOR"});
    fail("expected a definition", {"REFACTORING", "FUNCTION", "FORWARD", "BACKWARD", "SELECTOR"});
  }

  std::pair<std::string, std::vector<std::string>> header() {
    std::string name = expect_kind(TokKind::Atom, "definition name");
    expect_punct("(");
    std::vector<std::string> params;
    if (!at_punct(")")) {
      params.push_back(expect_kind(TokKind::Var, "parameter"));
      while (at_punct(",")) {
        ++pos_;
        params.push_back(expect_kind(TokKind::Var, "parameter"));
      }
    }
    expect_punct(")");
    return {std::move(name), std::move(params)};
  }

  Expr pattern() {
    ExprParser p(toks_, pos_);
    Expr e = p.parse_pattern_body();
    pos_ = p.pos();
    return strip(std::move(e));
  }

  RuleDef rule() {
    RuleDef r;
    if (at_kw("ON") || at_kw("IN")) {
      Modifier m;
      m.kind = at_kw("ON") ? Modifier::Kind::On : Modifier::Kind::In;
      ++pos_;
      m.target = term();
      r.modifier = std::move(m);
    }
    r.matching = pattern();
    if (peek().kind != TokKind::Separator) fail("expected the rule separator", {"-----"});
    ++pos_;
    if (at_kw("WHEN")) {
      ++pos_;
      r.when = cond();
      r.inline_when = true;
    }
    r.replacement = pattern();
    if (!r.inline_when && at_kw("WHEN")) {
      ++pos_;
      r.when = cond();
    }
    return r;
  }

  // OR after a condition is the rule combinator when what follows reads as
  // a rule: a modifier, or a pattern reaching a separator.
  bool or_starts_rule() const {
    if (at_kw("ON", 1) || at_kw("IN", 1)) return true;
    for (std::size_t j = pos_ + 1; j < toks_.size(); ++j) {
      const Token& t = toks_[j];
      if (t.kind == TokKind::End) return false;
      if (t.kind == TokKind::Separator) return true;
      if (t.kind == TokKind::Keyword &&
          std::find(kBoundaryKeywords.begin(), kBoundaryKeywords.end(), t.text) != kBoundaryKeywords.end())
        return false;
    }
    return false;
  }

  Cond cond() {
    Cond left = conj();
    while (at_kw("OR") && !or_starts_rule()) {
      ++pos_;
      Cond c;
      c.kind = Cond::Kind::Or;
      c.kids.push_back(std::move(left));
      c.kids.push_back(conj());
      left = std::move(c);
    }
    return left;
  }

  Cond conj() {
    Cond left = neg();
    while (at_kw("AND")) {
      ++pos_;
      Cond c;
      c.kind = Cond::Kind::And;
      c.kids.push_back(std::move(left));
      c.kids.push_back(neg());
      left = std::move(c);
    }
    return left;
  }

  Cond neg() {
    if (at_kw("NOT")) {
      ++pos_;
      Cond c;
      c.kind = Cond::Kind::Not;
      c.kids.push_back(neg());
      return c;
    }
    if (at_punct("(")) {
      ++pos_;
      Cond c = cond();
      expect_punct(")");
      return c;
    }
    Cond c;
    c.lhs = term();
    if (at_punct("=") || at_punct("==") || at_punct("/=")) {
      c.kind = at_punct("=") ? Cond::Kind::Assign : at_punct("==") ? Cond::Kind::Eq : Cond::Kind::Neq;
      ++pos_;
      c.rhs = term();
    }
    return c;
  }

  std::vector<Term> args() {
    expect_punct("(");
    std::vector<Term> out;
    if (!at_punct(")")) {
      out.push_back(term());
      while (at_punct(",")) {
        ++pos_;
        out.push_back(term());
      }
    }
    expect_punct(")");
    return out;
  }

  Term term() {
    Term t = primary();
    // `Recv.name(args)`, unless the dot opens a new line.
    while (at_punct(".") && !peek().line_start && peek(1).kind == TokKind::Atom && at_punct("(", 2)) {
      ++pos_;
      Term d;
      d.kind = Term::Kind::Dot;
      d.name = toks_[pos_++].text;
      d.args.push_back(std::move(t));
      for (auto& a : args()) d.args.push_back(std::move(a));
      t = std::move(d);
    }
    return t;
  }

  Term primary() {
    const Token& tok = peek();
    Term t;
    switch (tok.kind) {
      case TokKind::Var:
        t.kind = Term::Kind::Meta;
        t.name = tok.text;
        ++pos_;
        return t;
      case TokKind::VarList:
        t.kind = Term::Kind::MetaList;
        t.name = tok.text;
        ++pos_;
        return t;
      case TokKind::Int:
        t.kind = Term::Kind::Int;
        t.value = tok.value;
        ++pos_;
        return t;
      case TokKind::Keyword:
        if (tok.text == "THIS") {
          t.kind = Term::Kind::This;
          ++pos_;
          return t;
        }
        break;
      case TokKind::Punct:
        if (tok.text == "-" && peek(1).kind == TokKind::Int) {
          ++pos_;
          t.kind = Term::Kind::Int;
          t.value = -toks_[pos_++].value;
          return t;
        }
        break;
      case TokKind::Atom:
        t.name = tok.text;
        ++pos_;
        if (at_punct("(")) {
          t.kind = Term::Kind::Call;
          t.args = args();
        } else {
          t.kind = Term::Kind::Atom;
        }
        return t;
      default:
        break;
    }
    fail("expected a selector expression", {"metavariable", "THIS", "atom", "integer", "call"});
  }

  CompositeDef composite(std::string name, std::vector<std::string> params) {
    CompositeDef d{std::move(name), std::move(params), {}};
    while (!at_end() && !at_definition_start()) {
      Statement s;
      if (peek().kind == TokKind::Var && at_punct("=", 1)) {
        s.bind = toks_[pos_].text;
        pos_ += 2;
      }
      s.expr = term();
      if (at_kw("ON")) {
        ++pos_;
        s.on = term();
      }
      d.body.push_back(std::move(s));
    }
    if (d.body.empty()) fail("empty DO block", {"statement"});
    return d;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Definition> parse_refl(std::string_view text) {
  DslParser p(lex(text, {.metavars = true, .dsl_keywords = true}));
  return p.file();
}

const std::string& definition_name(const Definition& d) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, d);
}

std::size_t definition_arity(const Definition& d) {
  return std::visit([](const auto& x) { return x.params.size(); }, d);
}

}  // namespace refl
