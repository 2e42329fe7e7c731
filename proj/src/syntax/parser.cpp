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

#include "refl/syntax.hpp"

namespace refl {

namespace {

const std::vector<std::string> kExprStart = {"integer", "atom", "variable", "(", "[",
                                             "{",       "begin", "case", "fun"};

bool contains_varlist(const std::vector<Expr>& es) {
  return std::any_of(es.begin(), es.end(), [](const Expr& e) { return e.kind == Kind::VarList; });
}

}  // namespace

const Token& ExprParser::peek(std::size_t ahead) const {
  std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
  return toks_[i];
}

bool ExprParser::at_punct(std::string_view p, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokKind::Punct && t.text == p;
}

bool ExprParser::at_keyword(std::string_view k, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokKind::Keyword && t.text == k;
}

const Token& ExprParser::advance() {
  const Token& t = toks_[pos_];
  if (pos_ + 1 < toks_.size()) ++pos_;
  return t;
}

void ExprParser::fail(std::string msg, std::vector<std::string> expected) const {
  const Token& t = peek();
  std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
  throw SyntaxError(t.line, t.col, msg + " at " + found, std::move(expected));
}

void ExprParser::expect_punct(std::string_view p) {
  if (!at_punct(p)) fail("unexpected token", {std::string(p)});
  advance();
}

void ExprParser::expect_keyword(std::string_view k) {
  if (!at_keyword(k)) fail("unexpected token", {std::string(k)});
  advance();
}

bool ExprParser::at_expr_start() const {
  const Token& t = peek();
  switch (t.kind) {
    case TokKind::Int:
    case TokKind::Atom:
    case TokKind::Var:
    case TokKind::VarList:
      return true;
    case TokKind::Punct:
      return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-";
    case TokKind::Keyword:
      return t.text == "begin" || t.text == "case" || t.text == "fun";
    default:
      return false;
  }
}

Span ExprParser::span_from(std::uint32_t begin) const {
  std::uint32_t end = pos_ > 0 ? toks_[pos_ - 1].end : begin;
  return Span{begin, std::max(begin, end)};
}

void ExprParser::check_pattern(const Expr& e) const {
  if (is_pattern(e)) return;
  auto [line, col] = std::pair<int, int>{0, 0};
  for (const auto& t : toks_) {
    if (t.begin == e.span.begin) {
      line = t.line;
      col = t.col;
      break;
    }
  }
  throw SyntaxError(line, col, std::string("illegal pattern: ") + kind_name(e.kind) + " is not allowed in a pattern");
}

Expr ExprParser::parse_expr() { return parse_match(); }

Expr ExprParser::parse_match() {
  std::uint32_t b = peek().begin;
  Expr lhs = parse_comparison();
  if (!at_punct("=")) return lhs;
  advance();
  check_pattern(lhs);
  Expr rhs = parse_match();
  Expr m = make_match(std::move(lhs), std::move(rhs));
  m.span = span_from(b);
  return m;
}

Expr ExprParser::parse_comparison() {
  std::uint32_t b = peek().begin;
  Expr lhs = parse_append();
  for (const char* op : {"==", "/=", "<", ">", "=<", ">="}) {
    if (at_punct(op)) {
      advance();
      Expr rhs = parse_append();
      Expr e = make_binop(op, std::move(lhs), std::move(rhs));
      e.span = span_from(b);
      return e;
    }
  }
  return lhs;
}

Expr ExprParser::parse_append() {
  std::uint32_t b = peek().begin;
  Expr lhs = parse_additive();
  if (!at_punct("++")) return lhs;
  advance();
  Expr rhs = parse_append();
  Expr e = make_binop("++", std::move(lhs), std::move(rhs));
  e.span = span_from(b);
  return e;
}

Expr ExprParser::parse_additive() {
  std::uint32_t b = peek().begin;
  Expr lhs = parse_multiplicative();
  while (at_punct("+") || at_punct("-")) {
    std::string op = advance().text;
    Expr rhs = parse_multiplicative();
    lhs = make_binop(op, std::move(lhs), std::move(rhs));
    lhs.span = span_from(b);
  }
  return lhs;
}

Expr ExprParser::parse_multiplicative() {
  std::uint32_t b = peek().begin;
  Expr lhs = parse_unary();
  while (at_punct("*")) {
    advance();
    Expr rhs = parse_unary();
    lhs = make_binop("*", std::move(lhs), std::move(rhs));
    lhs.span = span_from(b);
  }
  return lhs;
}

Expr ExprParser::parse_unary() {
  if (at_punct("-") && peek(1).kind == TokKind::Int) {
    std::uint32_t b = advance().begin;
    Expr e = make_int(-advance().value);
    e.span = span_from(b);
    return e;
  }
  return parse_postfix();
}

Expr ExprParser::parse_postfix() {
  std::uint32_t b = peek().begin;
  Expr e = parse_primary();
  for (;;) {
    if (at_punct("(")) {
      switch (e.kind) {
        case Kind::Atom:
        case Kind::Var:
        case Kind::MathVar:
        case Kind::Fun:
        case Kind::Call:
        case Kind::RemoteCall:
        case Kind::Block:
        case Kind::Case:
        case Kind::Match:
          break;
        default:
          return e;
      }
      advance();
      std::vector<Expr> args = parse_args(")");
      e = make_call(std::move(e), std::move(args));
      e.span = span_from(b);
      continue;
    }
    if (at_punct(":") && (e.kind == Kind::Atom || e.kind == Kind::Var)) {
      advance();
      const Token& t = peek();
      if (t.kind != TokKind::Atom && t.kind != TokKind::Var) fail("expected function name", {"atom", "variable"});
      Expr name = t.kind == TokKind::Atom ? make_atom(t.text) : make_var(t.text);
      name.span = Span{t.begin, t.end};
      advance();
      expect_punct("(");
      std::vector<Expr> args = parse_args(")");
      e = make_remote(std::move(e), std::move(name), std::move(args));
      e.span = span_from(b);
      continue;
    }
    return e;
  }
}

std::vector<Expr> ExprParser::parse_args(std::string_view close) {
  std::vector<Expr> out;
  if (at_punct(close)) {
    advance();
    return out;
  }
  for (;;) {
    out.push_back(parse_expr());
    if (at_punct(",")) {
      advance();
      continue;
    }
    if (at_punct(close)) {
      advance();
      return out;
    }
    fail("unexpected token", {",", std::string(close)});
  }
}

Expr ExprParser::parse_primary() {
  const Token& t = peek();
  std::uint32_t b = t.begin;
  switch (t.kind) {
    case TokKind::Int: {
      Expr e = make_int(t.value);
      advance();
      e.span = span_from(b);
      return e;
    }
    case TokKind::Atom: {
      Expr e = make_atom(t.text);
      advance();
      e.span = span_from(b);
      return e;
    }
    case TokKind::Var: {
      Expr e = make_var(t.text);
      advance();
      e.span = span_from(b);
      return e;
    }
    case TokKind::VarList: {
      Expr e = make_varlist(t.text);
      advance();
      e.span = span_from(b);
      return e;
    }
    case TokKind::Punct:
      if (t.text == "(") {
        advance();
        Expr e = parse_expr();
        expect_punct(")");
        return e;
      }
      if (t.text == "[") return parse_list();
      if (t.text == "{") {
        advance();
        Expr e = make_tuple(parse_args("}"));
        e.span = span_from(b);
        return e;
      }
      break;
    case TokKind::Keyword:
      if (t.text == "begin") {
        advance();
        Expr e = make_block(parse_body_seq());
        expect_keyword("end");
        e.span = span_from(b);
        return e;
      }
      if (t.text == "case") {
        advance();
        Expr scrut = parse_expr();
        expect_keyword("of");
        std::vector<Expr> clauses;
        for (;;) {
          clauses.push_back(parse_case_clause());
          if (at_punct(";")) {
            advance();
            continue;
          }
          break;
        }
        expect_keyword("end");
        Expr e = make_case(std::move(scrut), std::move(clauses));
        e.span = span_from(b);
        return e;
      }
      if (t.text == "fun") {
        advance();
        std::vector<Expr> clauses;
        for (;;) {
          clauses.push_back(parse_fun_clause());
          if (at_punct(";")) {
            advance();
            continue;
          }
          break;
        }
        expect_keyword("end");
        std::size_t arity = 0;
        bool first = true;
        for (const auto& c : clauses) {
          if (c.kind != Kind::Clause || contains_varlist(clause_patterns(c))) continue;
          if (first) {
            arity = clause_patterns(c).size();
            first = false;
          } else if (clause_patterns(c).size() != arity) {
            throw SyntaxError(t.line, t.col, "fun clauses have different arities");
          }
        }
        Expr e = make_fun(std::move(clauses));
        e.span = span_from(b);
        return e;
      }
      break;
    default:
      break;
  }
  fail("expected an expression", kExprStart);
}

Expr ExprParser::parse_list() {
  std::uint32_t b = peek().begin;
  expect_punct("[");
  if (at_punct("]")) {
    advance();
    Expr e = make_nil();
    e.span = span_from(b);
    return e;
  }
  Expr first = parse_expr();
  if (at_punct("||")) {
    advance();
    std::vector<Expr> quals;
    for (;;) {
      std::uint32_t qb = peek().begin;
      Expr q = parse_expr();
      if (at_punct("<-")) {
        advance();
        check_pattern(q);
        Expr src = parse_expr();
        q = make_generator(std::move(q), std::move(src));
        q.span = span_from(qb);
      }
      quals.push_back(std::move(q));
      if (at_punct(",")) {
        advance();
        continue;
      }
      break;
    }
    expect_punct("]");
    Expr e = make_listcomp(std::move(first), std::move(quals));
    e.span = span_from(b);
    return e;
  }
  std::vector<Expr> elems;
  elems.push_back(std::move(first));
  while (at_punct(",")) {
    advance();
    elems.push_back(parse_expr());
  }
  Expr tail;
  if (at_punct("|")) {
    advance();
    tail = parse_expr();
  } else {
    tail = make_nil();
    tail.span = Span{peek().begin, peek().begin};
  }
  expect_punct("]");
  std::uint32_t end = toks_[pos_ - 1].end;
  for (std::size_t i = elems.size(); i-- > 0;) {
    std::uint32_t cb = i == 0 ? b : elems[i].span.begin;
    tail = make_cons(std::move(elems[i]), std::move(tail));
    tail.span = Span{cb, end};
  }
  return tail;
}

std::vector<Expr> ExprParser::parse_body_seq() {
  std::vector<Expr> out;
  out.push_back(parse_expr());
  while (at_punct(",")) {
    advance();
    out.push_back(parse_expr());
  }
  return out;
}

Expr ExprParser::finish_clause(Expr name, std::vector<Expr> pats, std::uint32_t begin, std::uint32_t pats_begin,
                               std::uint32_t pats_end) {
  for (const auto& p : pats) check_pattern(p);
  Span ps{pats_begin, pats_end};
  if (!pats.empty()) ps = Span{pats.front().span.begin, pats.back().span.end};
  expect_punct("->");
  std::vector<Expr> body = parse_body_seq();
  Span bs{body.front().span.begin, body.back().span.end};
  Expr c = make_clause(std::move(name), std::move(pats), std::move(body));
  c.kids[1].span = ps;
  c.kids[2].span = bs;
  c.span = span_from(begin);
  return c;
}

Expr ExprParser::parse_case_clause() {
  std::uint32_t b = peek().begin;
  if (peek().kind == TokKind::VarList && (at_punct(";", 1) || at_keyword("end", 1))) {
    Expr e = make_varlist(peek().text);
    advance();
    e.span = span_from(b);
    return e;
  }
  Expr pat = parse_comparison();
  Expr name = make_none();
  name.span = Span{b, b};
  return finish_clause(std::move(name), {std::move(pat)}, b, b, b);
}

Expr ExprParser::parse_fun_clause() {
  std::uint32_t b = peek().begin;
  if (peek().kind == TokKind::VarList && (at_punct(";", 1) || at_keyword("end", 1))) {
    Expr e = make_varlist(peek().text);
    advance();
    e.span = span_from(b);
    return e;
  }
  expect_punct("(");
  std::uint32_t inner = peek().begin;
  std::vector<Expr> pats = parse_args(")");
  Expr name = make_none();
  name.span = Span{b, b};
  return finish_clause(std::move(name), std::move(pats), b, inner, inner);
}

Expr ExprParser::parse_named_clause() {
  const Token& t = peek();
  std::uint32_t b = t.begin;
  Expr name;
  if (t.kind == TokKind::Atom) {
    name = make_atom(t.text);
  } else if (t.kind == TokKind::Var) {
    name = make_var(t.text);
  } else {
    fail("expected a function clause", {"atom"});
  }
  name.span = Span{t.begin, t.end};
  advance();
  expect_punct("(");
  std::uint32_t inner = peek().begin;
  std::vector<Expr> pats = parse_args(")");
  return finish_clause(std::move(name), std::move(pats), b, inner, inner);
}

namespace {

void check_same_signature(const std::vector<Expr>& clauses, const Token& where) {
  const Expr* ref = nullptr;
  for (const auto& c : clauses) {
    if (c.kids[0].kind != Kind::Atom || contains_varlist(clause_patterns(c))) return;
    if (!ref) {
      ref = &c;
      continue;
    }
    if (c.kids[0].text != ref->kids[0].text || clause_patterns(c).size() != clause_patterns(*ref).size())
      throw SyntaxError(where.line, where.col, "clauses of one function must share name and arity");
  }
}

}  // namespace

Expr ExprParser::parse_function_form() {
  std::uint32_t b = peek().begin;
  const Token& first = peek();
  std::vector<Expr> clauses;
  clauses.push_back(parse_named_clause());
  while (at_punct(";")) {
    advance();
    clauses.push_back(parse_named_clause());
  }
  expect_punct(".");
  check_same_signature(clauses, first);
  Expr f(Kind::Function, {}, 0, std::move(clauses));
  f.span = span_from(b);
  return f;
}

Expr ExprParser::parse_pattern_body() {
  std::uint32_t b = peek().begin;
  const Token& first_tok = peek();
  Expr first = parse_expr();
  bool named_head = first.kind == Kind::Call && (first.kids[0].kind == Kind::Atom || first.kids[0].kind == Kind::Var);
  if (named_head && at_punct("->")) {
    // `Name(Pats) -> Body` : a named clause, possibly the start of forms.
    Expr name = first.kids[0];
    std::vector<Expr> pats(first.kids.begin() + 1, first.kids.end());
    std::uint32_t inner = toks_[pos_ - 1].begin;
    Expr clause = finish_clause(std::move(name), std::move(pats), b, inner, inner);
    if (!at_punct(";") && !at_punct(".")) return clause;
    std::vector<Expr> clauses;
    clauses.push_back(std::move(clause));
    while (at_punct(";")) {
      advance();
      clauses.push_back(parse_named_clause());
    }
    expect_punct(".");
    check_same_signature(clauses, first_tok);
    Expr f(Kind::Function, {}, 0, std::move(clauses));
    f.span = span_from(b);
    std::vector<Expr> forms;
    forms.push_back(std::move(f));
    while (peek().kind == TokKind::Atom || peek().kind == TokKind::Var) {
      if (!at_punct("(", 1)) break;
      forms.push_back(parse_function_form());
    }
    if (forms.size() == 1) return std::move(forms.front());
    Expr seq = make_seq(std::move(forms));
    seq.span = span_from(b);
    return seq;
  }
  if (!at_punct(",")) return first;
  std::vector<Expr> elems;
  elems.push_back(std::move(first));
  while (at_punct(",")) {
    advance();
    elems.push_back(parse_expr());
  }
  Expr seq = make_seq(std::move(elems));
  seq.span = span_from(b);
  return seq;
}

std::vector<std::pair<std::string, int>> SourceModule::exports() const {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& f : root.kids)
    if (f.kind == Kind::Attribute && f.text == "export")
      for (const auto& e : f.kids) out.emplace_back(e.text, static_cast<int>(e.value));
  return out;
}

std::vector<const Expr*> SourceModule::functions() const {
  std::vector<const Expr*> out;
  for (const auto& f : root.kids)
    if (f.kind == Kind::Function) out.push_back(&f);
  return out;
}

SourceModule parse_module(std::string_view text, std::string path) {
  std::vector<Token> toks = lex(text);
  ExprParser p(toks);
  SourceModule m;
  m.text = std::string(text);
  m.path = std::move(path);
  m.root = Expr(Kind::Module);
  m.root.span = Span{0, static_cast<std::uint32_t>(text.size())};
  int module_attrs = 0;
  while (!p.at_end()) {
    if (p.at_punct("-")) {
      const Token& dash = p.peek();
      std::uint32_t b = dash.begin;
      p.advance();
      const Token& name = p.peek();
      if (name.kind != TokKind::Atom) p.fail("expected attribute name", {"module", "export"});
      std::string attr = name.text;
      p.advance();
      p.expect_punct("(");
      Expr a(Kind::Attribute, attr);
      if (attr == "module") {
        const Token& t = p.peek();
        if (t.kind != TokKind::Atom) p.fail("expected module name", {"atom"});
        Expr n = make_atom(t.text);
        n.span = Span{t.begin, t.end};
        p.advance();
        m.name = n.text;
        a.kids.push_back(std::move(n));
        ++module_attrs;
      } else if (attr == "export") {
        p.expect_punct("[");
        if (!p.at_punct("]")) {
          for (;;) {
            const Token& t = p.peek();
            if (t.kind != TokKind::Atom) p.fail("expected function name", {"atom"});
            Expr e(Kind::ExportEntry, t.text);
            std::uint32_t eb = t.begin;
            p.advance();
            p.expect_punct("/");
            const Token& ar = p.peek();
            if (ar.kind != TokKind::Int) p.fail("expected arity", {"integer"});
            e.value = ar.value;
            e.span = Span{eb, ar.end};
            p.advance();
            a.kids.push_back(std::move(e));
            if (p.at_punct(",")) {
              p.advance();
              continue;
            }
            break;
          }
        }
        p.expect_punct("]");
      } else {
        throw SyntaxError(name.line, name.col, "unsupported attribute '" + attr + "'", {"module", "export"});
      }
      p.expect_punct(")");
      p.expect_punct(".");
      a.span = Span{b, toks[p.pos() - 1].end};
      m.root.kids.push_back(std::move(a));
      continue;
    }
    if (p.peek().kind != TokKind::Atom) p.fail("expected a form", {"-", "atom"});
    m.root.kids.push_back(p.parse_function_form());
  }
  if (module_attrs != 1) {
    auto [l, c] = line_col(text, 0);
    throw SyntaxError(l, c, "a module needs exactly one -module attribute");
  }
  return m;
}

Expr parse_expr(std::string_view text, const ParseExprOptions& opts) {
  LexOptions lo;
  lo.metavars = opts.metavars;
  std::vector<Token> toks = lex(text, lo);
  ExprParser p(toks);
  std::uint32_t b = p.peek().begin;
  std::vector<Expr> seq = p.parse_body_seq();
  if (!p.at_end()) p.fail("unexpected token after expression", {",", "end of input"});
  if (seq.size() == 1) return std::move(seq.front());
  Expr blk = make_block(std::move(seq));
  blk.span = Span{b, toks[p.pos() > 0 ? p.pos() - 1 : 0].end};
  return blk;
}

}  // namespace refl
