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

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "refl/ast.hpp"

namespace refl {

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, std::string msg, std::vector<std::string> expected = {});
  int line() const { return line_; }
  int col() const { return col_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::vector<std::string> expected_;
};

enum class TokKind : std::uint8_t {
  Atom,
  Var,
  VarList,  // `Name..` (only produced when metavariables are enabled)
  Int,
  Punct,    // operators and brackets; text holds the spelling
  Keyword,  // Erlang reserved words and, in DSL mode, upper-case DSL keywords
  Separator,  // a run of three or more dashes
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  std::int64_t value = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  int line = 1;
  int col = 1;
  bool line_start = false;
};

struct LexOptions {
  bool metavars = false;      // recognise `Name..` and separators
  bool dsl_keywords = false;  // reserve REFACTORING, WHEN, ... as keywords
};

std::vector<Token> lex(std::string_view text, const LexOptions& opts = {});

bool is_dsl_keyword(std::string_view word);
bool is_erlang_keyword(std::string_view word);

// Recursive-descent parser over a token vector. The DSL front end drives it
// directly to parse pattern bodies embedded in definition files.
class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, std::size_t pos = 0) : toks_(toks), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  const Token& peek(std::size_t ahead = 0) const;
  bool at_punct(std::string_view p, std::size_t ahead = 0) const;
  bool at_keyword(std::string_view k, std::size_t ahead = 0) const;
  bool at_end() const { return peek().kind == TokKind::End; }
  const Token& advance();
  void expect_punct(std::string_view p);
  void expect_keyword(std::string_view k);
  [[noreturn]] void fail(std::string msg, std::vector<std::string> expected = {}) const;

  // True when the current token can begin an expression.
  bool at_expr_start() const;

  Expr parse_expr();
  std::vector<Expr> parse_body_seq();
  // Clause `Head -> Body` where Head is `name(pats)` (named) or `(pats)` (fun)
  // or a single pattern (case).
  Expr parse_case_clause();
  Expr parse_fun_clause();
  // Named function clause, starting at the name.
  Expr parse_named_clause();
  // One function form: named clauses separated by `;` and closed by `.`.
  Expr parse_function_form();

  // DSL pattern body: an expression, an expression sequence (returned as
  // Seq), a single named clause (Clause), or one or more forms (Function or
  // Seq of Function).
  Expr parse_pattern_body();

 private:
  Expr parse_match();
  Expr parse_comparison();
  Expr parse_append();
  Expr parse_additive();
  Expr parse_multiplicative();
  Expr parse_unary();
  Expr parse_postfix();
  Expr parse_primary();
  Expr parse_list();
  std::vector<Expr> parse_args(std::string_view close);
  Expr finish_clause(Expr name, std::vector<Expr> pats, std::uint32_t begin, std::uint32_t pats_begin,
                     std::uint32_t pats_end);
  void check_pattern(const Expr& e) const;
  Span span_from(std::uint32_t begin) const;

  const std::vector<Token>& toks_;
  std::size_t pos_;
};

struct SourceModule {
  std::string name;
  std::string text;
  std::string path;
  Expr root;  // Kind::Module

  std::vector<std::pair<std::string, int>> exports() const;
  std::vector<const Expr*> functions() const;
};

SourceModule parse_module(std::string_view text, std::string path = {});

struct ParseExprOptions {
  bool metavars = false;
};

// Single expression, or an expression sequence (returned as Block).
Expr parse_expr(std::string_view text, const ParseExprOptions& opts = {});

// Hook consulted by the printer before printing each node; returns true when
// it emitted the node itself.
using PrintHook = std::function<bool(const Expr&, std::string&)>;

std::string print(const Expr& e, const PrintHook& hook = {});
std::string print(const SourceModule& m);

// Atom spelling, quoted when required.
std::string print_atom(std::string_view name);

struct SpliceEdit {
  Span span;
  Expr replacement;
};

// Replaces each span of `original` with the printed replacement, re-indented
// to the span's start column. Bytes outside the spans are preserved.
std::string splice(std::string_view original, std::vector<SpliceEdit> edits);

// Line/column (1-based) of a byte offset.
std::pair<int, int> line_col(std::string_view text, std::uint32_t offset);
std::uint32_t offset_of(std::string_view text, int line, int col);

}  // namespace refl
