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
#include <cctype>

#include "refl/syntax.hpp"

namespace refl {

namespace {

std::string format_expected(const std::string& msg, const std::vector<std::string>& expected) {
  if (expected.empty()) return msg;
  std::string out = msg + "; expected one of:";
  for (const auto& e : expected) out += " " + e;
  return out;
}

constexpr std::array<std::string_view, 17> kErlangKeywords = {
    "after", "and", "andalso", "begin", "case", "catch", "div",    "end",  "fun",
    "if",    "not", "of",      "or",    "orelse", "receive", "rem", "when"};

constexpr std::array<std::string_view, 19> kDslKeywords = {
    "REFACTORING", "WHEN",     "THEN",     "OR",       "ON",   "IN",     "DO",
    "SELECTOR",    "RETURN",   "DEFINITION", "REFERENCE", "FUNCTION", "SIGNATURE",
    "FORWARD",     "BACKWARD", "DATAFLOW", "AND",      "NOT",  "THIS"};

// Longest first so that maximal munch works by linear scan.
constexpr std::array<std::string_view, 26> kPuncts = {
    "->", "<-", "||", "++", "==", "/=", "=<", ">=", "|", "<", ">", "=", "+",
    "-",  "*",  "/",  "(",  ")",  "[",  "]",  "{",  "}",  ",", ";", ".", ":"};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@';
}

}  // namespace

SyntaxError::SyntaxError(int line, int col, std::string msg, std::vector<std::string> expected)
    : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + format_expected(msg, expected)),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

bool is_dsl_keyword(std::string_view word) {
  return std::find(kDslKeywords.begin(), kDslKeywords.end(), word) != kDslKeywords.end();
}

bool is_erlang_keyword(std::string_view word) {
  return std::find(kErlangKeywords.begin(), kErlangKeywords.end(), word) != kErlangKeywords.end();
}

std::vector<Token> lex(std::string_view s, const LexOptions& opts) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_begin = 0;
  bool fresh_line = true;

  auto make = [&](TokKind k, std::size_t b, std::size_t e) {
    Token t;
    t.kind = k;
    t.text = std::string(s.substr(b, e - b));
    t.begin = static_cast<std::uint32_t>(b);
    t.end = static_cast<std::uint32_t>(e);
    t.line = line;
    t.col = static_cast<int>(b - line_begin) + 1;
    t.line_start = fresh_line;
    fresh_line = false;
    return t;
  };

  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_begin = i;
      fresh_line = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '%') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    std::size_t b = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      Token t = make(TokKind::Int, b, i);
      try {
        t.value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw SyntaxError(t.line, t.col, "integer literal out of range");
      }
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && ident_char(s[i])) ++i;
      std::string_view word = s.substr(b, i - b);
      bool upper = std::isupper(static_cast<unsigned char>(c)) || c == '_';
      if (upper && opts.dsl_keywords && is_dsl_keyword(word)) {
        out.push_back(make(TokKind::Keyword, b, i));
        continue;
      }
      if (upper) {
        if (opts.metavars) {
          std::size_t j = i;
          while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
          if (j + 1 < s.size() && s[j] == '.' && s[j + 1] == '.') {
            Token t = make(TokKind::VarList, b, j + 2);
            t.text = std::string(word);
            out.push_back(std::move(t));
            i = j + 2;
            continue;
          }
        }
        out.push_back(make(TokKind::Var, b, i));
        continue;
      }
      out.push_back(make(is_erlang_keyword(word) ? TokKind::Keyword : TokKind::Atom, b, i));
      continue;
    }
    if (c == '\'') {
      std::string name;
      ++i;
      while (i < s.size() && s[i] != '\'') {
        if (s[i] == '\n') break;
        if (s[i] == '\\' && i + 1 < s.size()) ++i;
        name += s[i++];
      }
      if (i >= s.size() || s[i] != '\'') {
        auto [l, col] = line_col(s, static_cast<std::uint32_t>(b));
        throw SyntaxError(l, col, "unterminated quoted atom");
      }
      ++i;
      Token t = make(TokKind::Atom, b, i);
      t.text = std::move(name);
      out.push_back(std::move(t));
      continue;
    }
    if (opts.metavars && c == '-' && i + 2 < s.size() && s[i + 1] == '-' && s[i + 2] == '-') {
      while (i < s.size() && s[i] == '-') ++i;
      out.push_back(make(TokKind::Separator, b, i));
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (s.substr(i, p.size()) == p) {
        i += p.size();
        out.push_back(make(TokKind::Punct, b, i));
        matched = true;
        break;
      }
    }
    if (!matched) {
      auto [l, col] = line_col(s, static_cast<std::uint32_t>(b));
      throw SyntaxError(l, col, std::string("unexpected character '") + c + "'");
    }
  }
  Token end;
  end.kind = TokKind::End;
  end.begin = end.end = static_cast<std::uint32_t>(s.size());
  end.line = line;
  end.col = static_cast<int>(s.size() - line_begin) + 1;
  end.line_start = fresh_line;
  out.push_back(std::move(end));
  return out;
}

std::pair<int, int> line_col(std::string_view text, std::uint32_t offset) {
  int line = 1;
  std::uint32_t begin = 0;
  for (std::uint32_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      begin = i + 1;
    }
  }
  return {line, static_cast<int>(offset - begin) + 1};
}

std::uint32_t offset_of(std::string_view text, int line, int col) {
  int cur = 1;
  std::uint32_t i = 0;
  while (cur < line && i < text.size()) {
    if (text[i] == '\n') ++cur;
    ++i;
  }
  if (cur != line) return Span::npos;
  std::uint32_t off = i + static_cast<std::uint32_t>(col - 1);
  return off <= text.size() ? off : Span::npos;
}

}  // namespace refl
