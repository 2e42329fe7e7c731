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
#include <cctype>

#include "refl/syntax.hpp"

namespace refl {

namespace {

constexpr int kPrecMatch = 1;
constexpr int kPrecCompare = 2;
constexpr int kPrecAppend = 3;
constexpr int kPrecAdd = 4;
constexpr int kPrecMul = 5;
constexpr int kPrecPrimary = 9;

int precedence(const Expr& e) {
  switch (e.kind) {
    case Kind::Match:
      return kPrecMatch;
    case Kind::BinOp:
      if (e.text == "++") return kPrecAppend;
      if (e.text == "+" || e.text == "-") return kPrecAdd;
      if (e.text == "*") return kPrecMul;
      return kPrecCompare;
    default:
      return kPrecPrimary;
  }
}

bool bare_callee(const Expr& e) {
  return e.kind == Kind::Atom || e.kind == Kind::Var || e.kind == Kind::VarList || e.kind == Kind::MathVar;
}

class Printer {
 public:
  explicit Printer(const PrintHook& hook) : hook_(hook) {}

  void expr(const Expr& e, int min_prec) {
    bool paren = precedence(e) < min_prec;
    if (paren) out += '(';
    if (!(hook_ && hook_(e, out))) body(e);
    if (paren) out += ')';
  }

  std::string out;

 private:
  template <class It>
  void join(It b, It e, const char* sep, int min_prec = 0) {
    for (It i = b; i != e; ++i) {
      if (i != b) out += sep;
      expr(*i, min_prec);
    }
  }

  void join_all(const std::vector<Expr>& v, const char* sep, int min_prec = 0) { join(v.begin(), v.end(), sep, min_prec); }

  void clause_tail(const Expr& c) {
    out += " -> ";
    join_all(clause_body(c), ", ", kPrecMatch);
  }

  void case_clause(const Expr& c) {
    if (c.kind != Kind::Clause) return expr(c, 0);
    if (!hook_ || !hook_(c, out)) {
      join_all(clause_patterns(c), ", ", kPrecMatch);
      clause_tail(c);
    }
  }

  void fun_clause(const Expr& c) {
    if (c.kind != Kind::Clause) return expr(c, 0);
    if (!hook_ || !hook_(c, out)) {
      out += '(';
      join_all(clause_patterns(c), ", ");
      out += ')';
      clause_tail(c);
    }
  }

  void body(const Expr& e) {
    switch (e.kind) {
      case Kind::Atom:
        out += print_atom(e.text);
        return;
      case Kind::Integer:
        out += std::to_string(e.value);
        return;
      case Kind::Var:
        out += e.text;
        return;
      case Kind::MathVar:
        out += e.text;
        if (e.value == static_cast<std::int64_t>(MathSort::Seq)) out += "..";
        return;
      case Kind::VarList:
        out += e.text + "..";
        return;
      case Kind::Nil:
        out += "[]";
        return;
      case Kind::None:
        return;
      case Kind::Cons: {
        out += '[';
        const Expr* cur = &e;
        bool first = true;
        while (cur->kind == Kind::Cons) {
          if (!first) out += ", ";
          first = false;
          expr(cur->kids[0], kPrecMatch);
          cur = &cur->kids[1];
        }
        if (cur->kind != Kind::Nil) {
          out += " | ";
          expr(*cur, kPrecMatch);
        }
        out += ']';
        return;
      }
      case Kind::Tuple:
        out += '{';
        join_all(e.kids, ", ");
        out += '}';
        return;
      case Kind::Match:
        expr(e.kids[0], kPrecCompare);
        out += " = ";
        expr(e.kids[1], kPrecMatch);
        return;
      case Kind::BinOp: {
        int p = precedence(e);
        bool right_assoc = e.text == "++";
        int lp = p == kPrecCompare ? kPrecAppend : (right_assoc ? p + 1 : p);
        int rp = p == kPrecCompare ? kPrecAppend : (right_assoc ? p : p + 1);
        expr(e.kids[0], lp);
        out += ' ' + e.text + ' ';
        expr(e.kids[1], rp);
        return;
      }
      case Kind::Case:
        out += "case ";
        expr(e.kids[0], 0);
        out += " of ";
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          if (i > 1) out += "; ";
          case_clause(e.kids[i]);
        }
        out += " end";
        return;
      case Kind::Fun:
        out += "fun";
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          out += i == 0 ? "" : "; ";
          if (e.kids[i].kind == Kind::Clause)
            fun_clause(e.kids[i]);
          else {
            out += ' ';
            expr(e.kids[i], 0);
          }
        }
        out += " end";
        return;
      case Kind::Call: {
        const Expr& callee = e.kids[0];
        if (bare_callee(callee)) {
          expr(callee, 0);
        } else {
          out += '(';
          expr(callee, 0);
          out += ')';
        }
        out += '(';
        join(e.kids.begin() + 1, e.kids.end(), ", ");
        out += ')';
        return;
      }
      case Kind::RemoteCall:
        expr(e.kids[0], kPrecPrimary);
        out += ':';
        expr(e.kids[1], kPrecPrimary);
        out += '(';
        join(e.kids.begin() + 2, e.kids.end(), ", ");
        out += ')';
        return;
      case Kind::Block:
        out += "begin ";
        join_all(e.kids, ", ", kPrecMatch);
        out += " end";
        return;
      case Kind::ListComp:
        out += '[';
        expr(e.kids[0], kPrecMatch);
        out += " || ";
        join(e.kids.begin() + 1, e.kids.end(), ", ");
        out += ']';
        return;
      case Kind::Generator:
        expr(e.kids[0], kPrecCompare);
        out += " <- ";
        expr(e.kids[1], kPrecMatch);
        return;
      case Kind::Clause:
        if (e.kids[0].kind == Kind::None) {
          if (clause_patterns(e).size() == 1) {
            join_all(clause_patterns(e), ", ", kPrecMatch);
          } else {
            out += '(';
            join_all(clause_patterns(e), ", ");
            out += ')';
          }
        } else {
          expr(e.kids[0], kPrecPrimary);
          out += '(';
          join_all(clause_patterns(e), ", ");
          out += ')';
        }
        clause_tail(e);
        return;
      case Kind::Seq: {
        bool forms = std::any_of(e.kids.begin(), e.kids.end(),
                                 [](const Expr& k) { return k.kind == Kind::Function || k.kind == Kind::Attribute; });
        join_all(e.kids, forms ? "\n\n" : ", ", kPrecMatch);
        return;
      }
      case Kind::Function:
        join_all(e.kids, ";\n");
        // A trailing list metavariable must not run into the full stop.
        if (out.size() >= 2 && out.compare(out.size() - 2, 2, "..") == 0) out += ' ';
        out += '.';
        return;
      case Kind::Attribute:
        out += '-' + e.text + '(';
        if (e.text == "export") {
          out += '[';
          join_all(e.kids, ", ");
          out += ']';
        } else {
          join_all(e.kids, ", ");
        }
        out += ").";
        return;
      case Kind::ExportEntry:
        out += print_atom(e.text) + '/' + std::to_string(e.value);
        return;
      case Kind::Module:
        join_all(e.kids, "\n\n");
        out += '\n';
        return;
    }
  }

  const PrintHook& hook_;
};

}  // namespace

std::string print_atom(std::string_view name) {
  bool bare = !name.empty() && std::islower(static_cast<unsigned char>(name[0])) && !is_erlang_keyword(name);
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@')) bare = false;
  if (bare) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

std::string print(const Expr& e, const PrintHook& hook) {
  Printer p(hook);
  p.expr(e, 0);
  return std::move(p.out);
}

std::string print(const SourceModule& m) { return print(m.root); }

std::string splice(std::string_view original, std::vector<SpliceEdit> edits) {
  std::sort(edits.begin(), edits.end(), [](const SpliceEdit& a, const SpliceEdit& b) { return a.span < b.span; });
  std::string out;
  std::uint32_t cursor = 0;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Span& s = edits[i].span;
    if (!s.valid() || s.end < s.begin || s.end > original.size()) throw Error("splice: invalid span");
    if (i > 0 && s.begin < edits[i - 1].span.end) throw Error("splice: overlapping edit spans");
    out.append(original.substr(cursor, s.begin - cursor));
    std::size_t line_begin = original.rfind('\n', s.begin == 0 ? 0 : s.begin - 1);
    line_begin = (line_begin == std::string_view::npos || s.begin == 0) ? 0 : line_begin + 1;
    std::string_view prefix = original.substr(line_begin, s.begin - line_begin);
    std::string indent;
    for (char c : prefix) indent += (c == '\t' ? '\t' : ' ');
    std::string text = print(edits[i].replacement);
    for (char c : text) {
      out += c;
      if (c == '\n') out += indent;
    }
    cursor = s.end;
  }
  out.append(original.substr(cursor));
  return out;
}

}  // namespace refl
