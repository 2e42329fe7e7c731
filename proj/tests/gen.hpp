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

// Random mini-Erlang trees for property tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "refl/ast.hpp"

namespace refl::testgen {

class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }

  Expr atom() {
    static const std::vector<std::string> names = {"a", "b", "apple", "ok", "end", "Quoted", "x_1"};
    return make_atom(names[pick(static_cast<int>(names.size()))]);
  }
  Expr integer() { return make_int(pick(21) - 5); }
  Expr var() {
    static const std::vector<std::string> names = {"X", "Y", "Acc", "T", "_Ignored"};
    return make_var(names[pick(static_cast<int>(names.size()))]);
  }

  std::vector<Expr> many(int depth, int lo, int hi, bool pattern) {
    std::vector<Expr> out;
    int n = lo + pick(hi - lo + 1);
    for (int i = 0; i < n; ++i) out.push_back(pattern ? pat(depth) : expr(depth));
    return out;
  }

  Expr pat(int depth) {
    int choice = depth <= 0 ? pick(4) : pick(6);
    switch (choice) {
      case 0:
        return atom();
      case 1:
        return integer();
      case 2:
        return var();
      case 3:
        return make_nil();
      case 4:
        return make_tuple(many(depth - 1, 0, 3, true));
      default: {
        std::vector<Expr> elems = many(depth - 1, 1, 3, true);
        return make_list(std::move(elems), coin() ? make_nil() : var());
      }
    }
  }

  Expr clause(int depth, std::size_t arity, bool named) {
    std::vector<Expr> pats;
    for (std::size_t i = 0; i < arity; ++i) pats.push_back(pat(depth - 1));
    return make_clause(named ? make_atom("f") : make_none(), std::move(pats), many(depth - 1, 1, 2, false));
  }

  Expr expr(int depth) {
    if (depth <= 0) {
      switch (pick(4)) {
        case 0:
          return atom();
        case 1:
          return integer();
        case 2:
          return var();
        default:
          return make_nil();
      }
    }
    switch (pick(14)) {
      case 0:
        return atom();
      case 1:
        return var();
      case 2:
        return make_tuple(many(depth - 1, 0, 3, false));
      case 3:
        return make_list(many(depth - 1, 1, 3, false), coin() ? make_nil() : expr(depth - 1));
      case 4:
        return make_match(pat(depth - 1), expr(depth - 1));
      case 5: {
        static const std::vector<std::string> ops = {"+", "-", "*", "++", "==", "/=", "<", ">", "=<", ">="};
        return make_binop(ops[pick(static_cast<int>(ops.size()))], expr(depth - 1), expr(depth - 1));
      }
      case 6: {
        std::vector<Expr> clauses;
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) clauses.push_back(clause(depth, 1, false));
        return make_case(expr(depth - 1), std::move(clauses));
      }
      case 7: {
        std::size_t arity = static_cast<std::size_t>(pick(3));
        std::vector<Expr> clauses;
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) clauses.push_back(clause(depth, arity, false));
        return make_fun(std::move(clauses));
      }
      case 8:
        return make_call(coin() ? atom() : var(), many(depth - 1, 0, 3, false));
      case 9:
        return make_remote(atom(), atom(), many(depth - 1, 0, 2, false));
      case 10:
        return make_block(many(depth - 1, 1, 3, false));
      case 11: {
        std::vector<Expr> quals;
        quals.push_back(make_generator(pat(depth - 1), expr(depth - 1)));
        if (coin()) quals.push_back(expr(depth - 1));
        return make_listcomp(expr(depth - 1), std::move(quals));
      }
      case 12: {
        std::vector<Expr> one;
        one.push_back(clause(depth, 0, false));
        return make_call(make_fun(std::move(one)), {});
      }
      default:
        return integer();
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace refl::testgen
