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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "refl/verifier.hpp"

namespace refl::verify_detail {

bool has_mathvars(const Expr& e);
void collect_mathvars(const Expr& e, std::set<std::string>& out);
bool has_constraint(const std::vector<Constraint>& cs, const Constraint& c);
Expr seq_to_code(std::vector<Expr> body);
const Expr& at(const Expr& e, const std::vector<std::size_t>& path);
Expr replace_at(Expr e, const std::vector<std::size_t>& path, Expr sub);
// The name of the module whose definitions a defs frame stands for.
Expr module_of_defs(const std::string& frame);
MatchResult match_with_negative(const Expr& value, const Expr& pat, const Env& env, const std::vector<Constraint>& cs,
                                std::optional<Constraint>* negative);
void pattern_names(const Expr& p, std::set<std::pair<Kind, std::string>>& out);
Env subst_env(const Env& e, const std::map<std::string, Expr>& m);
Constraint subst_constraint(const Constraint& c, const std::map<std::string, Expr>& m);
bool env_equal(const Env& a, const Env& b);
bool defs_equal(const Defs& a, const Defs& b);
// Position of the next redex; nullopt when the code is a value or stuck.
std::optional<std::vector<std::size_t>> redex_path(const Expr& code);

}  // namespace refl::verify_detail
