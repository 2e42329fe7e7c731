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

namespace {

constexpr int kFuel = 20000;
constexpr int kMaxDepth = 3;

const char* const kAtoms[] = {"a", "b", "c", "ok", "error", "true", "false", "apple"};

Expr random_value(std::mt19937_64& rng, int depth) {
  int pick = static_cast<int>(rng() % (depth >= kMaxDepth ? 3 : 6));
  switch (pick) {
    case 0:
    case 1:
      return make_int(static_cast<std::int64_t>(rng() % 9) - 2);
    case 2:
      return make_atom(kAtoms[rng() % (sizeof(kAtoms) / sizeof(kAtoms[0]))]);
    case 3:
    case 4: {
      std::vector<Expr> xs;
      std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(random_value(rng, depth + 1));
      return make_list(std::move(xs));
    }
    default: {
      std::vector<Expr> xs;
      std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(random_value(rng, depth + 1));
      return make_tuple(std::move(xs));
    }
  }
}

std::string outcome(const InterpResult& r) {
  switch (r.status) {
    case InterpResult::Status::Value: return print(r.value);
    case InterpResult::Status::Cutoff: return "cutoff";
    default: return "stuck (" + r.reason + ")";
  }
}

}  // namespace

std::vector<Expr> random_arguments(std::size_t arity, std::mt19937_64& rng) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < arity; ++i) out.push_back(random_value(rng, 1));
  return out;
}

DynamicReport dynamic_verify(const SourceModule& before, const SourceModule& after, int samples, std::uint64_t seed) {
  auto e1 = before.exports();
  auto e2 = after.exports();
  std::sort(e1.begin(), e1.end());
  std::sort(e2.begin(), e2.end());
  if (e1 != e2) throw VerifyError("export sets differ between the two versions of " + before.name);
  Defs d1 = defs_of(before);
  Defs d2 = defs_of(after);
  std::mt19937_64 rng(seed);
  DynamicReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    for (const auto& [name, arity] : e1) {
      Expr call = make_call(make_atom(name), random_arguments(static_cast<std::size_t>(arity), rng));
      InterpResult a = interpret(call, Env{}, d1, kFuel);
      InterpResult b = interpret(call, Env{}, d2, kFuel);
      ++rep.runs;
      using S = InterpResult::Status;
      if (a.status == S::Cutoff && b.status == S::Cutoff) {
        ++rep.both_cutoff;
        continue;
      }
      bool agree = a.status == b.status && (a.status != S::Value || structurally_equal(a.value, b.value));
      if (agree) continue;
      ++rep.divergences;
      std::string d = print(call) + ": before " + outcome(a) + ", after " + outcome(b);
      std::replace(d.begin(), d.end(), '\n', ' ');
      rep.details.push_back(std::move(d));
    }
  }
  return rep;
}

}  // namespace refl
