#pragma once

// Test-only generators and oracles. Nothing here calls into the code path
// it is used to check.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "reasonforge/abdgen.h"
#include "reasonforge/logic.h"

namespace testsupport {

using reasonforge::logic::Assignment;
using reasonforge::logic::CnfFormula;
using reasonforge::logic::Formula;
using reasonforge::logic::Op;

inline std::vector<std::string> names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
  return out;
}

inline Formula random_formula(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  std::uniform_int_distribution<std::size_t> pick_var(0, vars.size() - 1);
  if (depth == 0 || rng() % 5 == 0) return Formula::var(vars[pick_var(rng)]);
  static constexpr Op kOps[] = {Op::Not, Op::And, Op::Or, Op::Xor, Op::Implies, Op::Iff};
  const Op op = kOps[rng() % 6];
  if (op == Op::Not) return Formula::negate(random_formula(rng, vars, depth - 1));
  return Formula::binary(op, random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1));
}

inline CnfFormula random_cnf(std::mt19937_64& rng, int num_vars, int num_clauses, int max_len) {
  const auto vars = names(num_vars);
  CnfFormula cnf;
  for (int c = 0; c < num_clauses; ++c) {
    const int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_len));
    reasonforge::logic::Clause clause;
    for (int k = 0; k < len; ++k) clause.push_back({vars[rng() % vars.size()], rng() % 2 == 0});
    cnf.clauses.push_back(clause);
  }
  return cnf;
}

/// Direct recursive truth evaluation, independent of logic::evaluate.
inline bool truth(const Formula& f, const Assignment& a) {
  switch (f.op()) {
    case Op::Var: return a.at(f.name());
    case Op::Not: return !truth(f.left(), a);
    case Op::And: return truth(f.left(), a) && truth(f.right(), a);
    case Op::Or: return truth(f.left(), a) || truth(f.right(), a);
    case Op::Xor: return truth(f.left(), a) != truth(f.right(), a);
    case Op::Implies: return !truth(f.left(), a) || truth(f.right(), a);
    case Op::Iff: return truth(f.left(), a) == truth(f.right(), a);
  }
  return false;
}

inline bool cnf_truth(const CnfFormula& cnf, const Assignment& a) {
  for (const auto& clause : cnf.clauses) {
    bool sat = false;
    for (const auto& lit : clause) sat = sat || a.at(lit.variable) == lit.positive;
    if (!sat) return false;
  }
  return true;
}

/// All assignments over `vars`, in binary counting order.
inline std::vector<Assignment> all_assignments(const std::vector<std::string>& vars) {
  std::vector<Assignment> out;
  const std::size_t n = vars.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Assignment a;
    for (std::size_t i = 0; i < n; ++i) a[vars[i]] = ((mask >> i) & 1U) != 0;
    out.push_back(a);
  }
  return out;
}

/// Naive fixpoint for abduction rules, written independently of
/// abdgen::forward_chain: repeat full passes until nothing new is derived.
inline std::set<std::string> naive_derive(const std::vector<reasonforge::abdgen::Rule>& rules,
                                          const Assignment& known) {
  std::set<std::string> facts;
  for (const auto& [k, v] : known)
    if (v) facts.insert(k);
  for (std::size_t pass = 0; pass <= rules.size() + 1; ++pass) {
    std::set<std::string> next = facts;
    for (const auto& r : rules) {
      for (const auto& lit : r.body) {
        const bool holds = lit.positive ? facts.count(lit.variable) > 0
                                        : known.count(lit.variable) > 0 && !known.at(lit.variable);
        if (holds) next.insert(r.head);
      }
    }
    if (next == facts) break;
    facts = std::move(next);
  }
  return facts;
}

/// Enumerates every assignment of ALL known atoms, keeps those deriving the
/// goal, and projects them onto `projection`. Returns the sorted distinct set.
inline std::vector<Assignment> abduction_oracle(const std::vector<reasonforge::abdgen::Rule>& rules,
                                                const std::vector<std::string>& known, const std::string& goal,
                                                const std::vector<std::string>& projection) {
  std::set<Assignment> out;
  for (const auto& a : all_assignments(known)) {
    if (!naive_derive(rules, a).count(goal)) continue;
    Assignment p;
    for (const auto& atom : projection) p[atom] = a.at(atom);
    out.insert(p);
  }
  return {out.begin(), out.end()};
}

}  // namespace testsupport
