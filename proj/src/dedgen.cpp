#include "reasonforge/dedgen.h"

#include <algorithm>
#include <numeric>

#include "reasonforge/rng.h"

namespace reasonforge::dedgen {

using logic::Literal;
using logic::Op;

void validate(const DedGenConfig& cfg) {
  if (cfg.num_vars < 1) throw ConfigError("num_vars must be >= 1");
  if (cfg.num_conjuncts.min < 1 || cfg.num_conjuncts.max < cfg.num_conjuncts.min)
    throw ConfigError("num_conjuncts range must be non-empty and >= 1");
  if (cfg.mode == DedMode::PlantedCnf && (cfg.clause_len.min < 1 || cfg.clause_len.max < cfg.clause_len.min))
    throw ConfigError("clause_len range must be non-empty and >= 1");
  if (cfg.mode == DedMode::NestedFormula && cfg.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (cfg.resample_budget < 1) throw ConfigError("resample_budget must be >= 1");
}

std::vector<std::string> variable_names(int count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    out.push_back(count <= 26 ? std::string(1, static_cast<char>('A' + i)) : "V" + std::to_string(i + 1));
  }
  return out;
}

namespace {

Formula literal_formula(const std::string& name, bool positive) {
  Formula v = Formula::var(name);
  return positive ? v : Formula::negate(v);
}

Formula planted_clause(Rng& rng, const DedGenConfig& cfg, const std::vector<std::string>& names,
                       const std::vector<bool>& planted) {
  const int max_len = std::min(cfg.clause_len.max, cfg.num_vars);
  const int min_len = std::min(cfg.clause_len.min, max_len);
  const auto len = static_cast<std::size_t>(rng.uniform(min_len, max_len));

  std::vector<std::size_t> idx(names.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < len; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);

  std::vector<bool> polarity(len);
  bool satisfied = false;
  for (std::size_t i = 0; i < len; ++i) {
    polarity[i] = rng.chance(0.5);
    satisfied = satisfied || polarity[i] == planted[idx[i]];
  }
  if (!satisfied) {
    const std::size_t k = rng.index(len);
    polarity[k] = planted[idx[k]];
  }

  Formula clause = literal_formula(names[idx[0]], polarity[0]);
  for (std::size_t i = 1; i < len; ++i) clause = Formula::disj(clause, literal_formula(names[idx[i]], polarity[i]));
  return clause;
}

Formula nested_formula(Rng& rng, const std::vector<std::string>& names, int depth) {
  if (depth == 0) return literal_formula(rng.pick(names), !rng.chance(0.3));
  static constexpr Op kOps[] = {Op::Not, Op::And, Op::Or, Op::Xor, Op::Implies, Op::Iff};
  const Op op = kOps[rng.index(std::size(kOps))];
  if (op == Op::Not) return Formula::negate(nested_formula(rng, names, depth - 1));
  Formula l = nested_formula(rng, names, static_cast<int>(rng.uniform(0, depth - 1)));
  Formula r = nested_formula(rng, names, static_cast<int>(rng.uniform(0, depth - 1)));
  return Formula::binary(op, l, r);
}

DeductionInstance finish(std::vector<Formula> conjuncts, CnfFormula cnf, Assignment model, const DedGenConfig& cfg,
                         std::uint64_t seed) {
  DeductionInstance inst;
  inst.id = "ded-" + std::to_string(seed);
  inst.seed = seed;
  inst.mode = cfg.mode;
  const auto vars = free_vars(logic::conjunction(conjuncts));
  inst.variables.assign(vars.begin(), vars.end());
  for (const auto& v : inst.variables) inst.gold[v] = model.contains(v) ? model.at(v) : false;
  inst.conjuncts = std::move(conjuncts);
  inst.cnf = std::move(cnf);
  return inst;
}

}  // namespace

DeductionInstance gen_deduction(const DedGenConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed);
  const auto names = variable_names(cfg.num_vars);

  if (cfg.mode == DedMode::PlantedCnf) {
    std::vector<bool> planted(names.size());
    for (std::size_t i = 0; i < planted.size(); ++i) planted[i] = rng.chance(0.5);
    const auto count = rng.uniform(cfg.num_conjuncts.min, cfg.num_conjuncts.max);
    std::vector<Formula> conjuncts;
    for (std::int64_t i = 0; i < count; ++i) conjuncts.push_back(planted_clause(rng, cfg, names, planted));
    CnfFormula cnf = logic::to_cnf(logic::conjunction(conjuncts), cfg.cnf_clause_cap);
    auto model = solve_dpll(cnf);
    if (!model) throw std::logic_error("planted instance reported unsatisfiable");
    return finish(std::move(conjuncts), std::move(cnf), std::move(*model), cfg, seed);
  }

  for (int attempt = 0; attempt < cfg.resample_budget; ++attempt) {
    const auto count = rng.uniform(cfg.num_conjuncts.min, cfg.num_conjuncts.max);
    std::vector<Formula> conjuncts;
    for (std::int64_t i = 0; i < count; ++i)
      conjuncts.push_back(nested_formula(rng, names, static_cast<int>(rng.uniform(1, cfg.max_depth))));
    CnfFormula cnf;
    try {
      cnf = logic::to_cnf(logic::conjunction(conjuncts), cfg.cnf_clause_cap);
    } catch (const logic::CnfTooLarge&) {
      continue;
    }
    if (auto model = solve_dpll(cnf)) {
      return finish(std::move(conjuncts), std::move(cnf), std::move(*model), cfg, seed);
    }
  }
  throw BudgetExhausted("no satisfiable nested formula within " + std::to_string(cfg.resample_budget) +
                        " attempts");
}

// ---------------------------------------------------------------------------
// DPLL

namespace {

class Dpll {
 public:
  explicit Dpll(const CnfFormula& cnf) {
    const auto vars = cnf.variables();
    names_.assign(vars.begin(), vars.end());
    for (const auto& clause : cnf.clauses) {
      std::vector<int> c;
      for (const auto& lit : clause) {
        const auto pos = std::lower_bound(names_.begin(), names_.end(), lit.variable) - names_.begin();
        const int v = static_cast<int>(pos) + 1;
        c.push_back(lit.positive ? v : -v);
      }
      clauses_.push_back(std::move(c));
    }
  }

  std::optional<Assignment> run() const {
    std::vector<signed char> values(names_.size(), kUnset);
    if (!search(values)) return std::nullopt;
    Assignment out;
    for (std::size_t i = 0; i < names_.size(); ++i) out[names_[i]] = values[i] == 1;
    return out;
  }

 private:
  static constexpr signed char kUnset = -1;

  static bool lit_true(const std::vector<signed char>& values, int lit) {
    const auto v = values[static_cast<std::size_t>(std::abs(lit) - 1)];
    return v != kUnset && (v == 1) == (lit > 0);
  }
  static bool lit_unset(const std::vector<signed char>& values, int lit) {
    return values[static_cast<std::size_t>(std::abs(lit) - 1)] == kUnset;
  }
  static void set(std::vector<signed char>& values, int lit) {
    values[static_cast<std::size_t>(std::abs(lit) - 1)] = lit > 0 ? 1 : 0;
  }

  enum class Step { Conflict, Progress, Stable };

  Step propagate_units(std::vector<signed char>& values) const {
    bool progress = false;
    for (const auto& clause : clauses_) {
      int unset = 0;
      int last = 0;
      bool sat = false;
      for (int lit : clause) {
        if (lit_true(values, lit)) {
          sat = true;
          break;
        }
        if (lit_unset(values, lit)) {
          ++unset;
          last = lit;
        }
      }
      if (sat) continue;
      if (unset == 0) return Step::Conflict;
      if (unset == 1) {
        set(values, last);
        progress = true;
      }
    }
    return progress ? Step::Progress : Step::Stable;
  }

  bool assign_pure(std::vector<signed char>& values) const {
    // bit 0: seen positive, bit 1: seen negative
    std::vector<unsigned char> seen(names_.size(), 0);
    for (const auto& clause : clauses_) {
      if (satisfied(values, clause)) continue;
      for (int lit : clause) {
        if (lit_unset(values, lit)) seen[static_cast<std::size_t>(std::abs(lit) - 1)] |= lit > 0 ? 1 : 2;
      }
    }
    bool progress = false;
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] == 1 || seen[i] == 2) {
        values[i] = seen[i] == 1 ? 1 : 0;
        progress = true;
      }
    }
    return progress;
  }

  static bool satisfied(const std::vector<signed char>& values, const std::vector<int>& clause) {
    return std::any_of(clause.begin(), clause.end(), [&](int lit) { return lit_true(values, lit); });
  }

  bool search(std::vector<signed char>& values) const {
    for (;;) {
      const Step s = propagate_units(values);
      if (s == Step::Conflict) return false;
      if (s == Step::Progress) continue;
      if (!assign_pure(values)) break;
    }
    int branch = 0;
    for (const auto& clause : clauses_) {
      if (satisfied(values, clause)) continue;
      for (int lit : clause) {
        if (lit_unset(values, lit) && (branch == 0 || std::abs(lit) < branch)) branch = std::abs(lit);
      }
    }
    if (branch == 0) {
      for (auto& v : values)
        if (v == kUnset) v = 0;
      return true;
    }
    for (int lit : {-branch, branch}) {
      auto trial = values;
      set(trial, lit);
      if (search(trial)) {
        values = std::move(trial);
        return true;
      }
    }
    return false;
  }

  std::vector<std::string> names_;
  std::vector<std::vector<int>> clauses_;
};

template <typename Eval>
std::optional<Assignment> enumerate(const std::set<std::string>& vars, Eval&& eval) {
  if (vars.size() > kBruteForceVarLimit)
    throw std::invalid_argument("brute_force_sat: " + std::to_string(vars.size()) +
                                " variables exceeds the limit of " + std::to_string(kBruteForceVarLimit));
  const std::vector<std::string> order(vars.begin(), vars.end());
  const std::size_t n = order.size();
  Assignment a;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) a[order[i]] = ((mask >> (n - 1 - i)) & 1U) != 0;
    if (eval(a)) return a;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Assignment> solve_dpll(const CnfFormula& cnf) { return Dpll(cnf).run(); }

std::optional<Assignment> brute_force_sat(const Formula& f) {
  return enumerate(free_vars(f), [&](const Assignment& a) { return logic::evaluate(f, a); });
}

std::optional<Assignment> brute_force_sat(const CnfFormula& cnf) {
  return enumerate(cnf.variables(), [&](const Assignment& a) { return logic::evaluate(cnf, a); });
}

nlohmann::json gold_json(const Assignment& a) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : a) out[name] = value ? "True" : "False";
  return out;
}

std::string mode_name(DedMode mode) { return mode == DedMode::PlantedCnf ? "planted" : "nested"; }

DedMode parse_mode(const std::string& name) {
  if (name == "planted" || name == "planted_cnf") return DedMode::PlantedCnf;
  if (name == "nested" || name == "nested_formula") return DedMode::NestedFormula;
  throw ConfigError("unknown deduction mode '" + name + "'");
}

nlohmann::json config_json(const DedGenConfig& cfg) {
  return {{"num_vars", cfg.num_vars},
          {"conjuncts_min", cfg.num_conjuncts.min},
          {"conjuncts_max", cfg.num_conjuncts.max},
          {"max_depth", cfg.max_depth},
          {"clause_len_min", cfg.clause_len.min},
          {"clause_len_max", cfg.clause_len.max},
          {"mode", mode_name(cfg.mode)},
          {"resample_budget", cfg.resample_budget},
          {"cnf_clause_cap", cfg.cnf_clause_cap}};
}

}  // namespace reasonforge::dedgen
