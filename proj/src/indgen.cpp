#include "reasonforge/indgen.h"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "reasonforge/rng.h"

namespace reasonforge::indgen {

void validate(const OpCycle& cycle) {
  if (cycle.ops.empty()) throw ConfigError("cycle must contain at least one operation");
  for (const auto& op : cycle.ops) {
    if (op.kind == OpKind::Mul && op.operand < 2) throw ConfigError("Mul operand must be >= 2");
    if (op.kind != OpKind::Mul && op.operand < 1) throw ConfigError("Add/Sub operand must be >= 1");
  }
}

void validate(const IndGenConfig& cfg) {
  if (cfg.seq_len < 2) throw ConfigError("seq_len must be >= 2");
  if (cfg.cycle_len_min < 1 || cfg.cycle_len_max < cfg.cycle_len_min)
    throw ConfigError("cycle length range must be non-empty and >= 1");
  if (!cfg.allow_add && !cfg.allow_sub && !cfg.allow_mul) throw ConfigError("no operation kinds allowed");
  if ((cfg.allow_add || cfg.allow_sub) && cfg.add_sub_max < 1) throw ConfigError("add_sub_max must be >= 1");
  if (cfg.allow_mul && cfg.mul_max < 2) throw ConfigError("mul_max must be >= 2");
  if (cfg.start_max < cfg.start_min) throw ConfigError("start range must be non-empty");
  if (cfg.magnitude_cap < std::max(std::llabs(cfg.start_min), std::llabs(cfg.start_max)))
    throw ConfigError("magnitude_cap is below the start range");
  if (cfg.resample_budget < 1) throw ConfigError("resample_budget must be >= 1");
}

namespace {

std::int64_t step(const CycleOp& op, std::int64_t x) {
  std::int64_t out = 0;
  bool overflow = false;
  switch (op.kind) {
    case OpKind::Add: overflow = __builtin_add_overflow(x, op.operand, &out); break;
    case OpKind::Sub: overflow = __builtin_sub_overflow(x, op.operand, &out); break;
    case OpKind::Mul: overflow = __builtin_mul_overflow(x, op.operand, &out); break;
  }
  if (overflow) throw MagnitudeExceeded("integer overflow applying " + to_string(op));
  return out;
}

std::vector<CycleOp> all_ops(const IndGenConfig& b) {
  std::vector<CycleOp> out;
  if (b.allow_add)
    for (std::int64_t d = 1; d <= b.add_sub_max; ++d) out.push_back({OpKind::Add, d});
  if (b.allow_sub)
    for (std::int64_t d = 1; d <= b.add_sub_max; ++d) out.push_back({OpKind::Sub, d});
  if (b.allow_mul)
    for (std::int64_t m = 2; m <= b.mul_max; ++m) out.push_back({OpKind::Mul, m});
  return out;
}

// In-bound operations mapping `from` to `to`, ascending.
std::vector<CycleOp> explaining_ops(std::int64_t from, std::int64_t to, const IndGenConfig& b) {
  std::vector<CycleOp> out;
  // Differences are computed in 128 bits so extreme inputs cannot wrap.
  const __int128 diff = static_cast<__int128>(to) - from;
  if (b.allow_add && diff >= 1 && diff <= b.add_sub_max) out.push_back({OpKind::Add, static_cast<std::int64_t>(diff)});
  if (b.allow_sub && -diff >= 1 && -diff <= b.add_sub_max)
    out.push_back({OpKind::Sub, static_cast<std::int64_t>(-diff)});
  if (b.allow_mul) {
    if (from == 0) {
      if (to == 0)
        for (std::int64_t m = 2; m <= b.mul_max; ++m) out.push_back({OpKind::Mul, m});
    } else if (to % from == 0) {
      const std::int64_t q = to / from;
      if (q >= 2 && q <= b.mul_max) out.push_back({OpKind::Mul, q});
    }
  }
  return out;
}

std::vector<CycleOp> intersect(const std::vector<CycleOp>& a, const std::vector<CycleOp>& b) {
  std::vector<CycleOp> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<std::int64_t> apply_cycle(const OpCycle& cycle, std::int64_t start, int n, std::int64_t magnitude_cap) {
  validate(cycle);
  if (n < 1) throw std::invalid_argument("apply_cycle: n must be >= 1");
  auto check = [&](std::int64_t x) {
    if (x > magnitude_cap || x < -magnitude_cap)
      throw MagnitudeExceeded("term " + std::to_string(x) + " exceeds magnitude cap " + std::to_string(magnitude_cap));
  };
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  check(start);
  out.push_back(start);
  for (int k = 1; k < n; ++k) {
    out.push_back(step(cycle.ops[static_cast<std::size_t>(k - 1) % cycle.ops.size()], out.back()));
    check(out.back());
  }
  return out;
}

std::vector<OpCycle> induce_cycles(const std::vector<std::int64_t>& sequence, const IndGenConfig& bounds) {
  if (sequence.size() < 2) throw std::invalid_argument("induce_cycles: need at least two terms");
  const auto universe = all_ops(bounds);
  const std::size_t transitions = sequence.size() - 1;

  std::vector<OpCycle> out;
  for (int len = bounds.cycle_len_min; len <= bounds.cycle_len_max; ++len) {
    const auto L = static_cast<std::size_t>(len);
    std::vector<std::vector<CycleOp>> choices(L, universe);
    bool feasible = true;
    for (std::size_t k = 0; k < transitions && feasible; ++k) {
      auto& slot = choices[k % L];
      slot = intersect(slot, explaining_ops(sequence[k], sequence[k + 1], bounds));
      feasible = !slot.empty();
    }
    if (!feasible) continue;

    // Odometer over the per-position choices; the last position varies fastest,
    // which yields lexicographic order.
    std::vector<std::size_t> pick(L, 0);
    for (;;) {
      OpCycle c;
      for (std::size_t j = 0; j < L; ++j) c.ops.push_back(choices[j][pick[j]]);
      out.push_back(std::move(c));
      std::size_t j = L;
      while (j > 0 && ++pick[j - 1] == choices[j - 1].size()) {
        pick[j - 1] = 0;
        --j;
      }
      if (j == 0) break;
    }
  }
  return out;
}

std::vector<std::int64_t> predictions(const std::vector<OpCycle>& cycles, const std::vector<std::int64_t>& sequence) {
  std::set<std::int64_t> out;
  const int n = static_cast<int>(sequence.size()) + 1;
  for (const auto& c : cycles) out.insert(apply_cycle(c, sequence.front(), n).back());
  return {out.begin(), out.end()};
}

InductionInstance gen_induction(const IndGenConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed);
  std::vector<OpKind> kinds;
  if (cfg.allow_add) kinds.push_back(OpKind::Add);
  if (cfg.allow_sub) kinds.push_back(OpKind::Sub);
  if (cfg.allow_mul) kinds.push_back(OpKind::Mul);

  for (int attempt = 0; attempt < cfg.resample_budget; ++attempt) {
    OpCycle cycle;
    const auto len = rng.uniform(cfg.cycle_len_min, cfg.cycle_len_max);
    for (std::int64_t j = 0; j < len; ++j) {
      const OpKind kind = rng.pick(kinds);
      const std::int64_t operand = kind == OpKind::Mul ? rng.uniform(2, cfg.mul_max) : rng.uniform(1, cfg.add_sub_max);
      cycle.ops.push_back({kind, operand});
    }
    const std::int64_t start = rng.uniform(cfg.start_min, cfg.start_max);

    std::vector<std::int64_t> terms;
    try {
      terms = apply_cycle(cycle, start, cfg.seq_len + 1, cfg.magnitude_cap);
    } catch (const MagnitudeExceeded&) {
      continue;
    }
    if (cfg.non_negative && std::any_of(terms.begin(), terms.end(), [](std::int64_t x) { return x < 0; })) continue;

    const std::int64_t gold = terms.back();
    terms.pop_back();
    const auto preds = predictions(induce_cycles(terms, cfg), terms);
    if (preds.size() != 1 || preds.front() != gold) continue;

    InductionInstance inst;
    inst.id = "ind-" + std::to_string(seed);
    inst.sequence = std::move(terms);
    inst.gold = gold;
    inst.cycle = std::move(cycle);
    inst.start = start;
    inst.seed = seed;
    return inst;
  }
  throw BudgetExhausted("no uniquely predictable sequence within " + std::to_string(cfg.resample_budget) +
                        " attempts");
}

std::string to_string(const CycleOp& op) {
  const char* sym = op.kind == OpKind::Add ? "+" : op.kind == OpKind::Sub ? "-" : "*";
  return sym + std::to_string(op.operand);
}

std::string to_string(const OpCycle& cycle) {
  std::string out = "[";
  for (std::size_t i = 0; i < cycle.ops.size(); ++i) {
    if (i) out += ",";
    out += to_string(cycle.ops[i]);
  }
  return out + "]";
}

nlohmann::json bounds_json(const IndGenConfig& cfg) {
  return {{"cycle_len_min", cfg.cycle_len_min}, {"cycle_len_max", cfg.cycle_len_max},
          {"allow_add", cfg.allow_add},         {"allow_sub", cfg.allow_sub},
          {"allow_mul", cfg.allow_mul},         {"add_sub_max", cfg.add_sub_max},
          {"mul_max", cfg.mul_max}};
}

nlohmann::json config_json(const IndGenConfig& cfg) {
  nlohmann::json j = bounds_json(cfg);
  j["seq_len"] = cfg.seq_len;
  j["start_min"] = cfg.start_min;
  j["start_max"] = cfg.start_max;
  j["magnitude_cap"] = cfg.magnitude_cap;
  j["non_negative"] = cfg.non_negative;
  j["resample_budget"] = cfg.resample_budget;
  return j;
}

}  // namespace reasonforge::indgen
