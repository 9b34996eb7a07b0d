#include "reasonforge/logic.h"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

namespace reasonforge::logic {

struct Formula::Node {
  Op op;
  std::string name;
  std::optional<Formula> left;
  std::optional<Formula> right;
};

Formula Formula::var(std::string name) {
  if (name.empty()) throw std::invalid_argument("variable name must be non-empty");
  return Formula(std::make_shared<const Node>(Node{Op::Var, std::move(name), std::nullopt, std::nullopt}));
}

Formula Formula::negate(Formula child) {
  return Formula(std::make_shared<const Node>(Node{Op::Not, {}, std::move(child), std::nullopt}));
}

Formula Formula::binary(Op op, Formula left, Formula right) {
  if (op == Op::Var || op == Op::Not) throw std::invalid_argument("Formula::binary: not a binary operator");
  return Formula(std::make_shared<const Node>(Node{op, {}, std::move(left), std::move(right)}));
}

Op Formula::op() const { return node_->op; }

const std::string& Formula::name() const {
  if (node_->op != Op::Var) throw std::logic_error("Formula::name on non-variable");
  return node_->name;
}

const Formula& Formula::left() const {
  if (!node_->left) throw std::logic_error("Formula::left on variable");
  return *node_->left;
}

const Formula& Formula::right() const {
  if (!node_->right) throw std::logic_error("Formula::right on unary node");
  return *node_->right;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Var:
      return a.name() == b.name();
    case Op::Not:
      return a.left() == b.left();
    default:
      return a.left() == b.left() && a.right() == b.right();
  }
}

Formula conjunction(const std::vector<Formula>& parts) {
  if (parts.empty()) throw std::invalid_argument("conjunction of empty list");
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::conj(acc, parts[i]);
  return acc;
}

std::set<std::string> CnfFormula::variables() const {
  std::set<std::string> out;
  for (const auto& clause : clauses)
    for (const auto& lit : clause) out.insert(lit.variable);
  return out;
}

ParseError::ParseError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at byte " + std::to_string(offset)), offset_(offset) {}

UnboundVariable::UnboundVariable(const std::string& name)
    : std::runtime_error("unbound variable '" + name + "'"), name_(name) {}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Not, And, Or, Xor, Implies, Iff, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

constexpr std::string_view kNot = "\xC2\xAC";          // ¬
constexpr std::string_view kAnd = "\xE2\x88\xA7";      // ∧
constexpr std::string_view kOr = "\xE2\x88\xA8";       // ∨
constexpr std::string_view kXor = "\xE2\x8A\x95";      // ⊕
constexpr std::string_view kImplies = "\xE2\x86\x92";  // →
constexpr std::string_view kIff = "\xE2\x86\x94";      // ↔

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(std::string_view text, Dialect dialect) {
  struct Spelling {
    std::string_view text;
    Tok kind;
  };
  // Longest spellings first so "<->" wins over "->".
  static const Spelling kSymbolic[] = {
      {kNot, Tok::Not}, {kAnd, Tok::And}, {kOr, Tok::Or},   {kXor, Tok::Xor}, {kImplies, Tok::Implies},
      {kIff, Tok::Iff}, {"<->", Tok::Iff}, {"->", Tok::Implies}, {"~", Tok::Not}, {"!", Tok::Not},
      {"&", Tok::And},  {"|", Tok::Or},   {"^", Tok::Xor},
  };

  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(' || c == ')') {
      out.push_back({c == '(' ? Tok::LParen : Tok::RParen, std::string(1, c), i});
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      std::string word(text.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (dialect == Dialect::Worded) {
        if (word == "NOT") kind = Tok::Not;
        else if (word == "AND") kind = Tok::And;
        else if (word == "OR") kind = Tok::Or;
      }
      out.push_back({kind, std::move(word), i});
      i = j;
      continue;
    }
    const Spelling* match = nullptr;
    for (const auto& s : kSymbolic) {
      if (text.substr(i).starts_with(s.text)) {
        match = &s;
        break;
      }
    }
    if (match != nullptr) {
      if (dialect == Dialect::Worded) {
        throw DialectError("operator '" + std::string(match->text) + "' is not part of the worded dialect (byte " +
                           std::to_string(i) + ")");
      }
      out.push_back({match->kind, std::string(match->text), i});
      i += match->text.size();
      continue;
    }
    throw ParseError("unexpected character", i);
  }
  out.push_back({Tok::End, "", text.size()});
  return out;
}

// Precedence climbing. Levels: 0 ↔, 1 →, 2 ⊕, 3 ∨, 4 ∧; unary ¬ binds tightest.
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Formula parse() {
    Formula f = parse_level(0);
    if (peek().kind != Tok::End) throw ParseError("unexpected '" + peek().text + "'", peek().offset);
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  static int level_of(Tok t) {
    switch (t) {
      case Tok::Iff: return 0;
      case Tok::Implies: return 1;
      case Tok::Xor: return 2;
      case Tok::Or: return 3;
      case Tok::And: return 4;
      default: return -1;
    }
  }

  static Op op_of(Tok t) {
    switch (t) {
      case Tok::Iff: return Op::Iff;
      case Tok::Implies: return Op::Implies;
      case Tok::Xor: return Op::Xor;
      case Tok::Or: return Op::Or;
      default: return Op::And;
    }
  }

  Formula parse_level(int level) {
    if (level > 4) return parse_unary();
    Formula lhs = parse_level(level + 1);
    while (level_of(peek().kind) == level) {
      const Tok t = advance().kind;
      if (t == Tok::Implies) {
        // Right-associative.
        Formula rhs = parse_level(level);
        return Formula::binary(Op::Implies, lhs, rhs);
      }
      Formula rhs = parse_level(level + 1);
      lhs = Formula::binary(op_of(t), lhs, rhs);
    }
    return lhs;
  }

  Formula parse_unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Not:
        advance();
        return Formula::negate(parse_unary());
      case Tok::LParen: {
        advance();
        Formula inner = parse_level(0);
        if (peek().kind != Tok::RParen) throw ParseError("expected ')'", peek().offset);
        advance();
        return inner;
      }
      case Tok::Ident:
        advance();
        return Formula::var(t.text);
      case Tok::End:
        throw ParseError("unexpected end of input", t.offset);
      default:
        throw ParseError("unexpected '" + t.text + "'", t.offset);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text, Dialect dialect) {
  return Parser(tokenize(text, dialect)).parse();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string_view symbolic_spelling(Op op) {
  switch (op) {
    case Op::And: return kAnd;
    case Op::Or: return kOr;
    case Op::Xor: return kXor;
    case Op::Implies: return kImplies;
    case Op::Iff: return kIff;
    default: return {};
  }
}

void render_symbolic(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::Var:
      out += f.name();
      return;
    case Op::Not:
      out += kNot;
      if (f.left().op() == Op::Not) {
        out += '(';
        render_symbolic(f.left(), out);
        out += ')';
      } else {
        render_symbolic(f.left(), out);
      }
      return;
    default:
      out += '(';
      render_symbolic(f.left(), out);
      out += ' ';
      out += symbolic_spelling(f.op());
      out += ' ';
      render_symbolic(f.right(), out);
      out += ')';
  }
}

void render_worded(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::Var:
      out += f.name();
      return;
    case Op::Not:
      out += "(NOT ";
      render_worded(f.left(), out);
      out += ')';
      return;
    case Op::And:
    case Op::Or:
      out += '(';
      render_worded(f.left(), out);
      out += f.op() == Op::And ? " AND " : " OR ";
      render_worded(f.right(), out);
      out += ')';
      return;
    default:
      throw DialectError("operator " + std::string(symbolic_spelling(f.op())) + " has no worded spelling");
  }
}

}  // namespace

std::string render_formula(const Formula& f, Dialect dialect) {
  std::string out;
  if (dialect == Dialect::Worded) {
    render_worded(f, out);
    return out;
  }
  // A top-level negation always parenthesizes its operand: "¬(F)", "¬((A ∧ B))".
  if (f.op() == Op::Not) {
    out += kNot;
    out += '(';
    render_symbolic(f.left(), out);
    out += ')';
    return out;
  }
  render_symbolic(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

bool evaluate(const Formula& f, const Assignment& a) {
  switch (f.op()) {
    case Op::Var: {
      auto it = a.find(f.name());
      if (it == a.end()) throw UnboundVariable(f.name());
      return it->second;
    }
    case Op::Not:
      return !evaluate(f.left(), a);
    default:
      break;
  }
  // Both sides are always evaluated so a partial assignment never slips
  // through a short circuit.
  const bool l = evaluate(f.left(), a);
  const bool r = evaluate(f.right(), a);
  switch (f.op()) {
    case Op::And: return l && r;
    case Op::Or: return l || r;
    case Op::Xor: return l != r;
    case Op::Implies: return !l || r;
    case Op::Iff: return l == r;
    default: return false;
  }
}

bool evaluate(const Clause& clause, const Assignment& a) {
  bool sat = false;
  for (const auto& lit : clause) {
    auto it = a.find(lit.variable);
    if (it == a.end()) throw UnboundVariable(lit.variable);
    if (it->second == lit.positive) sat = true;
  }
  return sat;
}

bool evaluate(const CnfFormula& cnf, const Assignment& a) {
  bool sat = true;
  // Every clause is checked so that partial assignments always raise.
  for (const auto& clause : cnf.clauses) sat = evaluate(clause, a) && sat;
  return sat;
}

namespace {
void collect_vars(const Formula& f, std::set<std::string>& out) {
  switch (f.op()) {
    case Op::Var:
      out.insert(f.name());
      return;
    case Op::Not:
      collect_vars(f.left(), out);
      return;
    default:
      collect_vars(f.left(), out);
      collect_vars(f.right(), out);
  }
}
}  // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  collect_vars(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// CNF

namespace {

using Clauses = std::vector<Clause>;

class CnfBuilder {
 public:
  explicit CnfBuilder(std::size_t cap) : cap_(cap) {}

  // Clauses equivalent to f (positive) or to ¬f (negative). An empty list is
  // the constant true; tautological and subsumed clauses are dropped as we go.
  Clauses build(const Formula& f, bool positive) {
    switch (f.op()) {
      case Op::Var:
        return {{Literal{f.name(), positive}}};
      case Op::Not:
        return build(f.left(), !positive);
      case Op::And:
        return positive ? concat(build(f.left(), true), build(f.right(), true))
                        : product(build(f.left(), false), build(f.right(), false));
      case Op::Or:
        return positive ? product(build(f.left(), true), build(f.right(), true))
                        : concat(build(f.left(), false), build(f.right(), false));
      case Op::Implies:
        return positive ? product(build(f.left(), false), build(f.right(), true))
                        : concat(build(f.left(), true), build(f.right(), false));
      case Op::Xor:
      case Op::Iff: {
        // a ⊕ b ≡ (a ∨ b) ∧ (¬a ∨ ¬b);  a ↔ b ≡ (¬a ∨ b) ∧ (a ∨ ¬b).
        const bool as_xor = (f.op() == Op::Xor) == positive;
        const Clauses lp = build(f.left(), true), ln = build(f.left(), false);
        const Clauses rp = build(f.right(), true), rn = build(f.right(), false);
        if (as_xor) return concat(product(lp, rp), product(ln, rn));
        return concat(product(ln, rp), product(lp, rn));
      }
    }
    return {};
  }

  // Re-adds (v ∨ ¬v) for variables that only occurred in dropped clauses so
  // the result mentions every variable of the input.
  Clauses finish(Clauses clauses, const std::set<std::string>& vars) const {
    std::set<std::string> present;
    for (const auto& c : clauses)
      for (const auto& lit : c) present.insert(lit.variable);
    for (const auto& v : vars)
      if (!present.contains(v)) clauses.push_back({Literal{v, false}, Literal{v, true}});
    check(clauses.size());
    return clauses;
  }

 private:
  Clauses concat(Clauses a, Clauses b) const {
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return simplify(std::move(a));
  }

  Clauses product(const Clauses& a, const Clauses& b) const {
    Clauses out;
    for (const auto& ca : a) {
      for (const auto& cb : b) {
        Clause merged = ca;
        merged.insert(merged.end(), cb.begin(), cb.end());
        normalize(merged);
        if (!tautology(merged)) out.push_back(std::move(merged));
      }
      // Bound intermediate growth before subsumption gets a chance to shrink it.
      if (out.size() > 4 * cap_ + 64) out = simplify(std::move(out), false);
    }
    return simplify(std::move(out));
  }

  static bool tautology(const Clause& c) {
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i].variable == c[i - 1].variable) return true;  // sorted: x- then x+
    return false;
  }

  static void normalize(Clause& c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  // Removes duplicates and clauses that contain another clause, keeping the
  // survivors in their original order.
  Clauses simplify(Clauses in, bool enforce_cap = true) const {
    std::vector<std::size_t> by_size(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) by_size[i] = i;
    std::stable_sort(by_size.begin(), by_size.end(),
                     [&](std::size_t x, std::size_t y) { return in[x].size() < in[y].size(); });
    std::vector<std::size_t> kept;
    std::vector<bool> keep(in.size(), false);
    for (const std::size_t i : by_size) {
      const Clause& c = in[i];
      const bool subsumed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
        return std::includes(c.begin(), c.end(), in[k].begin(), in[k].end());
      });
      if (!subsumed) {
        kept.push_back(i);
        keep[i] = true;
      }
    }
    Clauses out;
    out.reserve(kept.size());
    for (std::size_t i = 0; i < in.size(); ++i)
      if (keep[i]) out.push_back(std::move(in[i]));
    if (enforce_cap) check(out.size());
    return out;
  }

  void check(std::size_t n) const {
    if (n > cap_) throw CnfTooLarge("CNF exceeds clause cap of " + std::to_string(cap_));
  }

  std::size_t cap_;
};

}  // namespace

CnfFormula to_cnf(const Formula& f, std::size_t clause_cap) {
  CnfBuilder builder(clause_cap);
  return CnfFormula{builder.finish(builder.build(f, true), free_vars(f))};
}

std::string to_string(const CnfFormula& cnf) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
    if (i) os << ',';
    os << '[';
    for (std::size_t j = 0; j < cnf.clauses[i].size(); ++j) {
      if (j) os << ',';
      os << cnf.clauses[i][j].variable << (cnf.clauses[i][j].positive ? '+' : '-');
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace reasonforge::logic
