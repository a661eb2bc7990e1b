// Terms, formulas and syntactic transformations for the exists*forall*
// fragment of separation logic over an uninterpreted location sort.
#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slbsr {

/// Raised when a precondition of a library operation is violated.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a sentence falls outside the exists*forall* prefix class.
class FragmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TermKind { Var, Const, Nil };

/// A location-sorted term. Data tuples are plain vectors of terms.
struct Term {
  TermKind kind = TermKind::Nil;
  std::string name = "nil";

  static Term var(std::string n) { return {TermKind::Var, std::move(n)}; }
  static Term cnst(std::string n) { return {TermKind::Const, std::move(n)}; }
  static Term nil() { return {}; }

  bool is_var() const { return kind == TermKind::Var; }
  auto operator<=>(const Term&) const = default;
};

/// Names starting with '@' are reserved for generated symbols; printed
/// without the marker.
inline std::string display_name(const std::string& n) {
  return !n.empty() && n[0] == '@' ? n.substr(1) : n;
}

inline std::string to_string(const Term& t) {
  return t.kind == TermKind::Nil ? "nil" : display_name(t.name);
}

enum class Op {
  True,
  False,
  Eq,
  Emp,
  PointsTo,
  Sep,
  Wand,
  And,
  Or,
  Not,
  Implies,
  Exists,
  Forall
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node. `terms` holds the two sides of Eq, or the
/// location followed by the k data components of PointsTo.
struct Formula {
  Op op = Op::True;
  std::vector<Term> terms;
  FormulaPtr lhs, rhs;
  std::string var;
};

// ---- builders -------------------------------------------------------------

namespace fb {

inline FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

inline FormulaPtr tt() { return make({Op::True, {}, nullptr, nullptr, {}}); }
inline FormulaPtr ff() { return make({Op::False, {}, nullptr, nullptr, {}}); }
inline FormulaPtr emp() { return make({Op::Emp, {}, nullptr, nullptr, {}}); }
inline FormulaPtr eq(Term a, Term b) {
  return make({Op::Eq, {std::move(a), std::move(b)}, nullptr, nullptr, {}});
}
inline FormulaPtr pto(Term loc, std::vector<Term> data) {
  if (data.empty()) throw ContractViolation("points-to needs at least one data component");
  std::vector<Term> ts;
  ts.reserve(data.size() + 1);
  ts.push_back(std::move(loc));
  for (auto& d : data) ts.push_back(std::move(d));
  return make({Op::PointsTo, std::move(ts), nullptr, nullptr, {}});
}
inline FormulaPtr binary(Op op, FormulaPtr a, FormulaPtr b) {
  return make({op, {}, std::move(a), std::move(b), {}});
}
inline FormulaPtr sep(FormulaPtr a, FormulaPtr b) { return binary(Op::Sep, std::move(a), std::move(b)); }
inline FormulaPtr wand(FormulaPtr a, FormulaPtr b) { return binary(Op::Wand, std::move(a), std::move(b)); }
inline FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return binary(Op::And, std::move(a), std::move(b)); }
inline FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return binary(Op::Or, std::move(a), std::move(b)); }
inline FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
  return binary(Op::Implies, std::move(a), std::move(b));
}
inline FormulaPtr neg(FormulaPtr a) { return make({Op::Not, {}, std::move(a), nullptr, {}}); }
inline FormulaPtr neq(Term a, Term b) { return neg(eq(std::move(a), std::move(b))); }
inline FormulaPtr exists(std::string v, FormulaPtr body) {
  return make({Op::Exists, {}, std::move(body), nullptr, std::move(v)});
}
inline FormulaPtr forall(std::string v, FormulaPtr body) {
  return make({Op::Forall, {}, std::move(body), nullptr, std::move(v)});
}

/// Right fold of a binary connective; `unit` is returned for an empty list.
inline FormulaPtr fold(Op op, const std::vector<FormulaPtr>& fs, FormulaPtr unit) {
  if (fs.empty()) return unit;
  FormulaPtr acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) acc = binary(op, *it, acc);
  return acc;
}
inline FormulaPtr conj_all(const std::vector<FormulaPtr>& fs) { return fold(Op::And, fs, tt()); }
inline FormulaPtr disj_all(const std::vector<FormulaPtr>& fs) { return fold(Op::Or, fs, ff()); }
inline FormulaPtr sep_all(const std::vector<FormulaPtr>& fs) { return fold(Op::Sep, fs, emp()); }

/// alloc(x) == x |-> (x,...,x) -* false; holds iff x is in the heap domain.
inline FormulaPtr alloc(const Term& x, int arity) {
  return wand(pto(x, std::vector<Term>(static_cast<std::size_t>(arity), x)), ff());
}

}  // namespace fb

// ---- inspection -----------------------------------------------------------

inline bool is_binary(Op op) {
  return op == Op::Sep || op == Op::Wand || op == Op::And || op == Op::Or || op == Op::Implies;
}
inline bool is_quantifier(Op op) { return op == Op::Exists || op == Op::Forall; }

inline bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->terms != b->terms || a->var != b->var) return false;
  return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

inline bool has_quantifier(const FormulaPtr& f) {
  if (!f) return false;
  if (is_quantifier(f->op)) return true;
  return has_quantifier(f->lhs) || has_quantifier(f->rhs);
}

inline bool is_pure(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Eq:
      return true;
    case Op::Emp:
    case Op::PointsTo:
    case Op::Sep:
    case Op::Wand:
      return false;
    default:
      return is_pure(f->lhs) && (!f->rhs || is_pure(f->rhs));
  }
}

/// Number of nodes; used for size assertions on generated formulas.
inline std::size_t size(const FormulaPtr& f) {
  if (!f) return 0;
  return 1 + size(f->lhs) + size(f->rhs);
}

/// Largest data-tuple length occurring in a points-to atom (0 if none).
inline int data_arity(const FormulaPtr& f) {
  if (!f) return 0;
  int here = f->op == Op::PointsTo ? static_cast<int>(f->terms.size()) - 1 : 0;
  return std::max({here, data_arity(f->lhs), data_arity(f->rhs)});
}

namespace detail {
inline void collect_free(const FormulaPtr& f, std::set<std::string>& bound, std::set<Term>& out) {
  if (!f) return;
  for (const auto& t : f->terms) {
    if (t.kind == TermKind::Var && bound.count(t.name)) continue;
    out.insert(t);
  }
  if (is_quantifier(f->op)) {
    bool fresh = bound.insert(f->var).second;
    collect_free(f->lhs, bound, out);
    if (fresh) bound.erase(f->var);
    return;
  }
  collect_free(f->lhs, bound, out);
  collect_free(f->rhs, bound, out);
}
}  // namespace detail

/// Free variables and constant symbols (nil included when it occurs).
inline std::set<Term> free_symbols(const FormulaPtr& f) {
  std::set<std::string> bound;
  std::set<Term> out;
  detail::collect_free(f, bound, out);
  return out;
}

inline std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> out;
  for (const auto& t : free_symbols(f))
    if (t.is_var()) out.insert(t.name);
  return out;
}

/// Constants in order of first occurrence (nil excluded).
inline void constants_in_order(const FormulaPtr& f, std::vector<Term>& out) {
  if (!f) return;
  for (const auto& t : f->terms)
    if (t.kind == TermKind::Const && std::find(out.begin(), out.end(), t) == out.end())
      out.push_back(t);
  constants_in_order(f->lhs, out);
  constants_in_order(f->rhs, out);
}

inline void points_to_atoms(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (!f) return;
  if (f->op == Op::PointsTo) out.push_back(f);
  points_to_atoms(f->lhs, out);
  points_to_atoms(f->rhs, out);
}

/// Capture-avoiding only in the sense that bound occurrences of a mapped
/// variable shadow the mapping; callers keep bound names distinct.
inline FormulaPtr substitute(const FormulaPtr& f, const std::map<std::string, Term>& sub) {
  if (!f || sub.empty()) return f;
  Formula g = *f;
  for (auto& t : g.terms)
    if (t.kind == TermKind::Var)
      if (auto it = sub.find(t.name); it != sub.end()) t = it->second;
  if (is_quantifier(f->op) && sub.count(f->var)) {
    auto inner = sub;
    inner.erase(f->var);
    g.lhs = substitute(f->lhs, inner);
    return fb::make(std::move(g));
  }
  g.lhs = substitute(f->lhs, sub);
  g.rhs = substitute(f->rhs, sub);
  return fb::make(std::move(g));
}

// ---- printing -------------------------------------------------------------

inline void print_data(std::ostream& os, const std::vector<Term>& ts, std::size_t from) {
  if (ts.size() - from == 1) {
    os << to_string(ts[from]);
    return;
  }
  os << "(tuple";
  for (std::size_t i = from; i < ts.size(); ++i) os << ' ' << to_string(ts[i]);
  os << ')';
}

/// Prints in the S-expression input syntax accepted by the parser.
inline void print(std::ostream& os, const FormulaPtr& f) {
  switch (f->op) {
    case Op::True: os << "true"; return;
    case Op::False: os << "false"; return;
    case Op::Emp: os << "(emp)"; return;
    case Op::Eq: os << "(= " << to_string(f->terms[0]) << ' ' << to_string(f->terms[1]) << ')'; return;
    case Op::PointsTo:
      os << "(pto " << to_string(f->terms[0]) << ' ';
      print_data(os, f->terms, 1);
      os << ')';
      return;
    case Op::Not: os << "(not "; print(os, f->lhs); os << ')'; return;
    case Op::Exists:
    case Op::Forall:
      os << (f->op == Op::Exists ? "(exists ((" : "(forall ((") << display_name(f->var) << " U)) ";
      print(os, f->lhs);
      os << ')';
      return;
    default: break;
  }
  const char* head = f->op == Op::Sep ? "sep" : f->op == Op::Wand ? "wand" : f->op == Op::And ? "and"
                   : f->op == Op::Or  ? "or"  : "=>";
  os << '(' << head << ' ';
  print(os, f->lhs);
  os << ' ';
  print(os, f->rhs);
  os << ')';
}

inline std::string to_string(const FormulaPtr& f) {
  std::ostringstream os;
  print(os, f);
  return os.str();
}

// ---- desugaring and measure -------------------------------------------------

/// Rewrites Or, Implies and Forall into the core connectives And/Not/Exists.
inline FormulaPtr desugar(const FormulaPtr& f) {
  using namespace fb;
  switch (f->op) {
    case Op::Or: return neg(conj(neg(desugar(f->lhs)), neg(desugar(f->rhs))));
    case Op::Implies: return neg(conj(desugar(f->lhs), neg(desugar(f->rhs))));
    case Op::Forall: return neg(exists(f->var, neg(desugar(f->lhs))));
    case Op::Exists: return exists(f->var, desugar(f->lhs));
    case Op::Not: return neg(desugar(f->lhs));
    case Op::Sep:
    case Op::Wand:
    case Op::And:
      return binary(f->op, desugar(f->lhs), desugar(f->rhs));
    default:
      return f;
  }
}

/// Upper bound on the number of invisible locations a quantifier-free
/// formula can tell apart.
inline int measure(const FormulaPtr& f) {
  switch (f->op) {
    case Op::True:
    case Op::False:
    case Op::Eq:
      return 0;
    case Op::Emp:
    case Op::PointsTo:
      return 1;
    case Op::Sep: return measure(f->lhs) + measure(f->rhs);
    case Op::Wand: return measure(f->rhs);
    case Op::And:
    case Op::Or:
    case Op::Implies:
      return std::max(measure(f->lhs), measure(f->rhs));
    case Op::Not: return measure(f->lhs);
    case Op::Exists:
    case Op::Forall:
      break;
  }
  throw ContractViolation("measure: quantifier in formula " + to_string(f));
}

// ---- functional form ---------------------------------------------------------

/// One top-level conjunct of the matrix; `ground` when it mentions no
/// universal variable.
struct Conjunct {
  FormulaPtr formula;
  bool ground = false;
};

/// Skolemized exists*forall* sentence: forall universals. matrix, where the
/// matrix is the conjunction of `conjuncts`.
struct PrenexInput {
  std::vector<Term> skolems;
  std::vector<Term> universals;
  FormulaPtr matrix;
  std::vector<Conjunct> conjuncts;
  /// Free constants of the original sentence (declared constants), nil excluded.
  std::vector<Term> constants;
  int arity = 1;
};

/// Splits the top-level conjunction; conjuncts without any of `universals`
/// are flagged ground.
inline std::vector<Conjunct> miniscope(const FormulaPtr& matrix, const std::vector<Term>& universals) {
  std::vector<FormulaPtr> parts;
  std::vector<FormulaPtr> stack{matrix};
  while (!stack.empty()) {
    auto f = stack.back();
    stack.pop_back();
    if (f->op == Op::And) {
      stack.push_back(f->rhs);
      stack.push_back(f->lhs);
    } else {
      parts.push_back(f);
    }
  }
  std::vector<Conjunct> out;
  out.reserve(parts.size());
  for (auto& p : parts) {
    auto fv = free_vars(p);
    bool ground = std::none_of(universals.begin(), universals.end(),
                               [&](const Term& u) { return fv.count(u.name) > 0; });
    out.push_back({p, ground});
  }
  return out;
}

namespace detail {

struct Prefixed {
  std::vector<std::string> ex, univ;
  FormulaPtr matrix;
};

class Prenexer {
 public:
  explicit Prenexer(std::set<std::string> taken) : taken_(std::move(taken)) {}

  Prefixed run(const FormulaPtr& f, const std::map<std::string, std::string>& ren) {
    using namespace fb;
    switch (f->op) {
      case Op::Exists: {
        std::string fresh = fresh_name(f->var);
        auto inner = ren;
        inner[f->var] = fresh;
        auto p = run(f->lhs, inner);
        p.ex.insert(p.ex.begin(), fresh);
        return p;
      }
      case Op::Not: return negate(run(f->lhs, ren), f);
      case Op::And: {
        auto a = run(f->lhs, ren);
        auto b = run(f->rhs, ren);
        auto m = conj(a.matrix, b.matrix);
        return merge(std::move(a), std::move(b), std::move(m));
      }
      case Op::Sep: {
        auto a = run(f->lhs, ren);
        auto b = run(f->rhs, ren);
        if (!a.univ.empty() || !b.univ.empty())
          throw FragmentError("universal quantifier under separating conjunction: " + to_string(f));
        auto m = sep(a.matrix, b.matrix);
        return merge(std::move(a), std::move(b), std::move(m));
      }
      case Op::Wand: {
        // (exists x. A) -* B == forall x. (A -* B); A -* forall y. B == forall y. (A -* B)
        auto a = run(f->lhs, ren);
        auto b = run(f->rhs, ren);
        if (!a.univ.empty() || !b.ex.empty())
          throw FragmentError("quantifier alternation through magic wand: " + to_string(f));
        Prefixed p;
        p.univ = a.ex;
        p.univ.insert(p.univ.end(), b.univ.begin(), b.univ.end());
        p.matrix = wand(a.matrix, b.matrix);
        return p;
      }
      case Op::Or:
      case Op::Implies:
      case Op::Forall:
        throw ContractViolation("prenex: formula not desugared");
      default: {
        Formula g = *f;
        for (auto& t : g.terms)
          if (t.kind == TermKind::Var) {
            auto it = ren.find(t.name);
            if (it == ren.end()) throw ContractViolation("free variable " + t.name + " in sentence");
            t.name = it->second;
          }
        return {{}, {}, make(std::move(g))};
      }
    }
  }

 private:
  static Prefixed merge(Prefixed a, Prefixed b, FormulaPtr m) {
    a.ex.insert(a.ex.end(), b.ex.begin(), b.ex.end());
    a.univ.insert(a.univ.end(), b.univ.begin(), b.univ.end());
    a.matrix = std::move(m);
    return a;
  }

  // not (exists E forall U. m) == forall E exists U. not m
  static Prefixed negate(Prefixed p, const FormulaPtr& at) {
    if (!p.ex.empty() && !p.univ.empty())
      throw FragmentError("quantifier prefix outside exists*forall* (alternation forall-exists) in " +
                          to_string(at));
    Prefixed out;
    out.ex = std::move(p.univ);
    out.univ = std::move(p.ex);
    out.matrix = p.matrix->op == Op::Not ? p.matrix->lhs : fb::neg(p.matrix);
    return out;
  }

  std::string fresh_name(const std::string& base) {
    std::string name = base;
    for (int i = 2; taken_.count(name); ++i) name = base + "_" + std::to_string(i);
    taken_.insert(name);
    return name;
  }

  std::set<std::string> taken_;
};

}  // namespace detail

/// Skolemizes an exists*forall* sentence. Existentials become constants
/// named @k_<var>; the universal prefix is kept; the matrix is miniscoped.
inline PrenexInput functional_form(const FormulaPtr& sentence, int arity = 0) {
  auto f = desugar(sentence);
  if (!free_vars(f).empty())
    throw ContractViolation("functional_form: formula has free variables");
  std::set<std::string> taken;
  std::vector<Term> consts;
  constants_in_order(f, consts);
  for (auto& c : consts) taken.insert(c.name);
  detail::Prenexer pre(taken);
  auto p = pre.run(f, {});

  PrenexInput out;
  out.constants = consts;
  std::map<std::string, Term> sub;
  std::set<std::string> used_names(taken);
  for (auto& x : p.ex) {
    std::string name = "@k_" + x;
    for (int i = 2; used_names.count(name); ++i) name = "@k_" + x + "_" + std::to_string(i);
    used_names.insert(name);
    sub[x] = Term::cnst(name);
    out.skolems.push_back(sub[x]);
  }
  for (auto& y : p.univ) out.universals.push_back(Term::var(y));
  out.matrix = substitute(p.matrix, sub);
  out.conjuncts = miniscope(out.matrix, out.universals);
  out.arity = arity > 0 ? arity : std::max(1, data_arity(f));
  return out;
}

}  // namespace slbsr
