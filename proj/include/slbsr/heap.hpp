// Finite interpretations, heaps and the separation-logic satisfaction
// relation, plus the heap-equivalence machinery behind the small-model bound.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "slbsr/formula.hpp"

namespace slbsr {

using Loc = int;
using Tuple = std::vector<Loc>;

/// Locations are 0..universe_size-1. Nil must always be assigned.
struct Interpretation {
  int universe_size = 1;
  std::map<Term, Loc> const_val;
  std::map<std::string, Loc> var_val;

  Loc value(const Term& t) const {
    if (t.kind == TermKind::Var) {
      auto it = var_val.find(t.name);
      if (it == var_val.end()) throw ContractViolation("unassigned variable " + t.name);
      return it->second;
    }
    auto it = const_val.find(t);
    if (it == const_val.end()) throw ContractViolation("unassigned constant " + to_string(t));
    return it->second;
  }
  Loc nil() const { return value(Term::nil()); }

  Tuple values(const std::vector<Term>& ts, std::size_t from = 0) const {
    Tuple out;
    out.reserve(ts.size() - from);
    for (std::size_t i = from; i < ts.size(); ++i) out.push_back(value(ts[i]));
    return out;
  }
};

/// Finite partial map from locations to k-tuples of locations.
struct Heap {
  int arity = 1;
  std::map<Loc, Tuple> cells;

  bool allocated(Loc l) const { return cells.count(l) > 0; }
  std::set<Loc> domain() const {
    std::set<Loc> d;
    for (auto& [l, _] : cells) d.insert(l);
    return d;
  }
  bool operator==(const Heap&) const = default;
};

struct Model {
  Interpretation interp;
  Heap heap;
};

// ---- satisfaction -----------------------------------------------------------

namespace detail {

class Evaluator {
 public:
  explicit Evaluator(Interpretation I, std::uint64_t* steps = nullptr, std::uint64_t limit = 0)
      : I_(std::move(I)), steps_(steps), limit_(limit) {}

  bool eval(const Heap& h, const FormulaPtr& f) {
    switch (f->op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Eq: return I_.value(f->terms[0]) == I_.value(f->terms[1]);
      case Op::Emp: return h.cells.empty();
      case Op::PointsTo: {
        if (h.cells.size() != 1) return false;
        Loc t = I_.value(f->terms[0]);
        if (t == I_.nil()) return false;
        auto it = h.cells.find(t);
        return it != h.cells.end() && it->second == I_.values(f->terms, 1);
      }
      case Op::Not: return !eval(h, f->lhs);
      case Op::And: return eval(h, f->lhs) && eval(h, f->rhs);
      case Op::Or: return eval(h, f->lhs) || eval(h, f->rhs);
      case Op::Implies: return !eval(h, f->lhs) || eval(h, f->rhs);
      case Op::Sep: return eval_sep(h, f);
      case Op::Wand: return eval_wand(h, f);
      case Op::Exists:
      case Op::Forall: {
        bool want = f->op == Op::Exists;
        auto saved = I_.var_val.find(f->var) != I_.var_val.end()
                         ? std::optional<Loc>(I_.var_val[f->var])
                         : std::nullopt;
        bool result = !want;
        for (Loc l = 0; l < I_.universe_size; ++l) {
          I_.var_val[f->var] = l;
          if (eval(h, f->lhs) == want) {
            result = want;
            break;
          }
        }
        if (saved) I_.var_val[f->var] = *saved;
        else I_.var_val.erase(f->var);
        return result;
      }
    }
    return false;
  }

 private:
  bool eval_sep(const Heap& h, const FormulaPtr& f) {
    std::vector<Loc> dom;
    for (auto& [l, _] : h.cells) dom.push_back(l);
    if (dom.size() >= 63) throw ContractViolation("heap too large for exhaustive split");
    const std::uint64_t full = (std::uint64_t{1} << dom.size()) - 1;
    for (std::uint64_t mask = 0; mask <= full; ++mask) {
      tick();
      Heap a{h.arity, {}}, b{h.arity, {}};
      for (std::size_t i = 0; i < dom.size(); ++i)
        ((mask >> i) & 1 ? a : b).cells.emplace(dom[i], h.cells.at(dom[i]));
      if (eval(a, f->lhs) && eval(b, f->rhs)) return true;
    }
    return false;
  }

  bool union_satisfies(const Heap& h, const Heap& ext, const FormulaPtr& rhs) {
    Heap u = h;
    for (auto& [l, v] : ext.cells) u.cells.emplace(l, v);
    return eval(u, rhs);
  }

  bool eval_wand(const Heap& h, const FormulaPtr& f) {
    const FormulaPtr& lhs = f->lhs;
    // Exact shortcuts: emp and points-to each have a single model heap.
    if (lhs->op == Op::Emp) return eval(h, f->rhs);
    if (lhs->op == Op::PointsTo) {
      Loc t = I_.value(lhs->terms[0]);
      if (t == I_.nil() || h.allocated(t)) return true;
      Heap ext{h.arity, {{t, I_.values(lhs->terms, 1)}}};
      return union_satisfies(h, ext, f->rhs);
    }
    std::vector<Loc> free;
    for (Loc l = 0; l < I_.universe_size; ++l)
      if (!h.allocated(l)) free.push_back(l);
    Heap ext{h.arity, {}};
    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
      if (i == free.size()) {
        tick();
        return !eval(ext, lhs) || union_satisfies(h, ext, f->rhs);
      }
      if (!rec(i + 1)) return false;
      Tuple v(static_cast<std::size_t>(h.arity), 0);
      while (true) {
        ext.cells[free[i]] = v;
        bool ok = rec(i + 1);
        ext.cells.erase(free[i]);
        if (!ok) return false;
        std::size_t j = 0;
        while (j < v.size() && ++v[j] == I_.universe_size) v[j++] = 0;
        if (j == v.size()) break;
      }
      return true;
    };
    return rec(0);
  }

  void tick() {
    if (steps_ && ++*steps_ > limit_) throw std::length_error("evaluation budget");
  }

  Interpretation I_;
  std::uint64_t* steps_;
  std::uint64_t limit_;
};

}  // namespace detail

/// I,h |= f. Quantifiers range over the whole finite universe; wand
/// extensions range over every heap disjoint from h with values in the
/// universe, which is exact for a fixed finite interpretation.
inline bool eval(const Interpretation& I, const Heap& h, const FormulaPtr& f) {
  return detail::Evaluator(I).eval(h, f);
}

/// Same, but counts sep splits and wand extensions into *steps and throws
/// std::length_error once the count passes `limit`.
inline bool eval_bounded(const Interpretation& I, const Heap& h, const FormulaPtr& f,
                         std::uint64_t& steps, std::uint64_t limit) {
  return detail::Evaluator(I, &steps, limit).eval(h, f);
}

// ---- small-model machinery --------------------------------------------------

/// v =_S v': components in S agree; components outside S stay outside S.
inline bool eq_mod_S(const Tuple& v, const Tuple& w, const std::set<Loc>& S) {
  if (v.size() != w.size()) throw ContractViolation("eq_mod_S: tuple arity mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (S.count(v[i])) {
      if (v[i] != w[i]) return false;
    } else if (S.count(w[i])) {
      return false;
    }
  }
  return true;
}

/// Replaces every component outside S by `l`.
inline Tuple prun(const Tuple& v, const std::set<Loc>& S, Loc l) {
  Tuple out = v;
  for (auto& x : out)
    if (!S.count(x)) x = l;
  return out;
}

struct EquivParams {
  int n = 1;
  std::set<Term> X;
  std::set<Loc> S;
};

inline std::set<Loc> image(const Interpretation& I, const std::set<Term>& X) {
  std::set<Loc> out;
  for (auto& x : X) out.insert(I.value(x));
  return out;
}

inline std::size_t invisible_count(const Heap& h, const std::set<Loc>& visible) {
  std::size_t c = 0;
  for (auto& [l, _] : h.cells)
    if (!visible.count(l)) ++c;
  return c;
}

/// h ~_{n,X,S} h' checked condition by condition.
inline bool heap_equiv(const Interpretation& I, const EquivParams& p, const Heap& h, const Heap& h2) {
  const auto IX = image(I, p.X);
  for (Loc l : IX)
    if (h.allocated(l) != h2.allocated(l)) return false;
  std::set<Loc> S = IX;
  S.insert(p.S.begin(), p.S.end());
  for (Loc l : IX)
    if (h.allocated(l) && !eq_mod_S(h.cells.at(l), h2.cells.at(l), S)) return false;
  const auto inv = invisible_count(h, IX), inv2 = invisible_count(h2, IX);
  const auto n = static_cast<std::size_t>(p.n);
  if (inv < n) return inv == inv2;
  return inv2 >= n;
}

/// Keeps every X-visible cell and at most n invisible cells, all placed in
/// L, with values pruned to I(X) u L (other values become v). Cells of h
/// already inside L are kept in place first; remaining invisible cells are
/// taken in ascending order and moved onto the unused members of L.
inline Heap shrink_heap(const Interpretation& I, const Heap& h, int n, const std::set<Term>& X,
                        const std::set<Loc>& L, Loc v) {
  const auto IX = image(I, X);
  if (static_cast<int>(L.size()) != n) throw ContractViolation("shrink_heap: |L| != n");
  for (Loc l : L)
    if (IX.count(l)) throw ContractViolation("shrink_heap: L intersects I(X)");
  if (IX.count(v) || L.count(v) || v == I.nil())
    throw ContractViolation("shrink_heap: spare location v not fresh");

  std::set<Loc> keep = IX;
  keep.insert(L.begin(), L.end());
  Heap out{h.arity, {}};
  std::vector<Loc> invisible;
  for (auto& [l, val] : h.cells) {
    if (IX.count(l)) out.cells[l] = prun(val, keep, v);
    else invisible.push_back(l);
  }
  std::size_t budget = std::min<std::size_t>(invisible.size(), L.size());
  std::vector<Loc> moving;
  std::size_t placed = 0;
  for (Loc l : invisible)
    if (placed < budget && L.count(l)) {
      out.cells[l] = prun(h.cells.at(l), keep, v);
      ++placed;
    } else if (!L.count(l)) {
      moving.push_back(l);
    }
  auto slot = L.begin();
  for (Loc src : moving) {
    if (placed == budget) break;
    while (out.cells.count(*slot)) ++slot;
    out.cells[*slot] = prun(h.cells.at(src), keep, v);
    ++placed;
  }
  return out;
}

/// Model dump: `universe N`, `const c = l` per constant, `heap l -> (..)` per cell.
inline void dump_model(std::ostream& os, const Model& m) {
  os << "universe " << m.interp.universe_size << '\n';
  for (auto& [c, l] : m.interp.const_val) os << "const " << to_string(c) << " = " << l << '\n';
  for (auto& [l, v] : m.heap.cells) {
    os << "heap " << l << " -> (";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")\n";
  }
}

}  // namespace slbsr
