// Small-model-bounded satisfiability for ground separation-logic formulas.
//
// The search walks universe sizes upward, so the first model found has a
// minimal universe. Within one universe it enumerates canonical constant
// valuations (fresh values introduced in ascending order) and then heaps in
// ascending domain size. Two things keep it tractable:
//
//  * top-level conjuncts are checked as soon as every constant they mention
//    has a value, so pure constraints prune valuations early;
//  * when some top-level conjunct is "precise" (a boolean/separating
//    combination of points-to and emp atoms), its few candidate heaps are
//    computed from the valuation instead of enumerating all heaps.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "slbsr/formula.hpp"
#include "slbsr/heap.hpp"

namespace slbsr {

struct QfOptions {
  bool forbid_nil_alloc = false;
  std::uint64_t budget = 100'000'000;
  int max_universe = 0;  // caps the universe-size bound; 0 keeps the small-model bound
};

struct QfQuery {
  FormulaPtr formula;
  /// Constants the returned model must interpret; nil is always added.
  std::vector<Term> constants;
  /// Ordered cut-off constants subject to symmetry breaking.
  std::vector<Term> cutoffs;
  int arity = 1;
  QfOptions options;
  /// Heap domains limited to locations named by constants (plus one spare
  /// location per constant absent from the formula).
  bool restrict_domain = false;
};

struct QfAnswer {
  enum class Status { Sat, Unsat, ResourceOut };
  Status status = Status::Unsat;
  std::optional<Model> model;
  std::uint64_t steps = 0;

  bool sat() const { return status == Status::Sat; }
  bool unsat() const { return status == Status::Unsat; }
};

/// Cut-offs are ordered; once one is outside dom(h), all later ones are too.
inline bool symmetry_break(const std::vector<Term>& cutoffs, const Interpretation& I, const Heap& h) {
  bool seen_free = false;
  for (const auto& c : cutoffs) {
    bool alloc = h.allocated(I.value(c));
    if (seen_free && alloc) return false;
    if (!alloc) seen_free = true;
  }
  return true;
}

class ResourceExhausted : public std::runtime_error {
 public:
  ResourceExhausted() : std::runtime_error("resource budget exhausted") {}
};

namespace detail {

constexpr int kMaxUniverse = 62;

constexpr int kUnbounded = 1 << 20;

struct CNode {
  Op op;
  int a = -1, b = -1;
  std::vector<int> terms;  // indices into the constant order
  int lo = 0, hi = kUnbounded;  // sizes of heaps that can satisfy the node
};

struct CandidateCell {
  Loc loc;
  Tuple value;
};
using CandidateHeap = std::vector<CandidateCell>;

/// Equivalence-preserving cleanup of constant subformulas and double
/// negation; input must be desugared.
inline FormulaPtr simplify(const FormulaPtr& f) {
  using namespace fb;
  auto is = [](const FormulaPtr& g, Op op) { return g->op == op; };
  switch (f->op) {
    case Op::Not: {
      auto a = simplify(f->lhs);
      if (is(a, Op::Not)) return a->lhs;
      if (is(a, Op::True)) return ff();
      if (is(a, Op::False)) return tt();
      return neg(a);
    }
    case Op::And: {
      auto a = simplify(f->lhs), b = simplify(f->rhs);
      if (is(a, Op::False) || is(b, Op::False)) return ff();
      if (is(a, Op::True)) return b;
      if (is(b, Op::True)) return a;
      return conj(a, b);
    }
    case Op::Sep: {
      auto a = simplify(f->lhs), b = simplify(f->rhs);
      if (is(a, Op::False) || is(b, Op::False)) return ff();
      if (is(a, Op::Emp)) return b;
      if (is(b, Op::Emp)) return a;
      // a pure side holds on any part of the heap
      if (is_pure(a) && is_pure(b)) return conj(a, b);
      if (is(a, Op::True) && is_pure(b)) return b;
      if (is(b, Op::True) && is_pure(a)) return a;
      return sep(a, b);
    }
    case Op::Wand: {
      auto a = simplify(f->lhs), b = simplify(f->rhs);
      if (is(a, Op::False) || is(b, Op::True)) return tt();
      if (is(a, Op::Emp)) return b;
      // the empty extension falsifies false; a one-cell extension falsifies emp
      if (is(a, Op::True) && (is(b, Op::False) || is(b, Op::Emp))) return ff();
      return wand(a, b);
    }
    case Op::Eq: return f->terms[0] == f->terms[1] ? tt() : f;
    case Op::PointsTo: return f->terms[0].kind == TermKind::Nil ? ff() : f;
    default:
      return f;
  }
}

class QfSearch {
 public:
  explicit QfSearch(const QfQuery& q) : q_(q), k_(q.arity) {
    if (has_quantifier(q.formula)) throw ContractViolation("qf_sat: formula has quantifiers");
    if (!free_vars(q.formula).empty()) throw ContractViolation("qf_sat: formula has free variables");
    std::vector<FormulaPtr> atoms;
    points_to_atoms(q.formula, atoms);
    for (const auto& a : atoms)
      if (static_cast<int>(a->terms.size()) != k_ + 1)
        throw ContractViolation("qf_sat: points-to arity differs from heap arity");
    const FormulaPtr simple = simplify(desugar(q.formula));
    split_conjuncts(simple);
    order_constants();
    for (auto& c : conj_) c.root = compile(c.f);
    for (auto& c : conj_) {
      int depth = 0;
      for (const auto& t : free_symbols(c.f)) depth = std::max(depth, index_.at(t) + 1);
      c.ready = depth;
      c.pure = is_pure(c.f);
    }
    choose_precise();
    general_wand_ = has_general_wand(simple);
    measure_ = measure(simple);
    for (const auto& c : q.cutoffs)
      if (index_.count(c)) present_cutoffs_.push_back(index_.at(c));
    for (const auto& c : q.constants)
      if (!index_.count(c)) ++absent_;
    bound_ = measure(desugar(q.formula)) + static_cast<int>(order_.size()) + 2;
    if (q.restrict_domain) bound_ += absent_;
    bound_ = std::min(bound_, kMaxUniverse);
    if (q.options.max_universe > 0) bound_ = std::min(bound_, q.options.max_universe);
  }

  QfAnswer run() {
    QfAnswer ans;
    try {
      for (s_ = 1; s_ <= bound_; ++s_) {
        val_.assign(order_.size(), -1);
        cell_.assign(static_cast<std::size_t>(s_ * k_), 0);
        heap_fixed_ = false;
        dom_ = 0;
        bool found = precise_ >= 0 && conj_[static_cast<std::size_t>(precise_)].ready == 0
                         ? check_ready(0, false) && try_candidates(0, -1)
                         : check_ready(0, false) && assign(0, -1);
        if (found) {
          ans.status = QfAnswer::Status::Sat;
          ans.model = extract();
          break;
        }
      }
    } catch (const ResourceExhausted&) {
      ans.status = QfAnswer::Status::ResourceOut;
    }
    ans.steps = steps_;
    return ans;
  }

  int bound() const { return bound_; }

 private:
  struct Conj {
    FormulaPtr f;
    int root = -1;
    int ready = 0;
    bool pure = false;
  };

  // A wand whose lhs is not emp or a points-to quantifies over extensions
  // at anonymous locations.
  static bool has_general_wand(const FormulaPtr& f) {
    if (!f) return false;
    if (f->op == Op::Wand && f->lhs->op != Op::Emp && f->lhs->op != Op::PointsTo) return true;
    return has_general_wand(f->lhs) || has_general_wand(f->rhs);
  }

  void split_conjuncts(const FormulaPtr& f) {
    if (f->op == Op::And) {
      split_conjuncts(f->lhs);
      split_conjuncts(f->rhs);
    } else if (f->op != Op::True) {
      conj_.push_back({f});
    }
  }

  static bool syntactically_precise(const FormulaPtr& f) {
    switch (f->op) {
      case Op::PointsTo:
      case Op::Emp:
      case Op::False:
        return true;
      case Op::Sep: return syntactically_precise(f->lhs) && syntactically_precise(f->rhs);
      case Op::And: return syntactically_precise(f->lhs) || syntactically_precise(f->rhs);
      case Op::Not: {
        // desugared disjunction: not (not a and not b and ...)
        std::vector<FormulaPtr> alts;
        if (!disjuncts(f, alts)) return false;
        return std::all_of(alts.begin(), alts.end(), [](const FormulaPtr& a) { return syntactically_precise(a); });
      }
      default:
        return false;
    }
  }

  static bool disjuncts(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->op != Op::Not || f->lhs->op != Op::And) return false;
    std::vector<FormulaPtr> stack{f->lhs};
    while (!stack.empty()) {
      auto g = stack.back();
      stack.pop_back();
      if (g->op == Op::And) {
        stack.push_back(g->rhs);
        stack.push_back(g->lhs);
      } else if (g->op == Op::Not) {
        out.push_back(g->lhs);
      } else {
        return false;
      }
    }
    return true;
  }

  void choose_precise() {
    for (std::size_t i = 0; i < conj_.size(); ++i)
      if (syntactically_precise(conj_[i].f)) {
        if (precise_ < 0 || conj_[i].ready < conj_[static_cast<std::size_t>(precise_)].ready)
          precise_ = static_cast<int>(i);
      }
  }

  // nil first, then the precise conjunct's constants, then the rest by
  // first occurrence; constants absent from the formula are not searched.
  void order_constants() {
    order_.push_back(Term::nil());
    std::vector<Term> seen;
    int best = -1;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < conj_.size(); ++i)
      if (syntactically_precise(conj_[i].f)) {
        std::vector<Term> cs;
        constants_in_order(conj_[i].f, cs);
        if (best < 0 || cs.size() < best_count) {
          best = static_cast<int>(i);
          best_count = cs.size();
        }
      }
    if (best >= 0) constants_in_order(conj_[static_cast<std::size_t>(best)].f, seen);
    for (auto& c : conj_) constants_in_order(c.f, seen);
    for (auto& t : seen) order_.push_back(t);
    for (std::size_t i = 0; i < order_.size(); ++i) index_[order_[i]] = static_cast<int>(i);
  }

  int compile(const FormulaPtr& f) {
    CNode n;
    n.op = f->op;
    for (const auto& t : f->terms) n.terms.push_back(index_.at(t));
    if (f->lhs) n.a = compile(f->lhs);
    if (f->rhs) n.b = compile(f->rhs);
    size_bounds(n);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  void size_bounds(CNode& n) const {
    auto node = [&](int i) -> const CNode& { return nodes_[static_cast<std::size_t>(i)]; };
    switch (n.op) {
      case Op::False: n.lo = 1, n.hi = 0; break;
      case Op::Emp: n.lo = 0, n.hi = 0; break;
      case Op::PointsTo: n.lo = 1, n.hi = 1; break;
      case Op::Sep:
        if (node(n.a).lo > node(n.a).hi || node(n.b).lo > node(n.b).hi) {
          n.lo = 1, n.hi = 0;
          break;
        }
        n.lo = node(n.a).lo + node(n.b).lo;
        n.hi = std::min(kUnbounded, node(n.a).hi + node(n.b).hi);
        break;
      case Op::And:
        n.lo = std::max(node(n.a).lo, node(n.b).lo);
        n.hi = std::min(node(n.a).hi, node(n.b).hi);
        break;
      case Op::Not: {
        // not (not a and not b) is a disjunction
        const CNode& g = node(n.a);
        if (g.op == Op::And && node(g.a).op == Op::Not && node(g.b).op == Op::Not) {
          const CNode& x = node(node(g.a).a);
          const CNode& y = node(node(g.b).a);
          bool ex = x.lo > x.hi, ey = y.lo > y.hi;
          if (ex && ey) n.lo = 1, n.hi = 0;
          else if (ex) n.lo = y.lo, n.hi = y.hi;
          else if (ey) n.lo = x.lo, n.hi = x.hi;
          else n.lo = std::min(x.lo, y.lo), n.hi = std::max(x.hi, y.hi);
        }
        break;
      }
      case Op::Wand:
        // the empty extension is one of the extensions to consider
        if (empty_ok(node(n.a)) == 1) n.lo = node(n.b).lo, n.hi = node(n.b).hi;
        break;
      default: break;
    }
    if (n.lo > n.hi) n.lo = 1, n.hi = 0;
  }

  // Truth on the empty heap when it does not depend on the valuation:
  // 1 true, 0 false, -1 unknown.
  int empty_ok(const CNode& n) const {
    auto node = [&](int i) -> const CNode& { return nodes_[static_cast<std::size_t>(i)]; };
    switch (n.op) {
      case Op::True:
      case Op::Emp: return 1;
      case Op::False:
      case Op::PointsTo: return 0;
      case Op::Not: {
        int a = empty_ok(node(n.a));
        return a < 0 ? -1 : 1 - a;
      }
      case Op::And:
      case Op::Sep: {
        int a = empty_ok(node(n.a)), b = empty_ok(node(n.b));
        if (a == 0 || b == 0) return 0;
        return a == 1 && b == 1 ? 1 : -1;
      }
      case Op::Wand: {
        // vacuous when the lhs has no model; the empty extension is checked
        // directly when the lhs holds on it
        const CNode& a = node(n.a);
        if (a.lo > a.hi) return 1;
        if (empty_ok(a) == 1 && empty_ok(node(n.b)) == 0) return 0;
        return -1;
      }
      default: return -1;
    }
  }

  static bool fits(const CNode& n, std::uint64_t dom) {
    int c = std::popcount(dom);
    return c >= n.lo && c <= n.hi;
  }

  void tick() {
    if (++steps_ > q_.options.budget) throw ResourceExhausted();
  }

  // ---- fast evaluation over (domain mask, shared cell array) ----

  Loc v(int term) const { return val_[static_cast<std::size_t>(term)]; }

  bool cell_equals(Loc l, const CNode& n) const {
    for (int i = 0; i < k_; ++i) {
      Loc want = i + 1 < static_cast<int>(n.terms.size()) ? v(n.terms[static_cast<std::size_t>(i + 1)]) : -1;
      if (cell_[static_cast<std::size_t>(l * k_ + i)] != want) return false;
    }
    return true;
  }

  void write_cell(Loc l, const CNode& n) {
    for (int i = 0; i < k_; ++i)
      cell_[static_cast<std::size_t>(l * k_ + i)] =
          i + 1 < static_cast<int>(n.terms.size()) ? v(n.terms[static_cast<std::size_t>(i + 1)]) : -1;
  }

  bool eval(int id, std::uint64_t dom) {
    const CNode& n = nodes_[static_cast<std::size_t>(id)];
    if (!fits(n, dom)) return false;
    switch (n.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Eq: return v(n.terms[0]) == v(n.terms[1]);
      case Op::Emp: return dom == 0;
      case Op::PointsTo: {
        Loc t = v(n.terms[0]);
        return t != v(0) && dom == (std::uint64_t{1} << t) && cell_equals(t, n);
      }
      case Op::Not: return !eval(n.a, dom);
      case Op::And: return eval(n.a, dom) && eval(n.b, dom);
      case Op::Sep: return eval_sep(n, dom);
      case Op::Wand: return eval_wand(n, dom);
      default: break;
    }
    throw ContractViolation("qf_sat: unexpected connective after desugaring");
  }

  bool eval_sep(const CNode& n, std::uint64_t dom) {
    const CNode& a = nodes_[static_cast<std::size_t>(n.a)];
    const CNode& b = nodes_[static_cast<std::size_t>(n.b)];
    auto fixed_part = [&](const CNode& side) -> std::optional<std::uint64_t> {
      if (side.op == Op::Emp) return 0;
      if (side.op == Op::PointsTo) return std::uint64_t{1} << v(side.terms[0]);
      return std::nullopt;
    };
    if (auto fa = fixed_part(a)) {
      if ((*fa & dom) != *fa) return false;
      return eval(n.a, *fa) && eval(n.b, dom & ~*fa);
    }
    if (auto fbp = fixed_part(b)) {
      if ((*fbp & dom) != *fbp) return false;
      return eval(n.b, *fbp) && eval(n.a, dom & ~*fbp);
    }
    for (std::uint64_t sub = dom;; sub = (sub - 1) & dom) {
      if (fits(a, sub) && fits(b, dom & ~sub) && eval(n.a, sub) && eval(n.b, dom & ~sub)) return true;
      if (sub == 0) break;
    }
    return false;
  }

  bool eval_wand(const CNode& n, std::uint64_t dom) {
    const CNode& lhs = nodes_[static_cast<std::size_t>(n.a)];
    if (lhs.op == Op::Emp) return eval(n.b, dom);
    if (lhs.op == Op::PointsTo) {
      Loc t = v(lhs.terms[0]);
      const std::uint64_t bit = std::uint64_t{1} << t;
      if (t == v(0) || (dom & bit)) return true;
      Tuple saved(cell_.begin() + t * k_, cell_.begin() + (t + 1) * k_);
      write_cell(t, lhs);
      bool r = eval(n.b, dom | bit);
      std::copy(saved.begin(), saved.end(), cell_.begin() + t * k_);
      return r;
    }
    if (lhs.lo > lhs.hi) return true;
    // extending by every free location covers the universe
    if (lhs.op == Op::True && nodes_[static_cast<std::size_t>(n.b)].hi < s_) return false;
    // Free anonymous locations nobody points to are interchangeable, so
    // only how many of them the extension uses matters.
    std::uint64_t referenced = 0;
    for (std::uint64_t m = dom; m; m &= m - 1) {
      const Loc l = std::countr_zero(m);
      for (int i = 0; i < k_; ++i) referenced |= std::uint64_t{1} << cell_[static_cast<std::size_t>(l * k_ + i)];
    }
    std::vector<Loc> dist, blank;
    for (Loc l = 0; l < s_; ++l) {
      if ((dom >> l) & 1) continue;
      if (l < distinct_ || ((referenced >> l) & 1)) dist.push_back(l);
      else blank.push_back(l);
    }
    const int nd = static_cast<int>(dist.size()), nb = static_cast<int>(blank.size());
    for (int t = lhs.lo; t <= std::min(lhs.hi, nd + nb); ++t)
      for (int b = 0; b <= std::min(t, nb); ++b) {
        const int d = t - b;
        if (d > nd) continue;
        std::vector<int> pick(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) pick[static_cast<std::size_t>(i)] = i;
        while (true) {
          std::vector<Loc> locs;
          std::uint64_t ext = 0;
          for (int i : pick) locs.push_back(dist[static_cast<std::size_t>(i)]);
          for (int i = 0; i < b; ++i) locs.push_back(blank[static_cast<std::size_t>(i)]);
          for (Loc l : locs) ext |= std::uint64_t{1} << l;
          std::vector<Loc> saved;
          for (Loc l : locs)
            for (int i = 0; i < k_; ++i) saved.push_back(cell_[static_cast<std::size_t>(l * k_ + i)]);
          bool ok = all_values(locs, 0, [&] { return !eval(n.a, ext) || eval(n.b, dom | ext); });
          std::size_t p = 0;
          for (Loc l : locs)
            for (int i = 0; i < k_; ++i) cell_[static_cast<std::size_t>(l * k_ + i)] = saved[p++];
          if (!ok) return false;
          int i = d;
          while (i > 0 && pick[static_cast<std::size_t>(i - 1)] == nd - d + i - 1) --i;
          if (i == 0) break;
          ++pick[static_cast<std::size_t>(i - 1)];
          for (int j = i; j < d; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
      }
    return true;
  }

  // Runs `body` for every value assignment of `locs`; stops at first false.
  template <class Body>
  bool all_values(const std::vector<Loc>& locs, std::size_t i, Body&& body) {
    if (i == locs.size()) return body();
    const std::size_t base = static_cast<std::size_t>(locs[i] * k_);
    std::fill(cell_.begin() + static_cast<std::ptrdiff_t>(base),
              cell_.begin() + static_cast<std::ptrdiff_t>(base) + k_, 0);
    while (true) {
      tick();
      if (!all_values(locs, i + 1, body)) return false;
      int j = 0;
      while (j < k_ && ++cell_[base + static_cast<std::size_t>(j)] == s_) cell_[base + static_cast<std::size_t>(j++)] = 0;
      if (j == k_) return true;
    }
  }

  // ---- candidate heaps for precise conjuncts ----

  std::optional<std::vector<CandidateHeap>> candidates(int id) {
    const CNode& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::False: return std::vector<CandidateHeap>{};
      case Op::Emp: return std::vector<CandidateHeap>{CandidateHeap{}};
      case Op::PointsTo: {
        Loc t = v(n.terms[0]);
        if (t == v(0)) return std::vector<CandidateHeap>{};
        Tuple val;
        for (std::size_t i = 1; i < n.terms.size(); ++i) val.push_back(v(n.terms[i]));
        while (static_cast<int>(val.size()) < k_) val.push_back(-1);
        return std::vector<CandidateHeap>{CandidateHeap{{t, val}}};
      }
      case Op::Sep: {
        auto a = candidates(n.a);
        if (!a) return std::nullopt;
        auto b = candidates(n.b);
        if (!b) return std::nullopt;
        std::vector<CandidateHeap> out;
        for (auto& x : *a)
          for (auto& y : *b) {
            bool disjoint = std::none_of(x.begin(), x.end(), [&](const CandidateCell& c) {
              return std::any_of(y.begin(), y.end(), [&](const CandidateCell& d) { return d.loc == c.loc; });
            });
            if (!disjoint) continue;
            CandidateHeap u = x;
            u.insert(u.end(), y.begin(), y.end());
            out.push_back(std::move(u));
          }
        return out;
      }
      case Op::And: {
        if (auto a = candidates(n.a)) return a;
        return candidates(n.b);
      }
      case Op::Not: {
        // union over the disjuncts of not (not a and not b and ...)
        if (nodes_[static_cast<std::size_t>(n.a)].op != Op::And) return std::nullopt;
        std::vector<CandidateHeap> out;
        std::vector<int> stack{n.a};
        while (!stack.empty()) {
          const CNode& g = nodes_[static_cast<std::size_t>(stack.back())];
          stack.pop_back();
          if (g.op == Op::And) {
            stack.push_back(g.b);
            stack.push_back(g.a);
            continue;
          }
          if (g.op != Op::Not) return std::nullopt;
          auto a = candidates(g.a);
          if (!a) return std::nullopt;
          for (auto& h : *a)
            if (std::none_of(out.begin(), out.end(), [&](const CandidateHeap& x) { return same_heap(x, h); }))
              out.push_back(h);
        }
        return out;
      }
      default:
        return std::nullopt;
    }
  }

  static bool same_heap(CandidateHeap a, CandidateHeap b) {
    auto by_loc = [](const CandidateCell& x, const CandidateCell& y) { return x.loc < y.loc; };
    std::sort(a.begin(), a.end(), by_loc);
    std::sort(b.begin(), b.end(), by_loc);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].loc != b[i].loc || a[i].value != b[i].value) return false;
    return true;
  }

  // ---- search ----

  bool anon_insensitive() const { return precise_ >= 0 && !general_wand_; }

  bool check_ready(int depth, bool heap_fixed) {
    for (const auto& c : conj_)
      if (c.ready == depth && (c.pure || heap_fixed) && !eval(c.root, dom_)) return false;
    return true;
  }

  bool cutoffs_monotone() const {
    bool seen_free = false;
    for (int c : present_cutoffs_) {
      bool alloc = (dom_ >> v(c)) & 1;
      if (seen_free && alloc) return false;
      if (!alloc) seen_free = true;
    }
    return true;
  }

  bool cutoffs_assigned() const {
    return std::all_of(present_cutoffs_.begin(), present_cutoffs_.end(), [&](int c) { return v(c) >= 0; });
  }

  // Assign constant `depth` given the current highest value `maxv`.
  bool assign(int depth, int maxv) {
    const int n = static_cast<int>(order_.size());
    if (anon_insensitive() && (maxv + 1) + (n - depth) < s_) return false;
    if (depth == n) {
      distinct_ = maxv + 1;
      if (anon_insensitive() && distinct_ != s_) return false;
      if (heap_fixed_) return cutoffs_monotone();
      return enumerate_heaps();
    }
    const int limit = std::min(maxv + 1, s_ - 1);
    for (int x = 0; x <= limit; ++x) {
      val_[static_cast<std::size_t>(depth)] = x;
      bool ok = check_ready(depth + 1, heap_fixed_);
      if (ok && heap_fixed_ && cutoffs_assigned() && !cutoffs_monotone()) ok = false;
      if (ok) {
        if (precise_ >= 0 && !heap_fixed_ &&
            depth + 1 == conj_[static_cast<std::size_t>(precise_)].ready) {
          if (try_candidates(depth + 1, std::max(maxv, x))) return true;
        } else if (assign(depth + 1, std::max(maxv, x))) {
          return true;
        }
      }
    }
    val_[static_cast<std::size_t>(depth)] = -1;
    return false;
  }

  bool try_candidates(int depth, int maxv) {
    auto cands = candidates(conj_[static_cast<std::size_t>(precise_)].root);
    if (!cands) throw std::logic_error("qf_sat: precise conjunct without candidates");
    std::stable_sort(cands->begin(), cands->end(),
                     [](const CandidateHeap& a, const CandidateHeap& b) { return a.size() < b.size(); });
    for (const auto& h : *cands) {
      if (q_.options.forbid_nil_alloc &&
          std::any_of(h.begin(), h.end(), [&](const CandidateCell& c) { return c.loc == v(0); }))
        continue;
      dom_ = 0;
      for (const auto& c : h) {
        tick();
        dom_ |= std::uint64_t{1} << c.loc;
        std::copy(c.value.begin(), c.value.end(), cell_.begin() + c.loc * k_);
      }
      heap_fixed_ = true;
      // pure conjuncts up to this depth were checked while assigning
      bool ok = std::all_of(conj_.begin(), conj_.end(),
                            [&](const Conj& c) { return c.pure || c.ready > depth || eval(c.root, dom_); });
      if (ok && cutoffs_assigned() && !cutoffs_monotone()) ok = false;
      if (ok && assign(depth, maxv)) return true;
      heap_fixed_ = false;
      dom_ = 0;
    }
    return false;
  }

  // Locations 0..distinct_-1 are named, the rest anonymous; allocated
  // anonymous locations always form a prefix. Without a general wand the
  // truth value does not depend on the universe, and a model needs at most
  // measure-many anonymous cells with values among the named locations,
  // the allocated ones and one spare.
  bool enumerate_heaps() {
    std::map<Loc, Tuple> forced;
    int lo = 0, hi = kUnbounded;
    for (const auto& c : conj_) {
      if (c.pure) continue;
      if (!collect_forced(c.root, forced)) return false;
      lo = std::max(lo, nodes_[static_cast<std::size_t>(c.root)].lo);
      hi = std::min(hi, nodes_[static_cast<std::size_t>(c.root)].hi);
    }
    std::uint64_t forced_dom = 0;
    for (auto& [l, val] : forced) {
      if (q_.options.forbid_nil_alloc && l == v(0)) return false;
      forced_dom |= std::uint64_t{1} << l;
      std::copy(val.begin(), val.end(), cell_.begin() + l * k_);
    }
    std::vector<Loc> named;
    for (Loc l = 0; l < distinct_; ++l)
      if (!(q_.options.forbid_nil_alloc && l == v(0)) && !((forced_dom >> l) & 1)) named.push_back(l);
    const int anon = s_ - distinct_;
    int amax = q_.restrict_domain ? std::min(anon, absent_) : anon;
    int amin = 0;
    if (!general_wand_) {
      amax = std::min(amax, measure_);
      amin = std::max(0, anon - 1);
    }
    const int nf = static_cast<int>(forced.size());
    const int total_max = std::min(hi, nf + static_cast<int>(named.size()) + amax);
    for (int total = std::max(lo, nf); total <= total_max; ++total)
      for (int a = amin; a <= std::min(amax, total - nf); ++a) {
        const std::size_t size = static_cast<std::size_t>(total - nf - a);
        if (size > named.size()) continue;
        first_free_ = distinct_ + a;
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        while (true) {
          dom_ = forced_dom;
          std::vector<Loc> locs;
          for (auto i : pick) locs.push_back(named[i]);
          for (Loc l = distinct_; l < distinct_ + a; ++l) locs.push_back(l);
          for (Loc l : locs) dom_ |= std::uint64_t{1} << l;
          if (cutoffs_monotone() && !fill_values(locs, 0)) return true;
          std::size_t i = size;
          while (i > 0 && pick[i - 1] == named.size() - size + i - 1) --i;
          if (i == 0) break;
          ++pick[i - 1];
          for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
      }
    dom_ = 0;
    return false;
  }

  // Cells every satisfying heap must contain: points-to atoms reachable
  // through separating and classical conjunction. False on a conflict.
  bool collect_forced(int id, std::map<Loc, Tuple>& out) {
    const CNode& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::PointsTo: {
        Loc t = v(n.terms[0]);
        if (t == v(0)) return false;
        Tuple val;
        for (std::size_t i = 1; i < n.terms.size(); ++i) val.push_back(v(n.terms[i]));
        auto [it, fresh] = out.emplace(t, val);
        return fresh || it->second == val;
      }
      case Op::And:
        return collect_forced(n.a, out) && collect_forced(n.b, out);
      case Op::Sep: {
        std::map<Loc, Tuple> a, b;
        if (!collect_forced(n.a, a) || !collect_forced(n.b, b)) return false;
        for (auto& [l, val] : b)
          if (!a.emplace(l, val).second) return false;  // both sides claim l
        for (auto& [l, val] : a) {
          auto [it, fresh] = out.emplace(l, val);
          if (!fresh && it->second != val) return false;
        }
        return true;
      }
      case Op::Wand:  // a -* b implies b when a holds on the empty extension
        return empty_ok(nodes_[static_cast<std::size_t>(n.a)]) != 1 || collect_forced(n.b, out);
      default:
        return true;
    }
  }

  // Returns false as soon as a satisfying heap is found (so the caller
  // stops). Unallocated anonymous locations are interchangeable, so values
  // introduce them in ascending order; without a general wand one of them
  // suffices.
  bool fill_values(const std::vector<Loc>& locs, std::size_t pos, int used = 0) {
    if (pos == locs.size() * static_cast<std::size_t>(k_)) {
      for (const auto& c : conj_)
        if (!c.pure && !eval(c.root, dom_)) return true;
      return false;
    }
    const std::size_t at = static_cast<std::size_t>(locs[pos / static_cast<std::size_t>(k_)] * k_) +
                           pos % static_cast<std::size_t>(k_);
    const int limit = std::min(s_, first_free_ + (general_wand_ ? used + 1 : 1));
    for (Loc x = 0; x < limit; ++x) {
      if (pos % static_cast<std::size_t>(k_) == 0) tick();
      cell_[at] = x;
      if (!fill_values(locs, pos + 1, used + (x == first_free_ + used ? 1 : 0))) return false;
    }
    return true;
  }

  Model extract() const {
    Model m;
    m.interp.universe_size = s_;
    for (std::size_t i = 0; i < order_.size(); ++i) m.interp.const_val[order_[i]] = val_[i];
    m.heap.arity = k_;
    for (Loc l = 0; l < s_; ++l)
      if ((dom_ >> l) & 1)
        m.heap.cells[l] = Tuple(cell_.begin() + l * k_, cell_.begin() + (l + 1) * k_);
    // Constants absent from the formula: a cut-off copies the nearest
    // preceding present cut-off (else the nearest following), which keeps
    // the cut-off allocation pattern monotone; others go to nil's location.
    const auto& cuts = q_.cutoffs;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      if (m.interp.const_val.count(cuts[i])) continue;
      std::optional<Loc> pick;
      for (std::size_t j = i; j-- > 0;)
        if (auto it = m.interp.const_val.find(cuts[j]); it != m.interp.const_val.end()) {
          pick = it->second;
          break;
        }
      if (!pick)
        for (std::size_t j = i + 1; j < cuts.size(); ++j)
          if (index_.count(cuts[j])) {
            pick = val_[static_cast<std::size_t>(index_.at(cuts[j]))];
            break;
          }
      m.interp.const_val[cuts[i]] = pick.value_or(val_[0]);
    }
    for (const auto& c : q_.constants)
      if (!m.interp.const_val.count(c)) m.interp.const_val[c] = val_[0];
    return m;
  }

  const QfQuery& q_;
  int k_;
  std::vector<Conj> conj_;
  std::vector<CNode> nodes_;
  std::vector<Term> order_;
  std::map<Term, int> index_;
  std::vector<int> present_cutoffs_;
  int absent_ = 0;
  int precise_ = -1;
  bool general_wand_ = false;
  int measure_ = 0;
  int first_free_ = 0;
  int bound_ = 1;

  int s_ = 1;
  int distinct_ = 0;
  std::vector<Loc> val_;
  std::vector<Loc> cell_;
  std::uint64_t dom_ = 0;
  bool heap_fixed_ = false;
  std::uint64_t steps_ = 0;
};

}  // namespace detail

/// Decides satisfiability of a ground formula. Sat models are re-checked
/// against the reference semantics before being returned.
inline QfAnswer qf_sat(const QfQuery& q) {
  detail::QfSearch search(q);
  QfAnswer ans = search.run();
  if (ans.sat()) {
    if (!eval(ans.model->interp, ans.model->heap, q.formula))
      throw std::logic_error("qf_sat: model fails reference evaluation: " + to_string(q.formula));
    if (!symmetry_break(q.cutoffs, ans.model->interp, ans.model->heap))
      throw std::logic_error("qf_sat: model violates cut-off symmetry breaking");
  }
  return ans;
}

/// Universe-size bound used by qf_sat for a query.
inline int qf_bound(const QfQuery& q) { return detail::QfSearch(q).bound(); }

}  // namespace slbsr
