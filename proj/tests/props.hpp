// Randomized property checks shared by the unit tests and the acceptance
// driver. Each returns counts so callers decide what to assert.
#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gen.hpp"
#include "slbsr/qf_checker.hpp"

namespace props {

using namespace slbsr;

struct Tally {
  int checked = 0;
  int violations = 0;
  int skipped = 0;  // evaluation budget exceeded
  std::string first_failure;

  void fail(const std::string& why) {
    if (violations++ == 0) first_failure = why;
  }
};

inline std::vector<Term> const_pool() {
  return {Term::nil(), Term::cnst("a"), Term::cnst("b"), Term::cnst("c")};
}

inline std::set<Loc> pick_subset(gen::Rng& rng, int universe) {
  std::set<Loc> S;
  for (Loc l = 0; l < universe; ++l)
    if (gen::pick(rng, 2)) S.insert(l);
  return S;
}

// Random interpretation of the pool constants over `universe` locations,
// nil at 0, aliasing allowed.
inline Interpretation random_interp(gen::Rng& rng, int universe) {
  Interpretation I;
  I.universe_size = universe;
  I.const_val[Term::nil()] = 0;
  for (const auto& t : const_pool())
    if (!(t == Term::nil())) I.const_val[t] = gen::pick(rng, universe);
  return I;
}

// shrink_heap post-conditions and truth transfer with
// n = measure(f), X = the constants of f. Both heaps must leave more than
// n locations free: a wand can observe a full universe, e.g.
// (not emp) -* false holds only when every location is allocated.
inline void shrink_transfer(gen::Rng& rng, int count, Tally& post, Tally& transfer) {
  const auto pool = const_pool();
  while (transfer.checked < count) {
    const int k = 1 + gen::pick(rng, 2);
    const FormulaPtr f = gen::qf(rng, pool, k, 3);
    const int n = measure(f);
    if (n > 3) continue;
    std::set<Term> X = free_symbols(f);
    X.insert(Term::nil());
    const int universe = static_cast<int>(X.size()) + n + 2;
    Interpretation I = random_interp(rng, universe);
    const auto IX = image(I, X);
    std::vector<Loc> outside;
    for (Loc l = 0; l < universe; ++l)
      if (!IX.count(l)) outside.push_back(l);
    std::shuffle(outside.begin(), outside.end(), rng);
    const std::set<Loc> L(outside.begin(), outside.begin() + n);
    const Loc v = outside[static_cast<std::size_t>(n)];
    const Heap h = gen::heap(rng, universe, k, 5);
    const Heap h2 = shrink_heap(I, h, n, X, L, v);
    if (universe - static_cast<int>(std::max(h.cells.size(), h2.cells.size())) <= n) continue;

    ++post.checked;
    if (n > 0 && !heap_equiv(I, {n, X, L}, h, h2)) post.fail("equiv: " + to_string(f));
    std::set<Loc> keep = IX;
    keep.insert(L.begin(), L.end());
    for (const auto& [l, val] : h2.cells) {
      if (!IX.count(l) && !L.count(l)) post.fail("domain: " + to_string(f));
      for (Loc x : val)
        if (!keep.count(x) && x != v) post.fail("prun: " + to_string(f));
    }

    std::uint64_t steps = 0;
    try {
      const bool a = eval_bounded(I, h, f, steps, 500'000);
      const bool b = eval_bounded(I, h2, f, steps, 1'000'000);
      ++transfer.checked;
      if (a != b) transfer.fail(to_string(f));
    } catch (const std::length_error&) {
      ++transfer.skipped;
    }
  }
}

// measure(not f) = measure(f), measure(f and g) = max, measure(f * g) = sum.
inline Tally measure_laws(gen::Rng& rng, int count) {
  Tally t;
  const auto pool = const_pool();
  using namespace fb;
  for (; t.checked < count; ++t.checked) {
    const int k = 1 + gen::pick(rng, 2);
    auto f = gen::qf(rng, pool, k, 4), g = gen::qf(rng, pool, k, 4);
    const int mf = measure(f), mg = measure(g);
    if (measure(neg(f)) != mf) t.fail("not: " + to_string(f));
    if (measure(conj(f, g)) != std::max(mf, mg)) t.fail("and: " + to_string(conj(f, g)));
    if (measure(sep(f, g)) != mf + mg) t.fail("sep: " + to_string(sep(f, g)));
  }
  return t;
}

// =_S is reflexive, symmetric and transitive; a larger S refines it.
inline Tally eq_mod_laws(gen::Rng& rng, int count) {
  Tally t;
  for (; t.checked < count; ++t.checked) {
    const int universe = 2 + gen::pick(rng, 4), k = 1 + gen::pick(rng, 3);
    auto tuple = [&] {
      Tuple x;
      for (int i = 0; i < k; ++i) x.push_back(gen::pick(rng, universe));
      return x;
    };
    const Tuple a = tuple(), b = tuple(), c = tuple();
    const auto S = pick_subset(rng, universe);
    auto T = S;
    for (Loc l = 0; l < universe; ++l)
      if (gen::pick(rng, 3) == 0) T.insert(l);
    if (!eq_mod_S(a, a, S)) t.fail("reflexive");
    if (eq_mod_S(a, b, S) != eq_mod_S(b, a, S)) t.fail("symmetric");
    if (eq_mod_S(a, b, S) && eq_mod_S(b, c, S) && !eq_mod_S(a, c, S)) t.fail("transitive");
    if (eq_mod_S(a, b, T) && !eq_mod_S(a, b, S)) t.fail("refinement");
  }
  return t;
}

// h ~_{m,X,T} h' implies h ~_{n,X,S} h' for n <= m and S subset of T. Pairs
// are built close to each other so the premise holds often.
inline Tally equiv_monotone(gen::Rng& rng, int count, int* premises = nullptr) {
  Tally t;
  int held = 0;
  for (; t.checked < count; ++t.checked) {
    const int universe = 3 + gen::pick(rng, 4), k = 1 + gen::pick(rng, 2);
    Interpretation I = random_interp(rng, universe);
    std::set<Term> X;
    for (const auto& c : const_pool())
      if (gen::pick(rng, 2)) X.insert(c);
    const Heap h = gen::heap(rng, universe, k, 4);
    Heap h2 = h;
    if (gen::pick(rng, 2)) {
      // perturb one cell or drop one
      if (!h2.cells.empty()) {
        auto it = std::next(h2.cells.begin(), gen::pick(rng, static_cast<int>(h2.cells.size())));
        if (gen::pick(rng, 2)) h2.cells.erase(it);
        else it->second[0] = gen::pick(rng, universe);
      }
    } else {
      h2 = gen::heap(rng, universe, k, 4);
    }
    const int m = 1 + gen::pick(rng, 3), n = 1 + gen::pick(rng, m);
    const auto T = pick_subset(rng, universe);
    std::set<Loc> S;
    for (Loc l : T)
      if (gen::pick(rng, 2)) S.insert(l);
    if (!heap_equiv(I, {m, X, T}, h, h2)) continue;
    ++held;
    if (!heap_equiv(I, {n, X, S}, h, h2)) t.fail("m=" + std::to_string(m) + " n=" + std::to_string(n));
  }
  if (premises) *premises = held;
  return t;
}

// Smallest universe (<= max_s) with a model of the ground query, by plain
// enumeration: nil at 0, constants over all locations up to renaming of the
// others, every heap whose domain lies in the image of the constants (the
// solver's restricted-domain semantics). 0 if none.
inline int naive_min_universe(const QfQuery& q, int max_s) {
  std::vector<Term> consts{Term::nil()};
  for (const auto& c : q.constants)
    if (!(c == Term::nil()) && std::find(consts.begin(), consts.end(), c) == consts.end()) consts.push_back(c);
  const FormulaPtr f = q.formula;
  const int k = q.arity;
  for (int s = 1; s <= max_s; ++s) {
    Interpretation I;
    I.universe_size = s;
    I.const_val[Term::nil()] = 0;
    std::function<bool(std::size_t, int)> vals = [&](std::size_t i, int used) -> bool {
      if (i == consts.size()) {
        std::vector<Loc> named;
        for (Loc l = 0; l < s && l < used; ++l) named.push_back(l);
        Heap h{k, {}};
        std::function<bool(std::size_t)> cells = [&](std::size_t j) -> bool {
          if (j == named.size()) return eval(I, h, f);
          if (cells(j + 1)) return true;
          if (q.options.forbid_nil_alloc && named[j] == 0) return false;
          Tuple t(static_cast<std::size_t>(k), 0);
          while (true) {
            h.cells[named[j]] = t;
            const bool ok = cells(j + 1);
            h.cells.erase(named[j]);
            if (ok) return true;
            std::size_t d = 0;
            while (d < t.size() && ++t[d] == s) t[d++] = 0;
            if (d == t.size()) return false;
          }
        };
        return cells(0);
      }
      // locations beyond `used` are interchangeable: try only the next one
      for (Loc l = 0; l <= std::min(used, s - 1); ++l) {
        I.const_val[consts[i]] = l;
        if (vals(i + 1, std::max(used, l + 1))) return true;
      }
      return false;
    };
    if (vals(1, 1)) return s;
  }
  return 0;
}

}  // namespace props
