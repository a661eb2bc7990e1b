#include <gtest/gtest.h>

#include "slbsr/qf_checker.hpp"

using namespace slbsr;
using namespace slbsr::fb;

namespace {
Term c(const char* n) { return Term::cnst(n); }

QfQuery query(FormulaPtr f, std::vector<Term> consts = {}, std::vector<Term> cuts = {}) {
  QfQuery q;
  q.formula = desugar(f);
  q.constants = consts;
  q.cutoffs = cuts;
  q.arity = std::max(1, data_arity(q.formula));
  return q;
}
}  // namespace

TEST(QfSat, Emp) {
  auto a = qf_sat(query(emp()));
  ASSERT_TRUE(a.sat());
  EXPECT_EQ(a.model->interp.universe_size, 1);
  EXPECT_TRUE(a.model->heap.cells.empty());
}

TEST(QfSat, PointsToAndEmp) { EXPECT_TRUE(qf_sat(query(conj(pto(c("x"), {c("y")}), emp()))).unsat()); }

TEST(QfSat, NilPointsTo) { EXPECT_TRUE(qf_sat(query(pto(Term::nil(), {c("x")}))).unsat()); }

TEST(QfSat, WorkedExampleWitness) {
  auto kx = c("k_x"), ky = c("k_y"), kz = c("k_z"), e = c("e_u"), l1 = c("l1"), l2 = c("l2");
  auto member = disj_all({eq(e, kx), eq(e, ky), eq(e, kz), eq(e, l1), eq(e, l2)});
  auto f = conj_all({neq(kx, ky), pto(kx, {kz}), conj(pto(kx, {e}), member)});
  auto a = qf_sat(query(f, {kx, ky, kz, e, l1, l2}, {l1, l2}));
  ASSERT_TRUE(a.sat());
  EXPECT_EQ(a.model->interp.value(e), a.model->interp.value(kz));
}

TEST(QfSat, WandNeedsSpareLocation) {
  // x -> x -* false forces x allocated, or nil
  auto x = c("x");
  auto f = conj(neq(x, Term::nil()), sep(alloc(x, 1), neg(emp())));
  auto a = qf_sat(query(f));
  ASSERT_TRUE(a.sat());
  EXPECT_TRUE(a.model->heap.allocated(a.model->interp.value(x)));
}

TEST(QfSat, ForbidNilAlloc) {
  // a non-empty heap over a one-element universe allocates nil
  auto f = neg(emp());
  auto q = query(f);
  auto a = qf_sat(q);
  ASSERT_TRUE(a.sat());
  EXPECT_EQ(a.model->interp.universe_size, 1);
  q.options.forbid_nil_alloc = true;
  auto b = qf_sat(q);
  ASSERT_TRUE(b.sat());
  EXPECT_GT(b.model->interp.universe_size, 1);
  EXPECT_FALSE(b.model->heap.allocated(b.model->interp.nil()));
}

TEST(QfSat, BudgetExhaustion) {
  auto f = conj(neg(emp()), neg(sep(neg(emp()), neg(emp()))));
  auto q = query(sep(f, sep(f, f)));
  q.options.budget = 3;
  EXPECT_EQ(qf_sat(q).status, QfAnswer::Status::ResourceOut);
}

TEST(QfSat, RejectsVariables) {
  EXPECT_THROW(qf_sat(query(pto(Term::var("y"), {c("a")}))), ContractViolation);
}

TEST(SymmetryBreak, Examples) {
  Interpretation I;
  I.universe_size = 3;
  I.const_val = {{Term::nil(), 0}, {c("l1"), 1}, {c("l2"), 2}};
  std::vector<Term> cuts{c("l1"), c("l2")};
  EXPECT_FALSE(symmetry_break(cuts, I, Heap{1, {{2, {0}}}}));
  EXPECT_TRUE(symmetry_break(cuts, I, Heap{}));
  EXPECT_TRUE(symmetry_break(cuts, I, Heap{1, {{1, {0}}, {2, {0}}}}));
  EXPECT_TRUE(symmetry_break(cuts, I, Heap{1, {{1, {0}}}}));
}

TEST(QfSat, CutoffOrderRespected) {
  auto l1 = c("l1"), l2 = c("l2");
  // l2 must be allocated, so the returned model allocates l1 as well
  auto f = conj(neq(l1, l2), sep(pto(l2, {Term::nil()}), tt()));
  auto a = qf_sat(query(f, {l1, l2}, {l1, l2}));
  ASSERT_TRUE(a.sat());
  EXPECT_TRUE(a.model->heap.allocated(a.model->interp.value(l1)));
}

TEST(QfSat, AbsentCutoffsFollowPresentOnes) {
  auto l1 = c("l1"), l2 = c("l2"), l3 = c("l3");
  auto f = pto(l2, {Term::nil()});
  auto a = qf_sat(query(f, {l1, l2, l3}, {l1, l2, l3}));
  ASSERT_TRUE(a.sat());
  EXPECT_TRUE(symmetry_break({l1, l2, l3}, a.model->interp, a.model->heap));
}

// ---- agreement with a naive enumerator ----

#include <functional>

#include "gen.hpp"
#include "props.hpp"

namespace {

// First universe size (<= max_s) with a model, searching every valuation
// and every heap without symmetry reduction; 0 if none.
int naive_min_universe(const FormulaPtr& f, const std::vector<Term>& consts, int k, int max_s) {
  for (int s = 1; s <= max_s; ++s) {
    Interpretation I;
    I.universe_size = s;
    std::function<bool(std::size_t)> vals = [&](std::size_t i) -> bool {
      if (i == consts.size()) {
        Heap h{k, {}};
        std::function<bool(Loc)> cells = [&](Loc l) -> bool {
          if (l == s) return eval(I, h, f);
          if (cells(l + 1)) return true;
          Tuple t(static_cast<std::size_t>(k), 0);
          while (true) {
            h.cells[l] = t;
            bool ok = cells(l + 1);
            h.cells.erase(l);
            if (ok) return true;
            std::size_t j = 0;
            while (j < t.size() && ++t[j] == s) t[j++] = 0;
            if (j == t.size()) return false;
          }
        };
        return cells(0);
      }
      for (Loc l = 0; l < s; ++l) {
        I.const_val[consts[i]] = l;
        if (vals(i + 1)) return true;
      }
      return false;
    };
    if (vals(0)) return s;
  }
  return 0;
}

void agree(int k, int max_s, int rounds, std::uint64_t seed) {
  gen::Rng rng(seed);
  std::vector<Term> pool{Term::nil(), c("a"), c("b"), c("d")};
  int checked = 0, skipped = 0;
  while (checked < rounds) {
    auto f = desugar(gen::qf(rng, pool, k, 3));
    if (measure(f) > 3) continue;
    ++checked;
    QfQuery q;
    q.formula = f;
    q.constants = {c("a"), c("b"), c("d")};
    q.arity = k;
    q.options.budget = 2'000'000;
    auto a = qf_sat(q);
    if (a.status == QfAnswer::Status::ResourceOut) {
      ++skipped;
      continue;
    }
    int naive = naive_min_universe(f, {Term::nil(), c("a"), c("b"), c("d")}, k, max_s);
    if (a.sat() && a.model->interp.universe_size <= max_s)
      EXPECT_EQ(naive, a.model->interp.universe_size) << to_string(f);
    else
      EXPECT_EQ(naive, 0) << to_string(f);
  }
  EXPECT_LE(skipped * 20, rounds) << "too many budget exhaustions";
}

}  // namespace

TEST(QfSat, AgreesWithNaiveK1) { agree(1, 3, 300, 11); }
TEST(QfSat, AgreesWithNaiveK2) { agree(2, 2, 200, 12); }

TEST(QfSat, RestrictedDomainMinimal) {
  gen::Rng rng(13);
  std::vector<Term> pool{Term::nil(), c("a"), c("b"), c("d")};
  int sized = 0;
  for (int i = 0; i < 300; ++i) {
    QfQuery q;
    q.formula = desugar(gen::qf(rng, pool, 1, 3));
    q.constants = {c("a"), c("b"), c("d"), c("e")};
    q.restrict_domain = true;
    q.options.budget = 2'000'000;
    auto a = qf_sat(q);
    if (a.status == QfAnswer::Status::ResourceOut) continue;
    const int naive = props::naive_min_universe(q, 4);
    if (a.sat() && a.model->interp.universe_size <= 4) {
      EXPECT_EQ(naive, a.model->interp.universe_size) << to_string(q.formula);
      sized += a.model->interp.universe_size > 2;
    } else {
      EXPECT_EQ(naive, 0) << to_string(q.formula);
    }
  }
  EXPECT_GE(sized, 3);
}

// Formulas with no model up to the bound B have none at size B + 1 either.
// One constant and measure <= 1 keep B small; formulas whose enumeration
// exceeds a step budget are skipped.
TEST(QfSat, NoModelsBeyondBound) {
  gen::Rng rng(14);
  std::vector<Term> pool{Term::nil(), c("a")};
  int checked = 0, skipped = 0;
  while (checked + skipped < 40) {
    auto f = desugar(gen::qf(rng, pool, 1, 3));
    if (measure(f) > 1) continue;
    QfQuery q;
    q.formula = f;
    q.constants = {c("a")};
    if (!qf_sat(q).unsat()) continue;
    const int s = qf_bound(q) + 1;
    Interpretation I;
    I.universe_size = s;
    I.const_val[Term::nil()] = 0;
    std::uint64_t steps = 0;
    bool found = false;
    try {
      for (Loc a = 0; a < s && !found; ++a) {
        I.const_val[c("a")] = a;
        std::vector<int> code(static_cast<std::size_t>(s), 0);
        while (!found) {
          Heap h{1, {}};
          for (int l = 0; l < s; ++l)
            if (code[static_cast<std::size_t>(l)] > 0) h.cells[l] = Tuple{code[static_cast<std::size_t>(l)] - 1};
          found = eval_bounded(I, h, f, steps, 5'000'000);
          std::size_t j = 0;
          while (j < code.size() && ++code[j] > s) code[j++] = 0;
          if (j == code.size()) break;
        }
      }
    } catch (const std::length_error&) {
      ++skipped;
      continue;
    }
    ++checked;
    EXPECT_FALSE(found) << to_string(f);
  }
  EXPECT_GE(checked, 30) << skipped << " skipped";
}
