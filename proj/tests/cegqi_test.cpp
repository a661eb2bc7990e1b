#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

#include "gen.hpp"
#include "slbsr/cegqi.hpp"
#include "slbsr/oracle.hpp"

using namespace slbsr;
using namespace slbsr::fb;

namespace {
Term c(const char* n) { return Term::cnst(n); }
Term v(const char* n) { return Term::var(n); }

FormulaPtr worked_example() {
  auto x = v("x"), y = v("y"), z = v("z"), u = v("u");
  return exists("x", exists("y", exists("z", forall("u", conj(neq(x, y), conj(pto(x, {z}), neg(pto(x, {u}))))))));
}

FormulaPtr finite_only() {
  auto x = v("x"), y = v("y");
  return exists("x", forall("y", implies(neq(y, Term::nil()), sep(pto(y, {x}), tt()))));
}
}  // namespace

TEST(Solve, WorkedExample) {
  auto t0 = std::chrono::steady_clock::now();
  auto r = solve(functional_form(worked_example()));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_TRUE(r.unsat());
  EXPECT_LT(secs, 1.0);
  // two ground instances, then u <- k_z
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.ground_instances, 2u);
  EXPECT_EQ(r.trace[2].conjunct, 2);
  ASSERT_EQ(r.trace[2].terms.size(), 1u);
  EXPECT_EQ(to_string(r.trace[2].terms[0]), "k_z");
  EXPECT_EQ(r.rounds, 2);
  EXPECT_TRUE(std::find(r.log.begin(), r.log.end(), "inst 3: (k_z)") != r.log.end());
  EXPECT_EQ(r.log.back(), "result: unsat");
}

TEST(Solve, FiniteVersusAleph0) {
  auto in = functional_form(finite_only());
  SolveOptions o;
  auto fin = solve(in, o);
  ASSERT_TRUE(fin.sat());
  EXPECT_TRUE(satisfies_sentence(fin.solved, *fin.model));
  o.mode = Mode::Aleph0;
  auto inf = solve(in, o);
  EXPECT_TRUE(inf.unsat());
}

TEST(Solve, QuantifierFreeSat) {
  auto r = solve(functional_form(emp()));
  ASSERT_TRUE(r.sat());
  EXPECT_EQ(r.qf_calls, 1);
}

TEST(Solve, BoundRespected) {
  for (auto f : {worked_example(), finite_only()}) {
    auto r = solve(functional_form(f));
    EXPECT_LE(static_cast<double>(r.trace.size()), r.instantiation_bound);
  }
}

TEST(Solve, ForallNotNilIsUnsat) {
  // nil must be a candidate instantiation
  auto r = solve(functional_form(forall("y", neq(v("y"), Term::nil()))));
  EXPECT_TRUE(r.unsat());
}

TEST(Aleph0Transform, CopyCounts) {
  auto in = functional_form(finite_only());
  auto t = aleph0_transform(in);
  int guarded = 0;
  for (auto& cj : t.conjuncts) guarded += cj.ground ? 0 : 1;
  EXPECT_EQ(guarded, 3);
  auto two = functional_form(exists("x", forall("y", forall("z", neq(v("y"), v("z"))))));
  guarded = 0;
  for (auto& cj : aleph0_transform(two).conjuncts) guarded += cj.ground ? 0 : 1;
  EXPECT_EQ(guarded, 9);
  auto none = functional_form(emp());
  EXPECT_TRUE(structurally_equal(aleph0_transform(none).matrix, none.matrix));
}

TEST(SelectTerms, Cases) {
  Model M;
  M.interp.universe_size = 4;
  M.interp.const_val = {{Term::nil(), 0}, {c("k_x"), 1}, {c("k_z"), 2}, {c("e"), 2},
                        {c("l1"), 3}, {c("l2"), 3}, {c("a"), 0}, {c("b"), 0}};
  auto q = pto(c("k_x"), {c("e")});
  EXPECT_EQ(select_terms(M, {c("e")}, {c("k_x"), c("k_z"), c("l1"), c("l2"), Term::nil()}, q),
            (std::vector<Term>{c("k_z")}));
  M.interp.const_val[c("e")] = 3;
  EXPECT_EQ(select_terms(M, {c("e")}, {c("k_x"), c("k_z"), c("l1"), c("l2"), Term::nil()}, q),
            (std::vector<Term>{c("l1")}));
  // heuristic: l2 -> b matches e -> a in value
  auto q2 = conj(pto(c("e"), {c("a")}), pto(c("l2"), {c("b")}));
  EXPECT_EQ(select_terms(M, {c("e")}, {c("l1"), c("l2")}, q2), (std::vector<Term>{c("l2")}));
}

// Small random sentences against exhaustive enumeration. Cases either side
// cannot finish within its budget are skipped, but most must be decided.
TEST(Solve, AgreesWithOracle) {
  gen::Rng rng(77);
  int decided = 0, skipped = 0;
  while (decided < 60) {
    const int k = 1 + gen::pick(rng, 2);
    PrenexInput in;
    try {
      in = functional_form(gen::sentence(rng, {2, 2, k, 3}), k);
    } catch (const FragmentError&) {
      continue;
    }
    if (oracle_cost(in) > 5e4) continue;
    SolveOptions o;
    o.qf.budget = 2'000'000;
    auto r = solve(in, o);
    auto b = oracle_solve(in, {500'000});
    if (r.status == SolveResult::Status::ResourceOut || b.status == OracleAnswer::Status::ResourceOut) {
      ++skipped;
      continue;
    }
    ++decided;
    ASSERT_EQ(r.sat(), b.status == OracleAnswer::Status::Sat) << to_string(in.matrix);
    if (r.sat()) {
      ASSERT_TRUE(satisfies_sentence(r.solved, *r.model));
    }
  }
  EXPECT_LT(skipped, 20);
}

// aleph0 answers against exhaustive enumeration of the guarded form, one
// universal at most.
TEST(Solve, Aleph0AgreesWithOracleOnGuardedForm) {
  gen::Rng rng(78);
  int decided = 0, skipped = 0, sat = 0;
  while (decided < 40 && skipped < 200) {
    const int k = 1 + gen::pick(rng, 2);
    PrenexInput in;
    try {
      in = functional_form(gen::sentence(rng, {2, 1, k, 3}), k);
    } catch (const FragmentError&) {
      continue;
    }
    const PrenexInput guarded = aleph0_transform(in);
    if (oracle_cost(guarded) > 1e5) continue;
    SolveOptions o;
    o.mode = Mode::Aleph0;
    o.qf.budget = 2'000'000;
    auto r = solve(in, o);
    auto b = oracle_solve(guarded, {2'000'000});
    if (r.status == SolveResult::Status::ResourceOut || b.status == OracleAnswer::Status::ResourceOut) {
      ++skipped;
      continue;
    }
    ++decided;
    sat += r.sat();
    ASSERT_EQ(r.sat(), b.status == OracleAnswer::Status::Sat) << to_string(in.matrix);
  }
  EXPECT_EQ(decided, 40);
  EXPECT_GT(sat, 0);
}
