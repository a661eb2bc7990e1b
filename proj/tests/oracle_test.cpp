#include <gtest/gtest.h>

#include "slbsr/cegqi.hpp"
#include "slbsr/oracle.hpp"

using namespace slbsr;
using namespace slbsr::fb;

namespace {
Term v(const char* n) { return Term::var(n); }
}  // namespace

// A single cell cannot point to every y: unsat at every size. Size 1 fails
// because the only location is nil.
TEST(Oracle, SingleCellCannotPointEverywhere) {
  auto in = functional_form(exists("x", forall("y", pto(v("x"), {v("y")}))), 1);
  auto a = oracle_solve(in);
  EXPECT_EQ(a.status, OracleAnswer::Status::Unsat);
  EXPECT_GT(a.cases, 0u);
}

TEST(Oracle, SelfLoopNeedsTwoLocations) {
  auto in = functional_form(exists("x", pto(v("x"), {v("x")})), 1);
  auto a = oracle_solve(in);
  ASSERT_EQ(a.status, OracleAnswer::Status::Sat);
  EXPECT_EQ(a.model->interp.universe_size, 2);
  EXPECT_TRUE(satisfies_sentence(in, *a.model));
}

TEST(Oracle, FiniteUniverseFormulaIsSat) {
  auto x = v("x"), y = v("y");
  auto in = functional_form(exists("x", forall("y", implies(neq(y, Term::nil()), sep(pto(y, {x}), tt())))), 1);
  auto a = oracle_solve(in);
  ASSERT_EQ(a.status, OracleAnswer::Status::Sat);
  EXPECT_TRUE(satisfies_sentence(in, *a.model));
}

TEST(Oracle, BudgetGivesResourceOut) {
  auto in = functional_form(exists("x", forall("y", pto(v("x"), {v("y")}))), 1);
  OracleOptions o;
  o.max_cases = 10;
  EXPECT_EQ(oracle_solve(in, o).status, OracleAnswer::Status::ResourceOut);
}

TEST(Oracle, UniverseCap) {
  // needs three locations: nil and two allocated cells
  auto x = v("x"), y = v("y");
  auto in = functional_form(exists("x", exists("y", sep(pto(x, {x}), pto(y, {y})))), 1);
  OracleOptions o;
  o.max_universe = 2;
  EXPECT_EQ(oracle_solve(in, o).status, OracleAnswer::Status::Unsat);
  auto a = oracle_solve(in);
  ASSERT_EQ(a.status, OracleAnswer::Status::Sat);
  EXPECT_EQ(a.model->interp.universe_size, 3);
}

TEST(Oracle, CostEstimateGrowsWithQuantifiers) {
  auto one = functional_form(exists("x", pto(v("x"), {v("x")})), 1);
  auto two = functional_form(exists("x", forall("y", pto(v("x"), {v("y")}))), 1);
  EXPECT_GT(oracle_cost(one), 0);
  EXPECT_GT(oracle_cost(two), oracle_cost(one));
}

TEST(EvalBounded, CountsSplitsAndThrows) {
  Interpretation I;
  I.universe_size = 3;
  I.const_val[Term::nil()] = 0;
  Heap h{1, {{1, {2}}, {2, {1}}}};
  auto f = sep(tt(), sep(tt(), tt()));
  std::uint64_t steps = 0;
  EXPECT_TRUE(eval_bounded(I, h, f, steps, 1000));
  EXPECT_GT(steps, 0u);
  auto g = wand(neg(emp()), ff());
  steps = 0;
  EXPECT_THROW(eval_bounded(I, h, g, steps, 0), std::length_error);
}

TEST(Oracle, NilCannotPoint) {
  auto in = functional_form(forall("y", neg(pto(Term::nil(), {v("y")}))), 1);
  auto a = oracle_solve(in);
  ASSERT_EQ(a.status, OracleAnswer::Status::Sat);
  EXPECT_EQ(a.model->interp.universe_size, 1);
  EXPECT_TRUE(a.model->heap.cells.empty());
}

TEST(Oracle, WorkedExampleIsUnsat) {
  auto x = v("x"), y = v("y"), z = v("z"), u = v("u");
  auto f = exists("x", exists("y", exists("z", forall("u", conj(neq(x, y), conj(pto(x, {z}), neg(pto(x, {u}))))))));
  EXPECT_EQ(oracle_solve(functional_form(f, 1)).status, OracleAnswer::Status::Unsat);
}

// Hand-enumerable: universe {nil, l}, one possible cell l -> nil or l -> l.
TEST(Oracle, TwoLocationCases) {
  auto x = v("x"), y = v("y");
  OracleOptions two;
  two.max_universe = 2;
  auto ask = [&](const FormulaPtr& f) { return oracle_solve(functional_form(f, 1), two).status; };
  using S = OracleAnswer::Status;
  EXPECT_EQ(ask(exists("x", pto(x, {Term::nil()}))), S::Sat);
  EXPECT_EQ(ask(exists("x", conj(neq(x, Term::nil()), emp()))), S::Sat);
  // two distinct allocated cells do not fit
  EXPECT_EQ(ask(exists("x", exists("y", sep(pto(x, {x}), pto(y, {y}))))), S::Unsat);
  // every non-nil location allocated: l -> anything
  EXPECT_EQ(ask(forall("y", implies(neq(y, Term::nil()), sep(pto(y, {Term::nil()}), tt())))), S::Sat);
  EXPECT_EQ(ask(exists("x", forall("y", conj(pto(x, {x}), neq(y, x))))), S::Unsat);
}
