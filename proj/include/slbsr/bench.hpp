// Benchmark families: finite unfoldings of inductive predicates, entailments
// encoded as exists*forall* satisfiability queries, and the manual
// instantiation protocol the solver is compared against.
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "slbsr/cegqi.hpp"
#include "slbsr/formula.hpp"
#include "slbsr/oracle.hpp"
#include "slbsr/parser.hpp"
#include "slbsr/qf_checker.hpp"

namespace slbsr {

struct Call {
  std::string pred;
  std::vector<Term> args;
};

/// One disjunct of a predicate body: exists vars. guard /\ (parts * calls).
struct Branch {
  std::vector<std::string> exists;
  FormulaPtr guard = fb::tt();
  std::vector<FormulaPtr> parts;
  std::vector<Call> calls;
};

/// What a recursive call becomes once the depth runs out.
enum class ZeroRule {
  False,    // the call is dropped: false
  Base,     // the call-free branches of the body
  Indexed,  // an explicit depth-0 definition
};

struct PredicateDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<Branch> branches;
  ZeroRule zero = ZeroRule::False;
  FormulaPtr indexed_base;  // over params, for ZeroRule::Indexed
};

using PredicateSet = std::map<std::string, PredicateDef>;

namespace detail {

class Unfolder {
 public:
  Unfolder(const PredicateSet& defs, std::optional<ZeroRule> zero) : defs_(defs), zero_(zero) {}

  FormulaPtr run(const std::string& name, const std::vector<Term>& args, int depth) {
    auto it = defs_.find(name);
    if (it == defs_.end()) throw ContractViolation("unfold: unknown predicate " + name);
    const PredicateDef& d = it->second;
    if (args.size() != d.params.size())
      throw ContractViolation("unfold: " + name + " expects " + std::to_string(d.params.size()) +
                              " arguments, got " + std::to_string(args.size()));
    std::map<std::string, Term> sub;
    for (std::size_t i = 0; i < args.size(); ++i) sub[d.params[i]] = args[i];

    if (depth == 0) {
      switch (zero_.value_or(d.zero)) {
        case ZeroRule::False: return fb::ff();
        case ZeroRule::Indexed:
          if (!d.indexed_base) throw ContractViolation("unfold: " + name + " has no depth-0 definition");
          return substitute(d.indexed_base, sub);
        case ZeroRule::Base: break;
      }
    }
    std::vector<FormulaPtr> alts;
    for (const auto& b : d.branches) {
      if (depth == 0 && !b.calls.empty()) continue;
      alts.push_back(branch(b, sub, depth));
    }
    return fb::disj_all(alts);
  }

 private:
  FormulaPtr branch(const Branch& b, std::map<std::string, Term> sub, int depth) {
    std::vector<std::string> fresh;
    for (const auto& v : b.exists) {
      fresh.push_back(v + "_" + std::to_string(++counter_));
      sub[v] = Term::var(fresh.back());
    }
    std::vector<FormulaPtr> parts;
    for (const auto& p : b.parts) parts.push_back(substitute(p, sub));
    for (const auto& c : b.calls) {
      std::vector<Term> args;
      for (const auto& a : c.args) args.push_back(a.is_var() && sub.count(a.name) ? sub.at(a.name) : a);
      parts.push_back(run(c.pred, args, depth - 1));
    }
    FormulaPtr body = fb::sep_all(parts);
    if (b.guard->op != Op::True) body = fb::conj(substitute(b.guard, sub), body);
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) body = fb::exists(*it, body);
    return body;
  }

  const PredicateSet& defs_;
  std::optional<ZeroRule> zero_;
  int counter_ = 0;
};

}  // namespace detail

/// n-fold unfolding; existentials get fresh names `<var>_<i>`. `zero`
/// overrides each predicate's own depth-0 rule.
inline FormulaPtr unfold(const PredicateSet& defs, const std::string& name, const std::vector<Term>& args,
                         int depth, std::optional<ZeroRule> zero = std::nullopt) {
  if (depth < 0) throw ContractViolation("unfold: negative depth");
  return detail::Unfolder(defs, zero).run(name, args, depth);
}

inline FormulaPtr unfold(const PredicateDef& def, const std::vector<Term>& args, int depth,
                         std::optional<ZeroRule> zero = std::nullopt) {
  return unfold(PredicateSet{{def.name, def}}, def.name, args, depth, zero);
}

// ---- predicate library --------------------------------------------------------

namespace preds {

inline Term v(const char* n) { return Term::var(n); }

inline PredicateSet library() {
  using namespace fb;
  const Term x = v("x"), y = v("y"), z = v("z"), u = v("u"), a = v("a"), b = v("b"), l = v("l"), r = v("r");
  const Term nil = Term::nil();
  PredicateSet s;
  auto add = [&](PredicateDef d) { s[d.name] = std::move(d); };
  const ZeroRule B = ZeroRule::Base;

  add({"ls-hat", {"x", "y"},
       {{{}, eq(x, y), {emp()}, {}},
        {{"z"}, neq(x, y), {pto(x, {z})}, {{"ls-hat", {z, y}}}}}, B, nullptr});
  add({"ls", {"x", "y"},
       {{{}, eq(x, y), {emp()}, {}},
        {{"u"}, tt(), {pto(x, {u})}, {{"ls", {u, y}}}}}, B, nullptr});

  add({"tree-hat", {"x"},
       {{{}, eq(x, nil), {emp()}, {}},
        {{"l", "r"}, neq(l, r), {pto(x, {l, r})}, {{"tree", {l}}, {"tree", {r}}}}}, B, nullptr});
  add({"tree", {"x"},
       {{{}, eq(x, nil), {emp()}, {}},
        {{"l", "r"}, tt(), {pto(x, {l, r})}, {{"tree", {l}}, {"tree", {r}}}}}, B, nullptr});

  // tree segments from x to the hole y
  add({"ts-hat", {"x", "y"},
       {{{}, eq(x, y), {emp()}, {}},
        {{"l", "r"}, neq(x, y), {pto(x, {l, r})}, {{"ts-hat", {l, y}}, {"tree", {r}}}},
        {{"l", "r"}, neq(x, y), {pto(x, {l, r})}, {{"tree", {l}}, {"ts-hat", {r, y}}}}}, B, nullptr});
  add({"ts", {"x", "y"},
       {{{}, eq(x, y), {emp()}, {}},
        {{"l", "r"}, tt(), {pto(x, {l, r})}, {{"ts", {l, y}}, {"tree", {r}}}},
        {{"l", "r"}, tt(), {pto(x, {l, r})}, {{"tree", {l}}, {"ts", {r, y}}}}}, B, nullptr});

  add({"pos1", {"x", "a"},
       {{{}, tt(), {pto(x, {a})}, {}},
        {{"y", "b"}, tt(), {pto(x, {a})}, {{"pos1", {y, b}}}}}, B, nullptr});
  add({"neg1", {"x", "a"},
       {{{}, tt(), {neg(pto(x, {a}))}, {}},
        {{"y", "b"}, tt(), {pto(x, {a})}, {{"neg1", {y, b}}}}}, B, nullptr});
  add({"neg2", {"x", "a"},
       {{{}, tt(), {pto(x, {a})}, {}},
        {{"y", "b"}, tt(), {neg(pto(x, {a}))}, {{"neg2", {y, b}}}}}, B, nullptr});
  add({"pos2", {"x", "a"},
       {{{}, tt(), {pto(x, {a})}, {}},
        {{"y"}, tt(), {pto(x, {a})}, {{"pos2", {a, y}}}}}, B, nullptr});
  add({"neg3", {"x", "a"},
       {{{}, tt(), {neg(pto(x, {a}))}, {}},
        {{"y"}, tt(), {pto(x, {a})}, {{"neg3", {a, y}}}}}, B, nullptr});
  add({"neg4", {"x", "a"},
       {{{}, tt(), {pto(x, {a})}, {}},
        {{"y"}, tt(), {neg(pto(x, {a}))}, {{"neg4", {a, y}}}}}, B, nullptr});

  // lists with an explicit depth-0 case; zlist cells carry the constant c0
  const Term c0 = Term::cnst("c0");
  add({"list", {"x"}, {{{"y"}, tt(), {pto(x, {y})}, {{"list", {y}}}}}, ZeroRule::Indexed,
       conj(emp(), eq(x, nil))});
  add({"zlist", {"x"}, {{{"y"}, tt(), {pto(x, {c0, y})}, {{"zlist", {y}}}}}, ZeroRule::Indexed,
       conj(emp(), eq(x, nil))});
  return s;
}

}  // namespace preds

// ---- entailments --------------------------------------------------------------

enum class Verdict { Valid, Invalid, Unknown };

inline const char* to_string(Verdict v) {
  return v == Verdict::Valid ? "valid" : v == Verdict::Invalid ? "invalid" : "unknown";
}

/// lhs |= rhs, both over the free variables `params`.
struct EntailmentCase {
  std::string family;
  int n = 1;
  std::vector<std::string> params;
  FormulaPtr lhs, rhs;
  int arity = 1;
  Verdict expected = Verdict::Unknown;
  std::string note;  // where the expected verdict comes from

  std::string id() const { return family + "_n" + std::to_string(n); }
};

/// exists params. lhs /\ ~rhs; the entailment holds iff this is unsatisfiable.
inline FormulaPtr entailment_sentence(const EntailmentCase& c) {
  FormulaPtr f = fb::conj(c.lhs, fb::neg(c.rhs));
  for (auto it = c.params.rbegin(); it != c.params.rend(); ++it) f = fb::exists(*it, f);
  return f;
}

inline PrenexInput encode_entailment(const EntailmentCase& c) {
  return functional_form(entailment_sentence(c), c.arity);
}

/// x |= ... over (x, y): lhs exists z. x != y /\ x |-> z, rhs exists u. x |-> u.
inline EntailmentCase intro_entailment() {
  using namespace fb;
  const Term x = Term::var("x"), y = Term::var("y"), z = Term::var("z"), u = Term::var("u");
  EntailmentCase c;
  c.family = "intro";
  c.params = {"x", "y"};
  c.lhs = exists("z", conj(neq(x, y), pto(x, {z})));
  c.rhs = exists("u", pto(x, {u}));
  c.expected = Verdict::Valid;
  c.note = "base step of the acyclic-to-cyclic list segment proof";
  return c;
}

struct Family {
  std::string name, lhs_pred, rhs_pred;
  int arity;
};

inline const std::vector<Family>& table1_families() {
  static const std::vector<Family> f{
      {"ls-hat_ls", "ls-hat", "ls", 1},     {"tree-hat_tree", "tree-hat", "tree", 2},
      {"ts-hat_ts", "ts-hat", "ts", 2},     {"pos1_neg1", "pos1", "neg1", 1},
      {"pos1_neg2", "pos1", "neg2", 1},     {"pos2_neg3", "pos2", "neg3", 1},
      {"pos2_neg4", "pos2", "neg4", 1},
  };
  return f;
}

inline EntailmentCase table1_case(const Family& fam, int n) {
  const auto defs = preds::library();
  EntailmentCase c;
  c.family = fam.name;
  c.n = n;
  c.params = defs.at(fam.lhs_pred).params;
  std::vector<Term> args;
  for (const auto& p : c.params) args.push_back(Term::var(p));
  // separate unfoldings so that existential names stay apart
  detail::Unfolder u(defs, std::nullopt);
  c.lhs = u.run(fam.lhs_pred, args, n);
  c.rhs = u.run(fam.rhs_pred, args, n);
  c.arity = fam.arity;
  if (fam.name == "pos2_neg4" && n == 1) {
    c.expected = Verdict::Invalid;
    c.note = "counterexample x |-> a * a |-> y";
  } else {
    c.expected = Verdict::Valid;
    c.note = n == 1 ? "brute-force oracle" : "holds branchwise for every unfolding depth";
  }
  return c;
}

inline std::vector<EntailmentCase> table1_corpus(const std::vector<int>& depths) {
  for (int d : depths)
    if (d != 1 && d != 2 && d != 3 && d != 4 && d != 8)
      throw ContractViolation("table1_corpus: depth must be one of 1,2,3,4,8");
  std::vector<EntailmentCase> out;
  for (const auto& fam : table1_families())
    for (int d : depths) out.push_back(table1_case(fam, d));
  return out;
}

// ---- manual instantiation -----------------------------------------------------

struct ManualResult {
  enum class Outcome { Valid, Invalid, Inconclusive, ResourceOut };
  Outcome outcome = Outcome::Inconclusive;
  int step = 0;  // protocol step that decided
  std::vector<std::pair<Term, Term>> equalities;
};

inline const char* to_string(ManualResult::Outcome o) {
  switch (o) {
    case ManualResult::Outcome::Valid: return "valid";
    case ManualResult::Outcome::Invalid: return "invalid";
    case ManualResult::Outcome::Inconclusive: return "inconclusive";
    case ManualResult::Outcome::ResourceOut: return "resource-out";
  }
  return "?";
}

/// Three qf checks: lhs alone, lhs /\ rhs with its existentials as fresh
/// constants, then lhs /\ ~rhs /\ E where E equates every (lhs, rhs)
/// existential pair that shares a location in the second model.
inline ManualResult manual_inst_check(const EntailmentCase& c, const QfOptions& opt = {}) {
  using namespace fb;
  ManualResult res;
  FormulaPtr left = c.lhs;
  for (auto it = c.params.rbegin(); it != c.params.rend(); ++it) left = exists(*it, left);
  const PrenexInput L = functional_form(left, c.arity);

  // rhs over the same parameter constants, its existentials as fresh constants
  std::map<std::string, Term> to_param;
  for (std::size_t i = 0; i < c.params.size(); ++i) to_param[c.params[i]] = L.skolems[i];
  const PrenexInput R = functional_form(substitute(c.rhs, to_param), c.arity);
  if (!R.universals.empty()) throw FragmentError("manual_inst_check: rhs is not existential");
  std::set<std::string> taken;
  for (const auto& k : L.skolems) taken.insert(k.name);
  std::map<Term, Term> rename;
  std::vector<Term> ys;
  for (const auto& k : R.skolems) {
    std::string name = "@r_" + display_name(k.name).substr(2);
    for (int i = 2; taken.count(name); ++i) name = "@r_" + display_name(k.name).substr(2) + "_" + std::to_string(i);
    taken.insert(name);
    ys.push_back(Term::cnst(name));
    rename[k] = ys.back();
  }
  std::function<FormulaPtr(const FormulaPtr&)> ren = [&](const FormulaPtr& f) -> FormulaPtr {
    if (!f) return f;
    Formula g = *f;
    for (auto& t : g.terms)
      if (auto it = rename.find(t); it != rename.end()) t = it->second;
    g.lhs = ren(f->lhs);
    g.rhs = ren(f->rhs);
    return make(std::move(g));
  };
  const FormulaPtr phi = L.matrix, psi = ren(R.matrix);

  auto check = [&](const FormulaPtr& f, const std::vector<Term>& consts) {
    QfQuery q;
    q.formula = f;
    q.constants = consts;
    q.arity = c.arity;
    q.options = opt;
    return qf_sat(q);
  };
  std::vector<Term> xs = L.skolems;
  xs.insert(xs.end(), L.constants.begin(), L.constants.end());
  std::vector<Term> all = xs;
  all.insert(all.end(), ys.begin(), ys.end());

  res.step = 1;
  auto a1 = check(phi, xs);
  if (a1.status == QfAnswer::Status::ResourceOut) return res.outcome = ManualResult::Outcome::ResourceOut, res;
  if (a1.unsat()) return res.outcome = ManualResult::Outcome::Valid, res;

  res.step = 2;
  auto a2 = check(conj(phi, psi), all);
  if (a2.status == QfAnswer::Status::ResourceOut) return res.outcome = ManualResult::Outcome::ResourceOut, res;
  if (a2.unsat()) return res.outcome = ManualResult::Outcome::Invalid, res;

  res.step = 3;
  std::vector<FormulaPtr> E;
  const auto& I = a2.model->interp;
  for (const auto& x : L.skolems)
    for (const auto& y : ys)
      if (I.value(x) == I.value(y)) {
        res.equalities.emplace_back(x, y);
        E.push_back(eq(x, y));
      }
  auto a3 = check(desugar(conj(conj(phi, neg(psi)), conj_all(E))), all);
  if (a3.status == QfAnswer::Status::ResourceOut) return res.outcome = ManualResult::Outcome::ResourceOut, res;
  res.outcome = a3.unsat() ? ManualResult::Outcome::Valid : ManualResult::Outcome::Inconclusive;
  return res;
}

// ---- corpus files -------------------------------------------------------------

/// The entailment's negation as a problem in the textual input format.
inline Problem entailment_problem(const EntailmentCase& c) {
  Problem p;
  p.arity = c.arity;
  p.assertion = entailment_sentence(c);
  constants_in_order(p.assertion, p.constants);
  p.commands = {"declare-sort", "declare-heap"};
  p.commands.insert(p.commands.end(), p.constants.size(), "declare-const");
  p.commands.insert(p.commands.end(), {"assert", "check-sat"});
  return p;
}

inline void write_problem(std::ostream& os, const EntailmentCase& c) {
  os << "; " << c.id() << ": expected " << to_string(c.expected);
  if (!c.note.empty()) os << " (" << c.note << ")";
  os << '\n';
  print(os, entailment_problem(c));
}

/// Writes `<family>_n<depth>.slq` per case; returns the paths.
inline std::vector<std::filesystem::path> write_corpus(const std::filesystem::path& dir,
                                                       const std::vector<EntailmentCase>& cases) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& c : cases) {
    out.push_back(dir / (c.id() + ".slq"));
    std::ofstream f(out.back());
    if (!f) throw std::runtime_error("cannot write " + out.back().string());
    write_problem(f, c);
  }
  return out;
}

struct BenchRow {
  std::string id;
  Verdict expected = Verdict::Unknown;
  std::string solver, oracle = "-";
  int qf_calls = 0;
  std::size_t instances = 0;
  double seconds = 0;
};

inline void write_summary(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "case\texpected\tsolver\toracle\tqf_calls\tinstances\tseconds\n";
  for (const auto& r : rows)
    os << r.id << '\t' << to_string(r.expected) << '\t' << r.solver << '\t' << r.oracle << '\t' << r.qf_calls
       << '\t' << r.instances << '\t' << r.seconds << '\n';
}

}  // namespace slbsr
