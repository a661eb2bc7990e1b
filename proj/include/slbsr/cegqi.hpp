// Counterexample-guided instantiation for exists*forall* sentences.
//
// Gamma starts with the ground conjuncts. Each round checks gamma; if it
// is satisfiable, every non-ground conjunct phi_j is probed for a
// counterexample over the finite term set L, and the first counterexample
// found becomes a new instance phi_j(t). No counterexample means sat.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "slbsr/formula.hpp"
#include "slbsr/heap.hpp"
#include "slbsr/qf_checker.hpp"

namespace slbsr {

enum class Mode { Finite, Aleph0 };

struct SolveOptions {
  Mode mode = Mode::Finite;
  QfOptions qf;
  /// Called after every ground check with the query and its answer.
  std::function<void(const QfQuery&, const QfAnswer&)> observer;
};

struct Instantiation {
  int conjunct = 0;  // index into PrenexInput::conjuncts
  std::vector<Term> terms;
  bool operator==(const Instantiation&) const = default;
};

struct SolveResult {
  enum class Status { Sat, Unsat, ResourceOut };
  Status status = Status::Unsat;
  std::optional<Model> model;
  std::vector<Instantiation> trace;
  std::vector<std::string> log;
  /// The input actually solved (after the aleph0 transform, if any).
  PrenexInput solved;
  std::vector<Term> L;
  std::vector<Term> cutoffs;
  int rounds = 0;    // gamma checks
  int qf_calls = 0;  // all qf_sat calls
  std::size_t ground_instances = 0;
  double instantiation_bound = 0;  // p * |L|^n

  bool sat() const { return status == Status::Sat; }
  bool unsat() const { return status == Status::Unsat; }
};

// ---- aleph0 preprocessing ---------------------------------------------------

/// Guarded form that is satisfiable in some finite model iff the input is
/// satisfiable over a countably infinite location sort.
inline PrenexInput aleph0_transform(const PrenexInput& in) {
  using namespace fb;
  const std::size_t n = in.universals.size();
  if (n == 0) return in;
  std::vector<Term> named = in.skolems;
  named.insert(named.end(), in.constants.begin(), in.constants.end());
  named.push_back(Term::nil());

  std::set<std::string> taken;
  for (auto& t : named) taken.insert(t.name);
  std::vector<Term> d;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = "@d_" + std::to_string(i + 1);
    while (taken.count(name)) name += "'";
    taken.insert(name);
    d.push_back(Term::cnst(name));
  }

  std::vector<FormulaPtr> parts;
  for (const auto& di : d) {
    parts.push_back(neg(alloc(di, in.arity)));
    for (const auto& c : named) parts.push_back(neq(di, c));
  }
  auto psi = [&](int kind, std::size_t i) -> FormulaPtr {
    const Term& y = in.universals[i];
    if (kind == 0) return alloc(y, in.arity);
    if (kind == 2) return eq(y, d[i]);
    std::vector<FormulaPtr> alts;
    for (const auto& c : named) alts.push_back(eq(y, c));
    return disj_all(alts);
  };
  const std::size_t copies = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(n)));
  for (std::size_t code = 0; code < copies; ++code) {
    std::vector<FormulaPtr> guards;
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 3) guards.push_back(psi(static_cast<int>(c % 3), i));
    parts.push_back(implies(conj_all(guards), in.matrix));
  }

  PrenexInput out = in;
  out.skolems.insert(out.skolems.end(), d.begin(), d.end());
  out.matrix = desugar(conj_all(parts));
  out.conjuncts = miniscope(out.matrix, out.universals);
  return out;
}

// ---- term selection ----------------------------------------------------------

namespace detail {

inline bool same_values(const Interpretation& I, const FormulaPtr& a, const FormulaPtr& b) {
  if (a->terms.size() != b->terms.size()) return false;
  for (std::size_t i = 1; i < a->terms.size(); ++i)
    if (I.value(a->terms[i]) != I.value(b->terms[i])) return false;
  return true;
}

}  // namespace detail

/// Picks t_i in L with t_i = e_i in M. A candidate u is preferred when the
/// query has an atom u -> v' whose data equals (under M) the data of some
/// atom e_i -> v. Next come candidates sitting in the same data slot as e_i
/// in an atom whose location agrees under M (x -> u next to x -> e_i).
/// Remaining ties go to the earliest term of L.
inline std::vector<Term> select_terms(const Model& M, const std::vector<Term>& e, const std::vector<Term>& L,
                                      const FormulaPtr& query) {
  std::vector<FormulaPtr> atoms;
  points_to_atoms(query, atoms);
  const auto& I = M.interp;
  auto location_match = [&](const Term& u, const Term& ei) {
    for (const auto& a : atoms)
      if (a->terms[0] == u)
        for (const auto& b : atoms)
          if (b->terms[0] == ei && detail::same_values(I, a, b)) return true;
    return false;
  };
  auto slot_match = [&](const Term& u, const Term& ei) {
    for (const auto& a : atoms)
      for (const auto& b : atoms)
        for (std::size_t p = 1; p < a->terms.size() && p < b->terms.size(); ++p)
          if (a->terms[p] == u && b->terms[p] == ei && I.value(a->terms[0]) == I.value(b->terms[0]))
            return true;
    return false;
  };
  std::vector<Term> out;
  for (const auto& ei : e) {
    const Loc want = I.value(ei);
    std::optional<Term> best;
    int best_rank = 3;
    for (const auto& u : L) {
      if (I.value(u) != want) continue;
      int rank = location_match(u, ei) ? 0 : slot_match(u, ei) ? 1 : 2;
      if (rank < best_rank) best = u, best_rank = rank;
    }
    if (!best) throw std::logic_error("select_terms: no term of L equals " + to_string(ei));
    out.push_back(*best);
  }
  return out;
}

// ---- the procedure -------------------------------------------------------------

namespace detail {

inline std::string instance_line(const Instantiation& inst) {
  std::ostringstream os;
  os << "inst " << inst.conjunct + 1 << ": (";
  for (std::size_t i = 0; i < inst.terms.size(); ++i) os << (i ? "," : "") << to_string(inst.terms[i]);
  os << ')';
  return os.str();
}

inline std::string fresh(std::set<std::string>& taken, const std::string& base) {
  std::string name = base;
  for (int i = 2; taken.count(name); ++i) name = base + "_" + std::to_string(i);
  taken.insert(name);
  return name;
}

class Solver {
 public:
  Solver(const PrenexInput& input, const SolveOptions& opt)
      : in_(opt.mode == Mode::Aleph0 ? aleph0_transform(input) : input), opt_(opt) {
    std::set<std::string> taken;
    for (auto& t : in_.skolems) taken.insert(t.name);
    for (auto& t : in_.constants) taken.insert(t.name);
    const int n = static_cast<int>(in_.universals.size());
    const int q = measure(in_.matrix) + n;
    for (int i = 1; i <= q; ++i) cutoffs_.push_back(Term::cnst(fresh(taken, "@l_" + std::to_string(i))));
    // L: skolems, declared constants, cut-offs, nil
    L_ = in_.skolems;
    L_.insert(L_.end(), in_.constants.begin(), in_.constants.end());
    L_.insert(L_.end(), cutoffs_.begin(), cutoffs_.end());
    L_.push_back(Term::nil());
    for (auto& y : in_.universals) e_.push_back(Term::cnst(fresh(taken, "@e_" + y.name)));
    // phi_j(k, e) and the membership constraint on e
    std::map<std::string, Term> to_e;
    for (std::size_t i = 0; i < e_.size(); ++i) to_e[in_.universals[i].name] = e_[i];
    std::vector<FormulaPtr> member;
    for (const auto& ei : e_) {
      std::vector<FormulaPtr> alts;
      for (const auto& t : L_) alts.push_back(fb::eq(ei, t));
      member.push_back(fb::disj_all(alts));
    }
    membership_ = desugar(fb::conj_all(member));
    for (const auto& c : in_.conjuncts) at_e_.push_back(substitute(c.formula, to_e));
  }

  SolveResult run() {
    SolveResult res;
    res.solved = in_;
    res.L = L_;
    res.cutoffs = cutoffs_;
    const double p = static_cast<double>(in_.conjuncts.size());
    res.instantiation_bound =
        p * std::pow(static_cast<double>(L_.size()), static_cast<double>(in_.universals.size()));

    std::vector<FormulaPtr> gamma;
    for (std::size_t j = 0; j < in_.conjuncts.size(); ++j)
      if (in_.conjuncts[j].ground) {
        gamma.push_back(in_.conjuncts[j].formula);
        res.trace.push_back({static_cast<int>(j), {}});
        res.log.push_back(instance_line(res.trace.back()));
      }
    res.ground_instances = res.trace.size();

    std::vector<Term> gamma_consts = L_;
    std::vector<Term> probe_consts = L_;
    probe_consts.insert(probe_consts.end(), e_.begin(), e_.end());

    while (true) {
      ++res.rounds;
      auto g = ask(res, fb::conj_all(gamma), gamma_consts);
      if (g.status == QfAnswer::Status::ResourceOut) return finish(res, SolveResult::Status::ResourceOut);
      if (g.unsat()) return finish(res, SolveResult::Status::Unsat);

      bool refined = false;
      for (std::size_t j = 0; j < in_.conjuncts.size() && !refined; ++j) {
        if (in_.conjuncts[j].ground) continue;
        auto counter = fb::conj(fb::neg(at_e_[j]), membership_);
        auto query = fb::conj(fb::conj_all(gamma), counter);
        auto a = ask(res, query, probe_consts);
        if (a.status == QfAnswer::Status::ResourceOut) return finish(res, SolveResult::Status::ResourceOut);
        if (a.unsat()) continue;
        Instantiation inst{static_cast<int>(j), select_terms(*a.model, e_, L_, query)};
        for (const auto& old : res.trace)
          if (old == inst) throw std::logic_error("cegqi: repeated instantiation " + instance_line(inst));
        std::map<std::string, Term> sub;
        for (std::size_t i = 0; i < inst.terms.size(); ++i) sub[in_.universals[i].name] = inst.terms[i];
        gamma.push_back(substitute(in_.conjuncts[j].formula, sub));
        res.trace.push_back(inst);
        res.log.push_back(instance_line(inst));
        if (static_cast<double>(res.trace.size()) > res.instantiation_bound)
          throw std::logic_error("cegqi: instantiation bound exceeded");
        refined = true;
      }
      if (!refined) {
        res.model = g.model;
        return finish(res, SolveResult::Status::Sat);
      }
    }
  }

 private:
  QfAnswer ask(SolveResult& res, const FormulaPtr& f, const std::vector<Term>& consts) {
    QfQuery q;
    q.formula = f;
    q.constants = consts;
    q.cutoffs = cutoffs_;
    q.arity = in_.arity;
    q.options = opt_.qf;
    q.restrict_domain = true;
    auto a = qf_sat(q);
    if (opt_.observer) opt_.observer(q, a);
    const int id = ++res.qf_calls;
    const char* verdict = a.sat() ? "sat" : a.unsat() ? "unsat" : "resource-out";
    res.log.push_back("qf-call " + std::to_string(id) + ": " + verdict);
    return a;
  }

  static SolveResult& finish(SolveResult& res, SolveResult::Status st) {
    res.status = st;
    const char* verdict = st == SolveResult::Status::Sat     ? "sat"
                          : st == SolveResult::Status::Unsat ? "unsat"
                                                             : "resource-out";
    res.log.push_back(std::string("result: ") + verdict);
    return res;
  }

  PrenexInput in_;
  SolveOptions opt_;
  std::vector<Term> cutoffs_, L_, e_;
  FormulaPtr membership_;
  std::vector<FormulaPtr> at_e_;
};

}  // namespace detail

inline SolveResult solve(const PrenexInput& input, const SolveOptions& opt = {}) {
  return detail::Solver(input, opt).run();
}

/// Checks forall y. matrix by enumerating every y-tuple over the model's
/// universe.
inline bool satisfies_sentence(const PrenexInput& in, const Model& m) {
  auto I = m.interp;
  const std::size_t n = in.universals.size();
  std::vector<Loc> ys(n, 0);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) I.var_val[in.universals[i].name] = ys[i];
    if (!eval(I, m.heap, in.matrix)) return false;
    std::size_t i = 0;
    while (i < n && ++ys[i] == I.universe_size) ys[i++] = 0;
    if (i == n) return true;
  }
}

inline void print_trace(std::ostream& os, const SolveResult& r) {
  for (const auto& line : r.log) os << line << '\n';
}

}  // namespace slbsr
