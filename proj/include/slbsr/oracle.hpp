// Brute-force decision procedure for exists*forall* sentences over finite
// universes, used to cross-check the instantiation-based solver. It only
// shares the reference evaluator with the rest of the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "slbsr/formula.hpp"
#include "slbsr/heap.hpp"

namespace slbsr {

struct OracleOptions {
  std::uint64_t max_cases = 50'000'000;  // (valuation, heap, y) triples plus evaluator steps
  int max_universe = 0;                   // 0: measure + |constants| + n + 2
};

struct OracleAnswer {
  enum class Status { Sat, Unsat, ResourceOut };
  Status status = Status::Unsat;
  std::optional<Model> model;
  std::uint64_t cases = 0;
};

namespace detail {

class Brute {
 public:
  Brute(const PrenexInput& in, const OracleOptions& opt) : in_(in), opt_(opt) {
    consts_ = in.skolems;
    consts_.insert(consts_.end(), in.constants.begin(), in.constants.end());
    consts_.push_back(Term::nil());
    m_ = measure(in.matrix);
    n_ = static_cast<int>(in.universals.size());
  }

  OracleAnswer run() {
    OracleAnswer ans;
    const int bound = opt_.max_universe > 0 ? opt_.max_universe : m_ + static_cast<int>(consts_.size()) + n_ + 2;
    try {
      for (s_ = 1; s_ <= bound; ++s_) {
        I_ = Interpretation{};
        I_.universe_size = s_;
        if (valuations(0, 0)) {
          ans.status = OracleAnswer::Status::Sat;
          ans.model = Model{I_, h_};
          ans.model->interp.var_val.clear();
          break;
        }
      }
    } catch (const std::length_error&) {
      ans.status = OracleAnswer::Status::ResourceOut;
    }
    ans.cases = cases_;
    return ans;
  }

 private:
  // Canonical valuations: a constant takes an old value or the next new one.
  bool valuations(std::size_t i, int used) {
    if (i == consts_.size()) return heaps(used);
    for (Loc l = 0; l <= std::min(used, s_ - 1); ++l) {
      I_.const_val[consts_[i]] = l;
      if (valuations(i + 1, std::max(used, l + 1))) return true;
    }
    return false;
  }

  // Heaps over the named locations plus up to measure+n anonymous ones,
  // values among those and one spare anonymous location.
  bool heaps(int named) {
    const int anon = s_ - named;
    const int spare_cells = std::min(anon, m_ + n_);
    std::vector<Loc> dom_cands;
    for (Loc l = 0; l < named + spare_cells; ++l) dom_cands.push_back(l);
    std::vector<Loc> values = dom_cands;
    if (anon > spare_cells) values.push_back(named + spare_cells);
    h_ = Heap{in_.arity, {}};
    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
      if (i == dom_cands.size()) return all_y();
      if (rec(i + 1)) return true;
      std::vector<std::size_t> idx(static_cast<std::size_t>(in_.arity), 0);
      while (true) {
        Tuple t;
        for (auto j : idx) t.push_back(values[j]);
        h_.cells[dom_cands[i]] = t;
        if (rec(i + 1)) return true;
        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == values.size()) idx[j++] = 0;
        if (j == idx.size()) break;
      }
      h_.cells.erase(dom_cands[i]);
      return false;
    };
    return rec(0);
  }

  bool all_y() {
    std::vector<Loc> ys(static_cast<std::size_t>(n_), 0);
    while (true) {
      if (++cases_ > opt_.max_cases) throw std::length_error("oracle budget");
      for (int i = 0; i < n_; ++i) I_.var_val[in_.universals[static_cast<std::size_t>(i)].name] = ys[static_cast<std::size_t>(i)];
      if (!eval_bounded(I_, h_, in_.matrix, cases_, opt_.max_cases)) return false;
      std::size_t i = 0;
      while (i < ys.size() && ++ys[i] == s_) ys[i++] = 0;
      if (i == ys.size()) return true;
    }
  }

  const PrenexInput& in_;
  OracleOptions opt_;
  std::vector<Term> consts_;
  int m_ = 0, n_ = 0, s_ = 1;
  Interpretation I_;
  Heap h_;
  std::uint64_t cases_ = 0;
};

}  // namespace detail

/// Upper bound on the number of cases oracle_solve may evaluate.
inline double oracle_cost(const PrenexInput& in) {
  const int consts = static_cast<int>(in.skolems.size() + in.constants.size()) + 1;
  const int m = measure(in.matrix);
  const int n = static_cast<int>(in.universals.size());
  const int bound = m + consts + n + 2;
  // Stirling numbers of the second kind S(consts, c)
  std::vector<std::vector<double>> S(static_cast<std::size_t>(consts + 1),
                                     std::vector<double>(static_cast<std::size_t>(consts + 1), 0));
  S[0][0] = 1;
  for (int i = 1; i <= consts; ++i)
    for (int c = 1; c <= i; ++c)
      S[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          c * S[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(c)] +
          S[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(c - 1)];
  double total = 0;
  for (int s = 1; s <= bound; ++s)
    for (int c = 1; c <= std::min(s, consts); ++c) {
      const int spare = std::min(s - c, m + n);
      const double D = c + spare, V = D + (s - c > spare ? 1 : 0);
      total += S[static_cast<std::size_t>(consts)][static_cast<std::size_t>(c)] *
               std::pow(1 + std::pow(V, in.arity), D) * std::pow(s, n);
    }
  return total;
}

/// Finite-universe satisfiability of the sentence exists k. forall y. matrix.
inline OracleAnswer oracle_solve(const PrenexInput& in, const OracleOptions& opt = {}) {
  return detail::Brute(in, opt).run();
}

}  // namespace slbsr
