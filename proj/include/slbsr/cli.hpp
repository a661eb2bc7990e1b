// Command-line driver: parse a problem file, solve it, report.
//
//   slbsr [--mode finite|aleph0] [--trace] [--dump-model] [--oracle] FILE
//   slbsr bench [--depths 1,2] [--out DIR] [--oracle]
//
// Exit codes: 0 decided, 2 malformed input, 3 resource limit, 1 internal error.
#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "slbsr/bench.hpp"
#include "slbsr/cegqi.hpp"
#include "slbsr/oracle.hpp"
#include "slbsr/parser.hpp"

namespace slbsr::cli {

enum Exit { kDecided = 0, kInternal = 1, kBadInput = 2, kResource = 3 };

struct Config {
  std::string file;
  std::string mode = "finite";
  bool trace = false, dump_model = false, oracle = false, forbid_nil_alloc = false;
  std::uint64_t budget = QfOptions{}.budget;
  int max_universe = 0;
  // bench
  std::vector<int> depths{1, 2};
  std::string out_dir = "corpus";
  bool skip_heavy = true;
};

inline const char* verdict(SolveResult::Status s) {
  return s == SolveResult::Status::Sat ? "sat" : s == SolveResult::Status::Unsat ? "unsat" : "unknown";
}

inline const char* verdict(OracleAnswer::Status s) {
  return s == OracleAnswer::Status::Sat ? "sat" : s == OracleAnswer::Status::Unsat ? "unsat" : "unknown";
}

inline SolveOptions solve_options(const Config& c) {
  SolveOptions o;
  o.mode = c.mode == "aleph0" ? Mode::Aleph0 : Mode::Finite;
  o.qf.budget = c.budget;
  o.qf.forbid_nil_alloc = c.forbid_nil_alloc;
  o.qf.max_universe = c.max_universe;
  return o;
}

inline int solve_file(const Config& c, std::ostream& out, std::ostream& err) {
  std::string text;
  if (c.file == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    std::ifstream in(c.file);
    if (!in) {
      err << "error: cannot open " << c.file << '\n';
      return kBadInput;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  PrenexInput input;
  try {
    Problem p = parse(text);
    input = functional_form(p.assertion, p.arity);
    // declared but unused constants still name locations
    for (const auto& k : p.constants)
      if (std::find(input.constants.begin(), input.constants.end(), k) == input.constants.end())
        input.constants.push_back(k);
  } catch (const SortError& e) {
    err << c.file << ':' << e.what() << " (sort error)\n";
    return kBadInput;
  } catch (const ParseError& e) {
    err << c.file << ':' << e.what() << '\n';
    return kBadInput;
  } catch (const FragmentError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }

  const SolveResult r = solve(input, solve_options(c));
  out << verdict(r.status) << '\n';
  if (c.trace)
    for (const auto& line : r.log) out << line << '\n';
  if (c.dump_model && r.model) dump_model(out, *r.model);
  if (c.oracle) {
    if (c.forbid_nil_alloc || c.mode == "aleph0") {
      out << "oracle: skipped (needs finite mode without --forbid-nil-alloc)\n";
    } else {
      OracleOptions oo;
      oo.max_universe = c.max_universe;
      const OracleAnswer o = oracle_solve(input, oo);
      out << "oracle: " << verdict(o.status) << '\n';
      if (o.status != OracleAnswer::Status::ResourceOut && r.status != SolveResult::Status::ResourceOut)
        out << "agreement: " << ((o.status == OracleAnswer::Status::Sat) == r.sat() ? "yes" : "no") << '\n';
    }
  }
  return r.status == SolveResult::Status::ResourceOut ? kResource : kDecided;
}

inline int bench(const Config& c, std::ostream& out, std::ostream& err) {
  std::vector<EntailmentCase> cases;
  try {
    for (auto& ec : table1_corpus(c.depths))
      if (!(c.skip_heavy && ec.family == "ts-hat_ts" && ec.n > 1)) cases.push_back(std::move(ec));
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
  write_corpus(c.out_dir, cases);
  std::vector<BenchRow> rows;
  bool resource = false;
  for (const auto& ec : cases) {
    BenchRow row;
    row.id = ec.id();
    row.expected = ec.expected;
    const PrenexInput in = encode_entailment(ec);
    auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = solve(in, solve_options(c));
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.solver = verdict(r.status);
    row.qf_calls = r.qf_calls;
    row.instances = r.trace.size();
    resource |= r.status == SolveResult::Status::ResourceOut;
    if (c.oracle) row.oracle = verdict(oracle_solve(in).status);
    rows.push_back(row);
  }
  std::ofstream summary(std::filesystem::path(c.out_dir) / "summary.tsv");
  write_summary(summary, rows);
  write_summary(out, rows);
  return resource ? kResource : kDecided;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Config c;
  CLI::App app{"Decision procedure for exists*forall* separation logic"};
  app.add_option("file", c.file, "problem file, - for stdin");
  app.add_option("--mode", c.mode, "location sort: finite or aleph0 (countably infinite)")
      ->check(CLI::IsMember({"finite", "aleph0"}));
  app.add_flag("--trace", c.trace, "print instantiations and qf checks");
  app.add_flag("--dump-model", c.dump_model, "print the model on sat");
  app.add_flag("--oracle", c.oracle, "also run the brute-force oracle and report agreement");
  app.add_flag("--forbid-nil-alloc", c.forbid_nil_alloc, "never allocate the nil location");
  app.add_option("--budget", c.budget, "search steps per qf check");
  app.add_option("--max-universe", c.max_universe, "cap on universe sizes tried (0: small-model bound)");

  auto* b = app.add_subcommand("bench", "write and run the unfolding benchmark corpus");
  b->add_option("--depths", c.depths, "unfolding depths")->delimiter(',');
  b->add_option("--out", c.out_dir, "corpus directory");
  b->add_flag("--oracle", c.oracle, "also run the brute-force oracle");
  b->add_flag("!--all", c.skip_heavy, "include ts-hat/ts beyond depth 1");
  b->add_option("--budget", c.budget, "search steps per qf check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kBadInput;
  }
  try {
    if (b->parsed()) return bench(c, out, err);
    if (c.file.empty()) {
      err << "error: no input file\n";
      return kBadInput;
    }
    return solve_file(c, out, err);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace slbsr::cli
