// Reader and printer for the S-expression problem format:
//
//   (declare-sort U 0)
//   (declare-heap (U (Tuple U U)))
//   (declare-const x U)
//   (assert F)
//   (check-sat)
#pragma once

#include <algorithm>
#include <cctype>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slbsr/formula.hpp"

namespace slbsr {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line), col(col) {}
  int line, col;
};

/// A well-formed expression of the wrong sort (a term where a formula is
/// expected, a tuple of the wrong width, a sort other than U).
class SortError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct Problem {
  int arity = 1;
  std::vector<Term> constants;
  FormulaPtr assertion = fb::tt();  // conjunction of all asserts
  std::vector<std::string> commands;
};

namespace detail {

struct Sexp {
  bool atom = true;
  std::string text;
  std::vector<Sexp> items;
  int line = 1, col = 1;
};

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<Sexp> all() {
    std::vector<Sexp> out;
    while (skip(), pos_ < src_.size()) out.push_back(read());
    return out;
  }

 private:
  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_++] == '\n') ++line_, col_ = 1;
    else ++col_;
  }

  Sexp read() {
    Sexp s;
    s.line = line_;
    s.col = col_;
    if (src_[pos_] == ')') throw ParseError(line_, col_, "unexpected ')'");
    if (src_[pos_] == '(') {
      s.atom = false;
      advance();
      while (true) {
        skip();
        if (pos_ >= src_.size()) throw ParseError(s.line, s.col, "unclosed '('");
        if (src_[pos_] == ')') {
          advance();
          return s;
        }
        s.items.push_back(read());
      }
    }
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      s.text += c;
      advance();
    }
    return s;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

inline bool is_atom(const Sexp& s, const char* text) { return s.atom && s.text == text; }

class ProblemBuilder {
 public:
  Problem build(const std::vector<Sexp>& cmds) {
    std::vector<FormulaPtr> asserts;
    bool sort = false, heap = false, check = false;
    for (const auto& c : cmds) {
      if (c.atom || c.items.empty() || !c.items[0].atom) throw ParseError(c.line, c.col, "expected a command");
      const std::string& head = c.items[0].text;
      if (check) throw ParseError(c.line, c.col, "command after check-sat");
      if (head == "declare-sort") {
        if (sort) throw ParseError(c.line, c.col, "sort U declared twice");
        if (c.items.size() != 3 || !is_atom(c.items[2], "0"))
          throw ParseError(c.line, c.col, "expected (declare-sort U 0)");
        if (!is_atom(c.items[1], "U")) throw SortError(c.items[1].line, c.items[1].col, "only sort U is supported");
        sort = true;
      } else if (head == "declare-heap") {
        if (!sort) throw ParseError(c.line, c.col, "declare-heap before declare-sort");
        if (heap) throw ParseError(c.line, c.col, "heap declared twice");
        if (c.items.size() != 2 || c.items[1].atom || c.items[1].items.size() != 2)
          throw ParseError(c.line, c.col, "expected (declare-heap (U D))");
        heap_sort(c.items[1]);
        heap = true;
      } else if (head == "declare-const") {
        if (!sort) throw ParseError(c.line, c.col, "declare-const before declare-sort");
        if (c.items.size() != 3 || !c.items[1].atom) throw ParseError(c.line, c.col, "expected (declare-const ID U)");
        expect_u(c.items[2]);
        const auto& id = c.items[1];
        check_identifier(id);
        if (consts_.count(id.text)) throw ParseError(id.line, id.col, "constant " + id.text + " declared twice");
        consts_.insert(id.text);
        p_.constants.push_back(Term::cnst(id.text));
      } else if (head == "assert") {
        if (!heap) throw ParseError(c.line, c.col, "assert before declare-heap");
        if (c.items.size() != 2) throw ParseError(c.line, c.col, "expected (assert F)");
        asserts.push_back(formula(c.items[1]));
      } else if (head == "check-sat") {
        if (c.items.size() != 1) throw ParseError(c.line, c.col, "check-sat takes no arguments");
        check = true;
      } else {
        throw ParseError(c.items[0].line, c.items[0].col, "unknown command " + head);
      }
      p_.commands.push_back(head);
    }
    if (!heap) throw ParseError(1, 1, "missing declare-heap");
    if (!check) throw ParseError(1, 1, "missing check-sat");
    p_.assertion = asserts.empty() ? fb::tt() : fb::conj_all(asserts);
    return std::move(p_);
  }

 private:
  static void expect_u(const Sexp& s) {
    if (!is_atom(s, "U")) throw SortError(s.line, s.col, "expected sort U");
  }

  void heap_sort(const Sexp& s) {
    expect_u(s.items[0]);
    const Sexp& d = s.items[1];
    if (d.atom) {
      expect_u(d);
      p_.arity = 1;
      return;
    }
    if (d.items.size() < 2 || !is_atom(d.items[0], "Tuple"))
      throw SortError(d.line, d.col, "expected U or (Tuple U+)");
    for (std::size_t i = 1; i < d.items.size(); ++i) expect_u(d.items[i]);
    p_.arity = static_cast<int>(d.items.size()) - 1;
  }

  static bool reserved(const std::string& s) {
    static const std::set<std::string> words{"nil", "true", "false", "emp", "pto", "sep", "wand", "and", "or",
                                             "not", "=>", "=", "distinct", "exists", "forall", "tuple", "U"};
    return words.count(s) > 0;
  }

  static void check_identifier(const Sexp& id) {
    if (id.text.empty() || reserved(id.text) || id.text[0] == '@' ||
        std::isdigit(static_cast<unsigned char>(id.text[0])))
      throw ParseError(id.line, id.col, "invalid identifier '" + id.text + "'");
  }

  Term term(const Sexp& s) const {
    if (!s.atom) throw SortError(s.line, s.col, "expected a location term");
    if (s.text == "nil") return Term::nil();
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (*it == s.text) return Term::var(s.text);
    if (consts_.count(s.text)) return Term::cnst(s.text);
    if (s.text == "true" || s.text == "false") throw SortError(s.line, s.col, "expected a location term");
    throw ParseError(s.line, s.col, "unknown symbol " + s.text);
  }

  std::vector<Term> data(const Sexp& s) const {
    std::vector<Term> out;
    if (!s.atom && !s.items.empty() && is_atom(s.items[0], "tuple")) {
      for (std::size_t i = 1; i < s.items.size(); ++i) out.push_back(term(s.items[i]));
    } else {
      out.push_back(term(s));
    }
    if (static_cast<int>(out.size()) != p_.arity)
      throw SortError(s.line, s.col,
                      "points-to value has " + std::to_string(out.size()) + " components, heap stores " +
                          std::to_string(p_.arity));
    return out;
  }

  void arity(const Sexp& s, std::size_t n, bool at_least = false) const {
    const std::size_t got = s.items.size() - 1;
    if (at_least ? got < n : got != n)
      throw ParseError(s.line, s.col,
                       s.items[0].text + " expects " + (at_least ? "at least " : "") + std::to_string(n) +
                           " argument" + (n == 1 ? "" : "s"));
  }

  std::vector<FormulaPtr> args(const Sexp& s) {
    std::vector<FormulaPtr> out;
    for (std::size_t i = 1; i < s.items.size(); ++i) out.push_back(formula(s.items[i]));
    return out;
  }

  FormulaPtr formula(const Sexp& s) {
    using namespace fb;
    if (s.atom) {
      if (s.text == "true") return tt();
      if (s.text == "false") return ff();
      term(s);  // reports unknown symbols before the sort mismatch
      throw SortError(s.line, s.col, "term " + s.text + " used as a formula");
    }
    if (s.items.empty() || !s.items[0].atom) throw ParseError(s.line, s.col, "expected a formula");
    const std::string& h = s.items[0].text;
    if (h == "emp") return arity(s, 0), emp();
    if (h == "pto") {
      arity(s, 2);
      return pto(term(s.items[1]), data(s.items[2]));
    }
    if (h == "=" || h == "distinct") {
      arity(s, 2);
      auto e = eq(term(s.items[1]), term(s.items[2]));
      return h == "=" ? e : neg(e);
    }
    if (h == "not") return arity(s, 1), neg(formula(s.items[1]));
    if (h == "wand" || h == "=>") {
      arity(s, 2);
      auto a = formula(s.items[1]);
      auto b = formula(s.items[2]);
      return h == "wand" ? wand(a, b) : implies(a, b);
    }
    if (h == "sep") return arity(s, 2, true), sep_all(args(s));
    if (h == "and") return arity(s, 1, true), conj_all(args(s));
    if (h == "or") return arity(s, 1, true), disj_all(args(s));
    if (h == "exists" || h == "forall") {
      arity(s, 2);
      const Sexp& bs = s.items[1];
      if (bs.atom || bs.items.empty()) throw ParseError(bs.line, bs.col, "expected ((ID U)+)");
      std::vector<std::string> names;
      for (const auto& b : bs.items) {
        if (b.atom || b.items.size() != 2 || !b.items[0].atom) throw ParseError(b.line, b.col, "expected (ID U)");
        check_identifier(b.items[0]);
        expect_u(b.items[1]);
        names.push_back(b.items[0].text);
      }
      scope_.insert(scope_.end(), names.begin(), names.end());
      auto body = formula(s.items[2]);
      scope_.resize(scope_.size() - names.size());
      for (auto it = names.rbegin(); it != names.rend(); ++it)
        body = h == "exists" ? exists(*it, body) : forall(*it, body);
      return body;
    }
    throw ParseError(s.items[0].line, s.items[0].col, "unknown connective " + h);
  }

  Problem p_;
  std::set<std::string> consts_;
  std::vector<std::string> scope_;
};

}  // namespace detail

inline Problem parse(std::string_view text) {
  return detail::ProblemBuilder().build(detail::Reader(text).all());
}

inline void print(std::ostream& os, const Problem& p) {
  os << "(declare-sort U 0)\n(declare-heap (U ";
  if (p.arity == 1) {
    os << 'U';
  } else {
    os << "(Tuple";
    for (int i = 0; i < p.arity; ++i) os << " U";
    os << ')';
  }
  os << "))\n";
  for (const auto& c : p.constants) os << "(declare-const " << to_string(c) << " U)\n";
  os << "(assert " << to_string(p.assertion) << ")\n(check-sat)\n";
}

inline std::string to_string(const Problem& p) {
  std::ostringstream os;
  print(os, p);
  return os.str();
}

}  // namespace slbsr
