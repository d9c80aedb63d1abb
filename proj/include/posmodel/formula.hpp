#ifndef POSMODEL_FORMULA_HPP
#define POSMODEL_FORMULA_HPP

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"
#include "posmodel/structure.hpp"

namespace posmodel {

struct Term {
  enum class Kind { Var, Const, App };

  Kind kind = Kind::Var;
  std::string name;
  std::vector<Term> args;

  static Term var(std::string name) { return {Kind::Var, std::move(name), {}}; }
  static Term constant(std::string name) { return {Kind::Const, std::move(name), {}}; }
  static Term app(std::string fn, std::vector<Term> args) { return {Kind::App, std::move(fn), std::move(args)}; }

  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

/// First-order formula tree. `symbol` holds the relation name for atoms and the bound
/// variable for quantifiers; `terms` the atom arguments; `children` the subformulas.
struct Formula {
  enum class Kind { False, True, Rel, Eq, And, Or, Implies, Not, Exists, Forall };

  Kind kind = Kind::False;
  std::string symbol;
  std::vector<Term> terms;
  std::vector<Formula> children;

  static Formula falsum() { return {Kind::False, {}, {}, {}}; }
  static Formula verum() { return {Kind::True, {}, {}, {}}; }
  static Formula rel(std::string name, std::vector<Term> args) { return {Kind::Rel, std::move(name), std::move(args), {}}; }
  static Formula eq(Term lhs, Term rhs) { return {Kind::Eq, {}, {std::move(lhs), std::move(rhs)}, {}}; }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) { return binary(Kind::Implies, std::move(a), std::move(b)); }
  static Formula negation(Formula a) { return {Kind::Not, {}, {}, {std::move(a)}}; }
  static Formula exists(std::string var, Formula body) { return {Kind::Exists, std::move(var), {}, {std::move(body)}}; }
  static Formula forall(std::string var, Formula body) { return {Kind::Forall, std::move(var), {}, {std::move(body)}}; }

  bool is_atom() const { return kind == Kind::False || kind == Kind::True || kind == Kind::Rel || kind == Kind::Eq; }
  bool is_quantifier() const { return kind == Kind::Exists || kind == Kind::Forall; }
  bool is_binary() const { return kind == Kind::And || kind == Kind::Or || kind == Kind::Implies; }

  bool operator==(const Formula&) const = default;
  auto operator<=>(const Formula&) const = default;

 private:
  static Formula binary(Kind k, Formula a, Formula b) { return {k, {}, {}, {std::move(a), std::move(b)}}; }
};

/// Node count: relation and equality atoms, connectives and quantifiers count one each;
/// the truth constants count zero.
inline std::size_t formula_size(const Formula& f) {
  std::size_t n = (f.kind == Formula::Kind::False || f.kind == Formula::Kind::True) ? 0 : 1;
  for (const auto& c : f.children) n += formula_size(c);
  return n;
}

namespace detail {

inline void term_vars(const Term& t, std::set<std::string>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.name);
  for (const auto& a : t.args) term_vars(a, out);
}

inline void free_vars_into(const Formula& f, std::set<std::string>& out) {
  if (f.is_quantifier()) {
    std::set<std::string> inner;
    free_vars_into(f.children[0], inner);
    inner.erase(f.symbol);
    out.insert(inner.begin(), inner.end());
    return;
  }
  for (const auto& t : f.terms) term_vars(t, out);
  for (const auto& c : f.children) free_vars_into(c, out);
}

inline void all_vars_into(const Formula& f, std::set<std::string>& out) {
  if (f.is_quantifier()) out.insert(f.symbol);
  for (const auto& t : f.terms) term_vars(t, out);
  for (const auto& c : f.children) all_vars_into(c, out);
}

}  // namespace detail

inline std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> out;
  detail::free_vars_into(f, out);
  return out;
}

/// Free variables in order of first occurrence (left to right).
inline std::vector<std::string> free_variables_ordered(const Formula& f) {
  std::vector<std::string> out;
  auto visit_term = [&](auto&& self, const Term& t, const std::vector<std::string>& bound) -> void {
    if (t.kind == Term::Kind::Var && std::find(bound.begin(), bound.end(), t.name) == bound.end() &&
        std::find(out.begin(), out.end(), t.name) == out.end())
      out.push_back(t.name);
    for (const auto& a : t.args) self(self, a, bound);
  };
  auto visit = [&](auto&& self, const Formula& g, std::vector<std::string>& bound) -> void {
    for (const auto& t : g.terms) visit_term(visit_term, t, bound);
    if (g.is_quantifier()) bound.push_back(g.symbol);
    for (const auto& c : g.children) self(self, c, bound);
    if (g.is_quantifier()) bound.pop_back();
  };
  std::vector<std::string> bound;
  visit(visit, f, bound);
  return out;
}

inline std::size_t variable_count(const Formula& f) {
  std::set<std::string> out;
  detail::all_vars_into(f, out);
  return out.size();
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline void print_term(const Term& t, std::string& out) {
  out += t.name;
  if (t.kind != Term::Kind::App) return;
  out += '(';
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ',';
    print_term(t.args[i], out);
  }
  out += ')';
}

inline int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Implies: return 1;
    case Formula::Kind::Or: return 2;
    case Formula::Kind::And: return 3;
    case Formula::Kind::Not: return 4;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: return 0;
    default: return 5;
  }
}

// `right_edge` is true when nothing follows this subformula inside the current
// parenthesis group, which is the only place a quantifier may appear bare.
inline void print_formula(const Formula& f, int min_prec, bool right_edge, std::string& out) {
  using K = Formula::Kind;
  const bool parens = f.is_quantifier() ? !right_edge || min_prec > 4 : precedence(f.kind) < min_prec;
  if (parens) {
    out += '(';
    right_edge = true;
  }
  switch (f.kind) {
    case K::False: out += "false"; break;
    case K::True: out += "true"; break;
    case K::Eq:
      print_term(f.terms[0], out);
      out += " = ";
      print_term(f.terms[1], out);
      break;
    case K::Rel:
      out += f.symbol;
      out += '(';
      for (std::size_t i = 0; i < f.terms.size(); ++i) {
        if (i) out += ',';
        print_term(f.terms[i], out);
      }
      out += ')';
      break;
    case K::Not:
      out += '~';
      print_formula(f.children[0], 4, right_edge, out);
      break;
    case K::And:
    case K::Or: {
      const int p = precedence(f.kind);
      print_formula(f.children[0], p, false, out);
      out += f.kind == K::And ? " & " : " | ";
      print_formula(f.children[1], p + 1, right_edge, out);
      break;
    }
    case K::Implies:
      print_formula(f.children[0], 2, false, out);
      out += " -> ";
      print_formula(f.children[1], 1, right_edge, out);
      break;
    case K::Exists:
    case K::Forall:
      out += f.kind == K::Exists ? "exists " : "forall ";
      out += f.symbol;
      out += ". ";
      print_formula(f.children[0], 0, true, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string to_string(const Term& t) {
  std::string out;
  detail::print_term(t, out);
  return out;
}

/// Concrete syntax with the minimum parentheses needed to parse back to the same tree.
inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print_formula(f, 0, true, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   formula := impl
//   impl    := or ("->" impl)?
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "~" unary | ("exists"|"forall") ident "." impl | "(" impl ")" | atom
//   atom    := "false" | "true" | term "=" term | rel "(" terms? ")" | rel

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Signature* sig) : text_(text), sig_(sig) {}

  Formula parse() {
    Formula f = parse_implies();
    skip_space();
    if (pos_ != text_.size()) throw SyntaxError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
    return f;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    if (std::isalpha(static_cast<unsigned char>(token[0]))) {
      const std::size_t end = pos_ + token.size();
      if (end < text_.size() && is_ident_char(text_[end])) return false;
    }
    pos_ += token.size();
    return true;
  }

  static bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string ident() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input, expected identifier", pos_);
    if (!is_ident_start(text_[pos_]))
      throw SyntaxError("expected identifier, found '" + std::string(1, text_[pos_]) + "'", pos_);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void close_paren(std::size_t open) {
    if (!accept(")")) throw SyntaxError("unbalanced '('", open);
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept("->")) return Formula::implies(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (accept("|")) lhs = Formula::disj(std::move(lhs), parse_and());
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (accept("&")) lhs = Formula::conj(std::move(lhs), parse_unary());
    return lhs;
  }

  Formula parse_unary() {
    skip_space();
    if (accept("~")) return Formula::negation(parse_unary());
    for (auto [word, kind] : {std::pair{"exists", Formula::Kind::Exists}, std::pair{"forall", Formula::Kind::Forall}}) {
      if (!accept(word)) continue;
      std::string var = ident();
      if (!accept(".")) throw SyntaxError("expected '.' after quantified variable", pos_);
      bound_.push_back(var);
      Formula body = parse_implies();
      bound_.pop_back();
      return {kind, std::move(var), {}, {std::move(body)}};
    }
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const std::size_t open = pos_++;
      Formula inner = parse_implies();
      close_paren(open);
      return inner;
    }
    return parse_atom();
  }

  std::vector<Term> parse_args(std::size_t open) {
    std::vector<Term> args;
    if (accept(")")) return args;
    do args.push_back(parse_term());
    while (accept(","));
    close_paren(open);
    return args;
  }

  Term make_ident_term(std::string name, std::size_t at) {
    if (sig_ && std::find(bound_.begin(), bound_.end(), name) == bound_.end()) {
      if (sig_->constant_index(name)) return Term::constant(std::move(name));
      if (sig_->relation_index(name) || sig_->function_index(name))
        throw SyntaxError("symbol '" + name + "' used as a term", at);
    }
    return Term::var(std::move(name));
  }

  Term parse_term() {
    skip_space();
    const std::size_t at = pos_;
    std::string name = ident();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const std::size_t open = pos_++;
      std::vector<Term> args = parse_args(open);
      check_function(name, args.size(), at);
      return Term::app(std::move(name), std::move(args));
    }
    return make_ident_term(std::move(name), at);
  }

  void check_function(const std::string& name, std::size_t arity, std::size_t at) const {
    if (arity == 0) throw SyntaxError("function application '" + name + "' needs arguments", at);
    if (!sig_) return;
    auto f = sig_->function_index(name);
    if (!f) throw SyntaxError("unknown function '" + name + "'", at);
    if (static_cast<std::size_t>(sig_->functions[*f].second) != arity)
      throw SyntaxError("arity mismatch for function '" + name + "'", at);
  }

  void check_relation(const std::string& name, std::size_t arity, std::size_t at) const {
    if (!sig_) return;
    auto r = sig_->relation_index(name);
    if (!r) throw SyntaxError("unknown relation '" + name + "'", at);
    if (static_cast<std::size_t>(sig_->relations[*r].second) != arity)
      throw SyntaxError("arity mismatch for relation '" + name + "'", at);
  }

  Formula parse_atom() {
    skip_space();
    const std::size_t at = pos_;
    if (accept("false")) return Formula::falsum();
    if (accept("true")) return Formula::verum();
    std::string name = ident();
    skip_space();
    Term lhs;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      const std::size_t open = pos_++;
      std::vector<Term> args = parse_args(open);
      if (!accept("=")) {
        check_relation(name, args.size(), at);
        return Formula::rel(std::move(name), std::move(args));
      }
      check_function(name, args.size(), at);
      lhs = Term::app(std::move(name), std::move(args));
    } else if (accept("=")) {
      lhs = make_ident_term(std::move(name), at);
    } else {
      check_relation(name, 0, at);
      return Formula::rel(std::move(name), {});
    }
    return Formula::eq(std::move(lhs), parse_term());
  }

  std::string_view text_;
  const Signature* sig_;
  std::size_t pos_ = 0;
  std::vector<std::string> bound_;
};

}  // namespace detail

/// Parses the concrete syntax. With a signature, symbols and arities are checked and
/// unbound identifiers naming constants become constant terms.
inline Formula parse_formula(std::string_view text, const Signature* sig = nullptr) {
  return detail::Parser(text, sig).parse();
}

inline Formula parse_formula(std::string_view text, const Signature& sig) { return parse_formula(text, &sig); }

// ---------------------------------------------------------------------------
// Fragments

enum class FragmentTag { Atomic, Positive, BasicHInductive, HInductive, General };

inline const char* to_string(FragmentTag tag) {
  switch (tag) {
    case FragmentTag::Atomic: return "atomic";
    case FragmentTag::Positive: return "positive";
    case FragmentTag::BasicHInductive: return "basic-h-inductive";
    case FragmentTag::HInductive: return "h-inductive";
    case FragmentTag::General: return "general";
  }
  return "general";
}

/// Built from atoms, false and true with &, | and exists only.
inline bool is_positive(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::False:
    case K::True:
    case K::Rel:
    case K::Eq: return true;
    case K::And:
    case K::Or: return is_positive(f.children[0]) && is_positive(f.children[1]);
    case K::Exists: return is_positive(f.children[0]);
    default: return false;
  }
}

/// Rewrites every negation ~p as p -> false.
inline Formula negation_as_implication(const Formula& f) {
  Formula out = f;
  for (auto& c : out.children) c = negation_as_implication(c);
  if (out.kind == Formula::Kind::Not) return Formula::implies(std::move(out.children[0]), Formula::falsum());
  return out;
}

namespace detail {

// A universal prefix over an implication between positive formulas, or over a positive
// formula (read as true -> p).
inline bool is_basic_h_inductive(const Formula& f) {
  const Formula* body = &f;
  while (body->kind == Formula::Kind::Forall) body = &body->children[0];
  if (body->kind == Formula::Kind::Implies) return is_positive(body->children[0]) && is_positive(body->children[1]);
  return is_positive(*body);
}

inline bool is_h_inductive(const Formula& f) {
  if (f.kind == Formula::Kind::And) return is_h_inductive(f.children[0]) && is_h_inductive(f.children[1]);
  return is_basic_h_inductive(f);
}

}  // namespace detail

/// The most specific fragment containing `f`, with negation read as implication of false.
inline FragmentTag classify(const Formula& f) {
  if (f.is_atom()) return FragmentTag::Atomic;
  if (is_positive(f)) return FragmentTag::Positive;
  const Formula normalized = negation_as_implication(f);
  if (detail::is_basic_h_inductive(normalized)) return FragmentTag::BasicHInductive;
  if (detail::is_h_inductive(normalized)) return FragmentTag::HInductive;
  return FragmentTag::General;
}

/// Membership in the h-inductive fragment (positive formulas included).
inline bool is_h_inductive(const Formula& f) { return classify(f) != FragmentTag::General; }

}  // namespace posmodel

#endif  // POSMODEL_FORMULA_HPP
