#ifndef POSMODEL_ENUMERATE_HPP
#define POSMODEL_ENUMERATE_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"
#include "posmodel/evaluate.hpp"
#include "posmodel/formula.hpp"
#include "posmodel/structure.hpp"

namespace posmodel {

/// Bounds on enumerated formulas: at most `size` nodes (see formula_size) and at most
/// `vars` distinct variable names, free and bound together.
struct Budget {
  std::size_t size = 5;
  std::size_t vars = 2;

  bool operator==(const Budget&) const = default;
  std::string to_string() const { return "size=" + std::to_string(size) + " vars=" + std::to_string(vars); }
};

namespace detail {

inline std::optional<Term> rename_term(const Term& t, const std::string& from, const std::string& to) {
  Term out = t;
  if (out.kind == Term::Kind::Var && out.name == from) out.name = to;
  for (auto& a : out.args) {
    auto r = rename_term(a, from, to);
    if (!r) return std::nullopt;
    a = std::move(*r);
  }
  return out;
}

/// Substitutes variable `to` for the free occurrences of `from`; fails on capture.
inline std::optional<Formula> rename_free(const Formula& f, const std::string& from, const std::string& to) {
  if (f.is_quantifier()) {
    if (f.symbol == from) return f;
    if (f.symbol == to && free_variables(f.children[0]).count(from)) return std::nullopt;
  }
  Formula out = f;
  for (auto& t : out.terms) t = *rename_term(t, from, to);
  for (auto& c : out.children) {
    auto r = rename_free(c, from, to);
    if (!r) return std::nullopt;
    c = std::move(*r);
  }
  return out;
}

inline void collect_junction(const Formula& f, Formula::Kind kind, std::vector<Formula>& out) {
  if (f.kind == kind) {
    collect_junction(f.children[0], kind, out);
    collect_junction(f.children[1], kind, out);
  } else {
    out.push_back(f);
  }
}

/// Canonical n-ary conjunction/disjunction: flattened, sorted by printed form,
/// duplicates removed, rebuilt left-nested.
inline Formula make_junction(Formula::Kind kind, const Formula& a, const Formula& b) {
  std::vector<Formula> parts;
  collect_junction(a, kind, parts);
  collect_junction(b, kind, parts);
  std::vector<std::pair<std::string, std::size_t>> keyed;
  for (std::size_t i = 0; i < parts.size(); ++i) keyed.emplace_back(to_string(parts[i]), i);
  std::sort(keyed.begin(), keyed.end());
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& x, const auto& y) { return x.first == y.first; }),
              keyed.end());
  Formula out = parts[keyed[0].second];
  for (std::size_t i = 1; i < keyed.size(); ++i)
    out = Formula{kind, {}, {}, {std::move(out), parts[keyed[i].second]}};
  return out;
}

/// Canonical existential: vacuous quantifiers vanish, and the bound variable becomes the
/// first pool variable not free in the result whenever that renaming is capture-free.
inline std::optional<Formula> make_exists(const std::string& var, const Formula& body,
                                          const std::vector<std::string>& pool) {
  auto fv = free_variables(body);
  if (!fv.count(var)) return std::nullopt;
  fv.erase(var);
  for (const auto& candidate : pool) {
    if (fv.count(candidate)) continue;
    if (candidate == var) break;
    if (auto renamed = rename_free(body, var, candidate)) return Formula::exists(candidate, std::move(*renamed));
    break;
  }
  return Formula::exists(var, body);
}

inline std::vector<Term> atom_terms(const Signature& sig, const std::vector<std::string>& pool) {
  std::vector<Term> base;
  for (const auto& v : pool) base.push_back(Term::var(v));
  for (const auto& c : sig.constants) base.push_back(Term::constant(c));
  std::vector<Term> terms = base;
  for (const auto& [fn, arity] : sig.functions) {
    for_each_tuple(base.size(), static_cast<std::size_t>(arity), [&](const std::vector<Elem>& idx) {
      std::vector<Term> args;
      for (Elem i : idx) args.push_back(base[static_cast<std::size_t>(i)]);
      terms.push_back(Term::app(fn, std::move(args)));
    });
  }
  return terms;
}

}  // namespace detail

/// Names of the variable pool: the given free names first, then fresh v1, v2, ...
/// until `budget.vars` names exist.
inline std::vector<std::string> variable_pool(const Budget& budget, const std::vector<std::string>& free_names) {
  std::vector<std::string> pool = free_names;
  for (std::size_t k = 1; pool.size() < budget.vars; ++k) {
    std::string name = "v" + std::to_string(k);
    if (std::find(pool.begin(), pool.end(), name) == pool.end()) pool.push_back(name);
  }
  return pool;
}

/// Canonical list of positive formulas within `budget` whose free variables lie in
/// `free_names`. Bound variables are drawn from the rest of the variable pool. The list
/// starts with false and true, then goes by size and printed form. Formulas are
/// deduplicated syntactically: bound variables are renamed canonically, conjunctions
/// and disjunctions are flattened and sorted, vacuous quantifiers are dropped.
///
/// Function terms are limited to depth one (functions applied to variables or constants).
inline std::vector<Formula> enumerate_positive_formulas(const Signature& sig, const Budget& budget,
                                                        const std::vector<std::string>& free_names = {}) {
  const std::vector<std::string> pool = variable_pool(budget, free_names);
  std::vector<std::vector<Formula>> levels(budget.size + 1);
  std::unordered_set<std::string> seen;
  auto add = [&](Formula f, std::size_t size) {
    if (formula_size(f) != size) return;
    if (seen.insert(to_string(f)).second) levels[size].push_back(std::move(f));
  };

  if (budget.size >= 1) {
    const auto terms = detail::atom_terms(sig, pool);
    for (const auto& [rel, arity] : sig.relations) {
      for_each_tuple(terms.size(), static_cast<std::size_t>(arity), [&](const std::vector<Elem>& idx) {
        std::vector<Term> args;
        for (Elem i : idx) args.push_back(terms[static_cast<std::size_t>(i)]);
        add(Formula::rel(rel, std::move(args)), 1);
      });
    }
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = i; j < terms.size(); ++j) {
        const bool ordered = to_string(terms[i]) <= to_string(terms[j]);
        add(ordered ? Formula::eq(terms[i], terms[j]) : Formula::eq(terms[j], terms[i]), 1);
      }
  }

  for (std::size_t s = 2; s <= budget.size; ++s) {
    for (const auto& body : levels[s - 1])
      for (const auto& var : pool)
        if (auto f = detail::make_exists(var, body, pool)) add(std::move(*f), s);
    for (std::size_t left = 1; left + left + 1 <= s; ++left) {
      const std::size_t right = s - 1 - left;
      for (std::size_t i = 0; i < levels[left].size(); ++i) {
        const std::size_t j0 = left == right ? i + 1 : 0;
        for (std::size_t j = j0; j < levels[right].size(); ++j) {
          add(detail::make_junction(Formula::Kind::And, levels[left][i], levels[right][j]), s);
          add(detail::make_junction(Formula::Kind::Or, levels[left][i], levels[right][j]), s);
        }
      }
    }
  }

  std::set<std::string> allowed(free_names.begin(), free_names.end());
  std::vector<Formula> out{Formula::falsum(), Formula::verum()};
  for (std::size_t s = 1; s <= budget.size; ++s) {
    std::vector<std::pair<std::string, const Formula*>> keyed;
    for (const auto& f : levels[s]) {
      const auto fv = free_variables(f);
      if (std::includes(allowed.begin(), allowed.end(), fv.begin(), fv.end())) keyed.emplace_back(to_string(f), &f);
    }
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [key, f] : keyed) out.push_back(*f);
  }
  return out;
}

inline std::vector<Formula> enumerate_positive_sentences(const Signature& sig, const Budget& budget) {
  return enumerate_positive_formulas(sig, budget, {});
}

/// Positive formulas compiled against one signature with a fixed parameter list, for
/// evaluating the same family on many structures.
class FormulaBank {
 public:
  FormulaBank(const Signature& sig, const Budget& budget, std::vector<std::string> params = {})
      : budget_(budget), params_(std::move(params)), formulas_(enumerate_positive_formulas(sig, budget, params_)) {
    compiled_.reserve(formulas_.size());
    for (const auto& f : formulas_) compiled_.emplace_back(f, sig, params_);
  }

  const Budget& budget() const { return budget_; }
  const std::vector<std::string>& params() const { return params_; }
  std::size_t size() const { return formulas_.size(); }
  const Formula& formula(std::size_t i) const { return formulas_[i]; }
  const CompiledFormula& compiled(std::size_t i) const { return compiled_[i]; }
  const std::vector<Formula>& formulas() const { return formulas_; }

  /// Truth of formula `i` on every parameter tuple of `m`, in lexicographic tuple order.
  std::vector<bool> table(std::size_t i, const Structure& m) const {
    std::vector<bool> out;
    for_each_tuple(m.size(), params_.size(), [&](const std::vector<Elem>& t) { out.push_back(compiled_[i].holds(m, t)); });
    return out;
  }

 private:
  Budget budget_;
  std::vector<std::string> params_;
  std::vector<Formula> formulas_;
  std::vector<CompiledFormula> compiled_;
};

/// Budget-bounded approximation of the positive theory: which enumerated positive
/// sentences hold in the structure, and which fail.
struct TheoryFingerprint {
  Budget budget;
  std::vector<Formula> satisfied;
  std::vector<Formula> refuted;

  bool operator==(const TheoryFingerprint& other) const {
    return budget == other.budget && satisfied == other.satisfied;
  }
};

inline TheoryFingerprint positive_theory(const FormulaBank& sentences, const Structure& m) {
  if (!sentences.params().empty()) throw InputError("positive theory needs a sentence bank");
  TheoryFingerprint out{sentences.budget(), {}, {}};
  for (std::size_t i = 0; i < sentences.size(); ++i)
    (sentences.compiled(i).holds(m, {}) ? out.satisfied : out.refuted).push_back(sentences.formula(i));
  return out;
}

inline TheoryFingerprint positive_theory(const Structure& m, const Budget& budget) {
  return positive_theory(FormulaBank(m.signature(), budget), m);
}

/// Finite-class resultant: the enumerated positive formulas psi over the free
/// variables of `phi` such that no member of `models` satisfies exists v (phi & psi).
inline std::vector<Formula> resultant(const Formula& phi, const std::vector<Structure>& models, const Budget& budget) {
  if (!is_positive(phi)) throw InputError("resultant needs a positive formula");
  if (models.empty()) throw InputError("resultant needs a nonempty model class");
  for (const auto& m : models) require_same_signature(models.front(), m);
  const auto vars = free_variables_ordered(phi);
  const Signature& sig = models.front().signature();
  const CompiledFormula target(phi, sig, vars);
  std::vector<std::vector<bool>> phi_tables;
  for (const auto& m : models) {
    std::vector<bool> t;
    for_each_tuple(m.size(), vars.size(), [&](const std::vector<Elem>& a) { t.push_back(target.holds(m, a)); });
    phi_tables.push_back(std::move(t));
  }
  FormulaBank bank(sig, budget, vars);
  std::vector<Formula> out;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    bool jointly_satisfiable = false;
    for (std::size_t k = 0; k < models.size() && !jointly_satisfiable; ++k) {
      std::size_t row = 0;
      for_each_tuple(models[k].size(), vars.size(), [&](const std::vector<Elem>& a) {
        if (!jointly_satisfiable && phi_tables[k][row] && bank.compiled(i).holds(models[k], a)) jointly_satisfiable = true;
        ++row;
      });
    }
    if (!jointly_satisfiable) out.push_back(bank.formula(i));
  }
  return out;
}

/// Outcome of a budgeted immersion check. `witness` names a positive formula true in the
/// target on the image of `tuple` but false in the source on `tuple`.
struct ImmersionResult {
  bool immersion = true;
  Budget budget;
  std::optional<Formula> witness;
  std::vector<std::string> params;
  std::vector<Elem> tuple;
};

inline ImmersionResult is_immersion(const Structure& source, const Structure& target, std::span<const Elem> map,
                                    const FormulaBank& bank) {
  if (!is_homomorphism(source, target, map)) throw InputError("map is not a homomorphism");
  ImmersionResult result{true, bank.budget(), std::nullopt, bank.params(), {}};
  std::vector<Elem> image(bank.params().size());
  for (std::size_t i = 0; i < bank.size() && result.immersion; ++i) {
    const auto& f = bank.compiled(i);
    for_each_tuple(source.size(), bank.params().size(), [&](const std::vector<Elem>& t) {
      if (!result.immersion) return;
      for (std::size_t k = 0; k < t.size(); ++k) image[k] = map[static_cast<std::size_t>(t[k])];
      if (f.holds(source, t) != f.holds(target, image)) {
        result.immersion = false;
        result.witness = bank.formula(i);
        result.tuple = t;
      }
    });
  }
  return result;
}

/// Every enumerated positive formula with free variables among the whole pool is
/// checked on every source tuple, so "true" means no witness exists within the budget.
inline ImmersionResult is_immersion(const Structure& source, const Structure& target, std::span<const Elem> map,
                                    const Budget& budget) {
  require_same_signature(source, target);
  FormulaBank bank(source.signature(), budget, variable_pool(budget, {}));
  return is_immersion(source, target, map, bank);
}

}  // namespace posmodel

#endif  // POSMODEL_ENUMERATE_HPP
