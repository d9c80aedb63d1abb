#ifndef POSMODEL_VERIFY_HPP
#define POSMODEL_VERIFY_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/enumerate.hpp"
#include "posmodel/error.hpp"
#include "posmodel/evaluate.hpp"
#include "posmodel/formula.hpp"
#include "posmodel/product.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"

namespace posmodel {

enum class Verdict { Holds, HoldsWithinBudget, Fails, PreconditionFailed };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::HoldsWithinBudget: return "holds-within-budget";
    case Verdict::Fails: return "counterexample";
    case Verdict::PreconditionFailed: return "precondition-failed";
  }
  return "?";
}

struct VerificationReport {
  std::string claim;
  std::optional<Budget> budget;
  Verdict verdict = Verdict::Holds;
  std::string witness;  // empty unless the verdict is a failure
  std::vector<std::string> notes;

  bool ok() const { return verdict == Verdict::Holds || verdict == Verdict::HoldsWithinBudget; }
};

inline std::string tuple_names(const Structure& m, const std::vector<std::string>& vars, std::span<const Elem> t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? ", " : "") + vars[i] + "=" + m.name(t[i]);
  return "(" + out + ")";
}

/// Positive formulas within a budget, each compiled over its own free variables (in
/// order of first occurrence).
class PositiveBank {
 public:
  PositiveBank(const Signature& sig, const Budget& budget, bool sentences_only = false)
      : budget_(budget),
        formulas_(enumerate_positive_formulas(sig, budget, sentences_only ? std::vector<std::string>{}
                                                                          : variable_pool(budget, {}))) {
    for (const auto& f : formulas_) {
      vars_.push_back(free_variables_ordered(f));
      compiled_.emplace_back(f, sig, vars_.back());
    }
  }

  const Budget& budget() const { return budget_; }
  std::size_t size() const { return formulas_.size(); }
  const Formula& formula(std::size_t i) const { return formulas_[i]; }
  const std::vector<std::string>& vars(std::size_t i) const { return vars_[i]; }
  const CompiledFormula& compiled(std::size_t i) const { return compiled_[i]; }

 private:
  Budget budget_;
  std::vector<Formula> formulas_;
  std::vector<std::vector<std::string>> vars_;
  std::vector<CompiledFormula> compiled_;
};

// ---------------------------------------------------------------------------
// Positive Los

/// product |= phi(a/F) iff [[phi(a)]] in F, for every bank formula and every tuple of
/// classes (read through their representatives). For a non-prime filter the sweep is a
/// counterexample search.
inline VerificationReport verify_los(const FilterProduct& fp, const PositiveBank& bank) {
  VerificationReport rep{"positive-los", bank.budget(), Verdict::HoldsWithinBudget, {}, {}};
  if (!fp.prime) rep.notes.push_back("filter is not prime: counterexample search mode");
  const Structure& m = fp.structure;
  std::vector<Section> args;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& f = bank.compiled(i);
    bool failed = false;
    for_each_tuple(m.size(), f.param_count(), [&](const std::vector<Elem>& t) {
      if (failed) return;
      args.clear();
      for (Elem k : t) args.push_back(fp.representative(static_cast<std::size_t>(k)));
      const bool inside = f.holds(m, t);
      const UpsetMask den = denotation(fp.system, f, args);
      if (inside != fp.filter.contains(den)) {
        failed = true;
        rep.verdict = Verdict::Fails;
        rep.witness = to_string(bank.formula(i)) + " at " + tuple_names(m, bank.vars(i), t) + ": product says " +
                      (inside ? "true" : "false") + ", denotation " + describe(fp.system.index(), den) +
                      (inside ? " not in F" : " in F");
      }
    });
    if (failed) return rep;
  }
  if (!fp.prime) rep.notes.push_back("no violation exists for this instance within the budget");
  return rep;
}

inline VerificationReport verify_los(const FilterProduct& fp, const Budget& budget) {
  return verify_los(fp, PositiveBank(fp.system.signature(), budget));
}

/// The eventual-truth form for an omega chain read as a prime power.
inline VerificationReport verify_los(const OmegaView& view, const PositiveBank& bank) {
  VerificationReport rep{"positive-los-omega", bank.budget(), Verdict::HoldsWithinBudget, {}, {}};
  const Structure& m = view.structure();
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& f = bank.compiled(i);
    bool failed = false;
    for_each_tuple(m.size(), f.param_count(), [&](const std::vector<Elem>& t) {
      if (failed) return;
      const bool inside = f.holds(m, t);
      if (inside != view.eventually(f, t)) {
        failed = true;
        rep.verdict = Verdict::Fails;
        rep.witness = to_string(bank.formula(i)) + " at " + tuple_names(m, bank.vars(i), t) + ": limit says " +
                      (inside ? "true" : "false") + ", eventual truth disagrees";
      }
    });
    if (failed) return rep;
  }
  return rep;
}

inline VerificationReport verify_los(const OmegaView& view, const Budget& budget) {
  return verify_los(view, PositiveBank(view.structure().signature(), budget));
}

// ---------------------------------------------------------------------------
// h-inductive persistence

namespace detail {

inline void split_conjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f.kind == Formula::Kind::And) {
    split_conjuncts(f.children[0], out);
    split_conjuncts(f.children[1], out);
  } else {
    out.push_back(f);
  }
}

/// For an h-inductive sentence false in `m`: a failing conjunct and the universal tuple
/// refuting it.
inline std::string refutation(const Structure& m, const Formula& phi) {
  std::vector<Formula> parts;
  split_conjuncts(negation_as_implication(phi), parts);
  for (const auto& part : parts) {
    if (evaluate(m, part)) continue;
    std::vector<std::string> vars;
    const Formula* body = &part;
    while (body->kind == Formula::Kind::Forall) {
      vars.push_back(body->symbol);
      body = &body->children[0];
    }
    const CompiledFormula cf(*body, m.signature(), vars);
    std::string found;
    for_each_tuple(m.size(), vars.size(), [&](const std::vector<Elem>& t) {
      if (found.empty() && !cf.holds(m, t)) found = to_string(part) + " fails at " + tuple_names(m, vars, t);
    });
    return found;
  }
  return {};
}

}  // namespace detail

/// An h-inductive sentence true in every M_x stays true in the prime product.
inline VerificationReport verify_h_inductive_persistence(const OrderedSystem& sys, const Filter& filter, const Formula& phi) {
  VerificationReport rep{"h-inductive-persistence", std::nullopt, Verdict::Holds, {}, {}};
  if (!free_variables(phi).empty()) throw InputError("persistence needs a sentence");
  if (!is_h_inductive(negation_as_implication(phi))) throw InputError("formula is not h-inductive");
  for (std::size_t x = 0; x < sys.index().size(); ++x)
    if (!evaluate(sys.structure(x), phi)) {
      rep.verdict = Verdict::PreconditionFailed;
      rep.notes.push_back("M_" + sys.index().name(x) + " does not satisfy the sentence");
      return rep;
    }
  const FilterProduct fp = prime_product(sys, filter);
  if (!evaluate(fp.structure, phi)) {
    rep.verdict = Verdict::Fails;
    rep.witness = detail::refutation(fp.structure, phi);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Positive theories of finite structures

/// Every positive sentence true in M is true in N iff M maps homomorphically into N
/// (a finite structure is isomorphic to each of its ultrapowers).
inline bool satisfies_positive_theory(const Structure& m, const Structure& n) {
  require_same_signature(m, n);
  return find_homomorphism(n, m).has_value();
}

struct EquivalenceResult {
  bool equivalent = false;
  std::optional<ElementMap> forward;   // M -> N
  std::optional<ElementMap> backward;  // N -> M
};

inline EquivalenceResult positive_equivalence(const Structure& m, const Structure& n) {
  require_same_signature(m, n);
  EquivalenceResult out;
  out.forward = find_homomorphism(m, n);
  out.backward = find_homomorphism(n, m);
  out.equivalent = out.forward && out.backward;
  return out;
}

inline bool positively_equivalent(const Structure& m, const Structure& n) { return positive_equivalence(m, n).equivalent; }

// ---------------------------------------------------------------------------
// Cores

struct CoreResult {
  Structure core;
  std::vector<Elem> elements;  // core element i is M element elements[i]
  ElementMap inclusion;        // core -> M
  ElementMap retraction;       // M -> core, retraction o inclusion = id
  ElementMap endo;             // inclusion o retraction, an idempotent endomorphism of M
};

/// A minimum-size retract: the image of an endomorphism with fewest distinct values
/// (first in search order), made idempotent by taking a power.
inline CoreResult core(const Structure& m) {
  std::optional<ElementMap> best;
  std::size_t best_size = m.size() + 1;
  auto image_size = [](const ElementMap& f) {
    std::vector<Elem> v(f);
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  for (std::size_t target = 1; target <= m.size() && !best; ++target) {
    detail::HomSearch search(m, m, false);
    search.run([&](const ElementMap& f) {
      if (image_size(f) == target) {
        best = f;
        best_size = target;
        return false;
      }
      return true;
    });
  }
  ElementMap e = *best;
  while (compose(e, e) != e) e = compose(*best, e);

  CoreResult out;
  for (std::size_t a = 0; a < m.size(); ++a)
    if (e[a] == static_cast<Elem>(a)) out.elements.push_back(static_cast<Elem>(a));
  if (out.elements.size() != best_size) throw InputError("core search lost the image");
  out.core = induced_substructure(m, out.elements);
  out.inclusion = out.elements;
  std::vector<Elem> position(m.size(), -1);
  for (std::size_t i = 0; i < out.elements.size(); ++i) position[static_cast<std::size_t>(out.elements[i])] = static_cast<Elem>(i);
  for (std::size_t a = 0; a < m.size(); ++a) out.retraction.push_back(position[static_cast<std::size_t>(e[a])]);
  out.endo = e;
  return out;
}

// ---------------------------------------------------------------------------
// pec models

namespace detail {

/// Truth tables of a formula bank over a structure, one bit per parameter tuple.
class TableSet {
 public:
  TableSet(const FormulaBank& bank, const Structure& m) : tuples_(1) {
    for (std::size_t i = 0; i < bank.params().size(); ++i) tuples_ *= m.size();
    words_ = (tuples_ + 63) / 64;
    bits_.assign(bank.size() * words_, 0);
    for (std::size_t i = 0; i < bank.size(); ++i) {
      std::size_t row = 0;
      for_each_tuple(m.size(), bank.params().size(), [&](const std::vector<Elem>& t) {
        if (bank.compiled(i).holds(m, t)) bits_[i * words_ + row / 64] |= std::uint64_t{1} << (row % 64);
        ++row;
      });
    }
  }

  bool get(std::size_t formula, std::size_t row) const { return (bits_[formula * words_ + row / 64] >> (row % 64)) & 1U; }
  const std::uint64_t* row(std::size_t formula) const { return bits_.data() + formula * words_; }
  std::size_t words() const { return words_; }
  std::size_t tuples() const { return tuples_; }

 private:
  std::size_t tuples_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

inline std::size_t tuple_row(std::span<const Elem> t, std::size_t n) {
  std::size_t row = 0;
  for (Elem e : t) row = row * n + static_cast<std::size_t>(e);
  return row;
}

inline std::vector<Elem> row_tuple(std::size_t row, std::size_t n, std::size_t k) {
  std::vector<Elem> t(k);
  for (std::size_t i = k; i-- > 0;) {
    t[i] = static_cast<Elem>(row % n);
    row /= n;
  }
  return t;
}

}  // namespace detail

struct PecResult {
  VerificationReport report;
  bool direct = true;     // every hom into K is an immersion within budget
  bool resultant = true;  // every failure of phi(a) in M is certified by a resultant formula
  bool agree() const { return direct == resultant; }
  std::string direct_witness;
  std::string resultant_witness;
};

/// Both pec criteria over a finite class. All formulas share the variable pool as
/// parameters, so resultants range over formulas in the same variables.
inline PecResult is_pec(const Structure& m, const std::vector<Structure>& models, const Budget& budget) {
  if (models.empty()) throw InputError("pec needs a nonempty model class");
  for (const auto& n : models) require_same_signature(m, n);
  const auto pool = variable_pool(budget, {});
  const FormulaBank bank(m.signature(), budget, pool);
  const std::size_t k = pool.size();

  const detail::TableSet mt(bank, m);
  std::vector<detail::TableSet> nt;
  for (const auto& n : models) nt.emplace_back(bank, n);

  PecResult out;
  out.report = {"pec", budget, Verdict::HoldsWithinBudget, {}, {}};

  // Direct: every hom M -> N reflects every formula.
  for (std::size_t j = 0; j < models.size() && out.direct; ++j) {
    for (const auto& h : enumerate_homs(m, models[j])) {
      for (std::size_t row = 0; row < mt.tuples() && out.direct; ++row) {
        const auto t = detail::row_tuple(row, m.size(), k);
        std::vector<Elem> image;
        for (Elem a : t) image.push_back(h[static_cast<std::size_t>(a)]);
        const std::size_t image_row = detail::tuple_row(image, models[j].size());
        for (std::size_t i = 0; i < bank.size(); ++i)
          if (mt.get(i, row) != nt[j].get(i, image_row)) {
            out.direct = false;
            std::string map;
            for (std::size_t a = 0; a < h.size(); ++a)
              map += (a ? "," : "") + m.name(static_cast<Elem>(a)) + "->" + models[j].name(h[a]);
            out.direct_witness = "hom {" + map + "} into model " + std::to_string(j) + " is not an immersion: " +
                                 to_string(bank.formula(i)) + " at " + tuple_names(m, pool, t);
            break;
          }
      }
      if (!out.direct) break;
    }
  }

  // Resultants: group formulas by their truth tables on M and on every member of K.
  std::map<std::vector<std::uint64_t>, std::size_t> classes;
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    std::vector<std::uint64_t> key(mt.row(i), mt.row(i) + mt.words());
    for (const auto& t : nt) key.insert(key.end(), t.row(i), t.row(i) + t.words());
    if (classes.emplace(std::move(key), reps.size()).second) reps.push_back(i);
  }
  auto disjoint_on_class = [&](std::size_t a, std::size_t b) {
    for (const auto& t : nt)
      for (std::size_t w = 0; w < t.words(); ++w)
        if (t.row(a)[w] & t.row(b)[w]) return false;
    return true;
  };
  for (std::size_t phi : reps) {
    std::vector<std::uint64_t> covered(mt.words(), 0);
    for (std::size_t psi : reps)
      if (disjoint_on_class(phi, psi))
        for (std::size_t w = 0; w < mt.words(); ++w) covered[w] |= mt.row(psi)[w];
    for (std::size_t row = 0; row < mt.tuples(); ++row) {
      if (mt.get(phi, row) || ((covered[row / 64] >> (row % 64)) & 1U)) continue;
      out.resultant = false;
      out.resultant_witness = to_string(bank.formula(phi)) + " fails at " +
                              tuple_names(m, pool, detail::row_tuple(row, m.size(), k)) +
                              " with no resultant formula true there";
      break;
    }
    if (!out.resultant) break;
  }

  if (!out.direct) {
    out.report.verdict = Verdict::Fails;
    out.report.witness = out.direct_witness;
  }
  if (!out.agree()) out.report.notes.push_back("criteria disagree (budget artifact)");
  return out;
}

/// If N immerses into a pec model M of K, N is pec relative to K plus N.
inline VerificationReport transfer_check(const Structure& n, const Structure& m, const ElementMap& f,
                                         const std::vector<Structure>& models, const Budget& budget) {
  require_same_signature(n, m);
  if (!is_homomorphism(n, m, f)) throw InputError("precondition: map is not a homomorphism");
  if (!is_immersion(n, m, f, budget).immersion) throw InputError("precondition: map is not an immersion within budget");
  if (!is_pec(m, models, budget).direct) throw InputError("precondition: target is not pec within budget");
  std::vector<Structure> extended = models;
  extended.push_back(n);
  PecResult pec = is_pec(n, extended, budget);
  VerificationReport rep{"transfer", budget, Verdict::HoldsWithinBudget, {}, {}};
  if (!pec.direct) {
    rep.verdict = Verdict::Fails;
    rep.witness = pec.direct_witness;
    rep.notes.push_back("flagged as a possible budget artifact");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Finite analog of common prime powers

struct PrimePowerResult {
  VerificationReport report;
  bool equivalent = false;
  bool cores_isomorphic = false;
  CoreResult core_m, core_n;
  OmegaChain chain_m, chain_n;          // M -> M -> ... and N -> N -> ..., along the core retractions
  std::optional<ChainLimit> limit_m, limit_n;
  std::optional<ElementMap> limit_iso;  // limit_m -> limit_n
};

/// Positive equivalence against isomorphism of cores. On equivalent inputs, each core is
/// exhibited as the limit of the omega chain repeating the retraction endomorphism.
inline PrimePowerResult prime_power_equivalence(const Structure& m, const Structure& n, const Budget& budget = {}) {
  require_same_signature(m, n);
  PrimePowerResult out;
  out.report = {"prime-power-equivalence", budget, Verdict::Holds, {}, {}};
  out.report.notes.push_back("finite structures: each ultrapower is isomorphic to the structure itself");
  out.equivalent = positively_equivalent(m, n);
  out.core_m = core(m);
  out.core_n = core(n);
  out.cores_isomorphic = find_isomorphism(out.core_m.core, out.core_n.core).has_value();
  if (out.equivalent != out.cores_isomorphic) {
    out.report.verdict = Verdict::Fails;
    out.report.witness = out.equivalent ? "positively equivalent but cores differ" : "cores agree but not positively equivalent";
    return out;
  }
  if (!out.equivalent) return out;

  out.chain_m = {{}, {}, m, out.core_m.endo};
  out.chain_n = {{}, {}, n, out.core_n.endo};
  const OmegaView vm = omega_prime_power(out.chain_m);
  const OmegaView vn = omega_prime_power(out.chain_n);
  out.limit_m = vm.limit;
  out.limit_n = vn.limit;
  out.limit_iso = find_isomorphism(vm.structure(), vn.structure());
  if (!out.limit_iso || !find_isomorphism(vm.structure(), out.core_m.core)) {
    out.report.verdict = Verdict::Fails;
    out.report.witness = "chain limits do not realize the common core";
    return out;
  }
  for (const OmegaView* v : {&vm, &vn}) {
    VerificationReport los = verify_los(*v, budget);
    if (!los.ok()) {
      out.report.verdict = Verdict::Fails;
      out.report.witness = los.witness;
      return out;
    }
  }
  return out;
}

}  // namespace posmodel

#endif  // POSMODEL_VERIFY_HPP
