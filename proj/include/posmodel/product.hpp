#ifndef POSMODEL_PRODUCT_HPP
#define POSMODEL_PRODUCT_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"
#include "posmodel/evaluate.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"

namespace posmodel {

/// The quotient S_F / =_F of an ordered system by a filter, with its induced structure.
/// Carrier element k (named "cls<k>") is the class whose least section is
/// sections[representatives[k]].
struct FilterProduct {
  OrderedSystem system;
  Filter filter;
  bool prime = false;
  std::vector<Section> sections;             // S_F, sorted
  std::vector<std::size_t> class_of;         // per section
  std::vector<std::size_t> representatives;  // per class
  Structure structure;

  const Section& representative(std::size_t k) const { return sections[representatives[k]]; }

  std::optional<std::size_t> find_section(const Section& a) const {
    auto it = std::lower_bound(sections.begin(), sections.end(), a);
    if (it == sections.end() || !(*it == a)) return std::nullopt;
    return static_cast<std::size_t>(it - sections.begin());
  }

  /// The class of an arbitrary member of S_F.
  std::size_t class_of_section(const Section& a) const {
    auto i = find_section(a);
    if (!i) throw InputError("section is not in S_F");
    return class_of[*i];
  }

  /// a =_F b iff [[a = b]] is in F.
  bool equivalent(const Section& a, const Section& b) const {
    UpsetMask agree = 0;
    for (std::size_t x : members(a.domain & b.domain))
      if (a.values[x] == b.values[x]) agree |= UpsetMask{1} << x;
    return filter.contains(agree);
  }
};

namespace detail {

inline UpsetMask common_domain(const Poset& p, std::span<const Section* const> args) {
  UpsetMask d = p.full();
  for (const Section* a : args) d &= a->domain;
  return d;
}

/// [[R(a_1..a_n)]] for a basic relation.
inline UpsetMask relation_denotation(const OrderedSystem& sys, std::size_t rel, std::span<const Section* const> args) {
  UpsetMask out = 0;
  std::vector<Elem> point(args.size());
  for (std::size_t x : members(common_domain(sys.index(), args))) {
    for (std::size_t i = 0; i < args.size(); ++i) point[i] = args[i]->values[x];
    if (sys.structure(x).holds(rel, point)) out |= UpsetMask{1} << x;
  }
  return out;
}

/// g computed pointwise on the restrictions to V_a = V_{a_1} n ... n V_{a_n}.
inline Section apply_pointwise(const OrderedSystem& sys, std::size_t fn, std::span<const Section* const> args) {
  const UpsetMask d = common_domain(sys.index(), args);
  Section out{d, std::vector<Elem>(sys.index().size(), -1)};
  std::vector<Elem> point(args.size());
  for (std::size_t x : members(d)) {
    for (std::size_t i = 0; i < args.size(); ++i) point[i] = args[i]->values[x];
    out.values[x] = sys.structure(x).apply(fn, point);
  }
  return out;
}

}  // namespace detail

/// The filter product of `sys` by `filter`.
inline FilterProduct filter_product(const OrderedSystem& sys, const Filter& filter) {
  if (filter.members.empty()) throw InputError("empty filter");
  if (!is_filter(sys.index(), filter)) throw InputError("F is not a filter over the index");
  const Poset& p = sys.index();

  FilterProduct fp;
  fp.system = sys;
  fp.filter = filter;
  fp.prime = is_prime_filter(p, filter);
  for (UpsetMask v : filter.members) {
    auto s = sections(sys, v);
    fp.sections.insert(fp.sections.end(), s.begin(), s.end());
  }
  std::sort(fp.sections.begin(), fp.sections.end());

  fp.class_of.assign(fp.sections.size(), 0);
  for (std::size_t i = 0; i < fp.sections.size(); ++i) {
    std::size_t k = 0;
    while (k < fp.representatives.size() && !fp.equivalent(fp.sections[fp.representatives[k]], fp.sections[i])) ++k;
    if (k == fp.representatives.size()) fp.representatives.push_back(i);
    fp.class_of[i] = k;
  }

  std::vector<std::string> names;
  for (std::size_t k = 0; k < fp.representatives.size(); ++k) names.push_back("cls" + std::to_string(k));
  Structure s(sys.signature(), names);
  const Signature& sig = sys.signature();
  const std::size_t n = names.size();
  std::vector<const Section*> args;
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    const auto arity = static_cast<std::size_t>(sig.relations[r].second);
    for_each_tuple(n, arity, [&](const std::vector<Elem>& t) {
      args.clear();
      for (Elem k : t) args.push_back(&fp.representative(static_cast<std::size_t>(k)));
      if (filter.contains(detail::relation_denotation(sys, r, args))) s.add_tuple(r, t);
    });
  }
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    for_each_tuple(n, arity, [&](const std::vector<Elem>& t) {
      args.clear();
      for (Elem k : t) args.push_back(&fp.representative(static_cast<std::size_t>(k)));
      s.set_function(f, t, static_cast<Elem>(fp.class_of_section(detail::apply_pointwise(sys, f, args))));
    });
  }
  for (std::size_t c = 0; c < sig.constants.size(); ++c) {
    Section global{p.full(), std::vector<Elem>(p.size())};
    for (std::size_t x = 0; x < p.size(); ++x) global.values[x] = sys.structure(x).constant(c);
    s.set_constant(c, static_cast<Elem>(fp.class_of_section(global)));
  }
  s.check_complete();
  fp.structure = std::move(s);
  return fp;
}

/// A filter product by a prime filter.
inline FilterProduct prime_product(const OrderedSystem& sys, const Filter& filter) {
  if (!is_prime_filter(sys.index(), filter)) throw InputError("filter not prime");
  return filter_product(sys, filter);
}

/// Filter product by the principal filter at x, paired with the comparison map
/// m -> class of the section y -> f_xy(m) over the upset of x.
inline ElementMap point_collapse_map(const FilterProduct& fp, std::size_t x) {
  const OrderedSystem& sys = fp.system;
  const Poset& p = sys.index();
  ElementMap out;
  for (std::size_t m = 0; m < sys.structure(x).size(); ++m) {
    Section a{p.up(x), std::vector<Elem>(p.size(), -1)};
    for (std::size_t y : members(p.up(x))) a.values[y] = sys.hom(x, y)[m];
    out.push_back(static_cast<Elem>(fp.class_of_section(a)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classical reduced products (independent oracle)

/// Textbook reduced product of a family over I = {0..n-1} by a set filter D, given as
/// bitmasks over I. Carrier element k is the class of the least tuple in it.
struct ReducedProduct {
  std::vector<std::vector<Elem>> tuples;  // the whole product, lexicographic
  std::vector<std::size_t> class_of;
  std::vector<std::size_t> representatives;
  Structure structure;

  std::size_t class_of_tuple(const std::vector<Elem>& t) const {
    auto it = std::lower_bound(tuples.begin(), tuples.end(), t);
    if (it == tuples.end() || *it != t) throw InputError("not an element of the product");
    return class_of[static_cast<std::size_t>(it - tuples.begin())];
  }
};

inline bool is_set_filter(std::size_t n, const std::vector<UpsetMask>& d) {
  const UpsetMask all = (UpsetMask{1} << n) - 1;
  auto in = [&](UpsetMask s) { return std::find(d.begin(), d.end(), s) != d.end(); };
  if (d.empty()) return false;
  for (UpsetMask s : d) {
    if (s & ~all) return false;
    for (UpsetMask t = 0; t <= all; ++t)
      if ((s & t) == s && !in(t)) return false;
    for (UpsetMask t : d)
      if (!in(s & t)) return false;
  }
  return true;
}

inline ReducedProduct classical_reduced_product(const std::vector<Structure>& family, const std::vector<UpsetMask>& d) {
  if (family.empty()) throw InputError("empty family");
  for (const auto& m : family) require_same_signature(family.front(), m);
  const std::size_t n = family.size();
  if (!is_set_filter(n, d)) throw InputError("D is not a filter over the index set");
  auto in_d = [&](UpsetMask s) { return std::find(d.begin(), d.end(), s) != d.end(); };

  ReducedProduct rp;
  std::vector<Elem> t(n, 0);
  auto enumerate = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      rp.tuples.push_back(t);
      return;
    }
    for (std::size_t v = 0; v < family[i].size(); ++v) {
      t[i] = static_cast<Elem>(v);
      self(self, i + 1);
    }
  };
  enumerate(enumerate, 0);

  auto agreement = [&](const std::vector<Elem>& a, const std::vector<Elem>& b) {
    UpsetMask s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] == b[i]) s |= UpsetMask{1} << i;
    return s;
  };
  rp.class_of.assign(rp.tuples.size(), 0);
  for (std::size_t i = 0; i < rp.tuples.size(); ++i) {
    std::size_t k = 0;
    while (k < rp.representatives.size() && !in_d(agreement(rp.tuples[rp.representatives[k]], rp.tuples[i]))) ++k;
    if (k == rp.representatives.size()) rp.representatives.push_back(i);
    rp.class_of[i] = k;
  }

  std::vector<std::string> names;
  for (std::size_t k = 0; k < rp.representatives.size(); ++k) names.push_back("r" + std::to_string(k));
  Structure s(family.front().signature(), names);
  const Signature& sig = family.front().signature();
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    const auto arity = static_cast<std::size_t>(sig.relations[r].second);
    for_each_tuple(names.size(), arity, [&](const std::vector<Elem>& cls) {
      UpsetMask truth = 0;
      std::vector<Elem> point(arity);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < arity; ++j)
          point[j] = rp.tuples[rp.representatives[static_cast<std::size_t>(cls[j])]][i];
        if (family[i].holds(r, point)) truth |= UpsetMask{1} << i;
      }
      if (in_d(truth)) s.add_tuple(r, cls);
    });
  }
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    for_each_tuple(names.size(), arity, [&](const std::vector<Elem>& cls) {
      std::vector<Elem> value(n), point(arity);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < arity; ++j)
          point[j] = rp.tuples[rp.representatives[static_cast<std::size_t>(cls[j])]][i];
        value[i] = family[i].apply(f, point);
      }
      s.set_function(f, cls, static_cast<Elem>(rp.class_of_tuple(value)));
    });
  }
  for (std::size_t c = 0; c < sig.constants.size(); ++c) {
    std::vector<Elem> value(n);
    for (std::size_t i = 0; i < n; ++i) value[i] = family[i].constant(c);
    s.set_constant(c, static_cast<Elem>(rp.class_of_tuple(value)));
  }
  s.check_complete();
  rp.structure = std::move(s);
  return rp;
}

// ---------------------------------------------------------------------------
// Omega chains as prime powers

/// The direct limit of an omega chain read as a prime product over omega by the filter
/// of principal upsets: [[phi(a)]] is in F iff phi(a) holds from some stage onward.
struct OmegaView {
  OmegaChain chain;
  ChainLimit limit;

  const Structure& structure() const { return limit.limit; }

  /// Whether `f` holds of the stage images of limit elements `args` at every stage
  /// from some point on. Limit elements are read at the first tail stage, where their
  /// orbit under e is periodic from the start.
  bool eventually(const CompiledFormula& f, std::span<const Elem> args) const {
    std::vector<Elem> stage(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) stage[i] = limit.carrier[static_cast<std::size_t>(args[i])];
    for (std::size_t n = 0; n < limit.period; ++n) {
      if (!f.holds(chain.tail, stage)) return false;
      for (auto& a : stage) a = chain.endo[static_cast<std::size_t>(a)];
    }
    return true;
  }
};

inline OmegaView omega_prime_power(const OmegaChain& ch) { return {ch, omega_colimit(ch)}; }

}  // namespace posmodel

#endif  // POSMODEL_PRODUCT_HPP
