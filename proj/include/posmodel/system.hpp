#ifndef POSMODEL_SYSTEM_HPP
#define POSMODEL_SYSTEM_HPP

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
#include "posmodel/formula.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/structure.hpp"

namespace posmodel {

/// Structures indexed by a finite wellfounded forest, with connecting homomorphisms
/// f_xy for every x <= y satisfying f_xx = id and f_xz = f_yz o f_xy.
class OrderedSystem {
 public:
  OrderedSystem() = default;

  /// `homs` maps index pairs (x, y) with x <= y to f_xy. Pairs not listed are composed
  /// along covers; every cover pair must be listed.
  static OrderedSystem validate(Poset index, std::vector<Structure> structures,
                                const std::map<std::pair<std::size_t, std::size_t>, ElementMap>& homs) {
    if (!is_wellfounded_forest(index)) throw InputError("index is not a wellfounded forest");
    if (structures.size() != index.size()) throw InputError("need one structure per index point");
    for (const auto& s : structures)
      if (!(s.signature() == structures.front().signature())) throw InputError("structures do not share a signature");

    OrderedSystem sys;
    sys.index_ = std::move(index);
    sys.structures_ = std::move(structures);
    const std::size_t n = sys.index_.size();
    sys.homs_.assign(n, std::vector<ElementMap>(n));
    const Poset& p = sys.index_;

    for (const auto& [key, map] : homs) {
      const auto [x, y] = key;
      if (x >= n || y >= n || !p.leq(x, y))
        throw InputError("hom given for non-comparable pair (" + sys.point_name(x) + "," + sys.point_name(y) + ")");
      if (!is_homomorphism(sys.structures_[x], sys.structures_[y], map))
        throw InputError("f_" + p.name(x) + p.name(y) + " is not a homomorphism: " + first_failure(sys, x, y, map));
      if (x == y && map != identity_map(sys.structures_[x].size()))
        throw InputError("identity failure: f_" + p.name(x) + p.name(x) + " is not the identity");
      sys.homs_[x][y] = map;
    }
    for (std::size_t x = 0; x < n; ++x) sys.homs_[x][x] = identity_map(sys.structures_[x].size());

    // Fill in missing pairs by composing along the chain below y.
    for (std::size_t y = 0; y < n; ++y) {
      std::vector<std::size_t> below = members(p.down(y));
      std::sort(below.begin(), below.end(), [&](std::size_t a, std::size_t b) { return p.leq(b, a) && a != b; });
      // `below` now runs from y downward.
      for (std::size_t i = 1; i < below.size(); ++i) {
        const std::size_t x = below[i], c = below[i - 1];
        if (!sys.homs_[x][y].empty()) continue;
        if (homs.find({x, c}) == homs.end())
          throw InputError("missing hom for cover pair (" + p.name(x) + "," + p.name(c) + ")");
        sys.homs_[x][y] = compose(sys.homs_[c][y], sys.homs_[x][c]);
      }
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z)
          if (p.leq(x, y) && p.leq(y, z) && sys.homs_[x][z] != compose(sys.homs_[y][z], sys.homs_[x][y]))
            throw InputError("functoriality failure (" + p.name(x) + "," + p.name(y) + "," + p.name(z) + ")");
    return sys;
  }

  const Poset& index() const { return index_; }
  const Structure& structure(std::size_t x) const { return structures_.at(x); }
  const std::vector<Structure>& structures() const { return structures_; }
  const Signature& signature() const { return structures_.front().signature(); }
  /// f_xy; requires x <= y.
  const ElementMap& hom(std::size_t x, std::size_t y) const {
    if (!index_.leq(x, y)) throw InputError("no hom between non-comparable points");
    return homs_[x][y];
  }

 private:
  std::string point_name(std::size_t x) const { return x < index_.size() ? index_.name(x) : "?"; }

  static std::string first_failure(const OrderedSystem& sys, std::size_t x, std::size_t y, const ElementMap& map) {
    const Structure& m = sys.structures_[x];
    const Structure& t = sys.structures_[y];
    if (map.size() != m.size()) return "wrong map size";
    for (std::size_t r = 0; r < m.signature().relations.size(); ++r)
      for (const auto& tuple : m.tuples(r)) {
        std::vector<Elem> image;
        for (Elem a : tuple) image.push_back(map[static_cast<std::size_t>(a)]);
        if (!t.holds(r, image)) {
          std::string names;
          for (Elem a : tuple) names += (names.empty() ? "" : ",") + m.name(a);
          return m.signature().relations[r].first + " tuple (" + names + ") not preserved";
        }
      }
    return "operation or constant not preserved";
  }

  Poset index_;
  std::vector<Structure> structures_;
  std::vector<std::vector<ElementMap>> homs_;
};

/// A coherent family a = <a(x) | x in V> over an upset V of the index. `values` has
/// one slot per index point; slots outside the domain hold -1.
struct Section {
  UpsetMask domain = 0;
  std::vector<Elem> values;

  Elem at(std::size_t x) const { return values[x]; }
  bool operator==(const Section&) const = default;
  auto operator<=>(const Section&) const = default;
};

inline bool is_section(const OrderedSystem& sys, const Section& a) {
  const Poset& p = sys.index();
  if (!p.is_upset(a.domain) || a.values.size() != p.size()) return false;
  for (std::size_t x = 0; x < p.size(); ++x) {
    const bool inside = (a.domain >> x) & 1U;
    if (inside != (a.values[x] >= 0)) return false;
    if (inside && static_cast<std::size_t>(a.values[x]) >= sys.structure(x).size()) return false;
  }
  for (std::size_t y : members(a.domain))
    for (std::size_t z : members(a.domain))
      if (p.leq(y, z) && sys.hom(y, z)[static_cast<std::size_t>(a.values[y])] != a.values[z]) return false;
  return true;
}

/// All of S_V, in canonical (value tuple) order. A section is determined by its values
/// at the minimal points of V, since the points below any z in V form a chain.
inline std::vector<Section> sections(const OrderedSystem& sys, UpsetMask v) {
  const Poset& p = sys.index();
  if (!p.is_upset(v)) throw InputError("V is not an upset");
  const auto mins = minimal_elements(p, v);
  std::vector<std::size_t> root(p.size(), 0);
  for (std::size_t z : members(v))
    for (std::size_t y : mins)
      if (p.leq(y, z)) root[z] = y;

  std::vector<Section> out;
  Section a{v, std::vector<Elem>(p.size(), -1)};
  auto extend = [&](auto&& self, std::size_t i) -> void {
    if (i == mins.size()) {
      for (std::size_t z : members(v)) a.values[z] = sys.hom(root[z], z)[static_cast<std::size_t>(a.values[root[z]])];
      out.push_back(a);
      return;
    }
    for (std::size_t m = 0; m < sys.structure(mins[i]).size(); ++m) {
      a.values[mins[i]] = static_cast<Elem>(m);
      self(self, i + 1);
    }
  };
  extend(extend, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// a restricted to V (V an upset contained in the domain of a).
inline Section restrict(const OrderedSystem& sys, const Section& a, UpsetMask v) {
  if (!sys.index().is_upset(v)) throw InputError("V is not an upset");
  if (v & ~a.domain) throw InputError("V is not contained in the domain of the section");
  Section out{v, a.values};
  for (std::size_t x = 0; x < out.values.size(); ++x)
    if (!((v >> x) & 1U)) out.values[x] = -1;
  return out;
}

/// [[phi(a_1..a_n)]]: the points of V_{a_1} n ... n V_{a_n} where phi holds of the
/// components. `f` is compiled with one parameter per section.
inline UpsetMask denotation(const OrderedSystem& sys, const CompiledFormula& f, std::span<const Section> args) {
  if (args.size() != f.param_count()) throw InputError("arity mismatch: formula needs " +
                                                       std::to_string(f.param_count()) + " sections");
  UpsetMask domain = sys.index().full();
  for (const auto& a : args) domain &= a.domain;
  UpsetMask out = 0;
  std::vector<Elem> point(args.size());
  for (std::size_t x : members(domain)) {
    for (std::size_t i = 0; i < args.size(); ++i) point[i] = args[i].values[x];
    if (f.holds(sys.structure(x), point)) out |= UpsetMask{1} << x;
  }
  return out;
}

/// Sections are matched to the free variables of `phi` in order of first occurrence.
inline UpsetMask denotation(const OrderedSystem& sys, const Formula& phi, const std::vector<Section>& args) {
  const auto vars = free_variables_ordered(phi);
  if (vars.size() != args.size()) throw InputError("arity mismatch: formula has " + std::to_string(vars.size()) +
                                                   " free variables");
  return denotation(sys, CompiledFormula(phi, sys.signature(), vars), args);
}

// ---------------------------------------------------------------------------
// Omega chains

/// M_0 -> ... -> M_{k-1} -> M -> M -> M -> ..., the tail repeating the endomorphism
/// `endo`. `links[i]` maps prefix[i] to prefix[i+1] (or to the tail for the last one).
struct OmegaChain {
  std::vector<Structure> prefix;
  std::vector<ElementMap> links;
  Structure tail;
  ElementMap endo;
};

inline void validate_chain(const OmegaChain& ch) {
  if (ch.links.size() != ch.prefix.size()) throw InputError("need one link per prefix stage");
  for (std::size_t i = 0; i < ch.prefix.size(); ++i) {
    const Structure& next = i + 1 < ch.prefix.size() ? ch.prefix[i + 1] : ch.tail;
    if (!is_homomorphism(ch.prefix[i], next, ch.links[i]))
      throw InputError("chain link " + std::to_string(i) + " is not a homomorphism");
  }
  if (!is_homomorphism(ch.tail, ch.tail, ch.endo)) throw InputError("tail endomorphism is not a homomorphism");
}

/// The direct limit of an omega chain, computed by stabilization of the powers of the
/// endomorphism e: e^offset = e^(offset+period) as functions. Limit element i is the
/// class of tail element carrier[i] at the first tail stage.
struct ChainLimit {
  Structure limit;
  std::vector<Elem> carrier;
  std::size_t offset = 0;
  std::size_t period = 1;
  std::size_t prefix_length = 0;
  /// Canonical map from stage `stage` (prefix stages first, then tail stages) into the limit.
  std::vector<ElementMap> prefix_maps;
  ElementMap settle;                   // e^offset
  std::vector<ElementMap> cycle_back;  // cycle_back[j] = e^((period - j) % period) on the carrier

  ElementMap stage_map(std::size_t stage) const {
    if (stage < prefix_length) return prefix_maps[stage];
    const std::size_t n = stage - prefix_length;
    const auto& back = cycle_back[(n + offset) % period];
    ElementMap out;
    for (Elem a : settle) out.push_back(back[static_cast<std::size_t>(a)]);
    return out;
  }
};

inline ChainLimit omega_colimit(const OmegaChain& ch) {
  validate_chain(ch);
  const Structure& m = ch.tail;
  std::vector<ElementMap> powers{identity_map(m.size())};
  std::map<ElementMap, std::size_t> first_seen{{powers[0], 0}};
  while (true) {
    ElementMap next = compose(ch.endo, powers.back());
    auto it = first_seen.find(next);
    if (it != first_seen.end()) {
      powers.push_back(std::move(next));
      break;
    }
    first_seen.emplace(next, powers.size());
    powers.push_back(std::move(next));
  }
  const std::size_t k = powers.size() - 1;
  const std::size_t offset = first_seen.at(powers[k]);
  const std::size_t period = k - offset;

  ChainLimit out;
  out.offset = offset;
  out.period = period;
  out.prefix_length = ch.prefix.size();
  std::vector<bool> in_image(m.size(), false);
  for (Elem a : powers[offset]) in_image[static_cast<std::size_t>(a)] = true;
  std::vector<Elem> index(m.size(), -1);
  std::vector<std::string> names;
  for (std::size_t a = 0; a < m.size(); ++a)
    if (in_image[a]) {
      index[a] = static_cast<Elem>(out.carrier.size());
      out.carrier.push_back(static_cast<Elem>(a));
      names.push_back(m.name(static_cast<Elem>(a)));
    }

  // A relation holds of limit elements iff it holds of their images at some stage in the
  // eventual cycle.
  Structure lim(m.signature(), names);
  const Signature& sig = m.signature();
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    const auto arity = static_cast<std::size_t>(sig.relations[r].second);
    for_each_tuple(out.carrier.size(), arity, [&](const std::vector<Elem>& t) {
      std::vector<Elem> stage(arity);
      for (std::size_t j = 0; j <= offset + period; ++j) {
        for (std::size_t i = 0; i < arity; ++i)
          stage[i] = powers[j][static_cast<std::size_t>(out.carrier[static_cast<std::size_t>(t[i])])];
        if (m.holds(r, stage)) {
          lim.add_tuple(r, t);
          return;
        }
      }
    });
  }
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    for_each_tuple(out.carrier.size(), arity, [&](const std::vector<Elem>& t) {
      std::vector<Elem> args(arity);
      for (std::size_t i = 0; i < arity; ++i) args[i] = out.carrier[static_cast<std::size_t>(t[i])];
      lim.set_function(f, t, index[static_cast<std::size_t>(m.apply(f, args))]);
    });
  }
  for (std::size_t c = 0; c < sig.constants.size(); ++c) lim.set_constant(c, index[static_cast<std::size_t>(m.constant(c))]);
  lim.check_complete();
  out.limit = std::move(lim);

  out.settle.resize(m.size());
  for (std::size_t a = 0; a < m.size(); ++a) out.settle[a] = index[static_cast<std::size_t>(powers[offset][a])];
  for (std::size_t j = 0; j < period; ++j) {
    ElementMap back(out.carrier.size());
    for (std::size_t i = 0; i < out.carrier.size(); ++i) {
      Elem c = out.carrier[i];
      for (std::size_t s = 0; s < (period - j) % period; ++s) c = ch.endo[static_cast<std::size_t>(c)];
      back[i] = index[static_cast<std::size_t>(c)];
    }
    out.cycle_back.push_back(std::move(back));
  }
  for (std::size_t i = 0; i < ch.prefix.size(); ++i) {
    ElementMap to_tail = ch.links[i];
    for (std::size_t j = i + 1; j < ch.prefix.size(); ++j) to_tail = compose(ch.links[j], to_tail);
    out.prefix_maps.push_back(compose(out.stage_map(ch.prefix.size()), to_tail));
  }
  return out;
}

}  // namespace posmodel

#endif  // POSMODEL_SYSTEM_HPP
