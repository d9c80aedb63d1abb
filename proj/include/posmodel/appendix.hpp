#ifndef POSMODEL_APPENDIX_HPP
#define POSMODEL_APPENDIX_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/product.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"

namespace posmodel {

/// How z_a is picked among the stages of a chain that present a limit element a.
enum class StageChoice { Least, Greatest };

/// Ultraproduct of chain limits re-presented as a prime product over the disjoint union of
/// the chains. Each chain is an ordered system over a finite linear order; its direct limit
/// is the structure at the top stage.
struct AppendixBundle {
  std::vector<OrderedSystem> chains;
  Filter ultrafilter;        // over id(kappa)
  std::vector<std::size_t> chain_of;  // per point of the union poset
  OrderedSystem system;      // the union system over the disjoint union
  Filter filter;             // F = {V : {alpha : X_alpha n V nonempty} in U}
  bool filter_is_prime = false;

  std::vector<Structure> limits;
  ReducedProduct ultraproduct;
  FilterProduct product;

  std::vector<Section> g;    // g(a) per tuple of the full product of the limits
  bool sections_ok = false;  // every g(a) lies in S_F with domain Y_a
  bool well_defined = false; // U-equivalent tuples land in the same class
  ElementMap g_hat;          // ultraproduct class -> prime product class
  bool isomorphism = false;
};

namespace detail {

/// Chain stages from bottom to top.
inline std::vector<std::size_t> chain_stages(const Poset& p) {
  std::vector<std::size_t> out = members(p.full());
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return p.leq(a, b) && a != b; });
  return out;
}

inline bool is_bijective(const ElementMap& map, std::size_t target_size) {
  if (map.size() != target_size) return false;
  std::vector<bool> hit(target_size, false);
  for (Elem e : map) {
    if (e < 0 || static_cast<std::size_t>(e) >= target_size || hit[static_cast<std::size_t>(e)]) return false;
    hit[static_cast<std::size_t>(e)] = true;
  }
  return true;
}

inline ElementMap inverse_map(const ElementMap& map) {
  ElementMap out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[static_cast<std::size_t>(map[i])] = static_cast<Elem>(i);
  return out;
}

}  // namespace detail

/// True when `map` is a bijection M -> N that preserves and reflects everything.
inline bool is_isomorphism_map(const Structure& m, const Structure& n, const ElementMap& map) {
  return m.size() == n.size() && detail::is_bijective(map, n.size()) && is_homomorphism(m, n, map) &&
         is_homomorphism(n, m, detail::inverse_map(map));
}

inline AppendixBundle appendix_transform(const std::vector<OrderedSystem>& chains, const Filter& ultrafilter,
                                         StageChoice choice = StageChoice::Least) {
  if (chains.empty()) throw InputError("need at least one chain");
  const std::size_t kappa = chains.size();
  if (kappa > 16) throw InputError("too many chains");
  std::vector<std::string> alphas;
  for (std::size_t i = 0; i < kappa; ++i) alphas.push_back(std::to_string(i));
  const Poset kappa_poset = id_poset(alphas);
  if (!is_prime_filter(kappa_poset, ultrafilter)) throw InputError("U is not an ultrafilter over the chain index");
  for (const auto& ch : chains) {
    if (!is_chain(ch.index())) throw InputError("chain index is not linearly ordered");
    require_same_signature(ch.structure(0), chains.front().structure(0));
  }

  AppendixBundle b;
  b.chains = chains;
  b.ultrafilter = ultrafilter;

  // Disjoint union of the chains.
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> order;
  std::vector<Structure> structures;
  std::vector<std::size_t> offset;
  std::set<std::string> used;
  for (std::size_t a = 0; a < kappa; ++a) {
    const Poset& p = chains[a].index();
    offset.push_back(names.size());
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (!used.insert(p.name(x)).second) throw InputError("chains share index name '" + p.name(x) + "'");
      names.push_back(p.name(x));
      structures.push_back(chains[a].structure(x));
      b.chain_of.push_back(a);
    }
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = 0; y < p.size(); ++y)
        if (x != y && p.leq(x, y)) order.emplace_back(p.name(x), p.name(y));
  }
  Poset union_poset = Poset::from_generators(names, order);
  std::map<std::pair<std::size_t, std::size_t>, ElementMap> homs;
  for (std::size_t a = 0; a < kappa; ++a) {
    const Poset& p = chains[a].index();
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = 0; y < p.size(); ++y)
        if (p.leq(x, y)) homs[{offset[a] + x, offset[a] + y}] = chains[a].hom(x, y);
  }
  b.system = OrderedSystem::validate(union_poset, structures, homs);

  // F and Claim 1.
  const Poset& X = b.system.index();
  for (UpsetMask v : upsets(X)) {
    UpsetMask touched = 0;
    for (std::size_t x : members(v)) touched |= UpsetMask{1} << b.chain_of[x];
    if (ultrafilter.contains(touched)) b.filter.members.push_back(v);
  }
  b.filter_is_prime = is_prime_filter(X, b.filter);
  if (!b.filter_is_prime) return b;

  // Limits, presentations z_a / m_a, and the ultraproduct.
  struct Presentation {
    std::size_t stage;  // point of the union poset
    Elem element;
  };
  std::vector<std::vector<Presentation>> present(kappa);
  for (std::size_t a = 0; a < kappa; ++a) {
    const auto stages = detail::chain_stages(chains[a].index());
    const std::size_t top = stages.back();
    b.limits.push_back(chains[a].structure(top));
    for (std::size_t e = 0; e < b.limits.back().size(); ++e) {
      std::optional<Presentation> found;
      if (choice == StageChoice::Greatest) found = Presentation{offset[a] + top, static_cast<Elem>(e)};
      for (std::size_t i = 0; i < stages.size() && !found; ++i) {
        const ElementMap& to_top = chains[a].hom(stages[i], top);
        for (std::size_t m = 0; m < to_top.size(); ++m)
          if (to_top[m] == static_cast<Elem>(e)) {
            found = Presentation{offset[a] + stages[i], static_cast<Elem>(m)};
            break;
          }
      }
      present[a].push_back(*found);
    }
  }
  b.ultraproduct = classical_reduced_product(b.limits, ultrafilter.members);
  b.product = prime_product(b.system, b.filter);

  // g(a)(x) := f_{z x}(m) for the unique chain alpha whose z_{a(alpha)} lies below x.
  b.sections_ok = true;
  for (const auto& tuple : b.ultraproduct.tuples) {
    Section s{0, std::vector<Elem>(X.size(), -1)};
    for (std::size_t a = 0; a < kappa; ++a) {
      const Presentation& pr = present[a][static_cast<std::size_t>(tuple[a])];
      s.domain |= X.up(pr.stage);
      for (std::size_t x : members(X.up(pr.stage))) s.values[x] = b.system.hom(pr.stage, x)[static_cast<std::size_t>(pr.element)];
    }
    if (!is_section(b.system, s) || !b.product.find_section(s)) b.sections_ok = false;
    b.g.push_back(std::move(s));
  }
  if (!b.sections_ok) return b;

  b.g_hat.assign(b.ultraproduct.representatives.size(), -1);
  b.well_defined = true;
  for (std::size_t i = 0; i < b.g.size(); ++i) {
    const std::size_t k = b.ultraproduct.class_of[i];
    const auto image = static_cast<Elem>(b.product.class_of_section(b.g[i]));
    if (b.g_hat[k] < 0) b.g_hat[k] = image;
    else if (b.g_hat[k] != image) b.well_defined = false;
  }
  b.isomorphism = b.well_defined && is_isomorphism_map(b.ultraproduct.structure, b.product.structure, b.g_hat);
  return b;
}

}  // namespace posmodel

#endif  // POSMODEL_APPENDIX_HPP
