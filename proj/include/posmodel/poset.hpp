#ifndef POSMODEL_POSET_HPP
#define POSMODEL_POSET_HPP

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"

namespace posmodel {

/// A subset of a poset's elements, bit i standing for the i-th element.
using UpsetMask = std::uint64_t;

/// A finite poset over named elements; element order is the declaration order.
class Poset {
 public:
  static constexpr std::size_t kMaxElements = 20;

  Poset() = default;

  /// Validates `pairs` as a complete order relation: reflexive, antisymmetric, transitive.
  static Poset from_relation(std::vector<std::string> names, const std::vector<std::pair<std::string, std::string>>& pairs) {
    Poset p(std::move(names));
    for (const auto& [a, b] : pairs) p.set(p.require(a), p.require(b));
    for (std::size_t x = 0; x < p.size(); ++x)
      if (!p.leq(x, x)) throw InputError("missing reflexive pair (" + p.name(x) + "," + p.name(x) + ")");
    p.check_antisymmetry();
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = 0; y < p.size(); ++y)
        for (std::size_t z = 0; z < p.size(); ++z)
          if (p.leq(x, y) && p.leq(y, z) && !p.leq(x, z))
            throw InputError("transitivity gap (" + p.name(x) + "," + p.name(y) + "," + p.name(z) + ")");
    return p;
  }

  /// Takes the reflexive-transitive closure of `pairs`, then checks antisymmetry.
  static Poset from_generators(std::vector<std::string> names, const std::vector<std::pair<std::string, std::string>>& pairs) {
    Poset p(std::move(names));
    for (std::size_t x = 0; x < p.size(); ++x) p.set(x, x);
    for (const auto& [a, b] : pairs) p.set(p.require(a), p.require(b));
    for (std::size_t k = 0; k < p.size(); ++k)
      for (std::size_t x = 0; x < p.size(); ++x)
        if (p.leq(x, k)) p.up_[x] |= p.up_[k];
    p.rebuild_down();
    p.check_antisymmetry();
    return p;
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t x) const { return names_.at(x); }
  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    return std::nullopt;
  }

  bool leq(std::size_t x, std::size_t y) const { return (up_[x] >> y) & 1U; }
  /// The principal upset of x.
  UpsetMask up(std::size_t x) const { return up_[x]; }
  /// The principal downset of x.
  UpsetMask down(std::size_t x) const { return down_[x]; }
  UpsetMask full() const { return size() == 64 ? ~UpsetMask{0} : (UpsetMask{1} << size()) - 1; }

  bool is_upset(UpsetMask v) const {
    if (v & ~full()) return false;
    for (std::size_t x = 0; x < size(); ++x)
      if (((v >> x) & 1U) && (up_[x] & ~v)) return false;
    return true;
  }

  bool operator==(const Poset&) const = default;

 private:
  explicit Poset(std::vector<std::string> names) : names_(std::move(names)), up_(names_.size(), 0), down_(names_.size(), 0) {
    if (names_.empty()) throw InputError("empty poset");
    if (names_.size() > kMaxElements) throw InputError("poset too large");
    std::set<std::string> distinct(names_.begin(), names_.end());
    if (distinct.size() != names_.size()) throw InputError("duplicate poset element");
  }

  std::size_t require(const std::string& name) const {
    auto x = find(name);
    if (!x) throw InputError("unknown poset element '" + name + "'");
    return *x;
  }

  void set(std::size_t x, std::size_t y) {
    up_[x] |= UpsetMask{1} << y;
    down_[y] |= UpsetMask{1} << x;
  }

  void rebuild_down() {
    std::fill(down_.begin(), down_.end(), 0);
    for (std::size_t x = 0; x < size(); ++x)
      for (std::size_t y = 0; y < size(); ++y)
        if (leq(x, y)) down_[y] |= UpsetMask{1} << x;
  }

  void check_antisymmetry() const {
    for (std::size_t x = 0; x < size(); ++x)
      for (std::size_t y = x + 1; y < size(); ++y)
        if (leq(x, y) && leq(y, x)) throw InputError("antisymmetry violation (" + name(x) + "," + name(y) + ")");
  }

  std::vector<std::string> names_;
  std::vector<UpsetMask> up_;
  std::vector<UpsetMask> down_;
};

/// Validates a complete order relation (the raw form of a poset).
inline Poset validate_poset(std::vector<std::string> names, const std::vector<std::pair<std::string, std::string>>& pairs) {
  return Poset::from_relation(std::move(names), pairs);
}

/// The discrete order on `names`.
inline Poset id_poset(std::vector<std::string> names) { return Poset::from_generators(std::move(names), {}); }

/// Every principal downset is a chain (finiteness gives wellfoundedness).
inline bool is_wellfounded_forest(const Poset& p) {
  for (std::size_t z = 0; z < p.size(); ++z)
    for (std::size_t x = 0; x < p.size(); ++x)
      for (std::size_t y = x + 1; y < p.size(); ++y)
        if (((p.down(z) >> x) & 1U) && ((p.down(z) >> y) & 1U) && !p.leq(x, y) && !p.leq(y, x)) return false;
  return true;
}

inline bool is_chain(const Poset& p) {
  for (std::size_t x = 0; x < p.size(); ++x)
    for (std::size_t y = 0; y < p.size(); ++y)
      if (!p.leq(x, y) && !p.leq(y, x)) return false;
  return true;
}

/// All upsets in increasing bitmask order (including the empty set and the whole poset).
inline std::vector<UpsetMask> upsets(const Poset& p) {
  std::vector<UpsetMask> out;
  for (UpsetMask v = 0; v <= p.full(); ++v)
    if (p.is_upset(v)) out.push_back(v);
  return out;
}

inline std::vector<std::size_t> members(UpsetMask v) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; v >> x; ++x)
    if ((v >> x) & 1U) out.push_back(x);
  return out;
}

inline std::string describe(const Poset& p, UpsetMask v) {
  std::string out = "{";
  for (std::size_t x : members(v)) out += (out.size() > 1 ? "," : "") + p.name(x);
  return out + "}";
}

/// The minimal elements of a subset.
inline std::vector<std::size_t> minimal_elements(const Poset& p, UpsetMask v) {
  std::vector<std::size_t> out;
  for (std::size_t x : members(v))
    if ((p.down(x) & v) == (UpsetMask{1} << x)) out.push_back(x);
  return out;
}

/// A family of upsets, kept sorted by mask.
struct Filter {
  std::vector<UpsetMask> members;

  bool contains(UpsetMask v) const { return std::binary_search(members.begin(), members.end(), v); }
  bool operator==(const Filter&) const = default;
};

inline Filter make_family(std::vector<UpsetMask> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return {std::move(members)};
}

namespace detail {

inline void require_upsets(const Poset& p, const Filter& family) {
  for (UpsetMask v : family.members)
    if (!p.is_upset(v)) throw InputError("family member " + describe(p, v & p.full()) + " is not an upset");
}

}  // namespace detail

/// Nonempty, upward closed in Up(P), closed under binary intersections.
inline bool is_filter(const Poset& p, const Filter& family) {
  detail::require_upsets(p, family);
  if (family.members.empty()) return false;
  const auto all = upsets(p);
  for (UpsetMask v : family.members)
    for (UpsetMask w : all)
      if ((v & w) == v && !family.contains(w)) return false;
  for (UpsetMask v : family.members)
    for (UpsetMask w : family.members)
      if (!family.contains(v & w)) return false;
  return true;
}

/// A proper filter such that V | W in F forces V in F or W in F.
inline bool is_prime_filter(const Poset& p, const Filter& family) {
  if (!is_filter(p, family)) return false;
  if (family.contains(0)) return false;
  const auto all = upsets(p);
  for (UpsetMask v : all)
    for (UpsetMask w : all)
      if (family.contains(v | w) && !family.contains(v) && !family.contains(w)) return false;
  return true;
}

/// The least member of a filter (filters over finite posets are principal in Up(P)).
inline UpsetMask filter_generator(const Poset& p, const Filter& f) {
  UpsetMask g = p.full();
  for (UpsetMask v : f.members) g &= v;
  return g;
}

/// All upsets containing `generator`.
inline Filter principal_filter(const Poset& p, UpsetMask generator) {
  Filter f;
  for (UpsetMask v : upsets(p))
    if ((v & generator) == generator) f.members.push_back(v);
  return f;
}

inline bool is_improper(const Filter& f) { return f.contains(0); }

/// Canonical filter order: by generator, read as a membership word over the element
/// order, with members before non-members. The improper filter Up(P) comes last.
inline bool filter_order(const Poset& p, const Filter& a, const Filter& b) {
  const UpsetMask ga = filter_generator(p, a), gb = filter_generator(p, b);
  if (ga == gb) return false;
  const UpsetMask diff = ga ^ gb;
  const int first = std::countr_zero(diff);
  return (ga >> first) & 1U;
}

/// Every filter over P, in canonical order (the improper filter included).
inline std::vector<Filter> enumerate_filters(const Poset& p) {
  std::vector<Filter> out;
  for (UpsetMask g : upsets(p)) {
    Filter f = principal_filter(p, g);
    if (is_filter(p, f)) out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [&](const Filter& a, const Filter& b) { return filter_order(p, a, b); });
  return out;
}

inline std::vector<Filter> enumerate_prime_filters(const Poset& p) {
  std::vector<Filter> out;
  for (auto& f : enumerate_filters(p))
    if (is_prime_filter(p, f)) out.push_back(std::move(f));
  return out;
}

/// {V in Up(P) : x in V}.
inline Filter point_filter(const Poset& p, std::size_t x) {
  Filter f;
  for (UpsetMask v : upsets(p))
    if ((v >> x) & 1U) f.members.push_back(v);
  return f;
}

/// The filter generated by the principal upsets of a chain.
inline Filter principal_upset_filter(const Poset& p) {
  if (!is_chain(p)) throw InputError("principal upset filter needs a linearly ordered poset");
  UpsetMask g = p.full();
  for (std::size_t x = 0; x < p.size(); ++x) g &= p.up(x);
  return principal_filter(p, g);
}

/// If `f` is the point filter of some element, that element.
inline std::optional<std::size_t> point_of(const Poset& p, const Filter& f) {
  for (std::size_t x = 0; x < p.size(); ++x)
    if (point_filter(p, x) == f) return x;
  return std::nullopt;
}

/// A short label: "F_x" for point filters, "improper" for Up(P), else the generator.
inline std::string filter_label(const Poset& p, const Filter& f) {
  if (auto x = point_of(p, f)) return "F_" + p.name(*x);
  if (is_improper(f)) return "improper";
  return "F" + describe(p, filter_generator(p, f));
}

}  // namespace posmodel

#endif  // POSMODEL_POSET_HPP
