#ifndef POSMODEL_STRUCTURE_HPP
#define POSMODEL_STRUCTURE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posmodel/error.hpp"

namespace posmodel {

/// Elements of a finite structure are indices into its universe.
using Elem = int;

/// A total map between universes, indexed by source element.
using ElementMap = std::vector<Elem>;

/// A finite first-order signature: relations (arity >= 0), functions (arity >= 1)
/// and constants. All symbol names are distinct.
struct Signature {
  std::vector<std::pair<std::string, int>> relations;
  std::vector<std::pair<std::string, int>> functions;
  std::vector<std::string> constants;

  bool operator==(const Signature&) const = default;

  std::optional<std::size_t> relation_index(const std::string& name) const {
    return find_named(relations, name);
  }
  std::optional<std::size_t> function_index(const std::string& name) const {
    return find_named(functions, name);
  }
  std::optional<std::size_t> constant_index(const std::string& name) const {
    for (std::size_t i = 0; i < constants.size(); ++i)
      if (constants[i] == name) return i;
    return std::nullopt;
  }

  /// Throws InputError on duplicate names or out-of-range arities.
  void validate() const {
    std::set<std::string> seen;
    auto claim = [&](const std::string& name) {
      if (name.empty()) throw InputError("empty symbol name in signature");
      if (!seen.insert(name).second) throw InputError("duplicate symbol '" + name + "' in signature");
    };
    for (const auto& [name, arity] : relations) {
      claim(name);
      if (arity < 0) throw InputError("relation '" + name + "' has negative arity");
    }
    for (const auto& [name, arity] : functions) {
      claim(name);
      if (arity < 1) throw InputError("function '" + name + "' must have arity >= 1");
    }
    for (const auto& name : constants) claim(name);
  }

 private:
  static std::optional<std::size_t> find_named(const std::vector<std::pair<std::string, int>>& items,
                                               const std::string& name) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].first == name) return i;
    return std::nullopt;
  }
};

namespace detail {

inline std::size_t table_size(std::size_t n, int arity) {
  std::size_t size = 1;
  for (int i = 0; i < arity; ++i) {
    size *= n;
    if (size > (std::size_t{1} << 26)) throw InputError("structure too large for dense tables");
  }
  return size;
}

inline std::size_t encode(std::span<const Elem> args, std::size_t n) {
  std::size_t code = 0;
  for (Elem a : args) code = code * n + static_cast<std::size_t>(a);
  return code;
}

inline void decode(std::size_t code, std::size_t n, std::span<Elem> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<Elem>(code % n);
    code /= n;
  }
}

}  // namespace detail

/// A finite structure over a signature. Elements are 0..size()-1 in declaration order,
/// which is the canonical enumeration order used by every search.
///
/// Structures are filled in through the mutators and then treated as immutable;
/// `check_complete` verifies that every function is total and every constant is set.
class Structure {
 public:
  Structure() = default;

  Structure(Signature signature, std::vector<std::string> universe)
      : signature_(std::move(signature)), universe_(std::move(universe)) {
    signature_.validate();
    if (universe_.empty()) throw InputError("empty universe");
    std::set<std::string> names(universe_.begin(), universe_.end());
    if (names.size() != universe_.size()) throw InputError("duplicate element name in universe");
    const std::size_t n = universe_.size();
    for (const auto& rel : signature_.relations) {
      membership_.emplace_back(detail::table_size(n, rel.second), char{0});
      tuples_.emplace_back();
    }
    for (const auto& fn : signature_.functions) tables_.emplace_back(detail::table_size(n, fn.second), Elem{-1});
    constants_.assign(signature_.constants.size(), Elem{-1});
  }

  const Signature& signature() const { return signature_; }
  std::size_t size() const { return universe_.size(); }
  const std::vector<std::string>& universe() const { return universe_; }
  const std::string& name(Elem e) const { return universe_.at(static_cast<std::size_t>(e)); }

  std::optional<Elem> find(const std::string& name) const {
    for (std::size_t i = 0; i < universe_.size(); ++i)
      if (universe_[i] == name) return static_cast<Elem>(i);
    return std::nullopt;
  }

  bool holds(std::size_t rel, std::span<const Elem> args) const {
    return membership_[rel][detail::encode(args, size())] != 0;
  }
  /// Sorted, duplicate-free list of tuples in relation `rel`.
  const std::vector<std::vector<Elem>>& tuples(std::size_t rel) const { return tuples_[rel]; }

  Elem apply(std::size_t fn, std::span<const Elem> args) const {
    return tables_[fn][detail::encode(args, size())];
  }
  /// Dense function table indexed by the mixed-radix code of the argument tuple.
  const std::vector<Elem>& function_table(std::size_t fn) const { return tables_[fn]; }
  Elem constant(std::size_t c) const { return constants_[c]; }

  void add_tuple(std::size_t rel, std::vector<Elem> args) {
    check_tuple(args, signature_.relations.at(rel).second);
    char& bit = membership_[rel][detail::encode(args, size())];
    if (bit) return;
    bit = 1;
    auto& list = tuples_[rel];
    list.insert(std::lower_bound(list.begin(), list.end(), args), std::move(args));
  }

  void set_function(std::size_t fn, std::span<const Elem> args, Elem value) {
    check_tuple(args, signature_.functions.at(fn).second);
    check_elem(value);
    tables_[fn][detail::encode(args, size())] = value;
  }

  void set_constant(std::size_t c, Elem value) {
    check_elem(value);
    constants_.at(c) = value;
  }

  void check_complete() const {
    for (std::size_t f = 0; f < tables_.size(); ++f)
      for (std::size_t code = 0; code < tables_[f].size(); ++code)
        if (tables_[f][code] < 0) {
          std::vector<Elem> args(static_cast<std::size_t>(signature_.functions[f].second));
          detail::decode(code, size(), args);
          std::string where;
          for (Elem a : args) where += (where.empty() ? "" : ",") + name(a);
          throw InputError("partial function: " + signature_.functions[f].first + "(" + where +
                           ") is undefined");
        }
    for (std::size_t c = 0; c < constants_.size(); ++c)
      if (constants_[c] < 0) throw InputError("constant '" + signature_.constants[c] + "' is not interpreted");
  }

  bool operator==(const Structure& other) const {
    return signature_ == other.signature_ && universe_ == other.universe_ && tuples_ == other.tuples_ &&
           tables_ == other.tables_ && constants_ == other.constants_;
  }

 private:
  void check_elem(Elem e) const {
    if (e < 0 || static_cast<std::size_t>(e) >= size()) throw InputError("tuple out of range");
  }
  void check_tuple(std::span<const Elem> args, int arity) const {
    if (args.size() != static_cast<std::size_t>(arity)) throw InputError("arity mismatch");
    for (Elem a : args) check_elem(a);
  }

  Signature signature_;
  std::vector<std::string> universe_;
  std::vector<std::vector<char>> membership_;
  std::vector<std::vector<std::vector<Elem>>> tuples_;
  std::vector<std::vector<Elem>> tables_;
  std::vector<Elem> constants_;
};

/// String-level structure description, as read from a file.
struct RawStructure {
  Signature signature;
  std::vector<std::string> universe;
  std::map<std::string, std::vector<std::vector<std::string>>> relations;
  /// Each row is the argument names followed by the value name.
  std::map<std::string, std::vector<std::vector<std::string>>> functions;
  std::map<std::string, std::string> constants;
};

inline Structure validate_structure(const RawStructure& raw) {
  Structure m(raw.signature, raw.universe);
  auto elem = [&](const std::string& name) {
    auto e = m.find(name);
    if (!e) throw InputError("tuple out of range: '" + name + "' is not in the universe");
    return *e;
  };
  for (const auto& [rel, rows] : raw.relations) {
    auto r = raw.signature.relation_index(rel);
    if (!r) throw InputError("unknown symbol: relation '" + rel + "'");
    const int arity = raw.signature.relations[*r].second;
    for (const auto& row : rows) {
      if (row.size() != static_cast<std::size_t>(arity))
        throw InputError("arity mismatch in relation '" + rel + "'");
      std::vector<Elem> args;
      for (const auto& name : row) args.push_back(elem(name));
      m.add_tuple(*r, std::move(args));
    }
  }
  for (const auto& [fn, rows] : raw.functions) {
    auto f = raw.signature.function_index(fn);
    if (!f) throw InputError("unknown symbol: function '" + fn + "'");
    const int arity = raw.signature.functions[*f].second;
    for (const auto& row : rows) {
      if (row.size() != static_cast<std::size_t>(arity) + 1)
        throw InputError("arity mismatch in function '" + fn + "'");
      std::vector<Elem> args;
      for (int i = 0; i < arity; ++i) args.push_back(elem(row[static_cast<std::size_t>(i)]));
      m.set_function(*f, args, elem(row.back()));
    }
  }
  for (const auto& [c, value] : raw.constants) {
    auto idx = raw.signature.constant_index(c);
    if (!idx) throw InputError("unknown symbol: constant '" + c + "'");
    m.set_constant(*idx, elem(value));
  }
  m.check_complete();
  return m;
}

inline void require_same_signature(const Structure& m, const Structure& n) {
  if (!(m.signature() == n.signature())) throw InputError("signature mismatch");
}

// ---------------------------------------------------------------------------
// Homomorphisms

inline bool is_homomorphism(const Structure& source, const Structure& target, std::span<const Elem> map) {
  require_same_signature(source, target);
  if (map.size() != source.size()) throw InputError("map does not cover the source universe");
  for (Elem e : map)
    if (e < 0 || static_cast<std::size_t>(e) >= target.size()) throw InputError("map leaves the target universe");
  const Signature& sig = source.signature();
  std::vector<Elem> image;
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    for (const auto& tuple : source.tuples(r)) {
      image.clear();
      for (Elem a : tuple) image.push_back(map[static_cast<std::size_t>(a)]);
      if (!target.holds(r, image)) return false;
    }
  }
  std::vector<Elem> args;
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    const auto& table = source.function_table(f);
    args.resize(arity);
    image.resize(arity);
    for (std::size_t code = 0; code < table.size(); ++code) {
      detail::decode(code, source.size(), args);
      for (std::size_t i = 0; i < arity; ++i) image[i] = map[static_cast<std::size_t>(args[i])];
      if (map[static_cast<std::size_t>(table[code])] != target.apply(f, image)) return false;
    }
  }
  for (std::size_t c = 0; c < sig.constants.size(); ++c)
    if (map[static_cast<std::size_t>(source.constant(c))] != target.constant(c)) return false;
  return true;
}

inline ElementMap compose(std::span<const Elem> second, std::span<const Elem> first) {
  ElementMap out;
  out.reserve(first.size());
  for (Elem e : first) out.push_back(second[static_cast<std::size_t>(e)]);
  return out;
}

inline ElementMap identity_map(std::size_t n) {
  ElementMap out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Elem>(i);
  return out;
}

namespace detail {

/// Backtracking homomorphism search in lexicographic order of the map.
/// Each atomic constraint is checked as soon as its last source element is assigned.
class HomSearch {
 public:
  HomSearch(const Structure& source, const Structure& target, bool injective)
      : m_(source), n_(target), injective_(injective), map_(source.size(), -1),
        used_(target.size(), false), rel_checks_(source.size()), fn_checks_(source.size()),
        forced_(source.size(), -1) {
    require_same_signature(source, target);
    const Signature& sig = source.signature();
    for (std::size_t r = 0; r < sig.relations.size(); ++r) {
      for (std::size_t t = 0; t < source.tuples(r).size(); ++t) {
        const auto& tuple = source.tuples(r)[t];
        if (tuple.empty()) {
          nullary_ok_ = nullary_ok_ && target.holds(r, tuple);
          continue;
        }
        rel_checks_[static_cast<std::size_t>(*std::max_element(tuple.begin(), tuple.end()))].push_back({r, t});
      }
    }
    for (std::size_t f = 0; f < sig.functions.size(); ++f) {
      const auto arity = static_cast<std::size_t>(sig.functions[f].second);
      std::vector<Elem> args(arity);
      const auto& table = source.function_table(f);
      for (std::size_t code = 0; code < table.size(); ++code) {
        detail::decode(code, source.size(), args);
        Elem last = table[code];
        for (Elem a : args) last = std::max(last, a);
        fn_checks_[static_cast<std::size_t>(last)].push_back({f, code});
      }
    }
    for (std::size_t c = 0; c < sig.constants.size(); ++c) {
      auto& slot = forced_[static_cast<std::size_t>(source.constant(c))];
      if (slot >= 0 && slot != target.constant(c)) nullary_ok_ = false;
      slot = target.constant(c);
    }
  }

  /// Calls `visit(map)` for each solution; stops when it returns false.
  template <class Visit>
  void run(Visit&& visit) {
    if (!nullary_ok_) return;
    stop_ = false;
    extend(0, visit);
  }

 private:
  template <class Visit>
  void extend(std::size_t i, Visit& visit) {
    if (i == map_.size()) {
      if (!visit(static_cast<const ElementMap&>(map_))) stop_ = true;
      return;
    }
    for (std::size_t v = 0; v < n_.size() && !stop_; ++v) {
      if (forced_[i] >= 0 && static_cast<Elem>(v) != forced_[i]) continue;
      if (injective_ && used_[v]) continue;
      map_[i] = static_cast<Elem>(v);
      if (consistent(i)) {
        used_[v] = true;
        extend(i + 1, visit);
        used_[v] = false;
      }
    }
    map_[i] = -1;
  }

  bool consistent(std::size_t i) {
    for (const auto& [r, t] : rel_checks_[i]) {
      const auto& tuple = m_.tuples(r)[t];
      buffer_.clear();
      for (Elem a : tuple) buffer_.push_back(map_[static_cast<std::size_t>(a)]);
      if (!n_.holds(r, buffer_)) return false;
    }
    for (const auto& [f, code] : fn_checks_[i]) {
      const auto arity = static_cast<std::size_t>(m_.signature().functions[f].second);
      buffer_.resize(arity);
      detail::decode(code, m_.size(), buffer_);
      for (auto& a : buffer_) a = map_[static_cast<std::size_t>(a)];
      const Elem value = m_.function_table(f)[code];
      if (map_[static_cast<std::size_t>(value)] != n_.apply(f, buffer_)) return false;
    }
    return true;
  }

  const Structure& m_;
  const Structure& n_;
  bool injective_;
  bool nullary_ok_ = true;
  bool stop_ = false;
  ElementMap map_;
  std::vector<bool> used_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rel_checks_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> fn_checks_;
  std::vector<Elem> forced_;
  std::vector<Elem> buffer_;
};

}  // namespace detail

/// All homomorphisms source -> target in lexicographic order of the map,
/// stopping after `limit` results when given.
inline std::vector<ElementMap> enumerate_homs(const Structure& source, const Structure& target,
                                              std::optional<std::size_t> limit = std::nullopt) {
  std::vector<ElementMap> out;
  if (limit && *limit == 0) return out;
  detail::HomSearch search(source, target, false);
  search.run([&](const ElementMap& map) {
    out.push_back(map);
    return !limit || out.size() < *limit;
  });
  return out;
}

inline std::optional<ElementMap> find_homomorphism(const Structure& source, const Structure& target) {
  auto homs = enumerate_homs(source, target, 1);
  if (homs.empty()) return std::nullopt;
  return homs.front();
}

/// First isomorphism in search order, if any. A bijective homomorphism between finite
/// structures is an isomorphism exactly when every relation has equally many tuples on
/// both sides; elements are additionally pruned by their occurrence profile.
inline std::optional<ElementMap> find_isomorphism(const Structure& m, const Structure& n) {
  require_same_signature(m, n);
  if (m.size() != n.size()) return std::nullopt;
  const Signature& sig = m.signature();
  for (std::size_t r = 0; r < sig.relations.size(); ++r)
    if (m.tuples(r).size() != n.tuples(r).size()) return std::nullopt;

  auto profile = [&](const Structure& s) {
    std::vector<std::vector<std::size_t>> prof(s.size());
    for (std::size_t r = 0; r < sig.relations.size(); ++r) {
      const auto arity = static_cast<std::size_t>(sig.relations[r].second);
      for (auto& p : prof) p.resize(p.size() + arity + 1, 0);
      const std::size_t base = prof[0].size() - arity - 1;
      for (const auto& tuple : s.tuples(r)) {
        for (std::size_t k = 0; k < tuple.size(); ++k) ++prof[static_cast<std::size_t>(tuple[k])][base + k];
        bool diagonal = true;
        for (Elem a : tuple) diagonal = diagonal && a == tuple.front();
        if (diagonal && !tuple.empty()) ++prof[static_cast<std::size_t>(tuple.front())][base + arity];
      }
    }
    return prof;
  };
  const auto pm = profile(m);
  const auto pn = profile(n);
  {
    auto sm = pm, sn = pn;
    std::sort(sm.begin(), sm.end());
    std::sort(sn.begin(), sn.end());
    if (sm != sn) return std::nullopt;
  }

  std::optional<ElementMap> found;
  detail::HomSearch search(m, n, true);
  search.run([&](const ElementMap& map) {
    for (std::size_t i = 0; i < map.size(); ++i)
      if (pm[i] != pn[static_cast<std::size_t>(map[i])]) return true;
    found = map;
    return false;
  });
  return found;
}

/// Induced substructure on `elements` (kept in the given order). The subset must be
/// closed under functions and contain the constants.
inline Structure induced_substructure(const Structure& m, const std::vector<Elem>& elements) {
  std::vector<std::string> names;
  std::vector<Elem> index(m.size(), -1);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    names.push_back(m.name(elements[i]));
    index[static_cast<std::size_t>(elements[i])] = static_cast<Elem>(i);
  }
  Structure sub(m.signature(), names);
  const Signature& sig = m.signature();
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    for (const auto& tuple : m.tuples(r)) {
      std::vector<Elem> mapped;
      for (Elem a : tuple) mapped.push_back(index[static_cast<std::size_t>(a)]);
      if (std::all_of(mapped.begin(), mapped.end(), [](Elem e) { return e >= 0; }))
        sub.add_tuple(r, std::move(mapped));
    }
  }
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    std::vector<Elem> args(arity), sub_args(arity);
    const auto& table = m.function_table(f);
    for (std::size_t code = 0; code < table.size(); ++code) {
      detail::decode(code, m.size(), args);
      bool inside = true;
      for (std::size_t k = 0; k < arity; ++k) {
        sub_args[k] = index[static_cast<std::size_t>(args[k])];
        inside = inside && sub_args[k] >= 0;
      }
      if (!inside) continue;
      const Elem value = index[static_cast<std::size_t>(table[code])];
      if (value < 0) throw InputError("subset not closed under function '" + sig.functions[f].first + "'");
      sub.set_function(f, sub_args, value);
    }
  }
  for (std::size_t c = 0; c < sig.constants.size(); ++c) {
    const Elem value = index[static_cast<std::size_t>(m.constant(c))];
    if (value < 0) throw InputError("subset misses constant '" + sig.constants[c] + "'");
    sub.set_constant(c, value);
  }
  return sub;
}

}  // namespace posmodel

#endif  // POSMODEL_STRUCTURE_HPP
