#ifndef POSMODEL_IO_HPP
#define POSMODEL_IO_HPP

#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "posmodel/appendix.hpp"
#include "posmodel/enumerate.hpp"
#include "posmodel/error.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/product.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"
#include "posmodel/verify.hpp"

namespace posmodel {

using json = nlohmann::ordered_json;

namespace detail {

/// Runs `body`, prefixing any InputError with the JSON location `where` (the innermost
/// location wins).
template <class Body>
auto located(const std::string& where, Body&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const SyntaxError&) {
    throw;
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind("at /", 0) == 0) throw;
    throw InputError("at " + (where.empty() ? std::string("/") : where) + ": " + what);
  }
}

inline void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional) {
  if (!j.is_object()) throw InputError("at " + (where.empty() ? std::string("/") : where) + ": expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) throw InputError("at " + where + "/" + k + ": missing key");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw InputError("at " + where + "/" + key + ": unknown key");
}

inline std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw InputError("at " + where + ": expected a string");
  return j.get<std::string>();
}

inline int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError("at " + where + ": expected an integer");
  return j.get<int>();
}

inline const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError("at " + where + ": expected an array");
  return j;
}

inline std::vector<std::string> string_list(const json& j, const std::string& where) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& item : as_array(j, where)) out.push_back(as_string(item, where + "/" + std::to_string(i++)));
  return out;
}

inline std::vector<std::pair<std::string, int>> symbol_list(const json& j, const std::string& where) {
  std::vector<std::pair<std::string, int>> out;
  std::size_t i = 0;
  for (const auto& item : as_array(j, where)) {
    const std::string at = where + "/" + std::to_string(i++);
    if (!item.is_array() || item.size() != 2) throw InputError("at " + at + ": expected [name, arity]");
    out.emplace_back(as_string(item[0], at + "/0"), as_int(item[1], at + "/1"));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Structures

inline Signature signature_from_json(const json& j, const std::string& where = "/signature") {
  detail::require_keys(j, where, {}, {"relations", "functions", "constants"});
  Signature sig;
  if (j.contains("relations")) sig.relations = detail::symbol_list(j["relations"], where + "/relations");
  if (j.contains("functions")) sig.functions = detail::symbol_list(j["functions"], where + "/functions");
  if (j.contains("constants")) sig.constants = detail::string_list(j["constants"], where + "/constants");
  detail::located(where, [&] { sig.validate(); });
  return sig;
}

inline json to_json(const Signature& sig) {
  json j = json::object();
  j["relations"] = json::array();
  for (const auto& [name, arity] : sig.relations) j["relations"].push_back({name, arity});
  j["functions"] = json::array();
  for (const auto& [name, arity] : sig.functions) j["functions"].push_back({name, arity});
  j["constants"] = sig.constants;
  return j;
}

inline Structure structure_from_json(const json& j, const std::string& where = "") {
  detail::require_keys(j, where, {"signature", "universe"}, {"relations", "functions", "constants"});
  RawStructure raw;
  raw.signature = signature_from_json(j["signature"], where + "/signature");
  raw.universe = detail::string_list(j["universe"], where + "/universe");
  if (raw.universe.empty()) throw InputError("at " + where + "/universe: empty universe");
  detail::located(where + "/universe", [&] { Structure(raw.signature, raw.universe); });
  const std::set<std::string> universe(raw.universe.begin(), raw.universe.end());

  // Rows are checked where they appear so that diagnostics point at them.
  for (const bool relations : {true, false}) {
    const char* section = relations ? "relations" : "functions";
    if (!j.contains(section)) continue;
    const std::string at = where + "/" + section;
    if (!j[section].is_object()) throw InputError("at " + at + ": expected an object");
    for (const auto& [name, rows] : j[section].items()) {
      const std::string sat = at + "/" + name;
      auto index = relations ? raw.signature.relation_index(name) : raw.signature.function_index(name);
      if (!index) throw InputError("at " + sat + ": unknown symbol '" + name + "'");
      const int arity = relations ? raw.signature.relations[*index].second : raw.signature.functions[*index].second;
      std::size_t i = 0;
      for (const auto& row : detail::as_array(rows, sat)) {
        const std::string rat = sat + "/" + std::to_string(i++);
        auto values = detail::string_list(row, rat);
        if (values.size() != static_cast<std::size_t>(arity) + (relations ? 0 : 1))
          throw InputError("at " + rat + ": arity mismatch");
        for (const auto& v : values)
          if (!universe.count(v)) throw InputError("at " + rat + ": tuple out of range: '" + v + "' is not in the universe");
        (relations ? raw.relations : raw.functions)[name].push_back(std::move(values));
      }
    }
  }
  for (const auto& [name, arity] : raw.signature.functions) {
    std::set<std::vector<std::string>> defined;
    for (const auto& row : raw.functions[name]) defined.emplace(row.begin(), row.end() - 1);
    std::vector<std::size_t> digits(static_cast<std::size_t>(arity), 0);
    while (true) {
      std::vector<std::string> args;
      for (std::size_t d : digits) args.push_back(raw.universe[d]);
      if (!defined.count(args)) {
        std::string text;
        for (const auto& a : args) text += (text.empty() ? "" : ",") + a;
        throw InputError("at " + where + "/functions/" + name + ": partial function: " + name + "(" + text + ") is undefined");
      }
      std::size_t i = digits.size();
      while (i > 0 && ++digits[i - 1] == raw.universe.size()) digits[--i] = 0;
      if (i == 0) break;
    }
  }
  if (j.contains("constants")) {
    const std::string at = where + "/constants";
    if (!j["constants"].is_object()) throw InputError("at " + at + ": expected an object");
    for (const auto& [name, value] : j["constants"].items()) raw.constants[name] = detail::as_string(value, at + "/" + name);
  }
  return detail::located(where.empty() ? "/" : where, [&] { return validate_structure(raw); });
}

inline json to_json(const Structure& m) {
  json j = json::object();
  const Signature& sig = m.signature();
  j["signature"] = to_json(sig);
  j["universe"] = m.universe();
  j["relations"] = json::object();
  for (std::size_t r = 0; r < sig.relations.size(); ++r) {
    json rows = json::array();
    for (const auto& t : m.tuples(r)) {
      json row = json::array();
      for (Elem a : t) row.push_back(m.name(a));
      rows.push_back(row);
    }
    j["relations"][sig.relations[r].first] = rows;
  }
  j["functions"] = json::object();
  for (std::size_t f = 0; f < sig.functions.size(); ++f) {
    json rows = json::array();
    const auto arity = static_cast<std::size_t>(sig.functions[f].second);
    for_each_tuple(m.size(), arity, [&](const std::vector<Elem>& t) {
      json row = json::array();
      for (Elem a : t) row.push_back(m.name(a));
      row.push_back(m.name(m.apply(f, t)));
      rows.push_back(row);
    });
    j["functions"][sig.functions[f].first] = rows;
  }
  j["constants"] = json::object();
  for (std::size_t c = 0; c < sig.constants.size(); ++c) j["constants"][sig.constants[c]] = m.name(m.constant(c));
  return j;
}

/// An element map given as {"source name": "target name", ...}; must be total.
inline ElementMap map_from_json(const json& j, const Structure& source, const Structure& target, const std::string& where) {
  if (!j.is_object()) throw InputError("at " + where + ": expected an object");
  ElementMap out(source.size(), -1);
  for (const auto& [key, value] : j.items()) {
    auto a = source.find(key);
    if (!a) throw InputError("at " + where + "/" + key + ": not a source element");
    auto b = target.find(detail::as_string(value, where + "/" + key));
    if (!b) throw InputError("at " + where + "/" + key + ": '" + value.get<std::string>() + "' is not a target element");
    out[static_cast<std::size_t>(*a)] = *b;
  }
  for (std::size_t a = 0; a < out.size(); ++a)
    if (out[a] < 0) throw InputError("at " + where + ": no image for '" + source.name(static_cast<Elem>(a)) + "'");
  return out;
}

inline json map_to_json(const ElementMap& map, const Structure& source, const Structure& target) {
  json j = json::object();
  for (std::size_t a = 0; a < map.size(); ++a) j[source.name(static_cast<Elem>(a))] = target.name(map[a]);
  return j;
}

// ---------------------------------------------------------------------------
// Posets and filters

inline Poset poset_from_json(const json& j, const std::string& where = "") {
  detail::require_keys(j, where, {"elements"}, {"le"});
  auto names = detail::string_list(j["elements"], where + "/elements");
  std::vector<std::pair<std::string, std::string>> pairs;
  if (j.contains("le")) {
    std::size_t i = 0;
    for (const auto& item : detail::as_array(j["le"], where + "/le")) {
      const std::string at = where + "/le/" + std::to_string(i++);
      auto pair = detail::string_list(item, at);
      if (pair.size() != 2) throw InputError("at " + at + ": expected a pair");
      pairs.emplace_back(pair[0], pair[1]);
    }
  }
  return detail::located(where.empty() ? "/" : where, [&] { return Poset::from_generators(names, pairs); });
}

inline json to_json(const Poset& p) {
  json j = json::object();
  j["elements"] = p.names();
  j["le"] = json::array();
  for (std::size_t x = 0; x < p.size(); ++x)
    for (std::size_t y = 0; y < p.size(); ++y)
      if (x != y && p.leq(x, y)) j["le"].push_back({p.name(x), p.name(y)});
  return j;
}

inline UpsetMask subset_from_json(const Poset& p, const json& j, const std::string& where) {
  UpsetMask v = 0;
  for (const auto& name : detail::string_list(j, where)) {
    auto x = p.find(name);
    if (!x) throw InputError("at " + where + ": unknown poset element '" + name + "'");
    v |= UpsetMask{1} << *x;
  }
  return v;
}

inline json subset_to_json(const Poset& p, UpsetMask v) {
  json j = json::array();
  for (std::size_t x : members(v)) j.push_back(p.name(x));
  return j;
}

/// A family of upsets as a list of element lists.
inline Filter family_from_json(const Poset& p, const json& j, const std::string& where = "") {
  std::vector<UpsetMask> out;
  std::size_t i = 0;
  for (const auto& item : detail::as_array(j, where)) out.push_back(subset_from_json(p, item, where + "/" + std::to_string(i++)));
  return make_family(std::move(out));
}

inline json to_json(const Poset& p, const Filter& f) {
  json j = json::array();
  for (UpsetMask v : f.members) j.push_back(subset_to_json(p, v));
  return j;
}

// ---------------------------------------------------------------------------
// Systems and chains

inline OrderedSystem system_from_json(const json& j, const std::string& where = "") {
  detail::require_keys(j, where, {"poset", "structures"}, {"homs"});
  Poset p = poset_from_json(j["poset"], where + "/poset");
  if (!j["structures"].is_object()) throw InputError("at " + where + "/structures: expected an object");
  std::vector<Structure> structures;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (!j["structures"].contains(p.name(x)))
      throw InputError("at " + where + "/structures/" + p.name(x) + ": missing structure");
    structures.push_back(structure_from_json(j["structures"][p.name(x)], where + "/structures/" + p.name(x)));
  }
  for (const auto& [key, value] : j["structures"].items())
    if (!p.find(key)) throw InputError("at " + where + "/structures/" + key + ": not an index point");
  std::map<std::pair<std::size_t, std::size_t>, ElementMap> homs;
  if (j.contains("homs")) {
    if (!j["homs"].is_object()) throw InputError("at " + where + "/homs: expected an object");
    for (const auto& [key, value] : j["homs"].items()) {
      const std::string at = where + "/homs/" + key;
      const auto arrow = key.find("->");
      if (arrow == std::string::npos) throw InputError("at " + at + ": expected a key of the form x->y");
      auto x = p.find(key.substr(0, arrow));
      auto y = p.find(key.substr(arrow + 2));
      if (!x || !y) throw InputError("at " + at + ": unknown index point");
      homs[{*x, *y}] = map_from_json(value, structures[*x], structures[*y], at);
    }
  }
  return detail::located(where.empty() ? "/" : where, [&] { return OrderedSystem::validate(p, structures, homs); });
}

inline json to_json(const OrderedSystem& sys) {
  const Poset& p = sys.index();
  json j = json::object();
  j["poset"] = to_json(p);
  j["structures"] = json::object();
  for (std::size_t x = 0; x < p.size(); ++x) j["structures"][p.name(x)] = to_json(sys.structure(x));
  j["homs"] = json::object();
  for (std::size_t x = 0; x < p.size(); ++x)
    for (std::size_t y = 0; y < p.size(); ++y)
      if (x != y && p.leq(x, y))
        j["homs"][p.name(x) + "->" + p.name(y)] = map_to_json(sys.hom(x, y), sys.structure(x), sys.structure(y));
  return j;
}

inline OmegaChain chain_from_json(const json& j, const std::string& where = "") {
  detail::require_keys(j, where, {"tail", "endo"}, {"prefix", "links"});
  OmegaChain ch;
  ch.tail = structure_from_json(j["tail"], where + "/tail");
  ch.endo = map_from_json(j["endo"], ch.tail, ch.tail, where + "/endo");
  if (j.contains("prefix")) {
    std::size_t i = 0;
    for (const auto& item : detail::as_array(j["prefix"], where + "/prefix"))
      ch.prefix.push_back(structure_from_json(item, where + "/prefix/" + std::to_string(i++)));
  }
  const std::size_t links = j.contains("links") ? detail::as_array(j["links"], where + "/links").size() : 0;
  if (links != ch.prefix.size()) throw InputError("at " + where + "/links: need one link per prefix structure");
  for (std::size_t i = 0; i < links; ++i) {
    const Structure& next = i + 1 < ch.prefix.size() ? ch.prefix[i + 1] : ch.tail;
    ch.links.push_back(map_from_json(j["links"][i], ch.prefix[i], next, where + "/links/" + std::to_string(i)));
  }
  detail::located(where.empty() ? "/" : where, [&] { validate_chain(ch); });
  return ch;
}

// ---------------------------------------------------------------------------
// Results

inline json to_json(const OrderedSystem& sys, const Section& a) {
  const Poset& p = sys.index();
  json j = json::object();
  j["domain"] = subset_to_json(p, a.domain);
  j["values"] = json::object();
  for (std::size_t x : members(a.domain)) j["values"][p.name(x)] = sys.structure(x).name(a.values[x]);
  return j;
}

inline json to_json(const FilterProduct& fp) {
  json j = to_json(fp.structure);
  j["provenance"] = json::object();
  for (std::size_t k = 0; k < fp.representatives.size(); ++k)
    j["provenance"][fp.structure.name(static_cast<Elem>(k))] = to_json(fp.system, fp.representative(k));
  return j;
}

inline json to_json(const std::optional<Budget>& b) {
  if (!b) return nullptr;
  return json{{"size", b->size}, {"vars", b->vars}};
}

inline json to_json(const VerificationReport& r) {
  json j = json::object();
  j["claim"] = r.claim;
  j["budget"] = to_json(r.budget);
  j["verdict"] = to_string(r.verdict);
  j["witness"] = r.witness.empty() ? json(nullptr) : json(r.witness);
  return j;
}

inline json to_json(const AppendixBundle& b) {
  json j = json::object();
  j["poset"] = to_json(b.system.index());
  j["filter"] = to_json(b.system.index(), b.filter);
  j["filter_is_prime"] = b.filter_is_prime;
  j["sections_ok"] = b.sections_ok;
  j["well_defined"] = b.well_defined;
  j["isomorphism"] = b.isomorphism;
  if (!b.g_hat.empty() && b.well_defined) j["g_hat"] = map_to_json(b.g_hat, b.ultraproduct.structure, b.product.structure);
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw InputError("at byte " + std::to_string(e.byte) + ": malformed JSON");
  }
}

}  // namespace posmodel

#endif  // POSMODEL_IO_HPP
