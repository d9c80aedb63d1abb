#ifndef POSMODEL_CLI_HPP
#define POSMODEL_CLI_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "posmodel/appendix.hpp"
#include "posmodel/enumerate.hpp"
#include "posmodel/error.hpp"
#include "posmodel/evaluate.hpp"
#include "posmodel/formula.hpp"
#include "posmodel/io.hpp"
#include "posmodel/poset.hpp"
#include "posmodel/product.hpp"
#include "posmodel/structure.hpp"
#include "posmodel/system.hpp"
#include "posmodel/verify.hpp"

namespace posmodel::cli {

enum ExitCode : int { kOk = 0, kCounterexample = 1, kInputError = 2 };

namespace detail {

/// An input error already carrying its source (file name or argument).
struct Located : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Fn>
auto from_file(const std::string& path, Fn&& fn) {
  try {
    return fn(read_json_file(path));
  } catch (const InputError& e) {
    throw Located(path + ": " + e.what());
  }
}

template <class Fn>
auto from_arg(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Located&) {
    throw;
  } catch (const InputError& e) {
    throw Located(what + ": " + e.what());
  }
}

inline std::string map_text(const Structure& src, const Structure& tgt, const ElementMap& map) {
  std::string out;
  for (std::size_t a = 0; a < map.size(); ++a)
    out += (a ? "," : "") + src.name(static_cast<Elem>(a)) + "->" + tgt.name(map[a]);
  return "{" + out + "}";
}

inline std::string budget_text(const Budget& b) { return "budget " + b.to_string(); }

inline void json_block(std::ostream& out, const json& j) {
  out << "---json---\n" << j.dump(2) << "\n---end---\n";
}

/// "a=u,b=v" against two universes.
inline ElementMap parse_map(const std::string& text, const Structure& src, const Structure& tgt) {
  ElementMap out(src.size(), -1);
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("expected name=name, got '" + item + "'");
    auto a = src.find(item.substr(0, eq));
    auto b = tgt.find(item.substr(eq + 1));
    if (!a) throw InputError("'" + item.substr(0, eq) + "' is not a source element");
    if (!b) throw InputError("'" + item.substr(eq + 1) + "' is not a target element");
    out[static_cast<std::size_t>(*a)] = *b;
  }
  for (std::size_t a = 0; a < out.size(); ++a)
    if (out[a] < 0) throw InputError("no image for '" + src.name(static_cast<Elem>(a)) + "'");
  return out;
}

inline Structure load_structure(const std::string& path) {
  return from_file(path, [](const json& j) { return structure_from_json(j); });
}

inline bool is_chain_file(const json& j) { return j.is_object() && j.contains("tail"); }

struct FilterChoice {
  std::string filter;  // inline JSON family or a file holding one
  std::string point;
  bool upsets = false;

  bool given() const { return !filter.empty() || !point.empty() || upsets; }

  Filter resolve(const Poset& p) const {
    const int chosen = int(!filter.empty()) + int(!point.empty()) + int(upsets);
    if (chosen != 1) throw Located("exactly one of --filter, --point, --upsets is required");
    if (!point.empty()) {
      auto x = p.find(point);
      if (!x) throw Located("--point: unknown index point '" + point + "'");
      return point_filter(p, *x);
    }
    if (upsets) return from_arg("--upsets", [&] { return principal_upset_filter(p); });
    if (filter.front() == '[')
      return from_arg("--filter", [&] {
        try {
          return family_from_json(p, json::parse(filter));
        } catch (const json::parse_error& e) {
          throw InputError("at byte " + std::to_string(e.byte) + ": malformed JSON");
        }
      });
    return from_file(filter, [&](const json& j) { return family_from_json(p, j); });
  }
};

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"posmodel: finite positive model theory workbench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Budget budget;
  unsigned seed = 0;
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--size", budget.size, "maximum formula size")->capture_default_str();
    sub->add_option("--vars", budget.vars, "maximum number of variables")->capture_default_str();
    sub->add_option("--seed", seed, "seed for randomized sweeps")->capture_default_str();
  };
  std::string output;
  auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", output, "also write the JSON block to this file"); };

  std::string formula_text, file_a, file_b, sig_file, map_text_arg;
  std::vector<std::string> assignments, class_files;
  bool all = false, prime = false, strict = false, reduced = false, prime_power = false;
  std::optional<std::size_t> limit;
  std::string ultra;
  FilterChoice choice;
  auto add_filter = [&](CLI::App* sub) {
    sub->add_option("--filter", choice.filter, "filter as a JSON list of element lists, or a file holding one");
    sub->add_option("--point", choice.point, "point filter at an index point");
    sub->add_flag("--upsets", choice.upsets, "filter generated by the principal upsets of a chain index");
  };

  std::function<int()> action;

  auto* parse = app.add_subcommand("parse", "parse and print a formula");
  parse->add_option("formula", formula_text)->required();
  parse->add_option("--sig", sig_file, "structure file whose signature type-checks the formula");
  parse->callback([&] {
    action = [&] {
      std::optional<Structure> typed;
      if (!sig_file.empty()) typed = load_structure(sig_file);
      const Formula f = from_arg("formula", [&] {
        return typed ? parse_formula(formula_text, typed->signature()) : parse_formula(formula_text);
      });
      out << to_string(f) << "\n";
      std::string fv;
      for (const auto& v : free_variables_ordered(f)) fv += (fv.empty() ? "" : ",") + v;
      out << "size " << formula_size(f) << ", free variables {" << fv << "}\n";
      return int(kOk);
    };
  });

  auto* classify_cmd = app.add_subcommand("classify", "fragment of a formula");
  classify_cmd->add_option("formula", formula_text)->required();
  classify_cmd->callback([&] {
    action = [&] {
      const Formula f = from_arg("formula", [&] { return parse_formula(formula_text); });
      out << to_string(classify(f)) << "\n";
      return int(kOk);
    };
  });

  auto* eval = app.add_subcommand("eval", "evaluate a formula in a structure");
  eval->add_option("structure", file_a)->required();
  eval->add_option("formula", formula_text)->required();
  eval->add_option("--assign", assignments, "variable=element, comma separated")->delimiter(',');
  eval->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a);
      const Formula f = from_arg("formula", [&] { return parse_formula(formula_text, m.signature()); });
      Assignment alpha;
      for (const auto& item : assignments) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Located("--assign: expected variable=element, got '" + item + "'");
        auto e = m.find(item.substr(eq + 1));
        if (!e) throw Located("--assign: '" + item.substr(eq + 1) + "' is not an element of " + file_a);
        alpha[item.substr(0, eq)] = *e;
      }
      const bool value = from_arg("formula", [&] { return evaluate(m, f, alpha); });
      out << (value ? "true" : "false") << "\n";
      return int(kOk);
    };
  });

  auto* hom = app.add_subcommand("hom", "find or enumerate homomorphisms");
  hom->add_option("source", file_a)->required();
  hom->add_option("target", file_b)->required();
  hom->add_flag("--all", all, "enumerate every homomorphism");
  hom->add_option("--limit", limit, "stop after this many");
  hom->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a), n = load_structure(file_b);
      from_arg(file_b, [&] { require_same_signature(m, n); });
      const auto homs = enumerate_homs(m, n, all ? limit : std::optional<std::size_t>(1));
      if (!all) {
        if (homs.empty()) out << "no homomorphism\n";
        else out << "homomorphism " << map_text(m, n, homs.front()) << "\n";
        return int(kOk);
      }
      out << homs.size() << (homs.size() == 1 ? " homomorphism" : " homomorphisms") << "\n";
      for (const auto& h : homs) out << map_text(m, n, h) << "\n";
      return int(kOk);
    };
  });

  auto* imm = app.add_subcommand("immersion", "budgeted immersion check");
  imm->add_option("source", file_a)->required();
  imm->add_option("target", file_b)->required();
  imm->add_option("--map", map_text_arg, "the map as name=name pairs, comma separated")->required();
  add_budget(imm);
  imm->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a), n = load_structure(file_b);
      from_arg(file_b, [&] { require_same_signature(m, n); });
      const ElementMap h = from_arg("--map", [&] { return parse_map(map_text_arg, m, n); });
      const auto r = from_arg("--map", [&] { return is_immersion(m, n, h, budget); });
      if (r.immersion) {
        out << "immersion (" << budget_text(budget) << ")\n";
        return int(kOk);
      }
      out << "not an immersion (" << budget_text(budget) << "): " << to_string(*r.witness) << " at "
          << tuple_names(m, r.params, r.tuple) << "\n";
      return int(kCounterexample);
    };
  });

  auto* iso = app.add_subcommand("iso", "isomorphism search");
  iso->add_option("first", file_a)->required();
  iso->add_option("second", file_b)->required();
  iso->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a), n = load_structure(file_b);
      from_arg(file_b, [&] { require_same_signature(m, n); });
      auto f = find_isomorphism(m, n);
      if (f) out << "isomorphic " << map_text(m, n, *f) << "\n";
      else out << "not isomorphic\n";
      return int(kOk);
    };
  });

  auto* poset_check = app.add_subcommand("poset-check", "validate a poset file");
  poset_check->add_option("poset", file_a)->required();
  poset_check->add_flag("--strict", strict, "read \"le\" as the complete order relation");
  poset_check->callback([&] {
    action = [&] {
      const Poset p = from_file(file_a, [&](const json& j) {
        if (!strict) return poset_from_json(j);
        posmodel::detail::require_keys(j, "", {"elements"}, {"le"});
        std::vector<std::pair<std::string, std::string>> pairs;
        if (j.contains("le"))
          for (const auto& item : j["le"]) pairs.emplace_back(item.at(0).get<std::string>(), item.at(1).get<std::string>());
        return validate_poset(j["elements"].get<std::vector<std::string>>(), pairs);
      });
      out << "valid poset (" << p.size() << " elements); wellfounded forest: "
          << (is_wellfounded_forest(p) ? "yes" : "no") << "; chain: " << (is_chain(p) ? "yes" : "no") << "\n";
      return int(kOk);
    };
  });

  auto* upsets_cmd = app.add_subcommand("upsets", "list the upsets of a poset");
  upsets_cmd->add_option("poset", file_a)->required();
  upsets_cmd->callback([&] {
    action = [&] {
      const Poset p = from_file(file_a, [](const json& j) { return poset_from_json(j); });
      const auto all_upsets = upsets(p);
      out << all_upsets.size() << " upsets:";
      for (std::size_t i = 0; i < all_upsets.size(); ++i) out << (i ? ", " : " ") << describe(p, all_upsets[i]);
      out << "\n";
      return int(kOk);
    };
  });

  auto* filters = app.add_subcommand("filters", "list filters over a poset");
  filters->add_option("poset", file_a)->required();
  filters->add_flag("--prime", prime, "prime filters only");
  filters->callback([&] {
    action = [&] {
      const Poset p = from_file(file_a, [](const json& j) { return poset_from_json(j); });
      const auto list = prime ? enumerate_prime_filters(p) : enumerate_filters(p);
      out << list.size() << (prime ? " prime" : "") << (list.size() == 1 ? " filter" : " filters") << ":";
      for (std::size_t i = 0; i < list.size(); ++i) out << (i ? ", " : " ") << filter_label(p, list[i]);
      out << "\n";
      json j = json::array();
      for (const auto& f : list) j.push_back(to_json(p, f));
      json_block(out, j);
      return int(kOk);
    };
  });

  auto* product = app.add_subcommand("product", "filter product, or classical reduced product / ultraproduct");
  product->add_option("system", file_a)->required();
  add_filter(product);
  product->add_flag("--reduced", reduced, "classical reduced product by --filter over a discrete index");
  product->add_option("--ultra", ultra, "classical ultraproduct by the principal ultrafilter at a point");
  add_output(product);
  product->callback([&] {
    action = [&] {
      const OrderedSystem sys = from_file(file_a, [](const json& j) { return system_from_json(j); });
      const Poset& p = sys.index();
      json block;
      if (reduced || !ultra.empty()) {
        if (reduced && !ultra.empty()) throw Located("--reduced and --ultra are exclusive");
        if (!(p == id_poset(p.names()))) throw Located(file_a + ": classical products need a discrete index");
        Filter d;
        if (!ultra.empty()) {
          auto x = p.find(ultra);
          if (!x) throw Located("--ultra: unknown index point '" + ultra + "'");
          d = point_filter(p, *x);
        } else {
          d = choice.resolve(p);
        }
        const auto rp = from_arg("--filter", [&] { return classical_reduced_product(sys.structures(), d.members); });
        out << (reduced ? "reduced product" : "ultraproduct") << ": " << rp.structure.size() << " elements\n";
        block = to_json(rp.structure);
      } else {
        const Filter f = choice.resolve(p);
        const auto fp = from_arg("--filter", [&] { return filter_product(sys, f); });
        out << "filter product by " << filter_label(p, f) << (fp.prime ? " (prime)" : " (not prime)") << ": "
            << fp.structure.size() << " elements\n";
        block = to_json(fp);
      }
      json_block(out, block);
      if (!output.empty()) std::ofstream(output) << block.dump(2) << "\n";
      return int(kOk);
    };
  });

  auto* omega = app.add_subcommand("omega-limit", "direct limit of an omega chain");
  omega->add_option("chain", file_a)->required();
  add_output(omega);
  omega->callback([&] {
    action = [&] {
      const OmegaChain ch = from_file(file_a, [](const json& j) { return chain_from_json(j); });
      const ChainLimit lim = omega_colimit(ch);
      out << "limit: " << lim.limit.size() << " elements (offset " << lim.offset << ", period " << lim.period << ")\n";
      json block = to_json(lim.limit);
      json_block(out, block);
      if (!output.empty()) std::ofstream(output) << block.dump(2) << "\n";
      return int(kOk);
    };
  });

  auto report = [&](const VerificationReport& r) {
    if (r.verdict == Verdict::PreconditionFailed) {
      std::string why = r.notes.empty() ? "" : r.notes.front();
      throw Located(file_a + ": precondition failed: " + why);
    }
    out << (r.ok() ? "holds" : "counterexample");
    if (r.budget) out << " (" << budget_text(*r.budget) << ")";
    if (!r.ok()) out << ": " << r.witness;
    out << "\n";
    for (const auto& note : r.notes) out << "note: " << note << "\n";
    json_block(out, to_json(r));
    return r.ok() ? int(kOk) : int(kCounterexample);
  };

  auto* los = app.add_subcommand("los-verify", "positive Los sweep on a filter product or an omega chain");
  los->add_option("input", file_a)->required();
  add_filter(los);
  add_budget(los);
  los->callback([&] {
    action = [&] {
      const json j = from_file(file_a, [](const json& x) { return x; });
      if (is_chain_file(j)) {
        if (choice.given()) throw Located("filter flags do not apply to an omega chain");
        const OmegaChain ch = from_arg(file_a, [&] { return chain_from_json(j); });
        return report(verify_los(omega_prime_power(ch), budget));
      }
      const OrderedSystem sys = from_arg(file_a, [&] { return system_from_json(j); });
      const Filter f = choice.resolve(sys.index());
      const auto fp = from_arg("--filter", [&] { return filter_product(sys, f); });
      return report(verify_los(fp, budget));
    };
  });

  auto* preserve = app.add_subcommand("preserve", "h-inductive persistence in a prime product");
  preserve->add_option("system", file_a)->required();
  preserve->add_option("formula", formula_text)->required();
  add_filter(preserve);
  preserve->callback([&] {
    action = [&] {
      const OrderedSystem sys = from_file(file_a, [](const json& j) { return system_from_json(j); });
      const Formula f = from_arg("formula", [&] { return parse_formula(formula_text, sys.signature()); });
      const Filter filter = choice.resolve(sys.index());
      return report(from_arg("formula", [&] { return verify_h_inductive_persistence(sys, filter, f); }));
    };
  });

  auto* poseq = app.add_subcommand("poseq", "positive equivalence of finite structures");
  poseq->add_option("first", file_a)->required();
  poseq->add_option("second", file_b)->required();
  poseq->add_flag("--prime-power", prime_power, "also exhibit the common core as a prime power of both");
  add_budget(poseq);
  poseq->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a), n = load_structure(file_b);
      from_arg(file_b, [&] { require_same_signature(m, n); });
      const auto eq = positive_equivalence(m, n);
      if (eq.equivalent) {
        out << "positively equivalent (hom witnesses: " << map_text(m, n, *eq.forward) << " / "
            << map_text(n, m, *eq.backward) << ")\n";
      } else {
        out << "not positively equivalent (no homomorphism " << (eq.forward ? file_b + " -> " + file_a : file_a + " -> " + file_b)
            << ")\n";
      }
      if (!prime_power) return int(kOk);
      const auto pp = prime_power_equivalence(m, n, budget);
      out << "cores " << (pp.cores_isomorphic ? "isomorphic" : "not isomorphic") << " (" << pp.core_m.core.size()
          << " and " << pp.core_n.core.size() << " elements)\n";
      if (pp.equivalent && pp.report.ok())
        out << "common prime power: limit of the retraction chain on each side, " << pp.limit_m->limit.size()
            << " elements\n";
      return report(pp.report);
    };
  });

  auto* core_cmd = app.add_subcommand("core", "minimum retract of a finite structure");
  core_cmd->add_option("structure", file_a)->required();
  add_output(core_cmd);
  core_cmd->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a);
      const CoreResult c = core(m);
      out << "core: " << c.core.size() << " elements {";
      for (std::size_t i = 0; i < c.elements.size(); ++i) out << (i ? "," : "") << m.name(c.elements[i]);
      out << "}, retraction " << map_text(m, c.core, c.retraction) << "\n";
      json block = json::object();
      block["core"] = to_json(c.core);
      block["retraction"] = map_to_json(c.retraction, m, c.core);
      block["endo"] = map_to_json(c.endo, m, m);
      json_block(out, block);
      if (!output.empty()) std::ofstream(output) << block.dump(2) << "\n";
      return int(kOk);
    };
  });

  auto* pec = app.add_subcommand("pec", "pec check relative to a finite class, by both criteria");
  pec->add_option("structure", file_a)->required();
  pec->add_option("class", class_files, "members of the class")->required();
  add_budget(pec);
  pec->callback([&] {
    action = [&] {
      const Structure m = load_structure(file_a);
      std::vector<Structure> models;
      for (const auto& path : class_files) {
        models.push_back(load_structure(path));
        from_arg(path, [&] { require_same_signature(m, models.back()); });
      }
      const PecResult r = is_pec(m, models, budget);
      out << (r.direct ? "pec" : "not pec") << " (" << budget_text(budget) << "; direct: " << (r.direct ? "yes" : "no")
          << ", resultant: " << (r.resultant ? "yes" : "no") << ")\n";
      if (!r.direct) out << "witness: " << r.direct_witness << "\n";
      if (!r.agree()) out << "note: criteria disagree (budget artifact)\n";
      if (!r.resultant && r.direct) out << "resultant gap: " << r.resultant_witness << "\n";
      json block = to_json(r.report);
      block["direct"] = r.direct;
      block["resultant"] = r.resultant;
      json_block(out, block);
      return r.direct ? int(kOk) : int(kCounterexample);
    };
  });

  auto* appendix = app.add_subcommand("appendix", "ultraproduct of chain limits as a prime product");
  appendix->add_option("bundle", file_a)->required();
  add_output(appendix);
  appendix->callback([&] {
    action = [&] {
      const AppendixBundle b = from_file(file_a, [](const json& j) {
        posmodel::detail::require_keys(j, "", {"chains", "ultrafilter"}, {});
        std::vector<OrderedSystem> chains;
        std::size_t i = 0;
        for (const auto& c : posmodel::detail::as_array(j["chains"], "/chains")) {
          chains.push_back(system_from_json(c, "/chains/" + std::to_string(i)));
          ++i;
        }
        std::vector<std::string> alphas;
        for (std::size_t a = 0; a < chains.size(); ++a) alphas.push_back(std::to_string(a));
        const Filter u = family_from_json(id_poset(alphas), j["ultrafilter"], "/ultrafilter");
        return posmodel::detail::located("/", [&] { return appendix_transform(chains, u); });
      });
      const bool ok = b.filter_is_prime && b.sections_ok && b.well_defined && b.isomorphism;
      out << "F " << (b.filter_is_prime ? "is prime" : "is NOT prime") << "; g(a) in S_F: "
          << (b.sections_ok ? "yes" : "no") << "; g-hat well defined: " << (b.well_defined ? "yes" : "no")
          << "; isomorphism: " << (b.isomorphism ? "yes" : "no") << " (" << b.ultraproduct.structure.size()
          << " elements)\n";
      json block = to_json(b);
      json_block(out, block);
      if (!output.empty()) std::ofstream(output) << block.dump(2) << "\n";
      return ok ? int(kOk) : int(kCounterexample);
    };
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    err << "error: arguments: " << what << "\n";
    return kInputError;
  }
  try {
    return action();
  } catch (const Located& e) {
    err << "error: " << e.what() << "\n";
  } catch (const InputError& e) {
    err << "error: " << (file_a.empty() ? std::string("input") : file_a) << ": " << e.what() << "\n";
  }
  return kInputError;
}

}  // namespace posmodel::cli

#endif  // POSMODEL_CLI_HPP
