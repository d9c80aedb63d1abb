// Acceptance sweep: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

using namespace posmodel;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;
using Homs = std::map<std::pair<std::size_t, std::size_t>, ElementMap>;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail.str("");
    if (!pass) detail << "; ";
    pass = false;
    detail << why;
  }
};

Poset tree3() { return Poset::from_generators({"x", "y", "z"}, Pairs{{"x", "y"}, {"x", "z"}}); }
Poset chain2() { return Poset::from_generators({"0", "1"}, Pairs{{"0", "1"}}); }

std::string graph_text(const Structure& g) {
  std::string out = std::to_string(g.size()) + "v{";
  bool first = true;
  for (Elem a = 0; a < static_cast<Elem>(g.size()); ++a)
    for (Elem b = a; b < static_cast<Elem>(g.size()); ++b)
      if (const Elem t[2]{a, b}; g.holds(0, t)) {
        out += (first ? "" : ",") + std::to_string(a) + std::to_string(b);
        first = false;
      }
  return out + "}";
}

// 1 ------------------------------------------------------------------------

void filter_census(Outcome& o) {
  struct Case {
    std::string name;
    Poset p;
    std::size_t filters, prime;
  };
  for (const Case& c : {Case{"tree3", tree3(), 5, 3}, Case{"chain2", chain2(), 3, 2}}) {
    const auto census = oracle::census(c.p);
    const auto all = enumerate_filters(c.p);
    const auto prime = enumerate_prime_filters(c.p);
    std::set<std::set<oracle::Set>> got_all, got_prime;
    for (const auto& f : all) got_all.insert(oracle::as_sets(f));
    for (const auto& f : prime) got_prime.insert(oracle::as_sets(f));
    const std::set<std::set<oracle::Set>> want_all(census.filters.begin(), census.filters.end());
    const std::set<std::set<oracle::Set>> want_prime(census.prime.begin(), census.prime.end());
    if (all.size() != c.filters || prime.size() != c.prime)
      o.fail(c.name + ": " + std::to_string(all.size()) + " filters, " + std::to_string(prime.size()) + " prime");
    if (got_all != want_all || got_prime != want_prime) o.fail(c.name + ": differs from exhaustive family enumeration");
  }
  if (o.pass) o.detail << "tree3 5 filters / 3 prime, chain2 3 / 2, both equal to the exhaustive census";
}

// 2 ------------------------------------------------------------------------

void prime_filters_are_points(Outcome& o) {
  std::mt19937 rng(20240601);
  std::size_t checked = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + rng() % 6;
    const Poset p = oracle::random_poset(rng, n);
    for (const auto& f : enumerate_prime_filters(p)) {
      std::size_t hits = 0;
      for (std::size_t x = 0; x < p.size(); ++x) hits += f == point_filter(p, x) ? 1 : 0;
      if (hits != 1) o.fail("poset " + std::to_string(i) + ": a prime filter matches " + std::to_string(hits) + " points");
      ++checked;
    }
    if (enumerate_prime_filters(p).size() != p.size()) o.fail("poset " + std::to_string(i) + ": prime count != size");
  }
  if (o.pass) o.detail << "50 random posets, " << checked << " prime filters, each a unique point filter";
}

// 3 ------------------------------------------------------------------------

void reduced_products(Outcome& o) {
  const auto pool = oracle::digraphs_up_to_iso(2);
  std::size_t instances = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    const Poset index = id_poset(oracle::names(n, "i"));
    const auto filters = enumerate_filters(index);
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<Structure> family;
      for (std::size_t k : pick) family.push_back(pool[k]);
      const OrderedSystem sys = OrderedSystem::validate(index, family, Homs{});
      for (const auto& f : filters) {
        const FilterProduct fp = filter_product(sys, f);
        const ReducedProduct rp = classical_reduced_product(family, f.members);
        if (!oracle::isomorphic(fp.structure, rp.structure) || !find_isomorphism(fp.structure, rp.structure))
          if (o.pass || o.detail.str().size() < 300)
            o.fail("|I|=" + std::to_string(n) + " filter " + filter_label(index, f) + ": not isomorphic");
        ++instances;
      }
      std::size_t i = 0;
      while (i < n && ++pick[i] == pool.size()) pick[i++] = 0;
      if (i == n) break;
    }
  }
  if (o.pass) o.detail << instances << " (family, filter) instances over " << pool.size() << " structures, all isomorphic";
}

// 4 ------------------------------------------------------------------------

void positive_los(Outcome& o) {
  const auto pool = oracle::digraphs_up_to_iso(2);
  const PositiveBank bank(oracle::graph_signature(), Budget{5, 2}, /*sentences_only=*/true);
  std::size_t systems = 0, products = 0;
  for (const Poset& p : oracle::small_forests()) {
    const auto primes = enumerate_prime_filters(p);
    oracle::for_each_system(p, pool, [&](const OrderedSystem& sys) {
      ++systems;
      for (const auto& f : primes) {
        const FilterProduct fp = prime_product(sys, f);
        const auto rep = verify_los(fp, bank);
        if (rep.verdict != Verdict::HoldsWithinBudget && o.detail.str().size() < 300) o.fail("violation: " + rep.witness);
        const auto x = point_of(p, f);
        if (!x || !is_isomorphism_map(fp.structure, sys.structure(*x), point_collapse_map(fp, *x)))
          if (o.detail.str().size() < 300) o.fail("point collapse fails at " + filter_label(p, f));
        ++products;
      }
    });
  }
  if (o.pass)
    o.detail << systems << " systems, " << products << " prime products, " << bank.size()
             << " sentences (size<=5, vars<=2): zero violations, point collapse iso everywhere";
}

// 5 ------------------------------------------------------------------------

void omega_chain(Outcome& o) {
  const OmegaChain ch{{}, {}, oracle::P3(), {0, 1, 0}};
  const OmegaView view = omega_prime_power(ch);
  if (!find_isomorphism(view.structure(), oracle::K2())) o.fail("colimit is not K2");
  if (!oracle::isomorphic(view.structure(), oracle::K2())) o.fail("colimit is not K2 (permutation check)");
  const auto rep = verify_los(view, Budget{5, 2});
  if (rep.verdict != Verdict::HoldsWithinBudget) o.fail("eventual-truth Los: " + rep.witness);
  if (o.pass) o.detail << "P3 with e={u->u,v->v,w->u}: colimit K2, eventual-truth Los holds (size<=5, vars<=2)";
}

// 6 ------------------------------------------------------------------------

std::optional<Formula> random_h_inductive(std::mt19937& rng) {
  oracle::FormulaGen gen{rng};
  gen.vars = {"x", "y"};
  gen.relations = {{"E", 2}};
  gen.functions = {};
  const std::size_t a = 1 + rng() % 3, b = 1 + rng() % 3;
  Formula body = rng() % 4 == 0 ? gen.positive(a + b) : Formula::implies(gen.positive(a), gen.positive(b));
  Formula phi = oracle::close_universally(std::move(body));
  if (formula_size(phi) > 7) return std::nullopt;
  if (!is_h_inductive(negation_as_implication(phi))) return std::nullopt;
  return phi;
}

void h_inductive_persistence(Outcome& o) {
  std::mt19937 rng(7777);
  std::vector<Structure> pool = oracle::digraphs_up_to_iso(2);
  for (const auto& g : oracle::simple_graphs_up_to_iso(3))
    if (g.size() == 3) pool.push_back(g);
  std::size_t triples = 0, rejected = 0;
  while (triples < 200) {
    const auto phi = random_h_inductive(rng);
    if (!phi) {
      ++rejected;
      continue;
    }
    std::vector<Structure> models;
    for (const auto& g : pool)
      if (oracle::satisfies(g, *phi, {})) models.push_back(g);
    if (models.empty()) {
      ++rejected;
      continue;
    }
    const OrderedSystem sys = oracle::random_system(rng, models);
    const auto primes = enumerate_prime_filters(sys.index());
    const Filter& f = primes[rng() % primes.size()];
    const auto rep = verify_h_inductive_persistence(sys, f, *phi);
    const bool direct = oracle::satisfies(prime_product(sys, f).structure, *phi, {});
    if ((rep.verdict != Verdict::Holds || !direct) && o.detail.str().size() < 300)
      o.fail("violation: " + to_string(*phi) + " " + rep.witness);
    ++triples;
  }
  if (o.pass) o.detail << "200 random triples (" << rejected << " rejected samples): zero violations";
}

// 7 ------------------------------------------------------------------------

void equivalence_cross_check(Outcome& o) {
  const auto graphs = oracle::simple_graphs_up_to_iso(4);
  const Budget budget{5, 3};
  const FormulaBank bank(oracle::graph_signature(), budget);
  std::vector<TheoryFingerprint> prints;
  for (const auto& g : graphs) prints.push_back(positive_theory(bank, g));
  std::size_t pairs = 0, disagreements = 0;
  std::string sample;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      ++pairs;
      const bool hom = positively_equivalent(graphs[i], graphs[j]);
      const bool fp = prints[i] == prints[j];
      if (hom != fp) {
        if (disagreements++ < 2)
          sample += (sample.empty() ? "" : ", ") + graph_text(graphs[i]) + " vs " + graph_text(graphs[j]) +
                    (hom ? " (hom: equivalent, fingerprint: differ)" : " (hom: inequivalent, fingerprint: equal)");
      }
    }
  const bool k2p3 = positively_equivalent(oracle::K2(), oracle::P3()) &&
                    positive_theory(bank, oracle::K2()) == positive_theory(bank, oracle::P3());
  const bool k2k3 = !positively_equivalent(oracle::K2(), oracle::K3()) &&
                    !(positive_theory(bank, oracle::K2()) == positive_theory(bank, oracle::K3()));
  if (disagreements)
    o.fail(std::to_string(disagreements) + "/" + std::to_string(pairs) + " pairs disagree at " + budget.to_string() +
           ", e.g. " + sample);
  if (!k2p3) o.fail("K2 ~ P3 not reproduced");
  if (!k2k3) o.fail("K2 vs K3 not separated by the fingerprint");
  if (o.pass) o.detail << pairs << " pairs over " << graphs.size() << " graphs, exact agreement";
}

// 8 ------------------------------------------------------------------------

void cores_and_prime_powers(Outcome& o) {
  const auto graphs = oracle::simple_graphs_up_to_iso(4);
  std::size_t pairs = 0, positive = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = 0; j < graphs.size(); ++j) {
      ++pairs;
      const auto r = prime_power_equivalence(graphs[i], graphs[j]);
      const bool equivalent = !oracle::homs(graphs[i], graphs[j]).empty() && !oracle::homs(graphs[j], graphs[i]).empty();
      const bool cores = oracle::isomorphic(r.core_m.core, r.core_n.core);
      if (equivalent != cores || r.equivalent != equivalent || r.report.verdict != Verdict::Holds) {
        o.fail(graph_text(graphs[i]) + " vs " + graph_text(graphs[j]) + ": " + r.report.witness);
        continue;
      }
      if (!equivalent) continue;
      ++positive;
      for (const OmegaChain* ch : {&r.chain_m, &r.chain_n}) {
        const OmegaView view = omega_prime_power(*ch);
        if (!oracle::isomorphic(view.structure(), r.core_m.core)) o.fail("chain limit is not the common core");
        const auto rep = verify_los(view, Budget{4, 2});
        if (rep.verdict != Verdict::HoldsWithinBudget) o.fail("verify_los on chain witness: " + rep.witness);
      }
    }
  if (o.pass)
    o.detail << pairs << " ordered pairs, " << positive
             << " positive; equivalence <=> core iso, both chain witnesses realize the core and pass Los";
}

// 9 ------------------------------------------------------------------------

OrderedSystem random_chain(std::mt19937& rng, const std::vector<Structure>& pool, std::size_t id) {
  const std::size_t len = 1 + rng() % 3;
  std::vector<std::string> names;
  Pairs order;
  std::vector<Structure> ms{pool[rng() % pool.size()]};
  Homs homs;
  for (std::size_t i = 0; i < len; ++i) {
    names.push_back("c" + std::to_string(id) + "_" + std::to_string(i));
    if (i == 0) continue;
    order.emplace_back(names[i - 1], names[i]);
    Structure next = pool[rng() % pool.size()];
    std::vector<std::vector<Elem>> hs;
    while ((hs = oracle::homs(ms.back(), next)).empty()) next = pool[rng() % pool.size()];
    homs[{i - 1, i}] = hs[rng() % hs.size()];
    ms.push_back(next);
  }
  return OrderedSystem::validate(Poset::from_generators(names, order), ms, homs);
}

void appendix_bundles(Outcome& o) {
  std::mt19937 rng(31337);
  const auto pool = oracle::digraphs_up_to_iso(3);
  std::size_t checks = 0;
  for (int round = 0; round < 20; ++round) {
    const std::size_t kappa = 1 + rng() % 3;
    std::vector<OrderedSystem> chains;
    for (std::size_t a = 0; a < kappa; ++a) chains.push_back(random_chain(rng, pool, a));
    const Poset k = id_poset(oracle::names(kappa, ""));
    for (std::size_t u = 0; u < kappa; ++u) {
      const AppendixBundle b = appendix_transform(chains, point_filter(k, u));
      const bool prime = is_prime_filter(b.system.index(), b.filter);
      const bool iso = b.isomorphism && b.sections_ok && b.well_defined &&
                       oracle::is_iso(b.ultraproduct.structure, b.product.structure, b.g_hat);
      if (!prime || !iso)
        o.fail("bundle " + std::to_string(round) + " at U=" + std::to_string(u) + (prime ? "" : ": F not prime") +
               (iso ? "" : ": g_hat not an isomorphism"));
      ++checks;
    }
  }
  if (o.pass) o.detail << "20 bundles, " << checks << " principal ultrafilters: F prime and g_hat an isomorphism each time";
}

// 10 -----------------------------------------------------------------------

void pec_agreement(Outcome& o) {
  const auto graphs = oracle::simple_graphs_up_to_iso(3);
  const Budget budget{5, 2};
  std::size_t runs = 0, disagreements = 0;
  std::string sample;
  const std::size_t n = graphs.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    if (std::popcount(mask) > 3) continue;
    std::vector<Structure> cls;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1U) cls.push_back(graphs[i]);
    for (const auto& m : cls) {
      const PecResult r = is_pec(m, cls, budget);
      ++runs;
      if (!r.agree() && disagreements++ < 2)
        sample += (sample.empty() ? "" : ", ") + graph_text(m) + " in class of " + std::to_string(cls.size()) +
                  " (direct " + (r.direct ? "yes" : "no") + ", resultant " + (r.resultant ? "yes" : "no") + ")";
    }
  }
  const std::vector<Structure> k{oracle::K2(), oracle::P3()};
  const PecResult k2 = is_pec(oracle::K2(), k, budget), p3 = is_pec(oracle::P3(), k, budget);
  if (disagreements) o.fail(std::to_string(disagreements) + "/" + std::to_string(runs) + " disagreements, e.g. " + sample);
  if (!k2.direct || !k2.resultant) o.fail("K2 not pec w.r.t. {K2,P3}");
  if (p3.direct || p3.resultant) o.fail("P3 pec w.r.t. {K2,P3}");
  if (o.pass) o.detail << runs << " (model, class) runs, criteria agree; K2 pec and P3 not pec w.r.t. {K2,P3}";
}

// 11 -----------------------------------------------------------------------

void parser(Outcome& o) {
  std::mt19937 rng(1000);
  oracle::FormulaGen gen{rng};
  for (int i = 0; i < 1000; ++i) {
    const Formula f = gen.formula(1 + rng() % 12);
    const std::string text = to_string(f);
    try {
      if (!(parse_formula(text) == f) || to_string(parse_formula(text)) != text) o.fail("round trip: " + text);
    } catch (const SyntaxError& e) {
      o.fail("round trip: " + text + ": " + e.what());
    }
    if (!o.pass) return;
  }
  const auto E = [](const char* a, const char* b) { return Formula::rel("E", {Term::var(a), Term::var(b)}); };
  if (!(parse_formula("exists x. exists y. E(x,y)") == Formula::exists("x", Formula::exists("y", E("x", "y")))))
    o.fail("first grammar example");
  if (!(parse_formula("forall x. (E(x,x) -> false)") ==
        Formula::forall("x", Formula::implies(E("x", "x"), Formula::falsum()))))
    o.fail("second grammar example");
  try {
    parse_formula("exists x. E(x");
    o.fail("third grammar example parsed");
  } catch (const SyntaxError& e) {
    if (e.offset() != 11) o.fail("third grammar example: offset " + std::to_string(e.offset()));
  }
  if (o.pass) o.detail << "1000 random round trips, three grammar examples";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"filter census", filter_census},
      {"prime filters are point filters", prime_filters_are_points},
      {"reduced product agreement", reduced_products},
      {"positive Los sweep", positive_los},
      {"omega-chain limit", omega_chain},
      {"h-inductive persistence", h_inductive_persistence},
      {"positive equivalence cross-check", equivalence_cross_check},
      {"cores and prime powers", cores_and_prime_powers},
      {"ultraproduct of chains", appendix_bundles},
      {"pec criteria agreement", pec_agreement},
      {"parser round trip", parser},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
