#include <gtest/gtest.h>

#include <unordered_map>

#include "oracles.hpp"

using namespace posmodel;
using oracle::K2;
using oracle::K3;
using oracle::P3;

namespace {

Term v(const char* name) { return Term::var(name); }
Formula E(const char* a, const char* b) { return Formula::rel("E", {v(a), v(b)}); }

Signature algebra_signature() { return Signature{{{"E", 2}, {"P", 1}, {"Q", 0}}, {{"f", 1}, {"g", 2}}, {"c"}}; }

Structure random_algebra(std::mt19937& rng, std::size_t n) {
  Structure m(algebra_signature(), oracle::names(n));
  std::uniform_int_distribution<Elem> pick(0, static_cast<Elem>(n - 1));
  std::bernoulli_distribution coin(0.4);
  for (Elem a = 0; a < static_cast<Elem>(n); ++a) {
    for (Elem b = 0; b < static_cast<Elem>(n); ++b) {
      if (coin(rng)) m.add_tuple(0, {a, b});
      m.set_function(1, std::vector<Elem>{a, b}, pick(rng));
    }
    if (coin(rng)) m.add_tuple(1, {a});
    m.set_function(0, std::vector<Elem>{a}, pick(rng));
  }
  if (coin(rng)) m.add_tuple(2, {});
  m.set_constant(0, pick(rng));
  return m;
}

// Independent structural reading of the fragment definitions.
bool positive_shape(const Formula& f) {
  using K = Formula::Kind;
  if (f.kind == K::Forall || f.kind == K::Implies || f.kind == K::Not) return false;
  for (const auto& c : f.children)
    if (!positive_shape(c)) return false;
  return true;
}

bool basic_shape(const Formula& f) {
  const Formula* body = &f;
  while (body->kind == Formula::Kind::Forall) body = &body->children[0];
  if (body->kind == Formula::Kind::Not) return positive_shape(body->children[0]);
  if (body->kind == Formula::Kind::Implies) return positive_shape(body->children[0]) && positive_shape(body->children[1]);
  return positive_shape(*body);
}

bool h_shape(const Formula& f) {
  if (f.kind == Formula::Kind::And && h_shape(f.children[0]) && h_shape(f.children[1])) return true;
  return basic_shape(f);
}

// Every positive sentence over the graph signature with nodes <= size, variables from
// {v1, v2}, built without any canonicalization.
std::vector<Formula> raw_positive(std::size_t size, const std::vector<std::string>& vars) {
  std::vector<std::vector<Formula>> level(size + 1);
  for (const auto& a : vars)
    for (const auto& b : vars) {
      level[1].push_back(Formula::rel("E", {Term::var(a), Term::var(b)}));
      level[1].push_back(Formula::eq(Term::var(a), Term::var(b)));
    }
  for (std::size_t s = 2; s <= size; ++s) {
    for (const auto& body : level[s - 1])
      for (const auto& x : vars) level[s].push_back(Formula::exists(x, body));
    for (std::size_t l = 1; l + 1 < s; ++l)
      for (const auto& a : level[l])
        for (const auto& b : level[s - 1 - l]) {
          level[s].push_back(Formula::conj(a, b));
          level[s].push_back(Formula::disj(a, b));
        }
  }
  std::vector<Formula> out{Formula::falsum(), Formula::verum()};
  for (std::size_t s = 1; s <= size; ++s)
    for (auto& f : level[s])
      if (free_variables(f).empty()) out.push_back(std::move(f));
  return out;
}

}  // namespace

TEST(Parse, GrammarExamples) {
  EXPECT_EQ(parse_formula("exists x. exists y. E(x,y)"), Formula::exists("x", Formula::exists("y", E("x", "y"))));
  EXPECT_EQ(parse_formula("forall x. (E(x,x) -> false)"),
            Formula::forall("x", Formula::implies(E("x", "x"), Formula::falsum())));
  try {
    parse_formula("exists x. E(x");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 11U);
    EXPECT_NE(std::string(e.what()).find("at offset 11"), std::string::npos);
  }
}

TEST(Parse, Precedence) {
  const Formula a = Formula::rel("A", {}), b = Formula::rel("B", {}), c = Formula::rel("C", {}), d = Formula::rel("D", {});
  EXPECT_EQ(parse_formula("A & B | C -> D"),
            Formula::implies(Formula::disj(Formula::conj(a, b), c), d));
  EXPECT_EQ(parse_formula("~A & B"), Formula::conj(Formula::negation(a), b));
  EXPECT_EQ(parse_formula("A -> B -> C"), Formula::implies(a, Formula::implies(b, c)));
  EXPECT_EQ(parse_formula("A | B | C"), Formula::disj(Formula::disj(a, b), c));
  EXPECT_EQ(parse_formula("exists x. A & B"), Formula::exists("x", Formula::conj(a, b)));
  EXPECT_EQ(parse_formula("A & exists x. B | C"), Formula::conj(a, Formula::exists("x", Formula::disj(b, c))));
  EXPECT_EQ(parse_formula("((A))"), a);
}

TEST(Parse, TermsAndSignatures) {
  const Signature sig = algebra_signature();
  EXPECT_EQ(parse_formula("f(x) = c", sig), Formula::eq(Term::app("f", {v("x")}), Term::constant("c")));
  EXPECT_EQ(parse_formula("f(x) = c"), Formula::eq(Term::app("f", {v("x")}), v("c")));
  EXPECT_EQ(parse_formula("exists c. P(c)", sig), Formula::exists("c", Formula::rel("P", {v("c")})));
  EXPECT_THROW(parse_formula("E(x)", sig), SyntaxError);
  EXPECT_THROW(parse_formula("g(x) = x", sig), SyntaxError);
  EXPECT_THROW(parse_formula("R(x)", sig), SyntaxError);
  EXPECT_THROW(parse_formula("E(x,y) &", sig), SyntaxError);
  EXPECT_THROW(parse_formula("E(x,y))"), SyntaxError);
  EXPECT_THROW(parse_formula("exists . E(x,x)"), SyntaxError);
  EXPECT_EQ(parse_formula("Q", sig), Formula::rel("Q", {}));
  EXPECT_EQ(parse_formula("Q()", sig), Formula::rel("Q", {}));
}

TEST(Parse, RoundTripOnRandomTrees) {
  std::mt19937 rng(7);
  oracle::FormulaGen gen{rng};
  for (int i = 0; i < 400; ++i) {
    const Formula f = gen.formula(1 + static_cast<std::size_t>(i % 12));
    const std::string text = to_string(f);
    ASSERT_EQ(parse_formula(text), f) << text;
    ASSERT_EQ(to_string(parse_formula(text)), text);
  }
  gen.constants = {"c"};
  const Signature sig = algebra_signature();
  for (int i = 0; i < 200; ++i) {
    const Formula f = gen.formula(1 + static_cast<std::size_t>(i % 10));
    ASSERT_EQ(parse_formula(to_string(f), sig), f) << to_string(f);
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(parse_formula("E(x,y)")), FragmentTag::Atomic);
  EXPECT_EQ(classify(parse_formula("forall x. (E(x,x) -> false)")), FragmentTag::BasicHInductive);
  EXPECT_EQ(classify(parse_formula("exists x. ~E(x,x)")), FragmentTag::General);
  EXPECT_EQ(classify(parse_formula("exists x. E(x,x) | x = x")), FragmentTag::Positive);
  EXPECT_EQ(classify(parse_formula("forall x. ~E(x,x)")), FragmentTag::BasicHInductive);
  EXPECT_EQ(classify(parse_formula("(forall x. (E(x,x) -> false)) & (forall x. forall y. (E(x,y) -> E(y,x)))")),
            FragmentTag::HInductive);
  EXPECT_EQ(classify(parse_formula("forall x. exists y. E(x,y)")), FragmentTag::BasicHInductive);
  EXPECT_EQ(classify(parse_formula("exists x. forall y. E(x,y)")), FragmentTag::General);
  EXPECT_EQ(classify(parse_formula("(E(x,x) -> false) -> false")), FragmentTag::General);
  EXPECT_STREQ(to_string(FragmentTag::BasicHInductive), "basic-h-inductive");
}

TEST(Classify, SoundOnRandomFormulas) {
  std::mt19937 rng(11);
  oracle::FormulaGen gen{rng};
  for (int i = 0; i < 2000; ++i) {
    const Formula f = gen.formula(1 + static_cast<std::size_t>(i % 9));
    const FragmentTag tag = classify(f);
    if (tag == FragmentTag::Atomic || tag == FragmentTag::Positive) ASSERT_TRUE(positive_shape(f)) << to_string(f);
    if (tag == FragmentTag::BasicHInductive) ASSERT_TRUE(basic_shape(f)) << to_string(f);
    if (tag != FragmentTag::General) ASSERT_TRUE(h_shape(f)) << to_string(f);
    if (tag == FragmentTag::General) ASSERT_FALSE(h_shape(f)) << to_string(f);
    if (positive_shape(f)) ASSERT_TRUE(tag == FragmentTag::Atomic || tag == FragmentTag::Positive);
  }
}

TEST(Evaluate, Examples) {
  EXPECT_TRUE(evaluate(K2(), parse_formula("exists x. exists y. E(x,y)")));
  EXPECT_FALSE(evaluate(K2(), parse_formula("exists x. E(x,x)")));
  const Formula triangle = parse_formula("exists x. exists y. exists z. (E(x,y) & E(y,z) & E(z,x))");
  EXPECT_TRUE(evaluate(K3(), triangle));
  EXPECT_FALSE(evaluate(K2(), triangle));
  EXPECT_EQ(formula_size(triangle), 8U);
  EXPECT_FALSE(evaluate(K2(), Formula::falsum()));
  EXPECT_TRUE(evaluate(K2(), Formula::verum()));
  EXPECT_TRUE(evaluate(K2(), parse_formula("E(x,y)"), {{"x", 0}, {"y", 1}}));
}

TEST(Evaluate, Errors) {
  EXPECT_THROW(evaluate(K2(), parse_formula("E(x,y)"), {{"x", 0}}), InputError);
  EXPECT_THROW(evaluate(K2(), parse_formula("P(x)"), {{"x", 0}}), InputError);
  EXPECT_THROW(evaluate(K2(), parse_formula("E(x,x)"), {{"x", 5}}), InputError);
}

TEST(Evaluate, AgreesWithTreeInterpreter) {
  std::mt19937 rng(3);
  oracle::FormulaGen gen{rng};
  gen.constants = {"c"};
  for (int round = 0; round < 60; ++round) {
    const Structure m = random_algebra(rng, 1 + static_cast<std::size_t>(round % 3));
    for (int i = 0; i < 40; ++i) {
      const Formula f = gen.formula(1 + static_cast<std::size_t>(i % 8));
      for (Elem x = 0; x < static_cast<Elem>(m.size()); ++x)
        for (Elem y = 0; y < static_cast<Elem>(m.size()); ++y) {
          const Assignment alpha{{"x", x}, {"y", y}, {"z", (x + y) % static_cast<Elem>(m.size())}};
          ASSERT_EQ(evaluate(m, f, alpha), oracle::satisfies(m, f, alpha)) << to_string(f);
        }
    }
  }
}

TEST(Enumerate, ForcedMembers) {
  auto printed = [](const std::vector<Formula>& fs) {
    std::vector<std::string> out;
    for (const auto& f : fs) out.push_back(to_string(f));
    return out;
  };
  const auto graph = printed(enumerate_positive_sentences(oracle::graph_signature(), Budget{4, 1}));
  EXPECT_NE(std::find(graph.begin(), graph.end(), "exists v1. E(v1,v1)"), graph.end());
  EXPECT_NE(std::find(graph.begin(), graph.end(), "false"), graph.end());
  const auto pure = printed(enumerate_positive_sentences(Signature{}, Budget{3, 1}));
  EXPECT_NE(std::find(pure.begin(), pure.end(), "exists v1. v1 = v1"), pure.end());
  EXPECT_EQ(printed(enumerate_positive_sentences(oracle::graph_signature(), Budget{0, 2})),
            (std::vector<std::string>{"false", "true"}));
}

TEST(Enumerate, WellFormedAndDeterministic) {
  const Budget b{5, 2};
  const auto fs = enumerate_positive_sentences(oracle::graph_signature(), b);
  EXPECT_EQ(fs, enumerate_positive_sentences(oracle::graph_signature(), b));
  std::set<std::string> seen;
  for (const auto& f : fs) {
    EXPECT_TRUE(is_positive(f));
    EXPECT_TRUE(free_variables(f).empty());
    EXPECT_LE(formula_size(f), b.size);
    EXPECT_LE(variable_count(f), b.vars);
    EXPECT_TRUE(seen.insert(to_string(f)).second) << to_string(f);
  }
}

TEST(Enumerate, CoversEveryPositiveSentenceUpToEquivalence) {
  // Truth vectors over all digraphs on at most two points: every raw sentence must be
  // matched by an enumerated one.
  std::vector<Structure> probes = oracle::all_digraphs(1);
  for (auto& g : oracle::all_digraphs(2)) probes.push_back(std::move(g));
  auto vector_of = [&](const Formula& f) {
    std::string bits;
    for (const auto& m : probes) bits += evaluate(m, f) ? '1' : '0';
    return bits;
  };
  std::set<std::string> enumerated;
  for (const auto& f : enumerate_positive_sentences(oracle::graph_signature(), Budget{4, 2}))
    enumerated.insert(vector_of(f));
  for (const auto& f : raw_positive(4, {"v1", "v2"})) ASSERT_TRUE(enumerated.count(vector_of(f))) << to_string(f);
}

TEST(PositiveTheory, EdgeAndPathAgree) {
  EXPECT_EQ(positive_theory(K2(), Budget{5, 3}), positive_theory(P3(), Budget{5, 3}));
  EXPECT_EQ(positive_theory(K3(), Budget{4, 2}), positive_theory(K3(), Budget{4, 2}));
}

TEST(PositiveTheory, TriangleSentenceSeparatesEdgeFromTriangle) {
  // The separating sentence has eight nodes and three variables.
  const Formula triangle = parse_formula("exists v1. exists v2. exists v3. (E(v1,v2) & E(v2,v3) & E(v3,v1))");
  EXPECT_NE(evaluate(K2(), triangle), evaluate(K3(), triangle));
  EXPECT_GT(formula_size(triangle), 5U);
  // Within five nodes no positive sentence tells them apart.
  EXPECT_EQ(positive_theory(K2(), Budget{5, 3}), positive_theory(K3(), Budget{5, 3}));
  EXPECT_NE(positive_theory(Structure(oracle::Loop()), Budget{2, 1}), positive_theory(K3(), Budget{2, 1}));
}

TEST(PositiveTheory, ListsOnlyPositiveSentences) {
  const auto th = positive_theory(P3(), Budget{4, 2});
  EXPECT_EQ(th.budget, (Budget{4, 2}));
  for (const auto& f : th.satisfied) {
    EXPECT_TRUE(is_positive(f));
    EXPECT_TRUE(free_variables(f).empty());
    EXPECT_TRUE(oracle::satisfies(P3(), f, {}));
    EXPECT_TRUE(is_h_inductive(f));
  }
  for (const auto& f : th.refuted) {
    EXPECT_FALSE(oracle::satisfies(P3(), f, {}));
    EXPECT_TRUE(is_h_inductive(Formula::negation(f)));
  }
}

TEST(Resultant, Examples) {
  auto printed = [](const std::vector<Formula>& fs) {
    std::set<std::string> out;
    for (const auto& f : fs) out.insert(to_string(f));
    return out;
  };
  const auto edge = printed(resultant(parse_formula("E(x,y)"), {K2()}, Budget{3, 2}));
  EXPECT_TRUE(edge.count("E(x,x)"));
  EXPECT_TRUE(edge.count("x = y"));
  EXPECT_FALSE(edge.count("E(x,y)"));

  const Budget b{3, 2};
  const auto bottom = resultant(Formula::falsum(), {K2(), P3()}, b);
  EXPECT_EQ(bottom.size(), enumerate_positive_formulas(oracle::graph_signature(), b).size());

  const auto refl = printed(resultant(parse_formula("x = x"), {K2()}, Budget{3, 1}));
  EXPECT_TRUE(refl.count("E(x,x)"));
  EXPECT_FALSE(refl.count("x = x"));

  EXPECT_THROW(resultant(parse_formula("~E(x,x)"), {K2()}, b), InputError);
  EXPECT_THROW(resultant(parse_formula("E(x,x)"), {}, b), InputError);
}

TEST(Resultant, MatchesDefinition) {
  const std::vector<Structure> models{K2(), P3(), oracle::Loop()};
  const Budget b{3, 2};
  const auto phis = enumerate_positive_formulas(oracle::graph_signature(), Budget{2, 2}, {"x", "y"});
  for (const auto& phi : phis) {
    const auto vars = free_variables_ordered(phi);
    std::set<std::string> expected;
    for (const auto& psi : enumerate_positive_formulas(oracle::graph_signature(), b, vars)) {
      // exists v (phi & psi) fails in every model
      Formula both = Formula::conj(phi, psi);
      for (auto it = vars.rbegin(); it != vars.rend(); ++it) both = Formula::exists(*it, both);
      bool sat = false;
      for (const auto& m : models) sat = sat || oracle::satisfies(m, both, {});
      if (!sat) expected.insert(to_string(psi));
    }
    std::set<std::string> got;
    for (const auto& psi : resultant(phi, models, b)) got.insert(to_string(psi));
    ASSERT_EQ(got, expected) << to_string(phi);
  }
}

TEST(Immersion, IdentityIsImmersion) {
  for (const auto& m : oracle::simple_graphs_up_to_iso(3))
    EXPECT_TRUE(is_immersion(m, m, identity_map(m.size()), Budget{4, 2}).immersion);
}
