#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace posmodel;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

Poset tree3() { return Poset::from_generators({"x", "y", "z"}, Pairs{{"x", "y"}, {"x", "z"}}); }
Poset chain2() { return Poset::from_generators({"0", "1"}, Pairs{{"0", "1"}}); }
Poset diamond() {
  return Poset::from_generators({"bot", "a", "b", "top"}, Pairs{{"bot", "a"}, {"bot", "b"}, {"a", "top"}, {"b", "top"}});
}

UpsetMask mask(const Poset& p, std::initializer_list<const char*> names) {
  UpsetMask v = 0;
  for (const char* n : names) v |= UpsetMask{1} << *p.find(n);
  return v;
}

std::string error_of(std::vector<std::string> names, const Pairs& pairs) {
  try {
    validate_poset(std::move(names), pairs);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool is_linear_subset(const Poset& p, UpsetMask v) {
  for (std::size_t a : members(v))
    for (std::size_t b : members(v))
      if (!p.leq(a, b) && !p.leq(b, a)) return false;
  return true;
}

}  // namespace

TEST(ValidatePoset, Examples) {
  const Pairs tree{{"x", "x"}, {"y", "y"}, {"z", "z"}, {"x", "y"}, {"x", "z"}};
  EXPECT_EQ(error_of({"x", "y", "z"}, tree), "");
  EXPECT_EQ(error_of({"0", "1"}, Pairs{{"0", "0"}, {"1", "1"}, {"0", "1"}, {"1", "0"}}), "antisymmetry violation (0,1)");
  EXPECT_EQ(error_of({"0", "1", "2"}, Pairs{{"0", "0"}, {"1", "1"}, {"2", "2"}, {"0", "1"}, {"1", "2"}}),
            "transitivity gap (0,1,2)");
  EXPECT_EQ(error_of({"0", "1"}, Pairs{{"0", "0"}}), "missing reflexive pair (1,1)");
  EXPECT_THROW(Poset::from_generators({"0", "1"}, Pairs{{"0", "1"}, {"1", "0"}}), InputError);
  EXPECT_THROW(Poset::from_generators({"0", "0"}, Pairs{}), InputError);
  EXPECT_THROW(Poset::from_generators({"0"}, Pairs{{"0", "9"}}), InputError);
}

TEST(ValidatePoset, OrderAxiomsHoldAfterClosure) {
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Poset p = oracle::random_poset(rng, 1 + static_cast<std::size_t>(i % 7));
    for (std::size_t x = 0; x < p.size(); ++x) {
      EXPECT_TRUE(p.leq(x, x));
      for (std::size_t y = 0; y < p.size(); ++y) {
        if (x != y) EXPECT_FALSE(p.leq(x, y) && p.leq(y, x));
        for (std::size_t z = 0; z < p.size(); ++z)
          if (p.leq(x, y) && p.leq(y, z)) EXPECT_TRUE(p.leq(x, z));
      }
    }
  }
}

TEST(Forest, Examples) {
  EXPECT_TRUE(is_wellfounded_forest(tree3()));
  EXPECT_FALSE(is_wellfounded_forest(diamond()));
  EXPECT_TRUE(is_wellfounded_forest(id_poset({"a", "b", "c", "d"})));
  EXPECT_FALSE(is_wellfounded_forest(Poset::from_generators({"x", "y", "z"}, Pairs{{"x", "z"}, {"y", "z"}})));
}

TEST(Forest, MatchesDownsetDefinition) {
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    const Poset p = oracle::random_poset(rng, 1 + static_cast<std::size_t>(i % 6));
    bool expected = true;
    for (std::size_t x = 0; x < p.size(); ++x) expected = expected && is_linear_subset(p, p.down(x));
    EXPECT_EQ(is_wellfounded_forest(p), expected);
  }
}

TEST(Upsets, Examples) {
  const Poset c = chain2();
  EXPECT_EQ(upsets(c), (std::vector<UpsetMask>{0, mask(c, {"1"}), mask(c, {"0", "1"})}));
  const Poset t = tree3();
  EXPECT_EQ(upsets(t), (std::vector<UpsetMask>{0, mask(t, {"y"}), mask(t, {"z"}), mask(t, {"y", "z"}), t.full()}));
  EXPECT_EQ(upsets(id_poset({"a", "b", "c", "d"})).size(), 16U);
}

TEST(Upsets, MatchBruteForce) {
  std::mt19937 rng(13);
  for (int i = 0; i < 60; ++i) {
    const Poset p = oracle::random_poset(rng, 1 + static_cast<std::size_t>(i % 6));
    const auto sets = oracle::upset_sets(p);
    const auto masks = upsets(p);
    ASSERT_EQ(masks.size(), sets.size());
    for (std::size_t k = 0; k < masks.size(); ++k) {
      oracle::Set s;
      for (std::size_t x : members(masks[k])) s.insert(static_cast<int>(x));
      EXPECT_EQ(s, sets[k]);
    }
  }
}

TEST(Filters, MembershipExamples) {
  const Poset t = tree3();
  const Filter top{{t.full()}};
  EXPECT_TRUE(is_filter(t, top));
  EXPECT_TRUE(is_prime_filter(t, top));
  const Filter fy = make_family({mask(t, {"y"}), mask(t, {"y", "z"}), t.full()});
  EXPECT_TRUE(is_prime_filter(t, fy));
  EXPECT_EQ(fy, point_filter(t, 1));
  const Filter yz = make_family({mask(t, {"y", "z"}), t.full()});
  EXPECT_TRUE(is_filter(t, yz));
  EXPECT_FALSE(is_prime_filter(t, yz));
  EXPECT_FALSE(is_filter(t, Filter{}));
  EXPECT_THROW(is_filter(t, Filter{{mask(t, {"x"})}}), InputError);
  EXPECT_FALSE(is_prime_filter(t, Filter{upsets(t)}));
}

TEST(Filters, CensusMatchesFamilyEnumeration) {
  for (const Poset& p : {tree3(), chain2(), diamond(), id_poset({"0", "1"}), id_poset({"0", "1", "2"})}) {
    const auto oracle_census = oracle::census(p);
    std::set<std::set<oracle::Set>> want_all(oracle_census.filters.begin(), oracle_census.filters.end());
    std::set<std::set<oracle::Set>> want_prime(oracle_census.prime.begin(), oracle_census.prime.end());
    std::set<std::set<oracle::Set>> got_all, got_prime;
    for (const auto& f : enumerate_filters(p)) got_all.insert(oracle::as_sets(f));
    for (const auto& f : enumerate_prime_filters(p)) got_prime.insert(oracle::as_sets(f));
    EXPECT_EQ(got_all, want_all);
    EXPECT_EQ(got_prime, want_prime);
  }
  EXPECT_EQ(enumerate_filters(tree3()).size(), 5U);
  EXPECT_EQ(enumerate_prime_filters(tree3()).size(), 3U);
  EXPECT_EQ(enumerate_filters(chain2()).size(), 3U);
  EXPECT_EQ(enumerate_prime_filters(chain2()).size(), 2U);
}

TEST(Filters, CanonicalOrderAndLabels) {
  const Poset t = tree3();
  std::vector<std::string> labels;
  for (const auto& f : enumerate_filters(t)) labels.push_back(filter_label(t, f));
  EXPECT_EQ(labels, (std::vector<std::string>{"F_x", "F{y,z}", "F_y", "F_z", "improper"}));
}

TEST(Filters, DiscretePrimeFiltersArePrincipalUltrafilters) {
  const Poset d = id_poset({"0", "1"});
  const auto primes = enumerate_prime_filters(d);
  ASSERT_EQ(primes.size(), 2U);
  EXPECT_EQ(primes[0], point_filter(d, 0));
  EXPECT_EQ(primes[1], point_filter(d, 1));
  for (std::size_t n = 1; n <= 5; ++n) {
    const Poset p = id_poset(oracle::names(n));
    EXPECT_EQ(upsets(p).size(), std::size_t{1} << n);
    EXPECT_EQ(enumerate_prime_filters(p).size(), n);
  }
}

TEST(Filters, PrimeFiltersArePointFiltersOnRandomPosets) {
  std::mt19937 rng(17);
  for (int i = 0; i < 80; ++i) {
    const Poset p = oracle::random_poset(rng, 1 + static_cast<std::size_t>(i % 6));
    const auto primes = enumerate_prime_filters(p);
    EXPECT_EQ(primes.size(), p.size());
    for (const auto& f : primes) {
      std::size_t hits = 0;
      for (std::size_t x = 0; x < p.size(); ++x) hits += f == point_filter(p, x) ? 1 : 0;
      EXPECT_EQ(hits, 1U);
      EXPECT_FALSE(f.contains(0));
      EXPECT_TRUE(is_filter(p, f));
    }
    for (const auto& f : enumerate_filters(p)) {
      // Principal in Up(P): the superset closure of the least member.
      const UpsetMask least = filter_generator(p, f);
      EXPECT_TRUE(f.contains(least));
      for (UpsetMask v : upsets(p)) EXPECT_EQ(f.contains(v), (v & least) == least);
    }
    if (upsets(p).size() <= 16) {
      const auto census = oracle::census(p);
      EXPECT_EQ(census.prime.size(), p.size());
      EXPECT_EQ(census.filters.size(), enumerate_filters(p).size());
    }
  }
}

TEST(Filters, PrincipalUpsetAndPointFilters) {
  const Poset c = chain2();
  EXPECT_EQ(principal_upset_filter(c), make_family({mask(c, {"1"}), c.full()}));
  const Poset t = tree3();
  EXPECT_EQ(point_filter(t, 1), make_family({mask(t, {"y"}), mask(t, {"y", "z"}), t.full()}));
  EXPECT_THROW(principal_upset_filter(t), InputError);
  const Poset d = id_poset({"0", "1"});
  EXPECT_TRUE(d.leq(0, 0) && d.leq(1, 1));
  EXPECT_FALSE(d.leq(0, 1) || d.leq(1, 0));
}
