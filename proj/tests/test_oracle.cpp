#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "qdl/oracle.hpp"
#include "support/generators.hpp"

using namespace qdl;

namespace {

Clause cl(std::initializer_list<int> lits) {
  std::vector<Literal> v;
  for (int l : lits) v.push_back({static_cast<AtomId>(std::abs(l) - 1), l > 0});
  return Clause(std::move(v));
}

AtomTable names(std::size_t n) {
  AtomTable t;
  for (std::size_t i = 0; i < n; ++i) t.intern("x" + std::to_string(i + 1));
  return t;
}

Rational R(long a, long b = 1) { return Rational(a) / b; }

}  // namespace

TEST(ExactValidity, AgreesWithProduction) {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + gen::below(rng, 6);
    std::vector<ExplicitDistribution::Entry> support;
    std::set<std::string> seen;
    for (std::size_t k = 0, m = 1 + gen::below(rng, 6); k < m; ++k) {
      const Scene x = gen::random_scene(rng, n);
      if (!seen.insert(x.to_string()).second) continue;
      support.push_back({x, R(1 + static_cast<long>(gen::below(rng, 5)))});
    }
    Rational total = 0;
    for (const auto& e : support) total += e.prob;
    for (auto& e : support) e.prob /= total;
    const ExplicitDistribution d(support);
    const Formula f = gen::random_formula(rng, n, 3);
    ASSERT_EQ(oracle::exact_validity(f, d), validity(d, f)) << i;
  }
  const auto d = ExplicitDistribution::point(Scene::from_string("01"));
  EXPECT_EQ(oracle::exact_validity(Formula::atom(1), d), 1);
  EXPECT_EQ(oracle::exact_validity(Formula::atom(0), d), 0);
  EXPECT_EQ(oracle::exact_validity(Formula::disj({Formula::atom(0), Formula::negate(Formula::atom(0))}), d), 1);
}

TEST(ConsistentClauses, Cases) {
  EXPECT_EQ(oracle::all_consistent_clauses({}, 3, 3).size(), 27u);
  EXPECT_EQ(oracle::all_consistent_clauses({}, 2, 1).size(), 5u);

  std::vector<ObscuredScene> total;
  for (int b = 0; b < 8; ++b) {
    ObscuredScene rho(3);
    for (AtomId a = 0; a < 3; ++a) rho.set(a, (b >> a & 1) ? Tri::True : Tri::False);
    total.push_back(rho);
  }
  EXPECT_TRUE(oracle::all_consistent_clauses(total, 3, 3).empty());

  const std::vector<ObscuredScene> one{ObscuredScene::from_string("1*")};
  EXPECT_TRUE(oracle::all_consistent_clauses(one, 2, 0).empty());
  EXPECT_EQ(oracle::all_consistent_clauses({}, 2, 0), Cnf{Clause{}});
  // Clauses falsified by "1*" are exactly those whose literals are all ~x1.
  EXPECT_EQ(oracle::all_consistent_clauses(one, 2, 2).size(), 9u - 2u);
  EXPECT_THROW(oracle::all_consistent_clauses({}, 13, 1), std::length_error);
}

TEST(ReferenceSearch, Examples) {
  EXPECT_TRUE(oracle::reference_space_search({}, {cl({1})}, 1, cl({1}), 1));
  const auto p = oracle::reference_space_search({cl({-1})}, {cl({1})}, 2, Clause{}, 1);
  ASSERT_TRUE(p);
  EXPECT_TRUE(verify_proof(*p, {cl({-1}), cl({1})}, {}));
  EXPECT_FALSE(oracle::reference_space_search({}, {}, 3, Clause{}, 2));
  EXPECT_FALSE(oracle::reference_space_search({cl({-1})}, {cl({1})}, 1, Clause{}, 1));
}

TEST(ReferenceSearch, AgreesWithBacktrackingSearch) {
  SplitMix64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + gen::below(rng, 3);
    Cnf phi;
    for (std::size_t k = 0, m = gen::below(rng, 4); k < m; ++k) phi.push_back(gen::random_clause(rng, n, 2));
    std::vector<ObscuredScene> samples;
    for (std::size_t k = 0, m = 1 + gen::below(rng, 4); k < m; ++k) samples.push_back(gen::random_obscured(rng, n));
    const std::size_t s = 1 + gen::below(rng, 3);
    const auto h = oracle::all_consistent_clauses(samples, n, n);
    const bool ref = oracle::reference_space_search(phi, h, s, Clause{}, n).has_value();
    const bool got = learn_search_space(phi, s, Clause{}, samples, {.backtrack = true, .num_atoms = n}).has_value();
    ASSERT_EQ(ref, got) << i;
  }
}

TEST(Pebbling, MatchesMinimalSpace) {
  for (const auto& p : oracle::enumerate_normal_proofs(3, 3))
    ASSERT_EQ(oracle::pebbling_space(p), minimal_space(p));
}

TEST(NormalProofs, SmallCounts) {
  EXPECT_EQ(oracle::normal_proof_count(1, 1), 1);
  EXPECT_EQ(oracle::normal_proof_count(3, 1), 1);
  EXPECT_EQ(oracle::normal_proof_count(1, 2), 3);  // the leaf, and a cut on x either way round
  EXPECT_EQ(oracle::normal_proof_count(2, 2), 21);
  EXPECT_EQ(oracle::normal_proof_count(3, 2), 247);
  EXPECT_EQ(oracle::normal_proof_count(3, 3), 6679);
}

TEST(NormalProofs, EnumerationIsConsistent) {
  for (auto [n, s] : {std::pair<std::size_t, std::size_t>{2, 2}, {3, 2}, {3, 3}}) {
    const auto all = oracle::enumerate_normal_proofs(n, s);
    ASSERT_EQ(BigInt(all.size()), oracle::normal_proof_count(n, s));
    const AtomTable t = names(n);
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto& p = all[i];
      ASSERT_TRUE(p.conclusion().empty());
      ASSERT_TRUE(check_normal(p));
      ASSERT_TRUE(verify_proof(p, {}, extract_premises(p)));
      ASSERT_LE(minimal_space(p), s);
      distinct.insert(proof_to_json(p, t));
    }
    EXPECT_EQ(distinct.size(), all.size());
    // Unranking reproduces the enumeration order.
    for (std::size_t i = 0; i < all.size(); i += 1 + all.size() / 50)
      ASSERT_EQ(proof_to_json(oracle::nth_normal_proof(n, s, BigInt(i)), t), proof_to_json(all[i], t));
  }
  EXPECT_THROW(oracle::enumerate_normal_proofs(3, 3, 100), std::length_error);
}

TEST(NormalProofs, HistogramMatchesEnumeration) {
  const auto all = oracle::enumerate_normal_proofs(3, 3);
  std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> counted;
  for (const auto& p : all) ++counted[{minimal_space(p), node_count(p)}];
  const auto hist = oracle::normal_proof_histogram(3, 3);
  BigInt total = 0;
  ASSERT_EQ(hist.size(), counted.size());
  for (const auto& shape : hist) {
    EXPECT_EQ(shape.count, BigInt(counted[{shape.space, shape.nodes}]));
    total += shape.count;
  }
  EXPECT_EQ(total, BigInt(all.size()));
}

TEST(MonteCarlo, UnmaskedValidQueryNeverFails) {
  std::ifstream in(std::string(QDL_DATA_DIR) + "/sculpture.kb");
  HornKB kb = read_kb(in);
  const AtomId goal = *kb.atoms.find("broken(sculpture)");
  Scene x(kb.atoms.size());
  for (AtomId a : kb.facts()) x.set(a, true);
  x.set(goal, true);
  oracle::ChainingTrialSpec spec{.kb = kb,
                                 .goal = goal,
                                 .dist = ExplicitDistribution::point(x),
                                 .mask = MaskingProcess(FixedSubset{}),
                                 .epsilon = 0.2,
                                 .delta = 0.1,
                                 .trials = 20,
                                 .samples = 10};
  const auto report = oracle::monte_carlo_guarantee(spec);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.bad_proofs, 0u);
  EXPECT_EQ(report.proofs, 20u);
  EXPECT_EQ(report.unverified, 0u);

  // Same seed, same report.
  EXPECT_EQ(oracle::monte_carlo_guarantee(spec).to_text(), report.to_text());
}
