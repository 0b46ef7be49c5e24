#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qdl/formula_io.hpp"
#include "qdl/resolution.hpp"
#include "support/generators.hpp"

using namespace qdl;

namespace {

Clause cl(std::initializer_list<int> lits) {
  std::vector<Literal> v;
  for (int l : lits) v.push_back({static_cast<AtomId>(std::abs(l) - 1), l > 0});
  return Clause(std::move(v));
}

std::vector<ObscuredScene> rows(std::initializer_list<const char*> s) {
  std::vector<ObscuredScene> out;
  for (const char* r : s) out.push_back(ObscuredScene::from_string(r));
  return out;
}

// The 7-node proof that cuts x twice on one path.
ResolutionProof double_cut() {
  ResolutionProof p(2);
  const auto xy = p.add_hypothesis(cl({1, 2}));
  const auto nxy = p.add_hypothesis(cl({-1, 2}));
  const auto y = p.add_cut(0, xy, nxy);
  const auto xny = p.add_hypothesis(cl({1, -2}));
  const auto x = p.add_cut(1, y, xny);
  const auto nx = p.add_hypothesis(cl({-1}));
  p.add_cut(0, x, nx);
  return p;
}

}  // namespace

TEST(Clause, Basics) {
  const Clause c = cl({2, -1, 2});
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.literals()[0], (Literal{0, false}));
  EXPECT_TRUE(c.contains({1, true}));
  EXPECT_EQ(c.polarity(0), std::optional<bool>(false));
  EXPECT_FALSE(c.polarity(2).has_value());
  EXPECT_TRUE(c.is_superset_of(cl({2})));
  EXPECT_FALSE(cl({2}).is_superset_of(c));
  EXPECT_THROW(cl({1, -1}), std::invalid_argument);
  EXPECT_THROW(c.with({0, true}), std::invalid_argument);
  EXPECT_EQ(c.without_atom(0), cl({2}));
  EXPECT_TRUE(Clause{}.empty());
}

TEST(Clause, WitnessedFalseMatchesLiterals) {
  SplitMix64 rng(3);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t n = 1 + gen::below(rng, 6);
    const Clause c = gen::random_clause(rng, n, n);
    const ObscuredScene rho = gen::random_obscured(rng, n);
    bool all_false = true;
    for (Literal l : c.literals()) all_false = all_false && literal_value(l, rho) == Tri::False;
    ASSERT_EQ(witnessed_false(c, rho), all_false);
  }
  EXPECT_TRUE(witnessed_false(Clause{}, ObscuredScene::from_string("*")));
}

TEST(Search, BaseCases) {
  // Never witnessed false: a hypothesis leaf whatever phi says.
  const auto hyp = learn_search_space({cl({1})}, 1, cl({1, 2}), rows({"0*", "*1"}));
  ASSERT_TRUE(hyp);
  EXPECT_EQ(hyp->node(hyp->root()).kind, ResolutionProof::Kind::Hypothesis);

  const auto weak = learn_search_space({cl({2}), cl({1})}, 1, cl({1, 2}), rows({"00"}));
  ASSERT_TRUE(weak);
  EXPECT_EQ(weak->node(weak->root()).kind, ResolutionProof::Kind::Weakening);
  EXPECT_EQ(weak->node(weak->root()).from, 0u);

  EXPECT_THROW(learn_search_space({}, 0, Clause{}, rows({"0"})), std::invalid_argument);
}

TEST(Search, SingleAtomRefutation) {
  const Cnf phi{cl({-1})};
  const auto samples = rows({"1", "*", "1"});
  const auto p = refute(phi, {.s = 2}, samples);
  ASSERT_TRUE(p);
  ASSERT_EQ(p->size(), 3u);
  const auto& root = p->node(p->root());
  EXPECT_EQ(root.kind, ResolutionProof::Kind::Cut);
  EXPECT_EQ(root.pivot, 0u);
  EXPECT_TRUE(root.clause.empty());
  EXPECT_EQ(p->node(root.left).kind, ResolutionProof::Kind::Hypothesis);
  EXPECT_EQ(p->node(root.left).clause, cl({1}));
  EXPECT_EQ(p->node(root.right).kind, ResolutionProof::Kind::Weakening);
  EXPECT_EQ(extract_premises(*p), Cnf{cl({1})});
  EXPECT_TRUE(verify_proof(*p, phi, {cl({1})}));
  EXPECT_TRUE(check_normal(*p));
  EXPECT_EQ(minimal_space(*p), 2u);
  EXPECT_EQ(node_count(*p), 3u);

  AtomTable t;
  t.intern("x");
  EXPECT_EQ(format_proof(*p, t), "cut x: []\n  hyp: x\n  weaken #1: ~x\n");
}

TEST(Search, RefuteEdgeCases) {
  const auto empty = refute({Clause{}}, {.s = 1}, rows({"0"}));
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->node(empty->root()).kind, ResolutionProof::Kind::Weakening);
  EXPECT_FALSE(refute({}, {.s = 1}, rows({"0"})));
  EXPECT_THROW(refute({}, {.s = 2}, {}), std::invalid_argument);
  // x witnessed false somewhere and nothing in phi: no proof at any space.
  EXPECT_FALSE(refute({cl({-1})}, {.s = 3}, rows({"0", "1"})));
}

TEST(Search, VerbatimSuccessImpliesBacktrackingSuccess) {
  // Verbatim successes are a subset of backtracking successes.
  const Cnf phi{cl({2}), cl({-2, -1}), cl({-2, 1})};
  const auto samples = rows({"*0"});
  for (std::size_t s = 1; s <= 3; ++s) {
    const auto verbatim = learn_search_space(phi, s, Clause{}, samples);
    const auto back = learn_search_space(phi, s, Clause{}, samples, {.backtrack = true});
    if (verbatim) {
      EXPECT_TRUE(back) << s;
    }
    if (back) {
      EXPECT_TRUE(verify_proof(*back, phi, extract_premises(*back)));
    }
  }
}

TEST(Search, ScopeRestrictionAndPremiseConsistency) {
  SplitMix64 rng(99);
  int proofs = 0;
  for (int i = 0; i < 600; ++i) {
    const std::size_t n = 1 + gen::below(rng, 4);
    Cnf phi;
    for (std::size_t k = 0, m = gen::below(rng, 4); k < m; ++k) phi.push_back(gen::random_clause(rng, n, 2));
    std::vector<ObscuredScene> samples;
    for (std::size_t k = 0, m = 1 + gen::below(rng, 5); k < m; ++k) samples.push_back(gen::random_obscured(rng, n));
    const Clause root = gen::random_clause(rng, n, 1);
    const std::size_t s = 1 + gen::below(rng, 3);

    bool scopes_ok = true;
    LearnOptions opts{.backtrack = (rng() & 1) == 1, .num_atoms = n};
    opts.on_call = [&](const Clause& c, std::size_t, std::span<const std::uint32_t> scope) {
      std::vector<std::uint32_t> want;
      for (std::uint32_t j = 0; j < samples.size(); ++j) {
        bool keep = true;
        for (Literal l : c.literals())
          if (!root.contains(l) && literal_value(l, samples[j]) == Tri::True) keep = false;
        if (keep) want.push_back(j);
      }
      if (!std::equal(scope.begin(), scope.end(), want.begin(), want.end())) scopes_ok = false;
    };
    const auto p = learn_search_space(phi, s, root, samples, opts);
    ASSERT_TRUE(scopes_ok) << i;
    if (!p) continue;
    ++proofs;
    ASSERT_EQ(p->conclusion(), root);
    ASSERT_TRUE(verify_proof(*p, phi, extract_premises(*p))) << i;
    ASSERT_TRUE(check_normal(*p)) << i;
    ASSERT_LE(minimal_space(*p), s);
    for (const auto& node : p->nodes()) {
      if (node.kind != ResolutionProof::Kind::Hypothesis) continue;
      for (const auto& rho : samples) {
        bool in_scope = true;
        for (Literal l : node.clause.literals())
          if (!root.contains(l) && literal_value(l, rho) == Tri::True) in_scope = false;
        if (in_scope) {
          ASSERT_FALSE(witnessed_false(node.clause, rho));
        }
      }
    }
  }
  EXPECT_GT(proofs, 100);
}

TEST(Verify, RejectsBadProofs) {
  const Cnf phi{cl({-1})};
  const auto p = *refute(phi, {.s = 2}, rows({"1"}));
  EXPECT_FALSE(verify_proof(p, phi, {}));  // hypothesis not in H
  EXPECT_FALSE(verify_proof(p, {cl({1})}, {cl({1})}));  // weakening of the wrong clause

  auto tight = p;
  tight.set_space(1);
  EXPECT_FALSE(verify_proof(tight, phi, {cl({1})}));

  ResolutionProof wrong(2);
  const auto a = wrong.add_hypothesis(cl({1}));
  const auto b = wrong.add_weakening(cl({-1}), 0);
  wrong.add_cut(0, a, b, cl({2}));
  EXPECT_FALSE(verify_proof(wrong, phi, {cl({1})}));

  ResolutionProof no_pivot(2);
  const auto c = no_pivot.add_hypothesis(cl({1}));
  const auto d = no_pivot.add_hypothesis(cl({2}));
  no_pivot.add_cut(0, c, d);
  EXPECT_FALSE(verify_proof(no_pivot, {}, {cl({1}), cl({2})}));

  // Children given in either order are fine.
  ResolutionProof flipped(2);
  const auto e = flipped.add_weakening(cl({-1}), 0);
  const auto f = flipped.add_hypothesis(cl({1}));
  flipped.add_cut(0, e, f);
  EXPECT_TRUE(verify_proof(flipped, phi, {cl({1})}));

  // A node used twice is not a tree.
  ResolutionProof dag(3);
  const auto g = dag.add_hypothesis(cl({1, 2}));
  const auto h = dag.add_hypothesis(cl({-1, 2}));
  const auto y = dag.add_cut(0, g, h);
  const auto z = dag.add_hypothesis(cl({-2}));
  dag.add_cut(1, y, z);
  EXPECT_TRUE(verify_proof(dag, {}, {cl({1, 2}), cl({-1, 2}), cl({-2})}));
  ResolutionProof shared = dag;
  shared.add_cut(1, y, z);
  EXPECT_FALSE(verify_proof(shared, {}, {cl({1, 2}), cl({-1, 2}), cl({-2})}));
}

TEST(Normal, Examples) {
  ResolutionProof leaf(1);
  leaf.add_hypothesis(cl({1}));
  EXPECT_TRUE(check_normal(leaf));
  EXPECT_EQ(minimal_space(leaf), 1u);

  const auto p = double_cut();
  EXPECT_EQ(node_count(p), 7u);
  EXPECT_TRUE(verify_proof(p, {}, {cl({1, 2}), cl({-1, 2}), cl({1, -2}), cl({-1})}));
  EXPECT_FALSE(check_normal(p));
}

TEST(Space, MinimalSpaceOfBalancedTrees) {
  // A complete tree of depth d needs d + 1 clauses.
  for (std::size_t d = 0; d <= 4; ++d) {
    ResolutionProof p;
    std::function<ResolutionProof::Index(std::size_t, std::vector<Literal>)> build =
        [&](std::size_t level, std::vector<Literal> lits) -> ResolutionProof::Index {
      if (level == d) return p.add_hypothesis(Clause(lits));
      auto l = lits, r = lits;
      l.push_back({static_cast<AtomId>(level), true});
      r.push_back({static_cast<AtomId>(level), false});
      const auto a = build(level + 1, l);
      const auto b = build(level + 1, r);
      return p.add_cut(static_cast<AtomId>(level), a, b);
    };
    build(0, {});
    EXPECT_EQ(minimal_space(p), d + 1);
    EXPECT_EQ(node_count(p), (std::size_t{2} << d) - 1);
    EXPECT_TRUE(check_normal(p));
  }
}

TEST(Premises, Deduplicated) {
  ResolutionProof p(2);
  const auto a = p.add_hypothesis(cl({1, 2}));
  const auto b = p.add_hypothesis(cl({-1, 2}));
  p.add_cut(0, a, b);
  EXPECT_EQ(extract_premises(p).size(), 2u);
  ResolutionProof w(1);
  w.add_weakening(cl({1, 2}), 0);
  EXPECT_TRUE(extract_premises(w).empty());

  ResolutionProof twice(3);
  const auto c = twice.add_hypothesis(cl({1}));
  const auto d = twice.add_hypothesis(cl({-1, 2}));
  const auto e = twice.add_cut(0, c, d);
  const auto f = twice.add_hypothesis(cl({1}));
  const auto g = twice.add_hypothesis(cl({-1, -2}));
  const auto h = twice.add_cut(0, f, g);
  twice.add_cut(1, e, h);
  EXPECT_EQ(extract_premises(twice), (Cnf{cl({1}), cl({-1, 2}), cl({-1, -2})}));
}

TEST(Bounds, CountBounds) {
  const auto one = count_bounds(5, 1);
  EXPECT_EQ(one.min_k, 1u);
  EXPECT_EQ(one.max_k, 1.0);
  const auto b = count_bounds(4, 3);
  EXPECT_EQ(b.min_k, 7u);
  EXPECT_NEAR(b.max_k, 8 * std::exp(2.0), 1e-9);
  EXPECT_NEAR(count_bounds(2, 2).log2_max_proofs, 2 * std::exp(1.0) * 4, 1e-9);
  EXPECT_THROW(count_bounds(2, 3), std::invalid_argument);
  EXPECT_THROW(count_bounds(2, 0), std::invalid_argument);

  EXPECT_TRUE(within_node_bound(59, 4, 3));
  EXPECT_FALSE(within_node_bound(60, 4, 3));
  EXPECT_TRUE(within_node_bound(5, 2, 2));   // 2 * 2e = 10.87
  EXPECT_TRUE(within_node_bound(10, 2, 2));
  EXPECT_FALSE(within_node_bound(11, 2, 2));
  // 16^(2e) = 2^21.75
  EXPECT_TRUE(within_count_bound(BigInt(1) << 21, 2, 2));
  EXPECT_FALSE(within_count_bound(BigInt(1) << 22, 2, 2));
}

TEST(SampleSize, Resolution) {
  EXPECT_EQ(sample_size_resolution(2, 1, 1.0, std::exp(-1.0), 1.0), 2u);
  EXPECT_EQ(sample_size_resolution(4, 2, 0.25, 0.1, 0.25), 126u);
  const auto m = sample_size_resolution(4, 2, 0.25, 0.1, 0.5);
  const auto half = sample_size_resolution(4, 2, 0.25, 0.1, 0.25);
  EXPECT_GE(half, 2 * m - 1);
  EXPECT_LE(half, 2 * m);
  EXPECT_THROW(sample_size_resolution(2, 3, 0.1, 0.1, 1), std::invalid_argument);
  EXPECT_LT(sample_size_resolution(5, 2, 0.1, 0.1, 1), sample_size_resolution(5, 3, 0.1, 0.1, 1));
}

TEST(Files, DimacsRoundTrip) {
  AtomTable t;
  std::ifstream in(std::string(QDL_DATA_DIR) + "/implication.cnf");
  const Cnf cnf = read_cnf(in, t);
  ASSERT_EQ(cnf.size(), 1u);
  EXPECT_EQ(cnf[0], cl({-1, 2}));
  EXPECT_EQ(t.size(), 5u);
  EXPECT_EQ(to_string(cnf[0], t), "~x1 | x2");

  std::ostringstream out;
  write_cnf(out, cnf, t);
  std::istringstream back(out.str());
  AtomTable t2;
  EXPECT_EQ(read_cnf(back, t2), cnf);
  EXPECT_EQ(t2.name(4), "x5");

  EXPECT_EQ(parse_clause("x1 | ~x2", t), cl({1, -2}));
  EXPECT_EQ(parse_clause("1 -2 0", t), cl({1, -2}));
  EXPECT_EQ(parse_clause("[]", t), Clause{});
  EXPECT_EQ(parse_clause("", t), Clause{});
  EXPECT_EQ(to_string(Clause{}, t), "[]");
  EXPECT_THROW(parse_clause("x9", t), std::invalid_argument);
  EXPECT_THROW(parse_clause("x1 ~x1", t), std::invalid_argument);
}

TEST(Files, DimacsErrors) {
  AtomTable t;
  std::istringstream count("p cnf 2 2\n1 0\n");
  EXPECT_THROW(read_cnf(count, t), ParseError);
  std::istringstream range("p cnf 2 1\n3 0\n");
  try {
    AtomTable u;
    read_cnf(range, u);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream header("1 0\n");
  AtomTable v;
  EXPECT_THROW(read_cnf(header, v), ParseError);
}

TEST(Output, Json) {
  AtomTable t;
  t.intern("x");
  const auto p = *refute({cl({-1})}, {.s = 2}, rows({"1"}));
  const std::string j = proof_to_json(p, t);
  EXPECT_NE(j.find("\"type\": \"resolution\""), std::string::npos);
  EXPECT_NE(j.find("\"cut\""), std::string::npos);
  EXPECT_NE(j.find("\"weaken\""), std::string::npos);
}
