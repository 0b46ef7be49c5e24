#include <gtest/gtest.h>

#include "qdl/formula_io.hpp"
#include "qdl/logic.hpp"
#include "support/generators.hpp"

using namespace qdl;

namespace {

// [5 R1 + R2 + R3 + R4 + R5 - R6 >= 4]
Formula example_threshold() {
  std::vector<WeightedTerm> t{{5, Formula::atom(0)}, {1, Formula::atom(1)}, {1, Formula::atom(2)},
                              {1, Formula::atom(3)}, {1, Formula::atom(4)}, {-1, Formula::atom(5)}};
  return Formula::threshold(std::move(t), 4);
}

}  // namespace

TEST(Eval, ThresholdExampleWithOnlyFirstAtomTrue) {
  EXPECT_TRUE(eval(example_threshold(), Scene::from_string("100000")));
}

TEST(Eval, TwoAtomThresholdTruthTable) {
  // [2a - 3b >= 0], checked against the arithmetic directly.
  const Formula f = Formula::threshold({{2, Formula::atom(0)}, {-3, Formula::atom(1)}}, 0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Scene x(2);
      x.set(0, a);
      x.set(1, b);
      EXPECT_EQ(eval(f, x), 2 * a - 3 * b >= 0) << a << b;
    }
  EXPECT_TRUE(eval(f, Scene::from_string("00")));
  EXPECT_TRUE(eval(f, Scene::from_string("10")));
  EXPECT_FALSE(eval(f, Scene::from_string("01")));
  EXPECT_FALSE(eval(f, Scene::from_string("11")));
}

TEST(Eval, SugarMatchesBooleanConnectives) {
  const Formula a = Formula::atom(0), b = Formula::atom(1), c = Formula::atom(2);
  const Formula all = Formula::conj({a, b, c}), any = Formula::disj({a, b, c});
  const Formula imp = Formula::implies(a, b), eq = Formula::iff(a, b);
  for (int bits = 0; bits < 8; ++bits) {
    Scene x(3);
    for (AtomId i = 0; i < 3; ++i) x.set(i, bits >> i & 1);
    const bool va = x[0], vb = x[1], vc = x[2];
    EXPECT_EQ(eval(all, x), va && vb && vc);
    EXPECT_EQ(eval(any, x), va || vb || vc);
    EXPECT_EQ(eval(imp, x), !va || vb);
    EXPECT_EQ(eval(eq, x), va == vb);
    EXPECT_EQ(eval(Formula::negate(a), x), !va);
  }
  EXPECT_TRUE(all.is_conjunction());
  EXPECT_TRUE(any.is_disjunction());
  EXPECT_EQ(all.bound(), 3);
  EXPECT_EQ(any.bound(), 1);
}

TEST(Eval, Errors) {
  EXPECT_THROW(Formula::threshold({{0, Formula::atom(0)}}, 1), std::invalid_argument);
  EXPECT_THROW(eval(Formula::atom(3), Scene(2)), std::out_of_range);
  const Weight big = std::numeric_limits<Weight>::max();
  const Formula f = Formula::threshold({{big, Formula::atom(0)}, {big, Formula::atom(1)}}, 1);
  EXPECT_THROW(eval(f, Scene::from_string("11")), std::overflow_error);
}

TEST(PartialEval, WorkedWitnessingCases) {
  const Formula f = example_threshold();
  EXPECT_TRUE(partial_eval(f, ObscuredScene::from_string("1*****")).witnessed_true());
  EXPECT_TRUE(partial_eval(f, ObscuredScene::from_string("*11110")).witnessed_true());
  EXPECT_TRUE(partial_eval(f, ObscuredScene::from_string("0****1")).witnessed_false());
  EXPECT_TRUE(partial_eval(f, ObscuredScene::from_string("0*0***")).witnessed_false());
  // R1, R6 false, a proper subset of R2..R5 true, the rest hidden.
  const auto r = partial_eval(f, ObscuredScene::from_string("011**0"));
  ASSERT_FALSE(r.is_witnessed());
  // Residual is [R4 + R5 >= 2].
  EXPECT_EQ(r.formula().bound(), 2);
  EXPECT_EQ(r.formula().atoms(), (std::vector<AtomId>{3, 4}));
}

TEST(PartialEval, ObscuredAtomsAndNegation) {
  EXPECT_FALSE(partial_eval(Formula::atom(0), ObscuredScene::from_string("*")).is_witnessed());
  EXPECT_TRUE(partial_eval(Formula::negate(Formula::atom(0)), ObscuredScene::from_string("0")).witnessed_true());
  // Atoms beyond the scene are hidden.
  EXPECT_FALSE(partial_eval(Formula::atom(4), ObscuredScene::from_string("11")).is_witnessed());
  const auto r = partial_eval(Formula::negate(Formula::atom(0)), ObscuredScene::from_string("*"));
  ASSERT_FALSE(r.is_witnessed());
  EXPECT_EQ(r.formula().kind(), Formula::Kind::Not);
}

TEST(PartialEval, EmptyConnectives) {
  const ObscuredScene rho(2);
  EXPECT_TRUE(partial_eval(Formula::conj({}), rho).witnessed_true());
  EXPECT_TRUE(partial_eval(Formula::disj({}), rho).witnessed_false());
}

TEST(PartialEval, RandomSoundnessMonotonicityResidual) {
  SplitMix64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + gen::below(rng, 8);
    const Formula f = gen::random_formula(rng, n, 3);
    const ObscuredScene rho = gen::random_obscured(rng, n);
    const auto r = partial_eval(f, rho);
    for (const Scene& x : gen::completions(rho)) {
      const bool v = eval(f, x);
      if (r.witnessed_true()) ASSERT_TRUE(v);
      if (r.witnessed_false()) ASSERT_FALSE(v);
      if (!r.is_witnessed()) ASSERT_EQ(eval(r.formula(), x), v);
    }
    if (!r.is_witnessed())
      for (AtomId a : r.formula().atoms()) ASSERT_EQ(rho[a], Tri::Unknown);
    // Revealing one hidden atom keeps a witnessed value.
    ObscuredScene finer = rho;
    for (AtomId a = 0; a < n; ++a)
      if (finer[a] == Tri::Unknown) {
        finer.set(a, (rng() & 1) ? Tri::True : Tri::False);
        break;
      }
    const auto r2 = partial_eval(f, finer);
    if (r.witnessed_true()) ASSERT_TRUE(r2.witnessed_true());
    if (r.witnessed_false()) ASSERT_TRUE(r2.witnessed_false());
  }
}

TEST(Scenes, ParsingAndConsistency) {
  const auto rho = ObscuredScene::from_string("1*0");
  EXPECT_EQ(rho.hidden_count(), 1u);
  EXPECT_TRUE(rho.consistent_with(Scene::from_string("110")));
  EXPECT_FALSE(rho.consistent_with(Scene::from_string("111")));
  EXPECT_TRUE(ObscuredScene::from_string("110").refines(rho));
  EXPECT_EQ(rho.to_string(), "1*0");
  EXPECT_THROW(ObscuredScene::from_string("1x0"), std::invalid_argument);
  EXPECT_THROW(Scene::from_string("1*0"), std::invalid_argument);
  ObscuredScene r2 = rho;
  EXPECT_THROW(r2.hide(7), std::out_of_range);
}

TEST(AtomTable, InternIsStable) {
  AtomTable t;
  EXPECT_EQ(t.intern("p"), 0u);
  EXPECT_EQ(t.intern("q"), 1u);
  EXPECT_EQ(t.intern("p"), 0u);
  EXPECT_EQ(t.name(1), "q");
  EXPECT_FALSE(t.find("r").has_value());
}

TEST(FormulaText, ParsesAndPrints) {
  AtomTable t;
  const Formula f = parse_formula("thr(4; 5*R(x1), R(x2), -1*R(x6))", t);
  EXPECT_EQ(f.bound(), 4);
  EXPECT_EQ(f.terms().size(), 3u);
  EXPECT_EQ(t.name(0), "R(x1)");
  EXPECT_EQ(to_string(f, t), "thr(4; 5*R(x1), 1*R(x2), -1*R(x6))");

  const Formula g = parse_formula("a & b -> ~c | (a <-> b)", t);
  EXPECT_EQ(to_string(g, t), "thr(0; -1*(a & b), 1*(~c | (thr(0; -1*a, 1*b) & thr(0; -1*b, 1*a))))");
}

TEST(FormulaText, RandomRoundTrip) {
  SplitMix64 rng(5);
  AtomTable t;
  for (int i = 0; i < 8; ++i) t.intern("p" + std::to_string(i));
  for (int i = 0; i < 500; ++i) {
    const Formula f = gen::random_formula(rng, 8, 3);
    const std::string text = to_string(f, t);
    const Formula g = parse_formula(text, std::as_const(t));
    ASSERT_EQ(f, g) << text;
    ASSERT_EQ(to_string(g, t), text);
  }
}

TEST(FormulaText, Errors) {
  AtomTable t;
  EXPECT_THROW(parse_formula("a &", t), ParseError);
  EXPECT_THROW(parse_formula("thr(1; 0*a)", t), ParseError);
  EXPECT_THROW(parse_formula("(a", t), ParseError);
  EXPECT_THROW(parse_formula("unknown", std::as_const(t)), ParseError);
}
