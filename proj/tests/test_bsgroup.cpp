#include <gtest/gtest.h>

#include <random>

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/catalog.hpp"

using namespace bsdyn;

namespace {

// Exact oracle: a acts as x -> n x, b as x -> x + 1; the word is a composition
// with its rightmost letter applied first. (scale, shift) represents x -> s x + t.
struct Affine {
  Rational s{1}, t{0};
};

Affine exact_affine(const Word& w, int n) {
  Affine acc;  // composition of the letters read so far, from the right
  const auto& runs = w.runs();
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    Affine g;
    if (it->letter == 'a') {
      for (long long i = 0; i < std::llabs(it->exponent); ++i) g.s *= it->exponent > 0 ? Rational(n) : Rational(1, n);
    } else {
      g.t = Rational(it->exponent);
    }
    acc = {g.s * acc.s, g.s * acc.t + g.t};
  }
  return acc;
}

Word random_word(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len), letter(0, 3);
  Word w;
  const int L = len(rng);
  for (int i = 0; i < L; ++i) {
    const int c = letter(rng);
    w.append({c < 2 ? 'a' : 'b', c % 2 ? -1 : 1});
  }
  return w;
}

}  // namespace

TEST(Word, ParseAndPrint) {
  const Word w = Word::parse("a^-2 b^3 a");
  ASSERT_EQ(w.runs().size(), 3u);
  EXPECT_EQ(w.runs()[0], (bsdyn::Run{'a', -2}));
  EXPECT_EQ(w.runs()[1], (bsdyn::Run{'b', 3}));
  EXPECT_EQ(w.to_string(), "a^-2 b^3 a");
  EXPECT_EQ(Word::parse("A b B B a").to_string(), "a^-1 b^-1 a");
  EXPECT_TRUE(Word::parse("A b B a").empty());
  EXPECT_TRUE(Word::parse("  ").empty());
}

TEST(Word, AdjacentRunsMergeAndCancel) {
  EXPECT_EQ(Word::parse("a a^2 b").to_string(), "a^3 b");
  EXPECT_TRUE(Word::parse("a a^-1").empty());
  EXPECT_EQ(Word::parse("b a a^-1 b").to_string(), "b^2");
}

TEST(Word, ParseErrors) {
  EXPECT_THROW(Word::parse("c"), std::invalid_argument);
  EXPECT_THROW(Word::parse("a^"), std::invalid_argument);
  EXPECT_THROW(Word::parse("a^2x"), std::invalid_argument);
  EXPECT_THROW(Word::parse("ab"), std::invalid_argument);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(Word::parse("a b a^-1"), 2).to_string(), "b^2");
  EXPECT_EQ(normalize(Word::parse("a b a^-1"), 5).to_string(), "b^5");
  EXPECT_TRUE(normalize(Word::parse("a a^-1"), 3).empty());
  EXPECT_EQ(normalize(Word::parse("a^-1 b a"), 2).to_string(), "a^-1 b a");
  EXPECT_EQ(normalize(Word::parse("a^-1 b^2 a"), 2).to_string(), "b");
}

TEST(Normalize, RejectsSmallN) { EXPECT_THROW(normalize(Word::parse("a"), 1), std::invalid_argument); }

TEST(Normalize, ShapeAndExactEqualityOnFaithfulAction) {
  std::mt19937_64 rng(17);
  for (int n : {2, 3}) {
    for (int i = 0; i < 500; ++i) {
      const Word w = random_word(rng, 12);
      const Word v = normalize(w, n);
      const auto& r = v.runs();
      // a^-p b^m a^q in that order.
      std::string shape;
      for (const auto& run : r) shape += run.letter == 'a' ? (run.exponent < 0 ? 'L' : 'R') : 'b';
      EXPECT_TRUE(shape == "" || shape == "L" || shape == "R" || shape == "b" || shape == "Lb" || shape == "bR" ||
                  shape == "LR" || shape == "LbR")
          << v.to_string();
      if (shape == "LbR") {
        EXPECT_NE(r[1].exponent % n, 0) << v.to_string();
      }
      const Affine x = exact_affine(w, n), y = exact_affine(v, n);
      EXPECT_EQ(x.s, y.s) << w.to_string();
      EXPECT_EQ(x.t, y.t) << w.to_string();
    }
  }
}

TEST(Evaluate, Examples) {
  const auto a = catalog::standard_line(2);
  EXPECT_DOUBLE_EQ(evaluate(Word{}, a, 0.37), 0.37);
  EXPECT_NEAR(evaluate(Word::parse("a^-1 b a"), a, chart(0.0)), chart(0.5), 1e-14);
  EXPECT_NEAR(evaluate(Word::parse("b^3 a^2"), a, chart(1.0)), chart(7.0), 1e-14);
  const auto a3 = catalog::standard_line(3);
  EXPECT_NEAR(evaluate(Word::parse("b^3 a^2"), a3, chart(1.0)), chart(12.0), 1e-14);
}

TEST(Evaluate, MatchesExactAffineOracle) {
  const auto act = catalog::standard_line(2);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> X(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const Word w = random_word(rng, 8);
    const Affine g = exact_affine(w, 2);
    const double x = X(rng);
    const double expected = boost::rational_cast<double>(g.s) * x + boost::rational_cast<double>(g.t);
    EXPECT_LT(circle_dist(evaluate(w, act, chart(x)), chart(expected)), 1e-9) << w.to_string();
  }
}

TEST(Evaluate, NormalFormEvaluatesTheSame) {
  const auto act = catalog::standard_line(2);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> pts(100);
  for (auto& p : pts) p = U(rng);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Word w = random_word(rng, 12);
    const Word v = normalize(w, 2);
    for (double x : pts) worst = std::max(worst, circle_dist(evaluate(w, act, x), evaluate(v, act, x)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Evaluate, ConcatenationIsComposition) {
  const auto act = catalog::standard_torus(2);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    const Word w1 = random_word(rng, 6), w2 = random_word(rng, 6);
    const Vec2 x{0.31, 0.72};
    const Vec2 lhs = evaluate(w1 * w2, act, x);
    const Vec2 rhs = evaluate(w1, act, evaluate(w2, act, x));
    EXPECT_LT(torus_dist(lhs, rhs), 1e-9);
  }
}

TEST(RelationResidual, StandardTorusTight) {
  const auto a = catalog::standard_torus(2);
  const auto r = relation_residual(a.f, a.h, 2, 100);
  EXPECT_LT(r.residual, 1e-9);
  EXPECT_LT(r.iterated_residual, 1e-6);
}

TEST(RelationResidual, IdentityFIsRoundoffOnly) {
  const auto r = relation_residual(identity_lift(), mobius_affine(3, 1), 4);
  EXPECT_LT(r.residual, 1e-15);
  EXPECT_LT(r.iterated_residual, 1e-14);
}

TEST(RelationResidual, PeriodicTorusExample) {
  const auto a = catalog::periodic_torus_example(3);
  EXPECT_LT(relation_residual(a.f, a.h, 3, 100).residual, 1e-8);
}

TEST(RelationResidual, DetectsWrongExponent) {
  const auto a = catalog::standard_line(2);
  EXPECT_GT(relation_residual(a.f, a.h, 3).residual, 1e-2);
  EXPECT_THROW(make_action(a.f, a.h, 3, "wrong"), std::runtime_error);
  EXPECT_THROW(make_action(a.f, a.h, 1, "small"), std::invalid_argument);
}

TEST(RelationResidual, HMapsFixedSetOfFIntoFixedSetOfFn) {
  // h0(C1) = C1 where C1 = fix(f0).
  const auto a = catalog::standard_torus(3);
  for (int j = 0; j < 50; ++j) {
    const Vec2 x{chart_infinity(), j / 50.0};
    const Vec2 y = a.h(x);
    EXPECT_NEAR(circle_dist(y[0], chart_infinity()), 0.0, 1e-15);
    EXPECT_LT(torus_dist(a.f(a.f(a.f(y))), y), 1e-15);
  }
}

TEST(FiniteOrbit, RationalFiberGivesThreePoints) {
  const auto a = catalog::product_action(2, KSpec::parse("rot:1/3"));
  const auto r = finite_bs_orbit(a, Vec2{chart_infinity(), 0.0});
  ASSERT_TRUE(r.finite);
  EXPECT_EQ(r.points.size(), 3u);
  const TorusLift fi = inverse(a.f), hi = inverse(a.h);
  for (const auto& p : r.points)
    for (const TorusLift* g : {&a.f, &fi, &a.h, &hi}) {
      double best = 1.0;
      for (const auto& q : r.points) best = std::min(best, torus_dist((*g)(p), q));
      EXPECT_LT(best, kMergeTol);
    }
}

TEST(FiniteOrbit, StandardTorusExceedsBound) {
  const auto r = finite_bs_orbit(catalog::standard_torus(2), Vec2{chart_infinity(), 0.0}, kMergeTol, 2000);
  EXPECT_FALSE(r.finite);
  EXPECT_EQ(r.points.size(), 2000u);
}

TEST(FiniteOrbit, MorseSmaleGlobalFixedPoint) {
  const auto r = finite_bs_orbit(catalog::morse_smale_example(2), Vec2{chart_infinity(), chart_infinity()});
  ASSERT_TRUE(r.finite);
  EXPECT_EQ(r.points.size(), 1u);
}

TEST(FiniteOrbit, CircleActionPeriodicPoints) {
  const auto a = catalog::nonfaithful_circle(KSpec::parse("rot:1/4"));
  const auto r = finite_bs_orbit(a, 0.1);
  ASSERT_TRUE(r.finite);
  EXPECT_EQ(r.points.size(), 4u);
}
