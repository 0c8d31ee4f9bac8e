#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "bsdyn/gl2z.hpp"

using namespace bsdyn;

namespace {

// Independent order oracle: plain repeated multiplication, no shortcuts.
std::optional<int> order_by_powering(const IntMatrix2& A, int limit) {
  IntMatrix2 P = A;
  for (int k = 1; k <= limit; ++k) {
    if (P == IntMatrix2::identity()) return k;
    P = P * A;
  }
  return std::nullopt;
}

std::vector<IntMatrix2> conjugators_in_box(const IntMatrix2& A, const IntMatrix2& B, int r) {
  std::vector<IntMatrix2> out;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = -r; c <= r; ++c)
        for (int d = -r; d <= r; ++d) {
          const IntMatrix2 X{a, b, c, d};
          if (X.is_unimodular() && X * B == A * X) out.push_back(X);
        }
  return out;
}

// Random unimodular matrix as a short product of elementary generators.
IntMatrix2 random_unimodular(std::mt19937_64& rng, int len) {
  const IntMatrix2 gens[] = {{1, 1, 0, 1}, {1, -1, 0, 1}, {1, 0, 1, 1}, {1, 0, -1, 1}, {0, 1, 1, 0}, {-1, 0, 0, 1}};
  std::uniform_int_distribution<int> pick(0, 5);
  IntMatrix2 M = IntMatrix2::identity();
  for (int i = 0; i < len; ++i) M = M * gens[pick(rng)];
  return M;
}

}  // namespace

TEST(FiniteOrder, Exemplars) {
  EXPECT_EQ(finite_order(IntMatrix2::identity()), 1);
  EXPECT_EQ(finite_order(-IntMatrix2::identity()), 2);
  EXPECT_EQ(finite_order({0, 1, -1, 0}), 4);
  EXPECT_EQ(finite_order({0, -1, 1, 1}), 6);
  EXPECT_EQ(finite_order({0, -1, 1, -1}), 3);
  EXPECT_FALSE(finite_order({1, 1, 0, 1}).has_value());
}

TEST(FiniteOrder, OrderSixFrozenByPowering) {
  const IntMatrix2 A{0, -1, 1, 1};
  EXPECT_EQ(order_by_powering(A, 12), 6);
  for (int j = 1; j < 6; ++j) EXPECT_NE(power(A, j), IntMatrix2::identity()) << j;
}

TEST(FiniteOrder, ParabolicPowers) {
  const IntMatrix2 P{1, 1, 0, 1};
  for (unsigned k = 1; k <= 20; ++k) EXPECT_EQ(power(P, k), (IntMatrix2{1, static_cast<std::int64_t>(k), 0, 1}));
}

TEST(FiniteOrder, RejectsNonUnimodular) {
  EXPECT_THROW(finite_order({2, 0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(finite_order({0, 0, 0, 0}), std::invalid_argument);
}

TEST(FiniteOrder, AgreesWithPoweringOnRandomUnimodular) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 400; ++i) {
    const IntMatrix2 A = random_unimodular(rng, 1 + i % 9);
    const auto got = finite_order(A);
    const auto oracle = order_by_powering(A, 12);
    EXPECT_EQ(got, oracle) << A.to_string();
    if (got) {
      EXPECT_TRUE(*got == 1 || *got == 2 || *got == 3 || *got == 4 || *got == 6);
      EXPECT_EQ(power(A, static_cast<unsigned>(*got)), IntMatrix2::identity());
    }
  }
}

TEST(Conjugacy, SelfConjugacyGivesIdentity) {
  for (const IntMatrix2& A : {IntMatrix2{2, 1, 1, 1}, IntMatrix2{0, 1, -1, 0}, IntMatrix2{1, 3, 0, 1}}) {
    const auto r = conjugate_in_gl2z(A, A, 5);
    ASSERT_TRUE(r.found());
    EXPECT_EQ(*r.conjugator, IntMatrix2::identity());
  }
}

TEST(Conjugacy, ParabolicAndItsSquareAreNotConjugate) {
  const IntMatrix2 A{1, 1, 0, 1};
  EXPECT_FALSE(conjugate_in_gl2z(A, A * A, 50).found());
}

TEST(Conjugacy, RotationByQuarterTurnBruteForceOracle) {
  const IntMatrix2 A{0, 1, -1, 0}, B{0, -1, 1, 0};
  const auto brute = conjugators_in_box(A, B, 3);
  ASSERT_FALSE(brute.empty());
  // Frozen from the brute-force run: exactly the four reflections below.
  std::vector<IntMatrix2> expected{{-1, 0, 0, 1}, {0, -1, -1, 0}, {0, 1, 1, 0}, {1, 0, 0, -1}};
  auto sorted = brute;
  auto key = [](const IntMatrix2& m) { return std::array{m.a, m.b, m.c, m.d}; };
  std::sort(sorted.begin(), sorted.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  EXPECT_EQ(sorted, expected);

  const auto r = conjugate_in_gl2z(A, B, 10);
  ASSERT_TRUE(r.found());
  EXPECT_EQ(*r.conjugator, (IntMatrix2{1, 0, 0, -1}));
  EXPECT_NE(std::find(brute.begin(), brute.end(), *r.conjugator), brute.end());
}

TEST(Conjugacy, FoundConjugatorsSatisfyIdentityExactly) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 60; ++i) {
    const IntMatrix2 B = random_unimodular(rng, 1 + i % 5);
    const IntMatrix2 X = random_unimodular(rng, 1 + i % 4);
    const IntMatrix2 A = X * B * X.inverse();
    const auto r = conjugate_in_gl2z(A, B, 10);
    ASSERT_TRUE(r.found()) << A.to_string() << " ~ " << B.to_string();
    EXPECT_TRUE(r.conjugator->is_unimodular());
    EXPECT_EQ(*r.conjugator * B * r.conjugator->inverse(), A);
  }
}

TEST(Conjugacy, RejectsNonUnimodular) {
  EXPECT_THROW(conjugate_in_gl2z({2, 0, 0, 1}, IntMatrix2::identity(), 3), std::invalid_argument);
}

TEST(LinearCompatibility, Examples) {
  EXPECT_TRUE(bs_linear_compatible(IntMatrix2::identity(), {2, 1, 1, 1}, 2));
  EXPECT_FALSE(bs_linear_compatible({1, 1, 0, 1}, {2, 1, 1, 1}, 2));
  EXPECT_TRUE(bs_linear_compatible(-IntMatrix2::identity(), IntMatrix2::identity(), 3));
  // The reflection inverts the parabolic: A_h P A_h^-1 = P^-1, not P^2.
  EXPECT_FALSE(bs_linear_compatible({1, 1, 0, 1}, {-1, 0, 0, 1}, 2));
  EXPECT_THROW(bs_linear_compatible({2, 0, 0, 1}, IntMatrix2::identity(), 2), std::invalid_argument);
}

TEST(AffineFixedPoint, Examples) {
  AffineMapQ2 half{{Rational(1, 2), Rational(0), Rational(0), Rational(1, 2)}, {Rational(0), Rational(0)}};
  const auto p = affine_fixed_point(half);
  ASSERT_TRUE(p);
  EXPECT_EQ((*p)[0], Rational(0));
  EXPECT_EQ((*p)[1], Rational(0));

  const auto B = AffineMapQ2::bs_rotation_map(IntMatrix2::identity(), {1, 0}, 2);
  const auto q = affine_fixed_point(B);
  ASSERT_TRUE(q);
  EXPECT_EQ((*q)[0], Rational(1));
  EXPECT_EQ((*q)[1], Rational(0));

  AffineMapQ2 shift{RationalMatrix2::from(IntMatrix2::identity()), {Rational(1), Rational(0)}};
  EXPECT_FALSE(affine_fixed_point(shift).has_value());
}

TEST(AffineFixedPoint, FixedPointsAreExactAndDeterminantIsInverseNSquared) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> qd(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const IntMatrix2 Ah = random_unimodular(rng, 1 + i % 7);
    const int n = 2 + i % 4;
    const auto B = AffineMapQ2::bs_rotation_map(Ah, {qd(rng), qd(rng)}, n);
    const Rational det = B.linear.det();
    EXPECT_EQ(det, Rational(Ah.det(), n * n));
    const auto v = affine_fixed_point(B);
    ASSERT_TRUE(v);  // |det| < 1 and the eigenvalues have modulus < 1, so I - L is invertible
    const auto w = B(*v);
    EXPECT_EQ(w[0], (*v)[0]);
    EXPECT_EQ(w[1], (*v)[1]);
  }
}

TEST(IntMatrix2, LinearPartConstructorEnforcesUnimodularity) {
  EXPECT_NO_THROW(make_linear_part(2, 1, 1, 1));
  EXPECT_THROW(make_linear_part(2, 0, 0, 2), std::invalid_argument);
}
