#include <gtest/gtest.h>

#include <random>

#include "bsdyn/catalog.hpp"
#include "bsdyn/torus.hpp"

using namespace bsdyn;

namespace {

double periodicity_defect(const TorusLift& F) {
  double worst = 0.0;
  const std::array<std::array<long, 2>, 4> shifts{{{1, 0}, {0, 1}, {-2, 3}, {5, -1}}};
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      const Vec2 x{(i + 0.3) / 12, (j + 0.6) / 12};
      for (const auto& P : shifts) {
        const Vec2 Pv{static_cast<double>(P[0]), static_cast<double>(P[1])};
        worst = std::max(worst, norm(F(x + Pv) - F(x) - mat_apply(F.linear_part, Pv)));
      }
    }
  return worst;
}

RotationSetParams small_params() {
  RotationSetParams p;
  p.grid = 8;
  p.iterates = 4000;
  p.tail = 100;
  return p;
}

}  // namespace

TEST(TorusLift, PeriodicityHoldsForComposedAndInvertedLifts) {
  const TorusLift bump = catalog::random_bump_diffeo(3, 0.05);
  const TorusLift cat = linear_map({2, 1, 1, 1});
  const auto st = catalog::standard_torus(2);
  const std::vector<TorusLift> lifts{bump, inverse(bump), compose(cat, bump), inverse(compose(cat, bump)),
                                     st.f, st.h, inverse(st.h), conjugate(compose(cat, bump), st.f)};
  for (const auto& F : lifts) EXPECT_LT(periodicity_defect(F), 1e-10) << F.label;
}

TEST(TorusLift, LinearPartsMultiply) {
  const TorusLift A = linear_map({2, 1, 1, 1}), B = linear_map({0, -1, 1, 0});
  EXPECT_EQ(compose(A, B).linear_part, (IntMatrix2{2, 1, 1, 1} * IntMatrix2{0, -1, 1, 0}));
  EXPECT_EQ(inverse(A).linear_part, (IntMatrix2{2, 1, 1, 1}).inverse());
  EXPECT_THROW(linear_map({2, 0, 0, 1}), std::invalid_argument);
}

TEST(TorusLift, NumericalInverseOfNonExactLift) {
  TorusLift F = compose(linear_map({2, 1, 1, 1}), catalog::random_bump_diffeo(9, 0.05));
  F.exact_inverse = nullptr;
  const TorusLift G = inverse(F);
  for (int i = 0; i < 10; ++i) {
    const Vec2 x{0.1 * i, 0.37 + 0.05 * i};
    EXPECT_LT(norm(F(G(x)) - x), 1e-12);
  }
}

TEST(RotationVector, Translation) {
  const auto r = rotation_vector(translation({0.25, 0.0}), {0.3, 0.4}, 1000);
  EXPECT_NEAR(r.value[0], 0.25, 1e-15);
  EXPECT_NEAR(r.value[1], 0.0, 1e-15);
}

TEST(RotationVector, StandardF0IsZero) {
  const auto f0 = catalog::standard_torus(2).f;
  for (const Vec2 x : {Vec2{0.3, 0.1}, Vec2{0.77, 0.5}, Vec2{0.5, 0.9}}) {
    const auto r = rotation_vector(f0, x, 10000);
    EXPECT_LT(norm(r.value), 1e-3);
  }
}

TEST(RotationVector, PowerScales) {
  const auto F = compose(translation({0.13, 0.31}), catalog::random_bump_diffeo(4, 0.02));
  const auto F3 = compose(F, compose(F, F));
  const Vec2 x{0.2, 0.6};
  const auto r1 = rotation_vector(F, x, 9000), r3 = rotation_vector(F3, x, 3000);
  EXPECT_LT(norm(r3.value - 3.0 * r1.value), r3.error_bound + 3 * r1.error_bound + 1e-12);
}

TEST(RotationVector, RejectsNonIdentityLinearPart) {
  EXPECT_THROW(rotation_vector(linear_map({2, 1, 1, 1}), {0, 0}, 10), std::invalid_argument);
  EXPECT_THROW(rotation_set(linear_map({0, 1, -1, 0})), std::invalid_argument);
}

TEST(RotationSet, Translation) {
  const auto e = rotation_set(translation({0.25, 1.0 / 3.0}), small_params());
  ASSERT_TRUE(e.is_point);
  EXPECT_NEAR((*e.point)[0], 0.25, 1e-6);
  EXPECT_NEAR((*e.point)[1], 1.0 / 3.0, 1e-6);
}

TEST(RotationSet, StandardF0IsOrigin) {
  const auto e = rotation_set(catalog::standard_torus(2).f);
  ASSERT_TRUE(e.is_point);
  EXPECT_LT(norm(*e.point), 1e-3);
  // A lifted fixed point contributes a sample at the origin.
  double closest = 1.0;
  for (const auto& s : e.samples) closest = std::min(closest, norm(s));
  EXPECT_LT(closest, e.error_bound);
}

TEST(RotationSet, IntegerShiftTranslatesEstimate) {
  const auto F = compose(translation({0.1, 0.2}), catalog::random_bump_diffeo(2, 0.03));
  const auto a = rotation_set(F, small_params());
  const auto b = rotation_set(shifted(F, {2, -1}), small_params());
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_NEAR(b.samples[i][0] - a.samples[i][0], 2.0, 1e-9);
    EXPECT_NEAR(b.samples[i][1] - a.samples[i][1], -1.0, 1e-9);
  }
}

TEST(RotationSet, HullContainsSamplesAndPointFlagMatchesDiameter) {
  const auto F = compose(translation({0.1, 0.2}), catalog::random_bump_diffeo(6, 0.05));
  const auto e = rotation_set(F, small_params());
  EXPECT_EQ(e.is_point, e.diameter < kPointTol);
  const auto& h = e.hull;
  for (const auto& s : e.samples) {
    if (h.size() < 3) break;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const Vec2& a = h[i];
      const Vec2& b = h[(i + 1) % h.size()];
      const double cross = (b[0] - a[0]) * (s[1] - a[1]) - (b[1] - a[1]) * (s[0] - a[0]);
      EXPECT_GE(cross, -1e-12);
    }
  }
}

TEST(RotationSet, RejectsBadParameters) {
  RotationSetParams p;
  p.tail = 0;
  EXPECT_THROW(rotation_set(translation({0, 0}), p), std::invalid_argument);
}

TEST(ConvexHull, Square) {
  const auto h = convex_hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0, 0}});
  EXPECT_EQ(h.size(), 4u);
  EXPECT_NEAR(diameter(h), std::sqrt(2.0), 1e-15);
}

TEST(ConjugationCheck, SwapIsExact) {
  const auto r = conjugate_rotation_set_check(translation({0.25, 0.5}), linear_map({0, 1, 1, 0}), small_params());
  ASSERT_TRUE(r.conjugated.point);
  EXPECT_NEAR((*r.conjugated.point)[0], 0.5, 1e-9);
  EXPECT_NEAR((*r.conjugated.point)[1], 0.25, 1e-9);
  EXPECT_TRUE(r.passed);
}

TEST(ConjugationCheck, SmallPeriodicPerturbation) {
  const auto r =
      conjugate_rotation_set_check(translation({0.25, 0.0}), catalog::random_bump_diffeo(8, 0.02), small_params());
  EXPECT_LT(r.distance, 1e-3);
  EXPECT_TRUE(r.passed);
}

TEST(ConjugationCheck, StandardPairBothOrigin) {
  const auto a = catalog::standard_torus(2);
  const auto r = conjugate_rotation_set_check(a.f, a.h, small_params());
  EXPECT_TRUE(r.passed);
  EXPECT_LT(norm(r.conjugated.point.value_or(Vec2{1, 1})), 1e-3);
}

TEST(Constraint, OriginConsistent) {
  const auto r = bs_rotation_constraint(RationalVector2{Rational(0), Rational(0)}, IntMatrix2::identity(), 2);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(r.Q, (std::array<std::int64_t, 2>{0, 0}));
}

TEST(Constraint, IdentityLinearPartForcesLattice) {
  // (n - 1) rho must be integral.
  for (int n : {2, 3, 4}) {
    for (int num = -6; num <= 6; ++num) {
      const RationalVector2 rho{Rational(num, 6), Rational(1, n - 1)};
      const bool expected = ((n - 1) * num) % 6 == 0;
      EXPECT_EQ(bs_rotation_constraint(rho, IntMatrix2::identity(), n).consistent, expected) << n << " " << num;
    }
  }
}

TEST(Constraint, EstimateSnapsToLattice) {
  const auto r = bs_rotation_constraint(Vec2{0.001, -0.0004}, IntMatrix2::identity(), 3);
  EXPECT_TRUE(r.consistent);
  EXPECT_EQ(r.Q, (std::array<std::int64_t, 2>{0, 0}));
  ASSERT_TRUE(r.fixed_point);
  EXPECT_EQ((*r.fixed_point)[0], Rational(0));
}

TEST(Constraint, DeterminantIsDetOverNSquaredForCatalog) {
  for (const auto& a : {catalog::standard_torus(2), catalog::standard_torus(3), catalog::morse_smale_example(2),
                        catalog::periodic_torus_example(3)}) {
    const auto r = bs_rotation_constraint(Vec2{0.0, 0.0}, a.h.linear_part, a.n);
    EXPECT_EQ(r.det_linear, Rational(a.h.linear_part.det(), a.n * a.n)) << a.label;
    EXPECT_EQ(abs(r.det_linear), Rational(1, a.n * a.n));
  }
}
