#include <gtest/gtest.h>

#include <cmath>

#include "bsdyn/catalog.hpp"
#include "bsdyn/estimators.hpp"

using namespace bsdyn;

namespace {

std::vector<catalog::ActionSpec> all_specs() {
  return {{"standard-line", 2},      {"standard-line", 5},        {"standard-torus", 2},
          {"standard-torus", 3},     {"product", 2, 0, "rot:1/3"}, {"product", 3, 0, "rot:golden"},
          {"product", 2, 0, "denjoy:golden:12:0.5"}, {"periodic-circle", 3}, {"periodic-circle", 5},
          {"periodic-torus", 3},     {"perturbed-torus", 2, 0.01}, {"morse-smale", 2},
          {"morse-smale", 4},        {"nonfaithful-circle", 3, 0, "rot:ln2"}};
}

}  // namespace

TEST(Catalog, EveryEntrySatisfiesTheRelation) {
  for (const auto& s : all_specs()) {
    const auto a = catalog::build(s);
    const RelationResidual r = std::visit([](const auto& x) { return x.residual; }, a);
    EXPECT_LT(r.residual, 1e-8) << s.id << " n=" << s.n;
    EXPECT_LT(r.iterated_residual, 1e-6) << s.id << " n=" << s.n;
  }
}

TEST(Catalog, FaithfulnessEvidence) {
  for (const auto& s : all_specs()) {
    const auto a = catalog::build(s);
    const double e = std::visit([](const auto& x) { return faithfulness_evidence(x); }, a);
    if (s.id == "nonfaithful-circle") {
      EXPECT_LT(e, 1e-12);
    } else {
      EXPECT_GT(e, 1e-3) << s.id;
    }
  }
}

TEST(Catalog, RegistryListsBuildableIds) {
  for (const auto& e : catalog::entries()) {
    catalog::ActionSpec s{e.id, 3, 0.0, "rot:1/3"};
    EXPECT_NO_THROW(catalog::build(s)) << e.id;
  }
  EXPECT_THROW(catalog::build({"no-such-id"}), std::invalid_argument);
}

TEST(KSpec, ParsesSupportedForms) {
  EXPECT_DOUBLE_EQ(KSpec::parse("rot:1/3").alpha, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(KSpec::parse("rot:0.25").alpha, 0.25);
  EXPECT_DOUBLE_EQ(KSpec::parse("rot:ln2").alpha, std::log(2.0));
  EXPECT_DOUBLE_EQ(KSpec::parse("rot:ln5").alpha, std::log(5.0) - 1.0);
  EXPECT_DOUBLE_EQ(KSpec::parse("rot:golden").alpha, golden_fraction());
  const KSpec d = KSpec::parse("denjoy:0.3:7:0.25");
  EXPECT_EQ(d.kind, KSpec::Kind::Denjoy);
  EXPECT_EQ(d.depth, 7);
  EXPECT_DOUBLE_EQ(d.gap_ratio, 0.25);
  EXPECT_EQ(KSpec::parse("denjoy").depth, 12);
}

TEST(KSpec, RejectsMalformed) {
  for (const char* bad : {"rot", "rot:", "rot:1/0", "rot:abc", "rot:0.5x", "spin:1", "denjoy:1:2:3:4", "denjoy:0.3:5:2"}) {
    EXPECT_ANY_THROW(catalog::product_action(2, KSpec::parse(bad))) << bad;
  }
}

TEST(StandardLine, FixedPoints) {
  const auto a = catalog::standard_line(3);
  EXPECT_DOUBLE_EQ(a.f(chart_infinity()), chart_infinity());
  EXPECT_DOUBLE_EQ(a.h(chart_infinity()), chart_infinity());
  EXPECT_NEAR(a.h(chart(0.0)), chart(0.0), 1e-15);
  EXPECT_NEAR(a.h(chart(1.0)), chart(3.0), 1e-15);
  EXPECT_THROW(catalog::standard_line(1), std::invalid_argument);
}

TEST(StandardLine, ShortWordOrbitIsDense) {
  // Breadth-first closure of chart(0) under words of length <= 8.
  const auto a = catalog::standard_line(2);
  const CircleLift fi = inverse(a.f), hi = inverse(a.h);
  std::vector<double> layer{chart(0.0)}, all = layer;
  for (int len = 1; len <= 8; ++len) {
    std::vector<double> next;
    for (double x : layer)
      for (const CircleLift* g : {&a.f, &fi, &a.h, &hi}) next.push_back(frac((*g)(x)));
    all.insert(all.end(), next.begin(), next.end());
    layer.swap(next);
  }
  // Each of 200 arcs has its centre within two arc widths of the orbit.
  const double eps = 2.0 / 200;
  for (int k = 0; k < 200; ++k) {
    const double c = (k + 0.5) / 200;
    double best = 1.0;
    for (double x : all) best = std::min(best, circle_dist(x, c));
    EXPECT_LT(best, eps) << "arc " << k;
  }
}

TEST(StandardTorus, FixedCircleAndInvariantCircles) {
  const auto a = catalog::standard_torus(2);
  for (int j = 0; j < 64; ++j) {
    const double t = j / 64.0;
    EXPECT_EQ(torus_dist(a.f({chart_infinity(), t}), {chart_infinity(), t}), 0.0);
    EXPECT_NEAR(circle_dist(a.h({chart_infinity(), t})[0], chart_infinity()), 0.0, 1e-15);
    EXPECT_NEAR(circle_dist(a.h({chart(0.0), t})[0], chart(0.0)), 0.0, 1e-15);
    EXPECT_NEAR(circle_delta(t, a.h({chart_infinity(), t})[1]), circle_delta(0.0, std::log(2.0)), 1e-15);
  }
  // Off C1, f0 moves points.
  EXPECT_GT(torus_dist(a.f({0.3, 0.1}), {0.3, 0.1}), 1e-3);
}

TEST(ProductAction, LinearPartsAreIdentity) {
  const auto a = catalog::product_action(3, KSpec::parse("denjoy"));
  EXPECT_EQ(a.f.linear_part, IntMatrix2::identity());
  EXPECT_EQ(a.h.linear_part, IntMatrix2::identity());
  EXPECT_EQ(a.n, 3);
}

TEST(PeriodicCircle, NoFixedPointButPeriodTwoPoints) {
  const auto a = catalog::periodic_circle_example(3);
  double min_disp = 1.0;
  for (double x : SpaceTraits<CircleLift>::grid(10000)) min_disp = std::min(min_disp, circle_dist(a.f(x), x));
  EXPECT_GT(min_disp, 1e-3);
  // Block endpoints 0 and 1/2 are swapped by f, so both are fixed by f^2.
  for (double x : {0.0, 0.5}) EXPECT_LT(circle_dist(a.f(a.f(x)), x), 1e-12);
  EXPECT_NEAR(circle_dist(a.f(0.0), 0.5), 0.0, 1e-15);
}

TEST(PeriodicCircle, RotationPartHasOrderNMinusOne) {
  for (int n : {3, 4, 6}) {
    const int m = n - 1;
    const CircleLift R = rotation(1.0 / m);
    double x = 0.123;
    for (int i = 0; i < m; ++i) x = R(x);
    EXPECT_NEAR(x, 0.123 + 1.0, 1e-12) << n;
    const auto a = catalog::periodic_circle_example(n);
    const auto e = rotation_number(a.f, 20000);
    ASSERT_TRUE(e.rational_witness) << n;
    EXPECT_EQ(e.rational_witness->q, m);
  }
}

TEST(PeriodicCircle, RejectsNTwo) {
  try {
    catalog::periodic_circle_example(2);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("n >= 3"), std::string::npos);
  }
}

TEST(PeriodicTorus, NoFixedPointButFSquaredFixes) {
  const auto a = catalog::periodic_torus_example(3);
  double min_disp = 1.0;
  for (const auto& x : SpaceTraits<TorusLift>::grid(100)) min_disp = std::min(min_disp, torus_dist(a.f(x), x));
  EXPECT_GT(min_disp, 1e-3);
  for (const Vec2 p : {Vec2{chart_infinity(), 0.0}, Vec2{chart_infinity(), 0.5}})
    EXPECT_LT(torus_dist(a.f(a.f(p)), p), 1e-12);
  EXPECT_THROW(catalog::periodic_torus_example(2), std::invalid_argument);
}

TEST(PerturbedTorus, ZeroEpsIsStandard) {
  const auto p = catalog::perturbed_torus(2, 0.0), s = catalog::standard_torus(2);
  for (const auto& x : SpaceTraits<TorusLift>::grid(10)) EXPECT_EQ(torus_dist(p.h(x), s.h(x)), 0.0);
}

TEST(PerturbedTorus, HalfRotationGivesFiniteOrbits) {
  const double eps = 0.5 - catalog::ln_mod1(2);
  const auto a = catalog::perturbed_torus(2, eps);
  const auto r = finite_bs_orbit(a, Vec2{chart_infinity(), 0.2});
  ASSERT_TRUE(r.finite);
  EXPECT_EQ(r.points.size(), 2u);
}

TEST(PerturbedTorus, SmallEpsHasNoWitness) {
  const auto a = catalog::perturbed_torus(2, 1e-3);
  const CircleLift r{[h = a.h](double t) { return h(Vec2{chart_infinity(), t})[1]; }, {}, "h|C1", {}};
  const auto e = rotation_number(r, 100000, 64);
  EXPECT_FALSE(e.rational_witness.has_value());
  EXPECT_NEAR(e.value, catalog::ln_mod1(2) + 1e-3, 1e-4);
}

TEST(MorseSmale, FixedPoints) {
  const auto a = catalog::morse_smale_example(2);
  const Vec2 inf{chart_infinity(), chart_infinity()}, origin{chart(0.0), chart(0.0)};
  EXPECT_EQ(torus_dist(a.f(inf), inf), 0.0);
  EXPECT_EQ(torus_dist(a.h(inf), inf), 0.0);
  EXPECT_LT(torus_dist(a.h(origin), origin), 1e-15);
  EXPECT_GT(torus_dist(a.f(origin), origin), 1e-2);
  const auto rs = rotation_set(a.f);
  ASSERT_TRUE(rs.is_point);
  EXPECT_LT(norm(*rs.point), 1e-3);
}

TEST(Nonfaithful, ResidualRoundoffAndOrbitIsKOrbit) {
  const auto a = catalog::nonfaithful_circle(KSpec::parse("rot:1/5"));
  EXPECT_LT(a.residual.residual, 1e-15);
  const auto r = finite_bs_orbit(a, 0.05);
  ASSERT_TRUE(r.finite);
  ASSERT_EQ(r.points.size(), 5u);
  for (const double p : r.points) {
    const double k = frac(p - 0.05) * 5;
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
  // b acts trivially: only the a-exponent sum matters.
  const double x = 0.3;
  EXPECT_NEAR(evaluate(Word::parse("a b^7 a^-3 b a"), a, x), evaluate(Word::parse("a^-1"), a, x), 1e-12);
}

TEST(Conjugated, PreservesRelation) {
  const auto a = catalog::conjugated(catalog::morse_smale_example(2), catalog::random_bump_diffeo(1, 1e-3));
  EXPECT_LT(a.residual.residual, 1e-8);
}

TEST(RandomBump, SeedDeterminesMap) {
  const auto p = catalog::random_bump_diffeo(42, 1e-3), q = catalog::random_bump_diffeo(42, 1e-3);
  const auto r = catalog::random_bump_diffeo(43, 1e-3);
  const Vec2 x{0.4, 0.6};
  EXPECT_EQ(p(x), q(x));
  EXPECT_LE(sup_displacement(p), 1e-3 + 1e-15);
  bool differs = false;
  for (const auto& y : SpaceTraits<TorusLift>::grid(20)) differs = differs || !(p(y) == r(y));
  EXPECT_TRUE(differs);
}
