#pragma once

/**
 * @file acceptance.hpp
 * @brief The acceptance criteria as runnable checks, and reproduce_all.
 *
 * Every criterion returns a list of named checks with the measured value and
 * threshold. Reports split into a deterministic part (hashed for criterion 12)
 * and a metadata block holding timings.
 */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/catalog.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/estimators.hpp"
#include "bsdyn/experiments.hpp"
#include "bsdyn/gl2z.hpp"
#include "bsdyn/io.hpp"
#include "bsdyn/parallel.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn::acceptance {

inline constexpr double kTimeLimitSeconds = 60.0;
inline constexpr std::uint64_t kDefaultSeed = 20240521;

/// Accumulates named checks for one criterion.
class Checks {
 public:
  void expect(const std::string& name, bool ok, json detail = json::object()) {
    detail["name"] = name;
    detail["passed"] = ok;
    items_.push_back(std::move(detail));
    ok_ = ok_ && ok;
  }
  void less(const std::string& name, double value, double bound) {
    expect(name, value < bound, {{"value", value}, {"bound", bound}});
  }
  bool ok() const { return ok_; }
  const json& items() const { return items_; }

 private:
  json items_ = json::array();
  bool ok_ = true;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string error;
  json checks = json::array();
  double seconds = 0.0;
};

/// Rotation of the fibre on the circle u = 0 (the circle at infinity).
inline CircleLift restriction_to_infinity(const TorusLift& h) {
  return {[h](double t) { return h(Vec2{chart_infinity(), t})[1]; }, {}, "h|C1", {}};
}

/// All X with entries in [-r, r], det X = ±1 and X B = A X.
inline std::vector<IntMatrix2> brute_force_conjugators(const IntMatrix2& A, const IntMatrix2& B, int r) {
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

// ---------------------------------------------------------------------------
// Criteria

inline std::vector<catalog::ActionSpec> relation_suite() {
  return {{"standard-line", 2},       {"standard-line", 3},        {"standard-torus", 2},
          {"standard-torus", 3},      {"product", 2, 0.0, "rot:1/3"}, {"product", 2, 0.0, "rot:ln2"},
          {"product", 2, 0.0, "denjoy"}, {"periodic-circle", 3},   {"periodic-circle", 4},
          {"periodic-torus", 3},      {"perturbed-torus", 2, 1e-3}, {"morse-smale", 2},
          {"morse-smale", 3},         {"nonfaithful-circle", 2, 0.0, "rot:ln2"}};
}

inline void criterion_relations(Checks& c, std::uint64_t) {
  for (const auto& spec : relation_suite()) {
    const auto built = catalog::build(spec);
    const RelationResidual r = std::visit([](const auto& a) { return a.residual; }, built);
    const std::string tag = spec.id + "(n=" + std::to_string(spec.n) + (spec.id == "product" || spec.id == "nonfaithful-circle" ? "," + spec.k : "") + ")";
    c.less(tag + " residual", r.residual, 1e-8);
    c.less(tag + " iterated residual", r.iterated_residual, 1e-6);
  }
}

inline void criterion_matrices(Checks& c, std::uint64_t) {
  const std::vector<std::pair<IntMatrix2, int>> exemplars{
      {IntMatrix2::identity(), 1}, {-IntMatrix2::identity(), 2}, {{0, 1, -1, 0}, 4}, {{0, -1, 1, 1}, 6}};
  for (const auto& [A, order] : exemplars) {
    const auto got = finite_order(A);
    c.expect("finite_order " + A.to_string(), got && *got == order, {{"value", got ? json(*got) : json(nullptr)}, {"expected", order}});
  }
  const IntMatrix2 P{1, 1, 0, 1};
  c.expect("finite_order [[1,1],[0,1]] is empty", !finite_order(P).has_value());
  const auto none = conjugate_in_gl2z(P, P * P, 50);
  c.expect("A and A^2 not conjugate within bound 50", !none.found());
  const IntMatrix2 A{0, 1, -1, 0}, B{0, -1, 1, 0};
  const auto brute = brute_force_conjugators(A, B, 3);
  const auto found = conjugate_in_gl2z(A, B, 10);
  const bool in_brute = found.found() && std::find(brute.begin(), brute.end(), *found.conjugator) != brute.end();
  c.expect("brute force over [-3,3]^4 finds conjugators", !brute.empty(), {{"count", brute.size()}});
  c.expect("lattice search returns [[1,0],[0,-1]]", found.found() && *found.conjugator == IntMatrix2{1, 0, 0, -1},
           {{"value", found.found() ? json(*found.conjugator) : json(nullptr)}});
  c.expect("lattice result is among brute-force solutions", in_brute);
  c.expect("X B X^-1 = A exactly", found.found() && *found.conjugator * B * found.conjugator->inverse() == A);
}

inline void criterion_rotation_numbers(Checks& c, std::uint64_t) {
  for (int n : {2, 3, 5}) {
    const auto action = catalog::standard_torus(n);
    const auto est = rotation_number(restriction_to_infinity(action.h), 100000);
    const double target = frac(std::log(static_cast<double>(n)));
    c.less("rho(h0|C1) n=" + std::to_string(n), circle_dist(est.value, target), 1e-4);
    c.expect("no rational witness n=" + std::to_string(n), !est.rational_witness.has_value());
  }
  const auto third = rotation_number(rotation(1.0 / 3.0));
  c.expect("rotation 1/3 witness (1,3)",
           third.rational_witness && third.rational_witness->p == 1 && third.rational_witness->q == 3);
  const auto periodic = rotation_number(catalog::periodic_circle_example(3).f);
  c.expect("periodic circle example witness (1,2)",
           periodic.rational_witness && periodic.rational_witness->p == 1 && periodic.rational_witness->q == 2);
}

inline void criterion_rotation_sets(Checks& c, std::uint64_t) {
  const auto f0 = catalog::standard_torus(2).f;
  const auto est = rotation_set(f0);
  c.expect("f0 rotation set is a point", est.is_point, {{"diameter", est.diameter}});
  c.less("f0 point distance to origin", est.point ? norm(*est.point) : 1.0, 1e-3);
  for (int n : {2, 3}) {
    const Vec2 p = est.point.value_or(Vec2{1.0, 1.0});
    const auto snapped = bs_rotation_constraint(p, IntMatrix2::identity(), n);
    const bool zero_q = snapped.Q[0] == 0 && snapped.Q[1] == 0;
    const RationalVector2 lattice{Rational(snapped.Q[0], n - 1), Rational(snapped.Q[1], n - 1)};
    const auto exact = bs_rotation_constraint(lattice, IntMatrix2::identity(), n);
    const bool origin = exact.fixed_point && (*exact.fixed_point)[0] == Rational(0) && (*exact.fixed_point)[1] == Rational(0);
    c.expect("snap to (0,0) n=" + std::to_string(n), snapped.consistent && zero_q, {{"residual", snapped.residual}});
    c.expect("exact constraint certifies (0,0) n=" + std::to_string(n), exact.consistent && origin);
  }
  const TorusLift F = translation({0.3, 0.2});
  const TorusLift F3 = compose(F, compose(F, F));
  const auto r1 = rotation_set(F), r3 = rotation_set(F3);
  const Vec2 p1 = r1.point.value_or(Vec2{9, 9}), p3 = r3.point.value_or(Vec2{0, 0});
  c.less("rho(F^3) - 3 rho(F)", norm(p3 - 3.0 * p1), r3.error_bound + 3.0 * r1.error_bound);
}

inline void criterion_conjugation(Checks& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RotationSetParams p;
  p.grid = 8;
  p.iterates = 2000;
  p.tail = 100;
  for (int k = 0; k < 5; ++k) {
    const Vec2 v{unit(rng), unit(rng)};
    const TorusLift F = translation(v);
    TorusLift H = catalog::random_bump_diffeo(rng(), 0.02);
    if (k == 4) H = compose(linear_map({2, 1, 1, 1}), H);
    const auto r = conjugate_rotation_set_check(F, H, p);
    c.expect("pair " + std::to_string(k) + " linear part " + H.linear_part.to_string(), r.passed,
             {{"distance", r.distance}, {"tolerance", r.tolerance}});
  }
}

inline void criterion_fibre_minimal_sets(Checks& c, std::uint64_t) {
  const auto third = catalog::product_action(2, KSpec::parse("rot:1/3"));
  const auto m1 = bs_minimal_set(third, 64, 8);
  c.expect("k = rot 1/3 gives FiniteOrbit", m1.label == MinimalLabel::FiniteOrbit, {{"label", to_string(m1.label)}});
  c.expect("orbit has 3 points", m1.points.size() == 3, {{"value", m1.points.size()}});
  double worst = 0.0;
  const TorusLift fi = inverse(third.f), hi = inverse(third.h);
  for (const auto& p : m1.points)
    for (const TorusLift* g : {&third.f, &fi, &third.h, &hi}) {
      double best = 1.0;
      for (const auto& q : m1.points) best = std::min(best, torus_dist((*g)(p), q));
      worst = std::max(worst, best);
    }
  c.less("orbit closed under f, f^-1, h, h^-1", worst, 1e-6);

  const auto ln2 = catalog::product_action(2, KSpec::parse("rot:ln2"));
  const auto m2 = bs_minimal_set(ln2, 64, 8);
  c.expect("k = rot ln 2 gives MinimalCircle", m2.label == MinimalLabel::MinimalCircle, {{"label", to_string(m2.label)}});
  c.less("largest gap at N = 1e5", m2.gaps.largest_gaps.empty() ? 1.0 : m2.gaps.largest_gaps.back(), 0.02);

  const auto dj = catalog::product_action(2, KSpec::denjoy(golden_fraction(), 12, 0.5));
  const auto m3 = bs_minimal_set(dj, 64, 8);
  c.expect("k = Denjoy depth 12 gives MinimalCantor", m3.label == MinimalLabel::MinimalCantor,
           {{"label", to_string(m3.label)}, {"cell_gaps", m3.gaps.cell_gaps}});
  for (std::size_t i = 0; i < m3.gaps.cell_gaps.size(); ++i) {
    const double cell = 1.0 / m3.gaps.refinements[i];
    c.expect("gap above 10 cells at 2^" + std::to_string(8 + i), m3.gaps.cell_gaps[i] > 10 * cell,
             {{"value", m3.gaps.cell_gaps[i]}, {"bound", 10 * cell}});
  }
}

inline void criterion_constructive_minimal_set(Checks& c, std::uint64_t) {
  const auto a = catalog::standard_torus(2);
  const auto est = bs_minimal_set(a, 64, 8);
  c.expect("minimal set cells inside fixed_cells(f0)", est.cells.subset_of(est.fixed),
           {{"cloud_cells", est.cells.count()}, {"fixed_cells", est.fixed.count()}});
  const auto family = k_family(a.h, est.fixed, 8);
  bool decreasing = true;
  for (std::size_t l = 1; l < family.size(); ++l) decreasing = decreasing && family[l].subset_of(family[l - 1]);
  json counts = json::array();
  for (const auto& K : family) counts.push_back(K.count());
  c.expect("K_l decreasing for l <= 8", decreasing && family.size() == 9, {{"counts", counts}});
  c.expect("K_8 nonempty", !family.back().empty());
}

inline void criterion_periodic_examples(Checks& c, std::uint64_t) {
  const auto circ = catalog::periodic_circle_example(3);
  double min_disp = 1.0;
  for (double x : SpaceTraits<CircleLift>::grid(10000)) min_disp = std::min(min_disp, circle_dist(circ.f(x), x));
  c.expect("circle f has no fixed point", min_disp > 1e-3, {{"min_displacement", min_disp}});
  const CircleLift f2 = compose(circ.f, circ.f);
  double best = 1.0, root = 0.0;
  for (long p = 0; p <= 2; ++p) {
    const auto [r, x] = detail::min_abs_root([&](double t) { return f2(t) - t - static_cast<double>(p); }, 1000);
    if (r < best) {
      best = r;
      root = x;
    }
  }
  c.less("circle f^2 fixed point residual", best, 1e-8);

  const auto tor = catalog::periodic_torus_example(3);
  double tmin = 1.0;
  for (const auto& x : SpaceTraits<TorusLift>::grid(100)) tmin = std::min(tmin, torus_dist(tor.f(x), x));
  c.expect("torus F has no fixed point", tmin > 1e-3, {{"min_displacement", tmin}});
  const Vec2 p{chart_infinity(), root};
  c.less("torus F^2 fixed point residual", torus_dist(tor.f(tor.f(p)), p), 1e-8);
}

inline void criterion_persistence(Checks& c, std::uint64_t seed) {
  const auto ms = catalog::morse_smale_example(2);
  const auto fp = persistent_fixed_point(ms);
  c.expect("global fixed point found", fp.has_value());
  if (fp) {
    c.less("distance to (inf,inf)", torus_dist(fp->point, {0.0, 0.0}), 1e-12);
    c.less("h residual", fp->h_residual, 1e-12);
    c.less("f residual", fp->f_residual, 1e-12);
  }
  int ok = 0;
  json per = json::array();
  for (int s = 0; s < 10; ++s) {
    const auto phi = catalog::random_bump_diffeo(seed + static_cast<std::uint64_t>(s), 1e-3);
    const auto pert = catalog::conjugated(ms, phi);
    const auto q = persistent_fixed_point(pert);
    const bool hit = q && q->h_residual < 1e-8 && q->f_residual < 1e-8 && torus_dist(q->point, {0.0, 0.0}) < 1e-1;
    ok += hit ? 1 : 0;
    per.push_back(hit);
  }
  c.expect("perturbed by C0 size 1e-3: 10/10 found", ok == 10, {{"successes", ok}, {"per_seed", per}});
}

inline void criterion_perturbed_fibres(Checks& c, std::uint64_t) {
  const auto rational = catalog::perturbed_torus(2, 0.7 - std::log(2.0));
  const auto r1 = trichotomy(rational);
  c.expect("ln 2 + eps = 7/10 gives FiniteOrbits", r1.outcome == Outcome::FiniteOrbits, {{"outcome", to_string(r1.outcome)}});
  const auto small = catalog::perturbed_torus(2, 1e-3);
  const auto r2 = trichotomy(small);
  c.expect("eps = 1e-3 has no witness up to q = 64", !r2.rotation_number.rational_witness.has_value(),
           {{"rho", r2.rotation_number.value}});
  c.expect("eps = 1e-3 gives MinimalCircle", r2.outcome == Outcome::MinimalCircle, {{"outcome", to_string(r2.outcome)}});
}

inline void criterion_differentials(Checks& c, std::uint64_t seed) {
  const int n = 2;
  const auto a = catalog::standard_torus(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double ef = 0.0, eh = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vec2 x{chart_infinity(), unit(rng)};
    const auto df = differential_at(a.f, x);
    const auto dh = differential_at(a.h, x);
    ef = std::max({ef, std::abs(df.moduli[0] - 1.0), std::abs(df.moduli[1] - 1.0)});
    eh = std::max({eh, std::abs(dh.moduli[0] - 1.0 / n), std::abs(dh.moduli[1] - 1.0)});
  }
  c.less("Df0 moduli vs (1,1) on C1", ef, 1e-4);
  c.less("Dh0 moduli vs (1/n,1) on C1", eh, 1e-3);

  const std::vector<double> circle_pts{0.17, 0.37, 0.71, 0.83};
  const std::vector<Vec2> torus_pts{{0.17, 0.29}, {0.37, 0.61}, {0.71, 0.83}, {0.9, 0.13}};
  auto ratio_ok = [](const DifferentialEstimate& d) {
    return !d.affine && !d.near_seam && d.richardson_ratio >= 3.5 && d.richardson_ratio <= 4.5;
  };
  const auto line = catalog::standard_line(2);
  const auto per = catalog::periodic_circle_example(3);
  const auto ptor = catalog::periodic_torus_example(3);
  const auto ms = catalog::morse_smale_example(2);
  const std::vector<std::pair<std::string, const CircleLift*>> cmaps{
      {"standard-line f", &line.f}, {"standard-line h", &line.h}, {"periodic-circle f", &per.f}, {"periodic-circle h", &per.h}};
  const std::vector<std::pair<std::string, const TorusLift*>> tmaps{
      {"standard-torus f", &a.f}, {"standard-torus h", &a.h}, {"morse-smale f", &ms.f},
      {"morse-smale h", &ms.h},   {"periodic-torus F", &ptor.f}, {"periodic-torus H", &ptor.h}};
  for (const auto& [name, f] : cmaps) {
    double lo = 1e9, hi = -1e9;
    bool ok = true;
    for (double x : circle_pts) {
      const auto d = differential_at(*f, x);
      ok = ok && ratio_ok(d);
      lo = std::min(lo, d.richardson_ratio);
      hi = std::max(hi, d.richardson_ratio);
    }
    c.expect("Richardson ratio " + name, ok, {{"min", lo}, {"max", hi}});
  }
  for (const auto& [name, f] : tmaps) {
    double lo = 1e9, hi = -1e9;
    bool ok = true;
    for (const auto& x : torus_pts) {
      const auto d = differential_at(*f, x);
      ok = ok && ratio_ok(d);
      lo = std::min(lo, d.richardson_ratio);
      hi = std::max(hi, d.richardson_ratio);
    }
    c.expect("Richardson ratio " + name, ok, {{"min", lo}, {"max", hi}});
  }
}

// ---------------------------------------------------------------------------
// Runner

struct Criterion {
  int id;
  std::string name;
  std::function<void(Checks&, std::uint64_t)> run;
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "relation suite", criterion_relations},
      {2, "matrix classification", criterion_matrices},
      {3, "rotation numbers", criterion_rotation_numbers},
      {4, "rotation sets", criterion_rotation_sets},
      {5, "conjugation of rotation sets", criterion_conjugation},
      {6, "minimal sets by fibre map", criterion_fibre_minimal_sets},
      {7, "constructive minimal set", criterion_constructive_minimal_set},
      {8, "periodic points without fixed points", criterion_periodic_examples},
      {9, "persistent global fixed point", criterion_persistence},
      {10, "rational and irrational perturbations", criterion_perturbed_fibres},
      {11, "differentials and ellipticity", criterion_differentials},
  };
  return list;
}

inline constexpr int kDeterminismId = 12;

inline CriterionResult run_criterion(const Criterion& cr, std::uint64_t seed) {
  CriterionResult r;
  r.id = cr.id;
  r.name = cr.name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Checks c;
    cr.run(c, seed);
    r.passed = c.ok();
    r.checks = c.items();
  } catch (const std::exception& e) {
    r.passed = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// The deterministic part of a set of results.
inline json deterministic_json(const std::vector<CriterionResult>& rs, std::uint64_t seed) {
  json arr = json::array();
  for (const auto& r : rs) {
    json j{{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"checks", r.checks}};
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return {{"seed", seed}, {"criteria", std::move(arr)}};
}

inline std::string report_hash(const json& deterministic) {
  std::ostringstream os;
  os << std::hex << std::hash<std::string>{}(deterministic.dump());
  return os.str();
}

struct ReproduceReport {
  std::uint64_t seed = kDefaultSeed;
  std::vector<CriterionResult> results;
  json deterministic() const { return deterministic_json(results, seed); }
  json metadata() const {
    json t = json::object();
    double total = 0.0;
    for (const auto& r : results) {
      t[std::to_string(r.id)] = r.seconds;
      total += r.seconds;
    }
    return {{"seconds", t}, {"total_seconds", total}, {"threads", thread_count()}};
  }
  json to_json() const {
    json j = deterministic();
    j["report_hash"] = report_hash(j);
    j["metadata"] = metadata();
    return j;
  }
  bool all_passed() const {
    for (const auto& r : results)
      if (!r.passed) return false;
    return true;
  }
};

/**
 * Runs the requested criteria (all twelve when ids is empty). Criterion 12
 * runs criteria 1-11 twice with the same seed and compares report hashes,
 * reusing the first run when it is already part of the request.
 */
inline ReproduceReport reproduce_all(std::vector<int> ids = {}, std::uint64_t seed = kDefaultSeed,
                                     const std::function<void(const CriterionResult&)>& on_result = {}) {
  if (ids.empty())
    for (int i = 1; i <= kDeterminismId; ++i) ids.push_back(i);
  ReproduceReport rep;
  rep.seed = seed;
  std::vector<CriterionResult> first_pass;
  for (int id : ids) {
    CriterionResult r;
    if (id == kDeterminismId) {
      const auto t0 = std::chrono::steady_clock::now();
      r.id = id;
      r.name = "determinism";
      std::vector<CriterionResult> a = first_pass, b;
      if (a.size() != criteria().size()) {
        a.clear();
        for (const auto& cr : criteria()) a.push_back(run_criterion(cr, seed));
      }
      for (const auto& cr : criteria()) b.push_back(run_criterion(cr, seed));
      const auto ha = report_hash(deterministic_json(a, seed)), hb = report_hash(deterministic_json(b, seed));
      Checks c;
      c.expect("identical report hashes", ha == hb, {{"first", ha}, {"second", hb}});
      r.passed = c.ok();
      r.checks = c.items();
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      const Criterion* found = nullptr;
      for (const auto& cr : criteria())
        if (cr.id == id) found = &cr;
      if (!found) {
        r.id = id;
        r.name = "unknown";
        r.error = "unknown criterion id " + std::to_string(id);
      } else {
        r = run_criterion(*found, seed);
        first_pass.push_back(r);
      }
    }
    if (on_result) on_result(r);
    rep.results.push_back(std::move(r));
  }
  return rep;
}

}  // namespace bsdyn::acceptance
