#pragma once

/**
 * @file torus.hpp
 * @brief Lifts of torus homeomorphisms to R^2, rotation vectors and rotation sets.
 *
 * T^2 = (R/Z)^2. Where a factor is the projective line it uses the chart of
 * circle.hpp, so (inf, theta) is (0, theta) in chart coordinates.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsdyn/circle.hpp"
#include "bsdyn/gl2z.hpp"
#include "bsdyn/parallel.hpp"

namespace bsdyn {

using Vec2 = std::array<double, 2>;

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }
inline Vec2 mat_apply(const IntMatrix2& A, const Vec2& v) {
  return {static_cast<double>(A.a) * v[0] + static_cast<double>(A.b) * v[1],
          static_cast<double>(A.c) * v[0] + static_cast<double>(A.d) * v[1]};
}

/// Coordinate-wise signed difference b - a on the torus, each in [-1/2, 1/2).
inline Vec2 torus_delta(const Vec2& a, const Vec2& b) { return {circle_delta(a[0], b[0]), circle_delta(a[1], b[1])}; }
inline double torus_dist(const Vec2& a, const Vec2& b) { return norm(torus_delta(a, b)); }
inline Vec2 reduce(const Vec2& a) { return {frac(a[0]), frac(a[1])}; }

/**
 * Lift G of a torus homeomorphism with G(x + P) = G(x) + A_G P for integer P.
 */
struct TorusLift {
  std::function<Vec2(const Vec2&)> eval;
  std::function<Vec2(const Vec2&)> exact_inverse;  ///< empty when unknown
  IntMatrix2 linear_part = IntMatrix2::identity();
  std::string label;
  /// Seams of each coordinate (values in [0,1)) where the map is not smooth.
  std::array<std::vector<double>, 2> seams;

  Vec2 operator()(const Vec2& x) const { return eval(x); }
  bool has_exact_inverse() const { return static_cast<bool>(exact_inverse); }
};

inline TorusLift torus_identity() {
  auto id = [](const Vec2& x) { return x; };
  return {id, id, IntMatrix2::identity(), "identity", {}};
}

inline TorusLift translation(const Vec2& v, std::string label = {}) {
  if (label.empty()) label = "translation(" + std::to_string(v[0]) + "," + std::to_string(v[1]) + ")";
  return {[v](const Vec2& x) { return x + v; }, [v](const Vec2& x) { return x - v; }, IntMatrix2::identity(),
          std::move(label), {}};
}

inline TorusLift linear_map(const IntMatrix2& A, std::string label = {}) {
  if (!A.is_unimodular()) throw std::invalid_argument("linear_map: matrix must be unimodular");
  if (label.empty()) label = "linear" + A.to_string();
  const IntMatrix2 Ai = A.inverse();
  return {[A](const Vec2& x) { return mat_apply(A, x); }, [Ai](const Vec2& x) { return mat_apply(Ai, x); }, A,
          std::move(label), {}};
}

/// (x, y) -> (f(x), g(y)).
inline TorusLift product(const CircleLift& f, const CircleLift& g, std::string label = {}) {
  if (label.empty()) label = f.label + "x" + g.label;
  TorusLift out;
  out.eval = [fe = f.eval, ge = g.eval](const Vec2& x) { return Vec2{fe(x[0]), ge(x[1])}; };
  const CircleLift fi = inverse(f), gi = inverse(g);
  out.exact_inverse = [fe = fi.eval, ge = gi.eval](const Vec2& x) { return Vec2{fe(x[0]), ge(x[1])}; };
  out.label = std::move(label);
  out.seams = {f.seams, g.seams};
  return out;
}

/// G o F (F applied first).
inline TorusLift compose(const TorusLift& G, const TorusLift& F) {
  TorusLift out;
  out.eval = [g = G.eval, f = F.eval](const Vec2& x) { return g(f(x)); };
  if (G.has_exact_inverse() && F.has_exact_inverse()) {
    out.exact_inverse = [gi = G.exact_inverse, fi = F.exact_inverse](const Vec2& x) { return fi(gi(x)); };
  }
  out.linear_part = G.linear_part * F.linear_part;
  out.label = G.label + "*" + F.label;
  out.seams = F.seams;
  return out;
}

/// Lift F + P for an integer vector P.
inline TorusLift shifted(const TorusLift& F, std::array<long, 2> P) {
  const Vec2 v{static_cast<double>(P[0]), static_cast<double>(P[1])};
  return compose(translation(v, "shift"), F);
}

/// Newton solve of F(y) = x with a finite-difference Jacobian, starting from A^-1 x.
inline Vec2 newton_inverse(const TorusLift& F, const Vec2& x, int max_iter = 60, double tol = 1e-13) {
  Vec2 y = mat_apply(F.linear_part.inverse(), x);
  y = y - mat_apply(F.linear_part.inverse(), F(y) - x);
  for (int it = 0; it < max_iter; ++it) {
    const Vec2 r = F(y) - x;
    if (norm(r) < tol) return y;
    constexpr double h = 1e-7;
    const Vec2 c0 = (1.0 / (2 * h)) * (F({y[0] + h, y[1]}) - F({y[0] - h, y[1]}));
    const Vec2 c1 = (1.0 / (2 * h)) * (F({y[0], y[1] + h}) - F({y[0], y[1] - h}));
    const double det = c0[0] * c1[1] - c1[0] * c0[1];
    if (det == 0.0 || !std::isfinite(det)) throw std::runtime_error("newton_inverse: singular Jacobian");
    const Vec2 step{(c1[1] * r[0] - c1[0] * r[1]) / det, (-c0[1] * r[0] + c0[0] * r[1]) / det};
    y = y - step;
  }
  if (norm(F(y) - x) > 1e-10) throw std::runtime_error("newton_inverse: no convergence for " + F.label);
  return y;
}

inline TorusLift inverse(const TorusLift& F) {
  TorusLift out;
  out.linear_part = F.linear_part.inverse();
  out.label = F.label + "^-1";
  out.exact_inverse = F.eval;
  if (F.has_exact_inverse()) {
    out.eval = F.exact_inverse;
  } else {
    out.eval = [F](const Vec2& x) { return newton_inverse(F, x); };
  }
  return out;
}

/// Phi o F o Phi^-1.
inline TorusLift conjugate(const TorusLift& Phi, const TorusLift& F) {
  auto out = compose(Phi, compose(F, inverse(Phi)));
  out.label = "conj(" + F.label + ")";
  return out;
}

inline Vec2 iterate(const TorusLift& F, Vec2 x, long k) {
  for (long i = 0; i < k; ++i) x = F(x);
  return x;
}

// ---------------------------------------------------------------------------
// Bump displacement fields

/// Smooth periodic bump: amplitude * psi(|x - center| / radius), psi(r) = exp(1 - 1/(1 - r^2)).
struct Bump {
  Vec2 center{0.0, 0.0};
  double radius = 0.25;
  Vec2 amplitude{0.0, 0.0};

  Vec2 operator()(const Vec2& x) const {
    const double r = torus_dist(center, x) / radius;
    if (r >= 1.0) return {0.0, 0.0};
    const double s = std::exp(1.0 - 1.0 / (1.0 - r * r));
    return s * amplitude;
  }
  /// Sup of |D(displacement)|; psi' peaks near 1.2 / radius.
  double lipschitz() const { return 1.25 * norm(amplitude) / radius; }
};

/// x -> x + sum of bumps. Requires total Lipschitz constant < 1 to be a diffeomorphism.
inline TorusLift bump_diffeo(std::vector<Bump> bumps, std::string label = "bump") {
  double lip = 0.0;
  for (const auto& b : bumps) lip += b.lipschitz();
  if (lip >= 0.5) throw std::invalid_argument("bump_diffeo: displacement too steep to be a diffeomorphism");
  auto field = std::make_shared<const std::vector<Bump>>(std::move(bumps));
  auto disp = [field](const Vec2& x) {
    Vec2 d{0.0, 0.0};
    for (const auto& b : *field) d = d + b(x);
    return d;
  };
  TorusLift out;
  out.eval = [disp](const Vec2& x) { return x + disp(x); };
  // y + d(y) = x is a contraction fixed point y = x - d(y).
  out.exact_inverse = [disp](const Vec2& x) {
    Vec2 y = x;
    for (int i = 0; i < 200; ++i) {
      const Vec2 next = x - disp(y);
      if (norm(next - y) <= 1e-16) return next;
      y = next;
    }
    return y;
  };
  out.label = std::move(label);
  return out;
}

/// Sup of |F(x) - A_F x| over a grid of start points.
inline double sup_displacement(const TorusLift& F, int grid = 32) {
  double s = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Vec2 x{(i + 0.5) / grid, (j + 0.5) / grid};
      s = std::max(s, norm(F(x) - mat_apply(F.linear_part, x)));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Rotation vectors and sets

struct RotationVector {
  Vec2 value{0.0, 0.0};
  double error_bound = 0.0;
};

inline void require_identity_linear_part(const TorusLift& F, const char* what) {
  if (!(F.linear_part == IntMatrix2::identity())) {
    throw std::invalid_argument(std::string(what) + ": lift must have identity linear part, got " +
                                F.linear_part.to_string());
  }
}

/// (F^N(x) - x) / N with error bound diam(displacement) / N.
inline RotationVector rotation_vector(const TorusLift& F, const Vec2& x, long iterates) {
  require_identity_linear_part(F, "rotation_vector");
  if (iterates < 1) throw std::invalid_argument("rotation_vector: iterates must be >= 1");
  const Vec2 y = iterate(F, x, iterates);
  RotationVector rv;
  rv.value = (1.0 / static_cast<double>(iterates)) * (y - x);
  // Diameter of the displacement field over a grid.
  constexpr int g = 16;
  std::vector<Vec2> d;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const Vec2 p{(i + 0.5) / g, (j + 0.5) / g};
      d.push_back(F(p) - p);
    }
  double diam = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) diam = std::max(diam, norm(d[i] - d[j]));
  rv.error_bound = diam / static_cast<double>(iterates);
  return rv;
}

/// Convex hull by Andrew's monotone chain, counter-clockwise, no repeated vertices.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

inline double diameter(const std::vector<Vec2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, norm(pts[i] - pts[j]));
  return d;
}

/// Hausdorff distance between two finite point sets.
inline double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto directed = [](const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    double h = 0.0;
    for (const auto& x : p) {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& y : q) m = std::min(m, norm(x - y));
      h = std::max(h, m);
    }
    return h;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline constexpr double kPointTol = 1e-3;

struct RotationSetParams {
  int grid = 32;
  long iterates = 10000;
  long tail = 100;
  double point_tol = kPointTol;
};

/**
 * Inner approximation of the rotation set: hull of the tail Birkhoff quotients
 * (F^n(x) - x)/n over a grid x grid of start points. Never an outer bound.
 */
struct RotationSetEstimate {
  std::vector<Vec2> samples;
  std::vector<Vec2> hull;
  double diameter = 0.0;
  bool is_point = false;
  std::optional<Vec2> point;
  /// diameter + (1 + 2 sup|F - id|) / n_min: the quotient spread plus the bounded-displacement term.
  double error_bound = 0.0;
};

inline RotationSetEstimate rotation_set(const TorusLift& F, const RotationSetParams& p = {}) {
  require_identity_linear_part(F, "rotation_set");
  if (p.grid < 1 || p.iterates < 1 || p.tail < 1 || p.tail > p.iterates) {
    throw std::invalid_argument("rotation_set: need grid >= 1 and 1 <= tail <= iterates");
  }
  const std::size_t starts = static_cast<std::size_t>(p.grid) * static_cast<std::size_t>(p.grid);
  std::vector<std::vector<Vec2>> per_start(starts);
  const long first = p.iterates - p.tail + 1;
  parallel_for(starts, [&](std::size_t s) {
    const int i = static_cast<int>(s) / p.grid, j = static_cast<int>(s) % p.grid;
    const Vec2 x0{(i + 0.5) / p.grid, (j + 0.5) / p.grid};
    Vec2 x = x0;
    auto& out = per_start[s];
    out.reserve(static_cast<std::size_t>(p.tail));
    for (long n = 1; n <= p.iterates; ++n) {
      x = F(x);
      if (n >= first) out.push_back((1.0 / static_cast<double>(n)) * (x - x0));
    }
  });
  RotationSetEstimate est;
  est.samples.reserve(starts * static_cast<std::size_t>(p.tail));
  for (auto& v : per_start) est.samples.insert(est.samples.end(), v.begin(), v.end());
  est.hull = convex_hull(est.samples);
  est.diameter = diameter(est.hull);
  est.is_point = est.diameter < p.point_tol;
  if (est.is_point) {
    Vec2 m{0.0, 0.0};
    for (const auto& s : est.samples) m = m + s;
    est.point = (1.0 / static_cast<double>(est.samples.size())) * m;
  }
  est.error_bound = est.diameter + (1.0 + 2.0 * sup_displacement(F, 16)) / static_cast<double>(first);
  return est;
}

struct ConjugationCheck {
  RotationSetEstimate conjugated;  ///< estimate of rho(H F H^-1)
  RotationSetEstimate original;    ///< estimate of rho(F)
  std::vector<Vec2> mapped_hull;   ///< A_H applied to the hull of rho(F)
  double distance = 0.0;           ///< Hausdorff distance between the two hulls
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares rho(H F H^-1) against A_H(rho(F)).
inline ConjugationCheck conjugate_rotation_set_check(const TorusLift& F, const TorusLift& H,
                                                     const RotationSetParams& p = {}) {
  require_identity_linear_part(F, "conjugate_rotation_set_check");
  if (!H.linear_part.is_unimodular()) throw std::invalid_argument("conjugate_rotation_set_check: H not unimodular");
  ConjugationCheck r;
  r.original = rotation_set(F, p);
  r.conjugated = rotation_set(conjugate(H, F), p);
  for (const auto& v : r.original.hull) r.mapped_hull.push_back(mat_apply(H.linear_part, v));
  r.distance = hausdorff(r.conjugated.hull, r.mapped_hull);
  const double opnorm = std::abs(H.linear_part.a) + std::abs(H.linear_part.b) + std::abs(H.linear_part.c) +
                        std::abs(H.linear_part.d);
  r.tolerance = r.conjugated.error_bound + static_cast<double>(opnorm) * r.original.error_bound;
  r.passed = r.distance < r.tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// The constraint rho = (A_h rho + Q) / n

struct RotationConstraintReport {
  bool consistent = false;
  std::array<std::int64_t, 2> Q{0, 0};
  double residual = 0.0;  ///< distance of n rho - A_h rho to the integer vector Q
  std::optional<RationalVector2> fixed_point;  ///< unique fixed point of B = (1/n)(tau_Q o A_h)
  Rational det_linear{0};                      ///< det of the linear part of B, always det(A_h)/n^2
};

namespace detail {
inline RotationConstraintReport finish_constraint(RotationConstraintReport r, const IntMatrix2& Ah, int n) {
  const auto B = AffineMapQ2::bs_rotation_map(Ah, r.Q, n);
  r.det_linear = B.linear.det();
  r.fixed_point = affine_fixed_point(B);
  return r;
}
}  // namespace detail

/// Exact decision for a rational rotation vector.
inline RotationConstraintReport bs_rotation_constraint(const RationalVector2& rho, const IntMatrix2& Ah, int n) {
  if (n < 2) throw std::invalid_argument("bs_rotation_constraint: n must be >= 2");
  const auto Arho = RationalMatrix2::from(Ah).apply(rho);
  const Rational q0 = Rational(n) * rho[0] - Arho[0];
  const Rational q1 = Rational(n) * rho[1] - Arho[1];
  RotationConstraintReport r;
  r.consistent = q0.denominator() == 1 && q1.denominator() == 1;
  if (r.consistent) r.Q = {q0.numerator(), q1.numerator()};
  r.residual = r.consistent ? 0.0 : 1.0;
  return detail::finish_constraint(r, Ah, n);
}

inline constexpr double kConstraintTol = 1e-2;

/// Estimated rotation vector: snap n rho - A_h rho to the nearest integer vector.
inline RotationConstraintReport bs_rotation_constraint(const Vec2& rho, const IntMatrix2& Ah, int n,
                                                       double tol = kConstraintTol) {
  if (n < 2) throw std::invalid_argument("bs_rotation_constraint: n must be >= 2");
  const Vec2 q = static_cast<double>(n) * rho - mat_apply(Ah, rho);
  RotationConstraintReport r;
  r.Q = {std::llround(q[0]), std::llround(q[1])};
  r.residual = std::max(std::abs(q[0] - static_cast<double>(r.Q[0])), std::abs(q[1] - static_cast<double>(r.Q[1])));
  r.consistent = r.residual < tol;
  return detail::finish_constraint(r, Ah, n);
}

}  // namespace bsdyn
