#pragma once

/**
 * @file experiments.hpp
 * @brief Perturbation harness: invariant circles by graph transform, the
 * restricted rotation number, the minimal-set trichotomy, persistent global
 * fixed points and rotation-set persistence.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/estimators.hpp"
#include "bsdyn/parallel.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn {

// ---------------------------------------------------------------------------
// Periodic cubic spline

/// C^2 periodic cubic spline through nodes x_0 < ... < x_{N-1} < x_0 + 1.
class PeriodicSpline {
 public:
  PeriodicSpline(std::vector<double> xs, std::vector<double> ys) : x_(std::move(xs)), y_(std::move(ys)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("PeriodicSpline: need at least 3 matching nodes");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("PeriodicSpline: nodes must increase");
    if (!(x_.back() < x_.front() + 1.0)) throw std::invalid_argument("PeriodicSpline: nodes must span less than a period");
    solve_moments();
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    t = t - std::floor(t - x_.front());
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const std::size_t j = (i + 1) % n;
    const double xi = x_[i], xj = (j == 0) ? x_.front() + 1.0 : x_[j];
    const double h = xj - xi, a = (xj - t) / h, b = (t - xi) / h;
    return a * y_[i] + b * y_[j] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[j]) * h * h / 6.0;
  }

 private:
  double gap(std::size_t i) const {
    return i + 1 < x_.size() ? x_[i + 1] - x_[i] : x_.front() + 1.0 - x_.back();
  }

  // Cyclic tridiagonal system for the second derivatives, solved by Sherman-Morrison.
  void solve_moments() {
    const std::size_t n = x_.size();
    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p = (i + n - 1) % n, q = (i + 1) % n;
      const double hp = gap(p), hi = gap(i);
      sub[i] = hp;
      diag[i] = 2.0 * (hp + hi);
      sup[i] = hi;
      rhs[i] = 6.0 * ((y_[q] - y_[i]) / hi - (y_[i] - y_[p]) / hp);
    }
    const double alpha = sup[n - 1], beta = sub[0];
    const double gamma = -diag[0];
    std::vector<double> d = diag;
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    const auto xsol = thomas(sub, d, sup, rhs);
    const auto zsol = thomas(sub, d, sup, u);
    const double fact = (xsol[0] + beta * xsol[n - 1] / gamma) / (1.0 + zsol[0] + beta * zsol[n - 1] / gamma);
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) m_[i] = xsol[i] - fact * zsol[i];
  }

  static std::vector<double> thomas(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<double>& c, std::vector<double> r) {
    const std::size_t n = b.size();
    std::vector<double> cp(n), bp = b;
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / bp[i - 1];
      bp[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = r[n - 1] / bp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (r[i] - c[i] * x[i + 1]) / bp[i];
    return x;
  }

  std::vector<double> x_, y_, m_;
};

// ---------------------------------------------------------------------------
// Invariant circles

enum class Direction { Forward, Backward };
enum class CircleSide { Attracting, Repelling };

inline const char* to_string(CircleSide s) { return s == CircleSide::Attracting ? "Attracting" : "Repelling"; }

struct NonConvergent : std::runtime_error {
  NonConvergent(int iters, double res)
      : std::runtime_error(message(iters, res)),
        iterations(iters),
        residual(res) {}
  int iterations;
  double residual;

 private:
  static std::string message(int iters, double res) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "graph transform did not converge after %d iterations (residual %.3e)", iters, res);
    return buf;
  }
};

struct GraphFold : std::runtime_error {
  explicit GraphFold(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kGraphSamples = 512;

/// Circle u = g(theta) over the fibre angle, sampled at theta_j = j / samples.
struct InvariantCircleEstimate {
  std::vector<double> thetas;
  std::vector<double> values;
  double residual = 0.0;  ///< sup over off-grid theta of |H(g(theta), theta)_u - g(H(...)_theta)|
  CircleSide side = CircleSide::Attracting;
  int iterations = 0;

  double operator()(double theta) const { return spline()(theta); }
  Vec2 point(double theta) const { return {(*this)(theta), theta}; }
  const PeriodicSpline& spline() const {
    if (!spline_) spline_ = std::make_shared<PeriodicSpline>(thetas, values);
    return *spline_;
  }

 private:
  mutable std::shared_ptr<PeriodicSpline> spline_;
};

/// Constant graph u = u0 on `samples` fibre angles.
inline std::vector<double> constant_graph(double u0, int samples = kGraphSamples) {
  return std::vector<double>(static_cast<std::size_t>(samples), u0);
}

namespace detail {

inline std::vector<double> uniform_thetas(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = static_cast<double>(j) / static_cast<double>(n);
  return t;
}

/// Self-certifying residual of a graph under H, at the midpoints between samples.
inline double graph_residual(const TorusLift& H, const PeriodicSpline& g, std::size_t n) {
  std::vector<double> r(n);
  parallel_for(n, [&](std::size_t j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    const Vec2 q = H({g(t), t});
    r[j] = std::abs(q[0] - g(q[1]));
  });
  return *std::max_element(r.begin(), r.end());
}

/// One graph-transform step: push samples by H and re-interpolate over the uniform grid.
inline std::vector<double> push_graph(const TorusLift& H, const std::vector<double>& thetas,
                                      const std::vector<double>& values) {
  const std::size_t n = thetas.size();
  std::vector<Vec2> img(n);
  parallel_for(n, [&](std::size_t j) { img[j] = H({values[j], thetas[j]}); });
  // Image nodes in lift coordinates must advance monotonically by one turn in total.
  std::vector<double> xs(n), ys(n);
  const double base = std::floor(img[0][1]);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = img[j][1] - base;
    ys[j] = img[j][0];
    if (j > 0 && !(xs[j] > xs[j - 1])) throw GraphFold("graph transform: image is not a graph over the fibre");
  }
  if (!(xs.back() < xs.front() + 1.0)) throw GraphFold("graph transform: image wraps more than once");
  // Rotate so the nodes start inside [0, 1).
  std::vector<double> rx(n), ry(n);
  const double shift = std::floor(xs[0]);
  std::vector<std::pair<double, double>> nodes(n);
  for (std::size_t j = 0; j < n; ++j) {
    double x = xs[j] - shift;
    if (x >= 1.0) x -= 1.0;
    nodes[j] = {x, ys[j]};
  }
  std::sort(nodes.begin(), nodes.end());
  for (std::size_t j = 0; j < n; ++j) {
    rx[j] = nodes[j].first;
    ry[j] = nodes[j].second;
  }
  const PeriodicSpline s(rx, ry);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = s(thetas[j]);
  return out;
}

}  // namespace detail

/**
 * Graph transform for an invariant circle of h transverse to the fibre
 * direction. Forward pushes by h and finds attracting circles; Backward pushes
 * by h^-1 and finds repelling ones. Throws NonConvergent or GraphFold.
 */
inline InvariantCircleEstimate find_invariant_circle(const TorusLift& h, const std::vector<double>& seed,
                                                     Direction direction = Direction::Forward, int max_iter = 200,
                                                     double tol = 1e-8) {
  if (seed.size() < 3) throw std::invalid_argument("find_invariant_circle: seed needs at least 3 samples");
  if (!(tol > 0.0)) throw std::invalid_argument("find_invariant_circle: tol must be positive");
  const TorusLift H = direction == Direction::Forward ? h : inverse(h);
  InvariantCircleEstimate est;
  est.side = direction == Direction::Forward ? CircleSide::Attracting : CircleSide::Repelling;
  est.thetas = detail::uniform_thetas(seed.size());
  std::vector<double> values = seed;
  double res = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    const PeriodicSpline g(est.thetas, values);
    res = detail::graph_residual(H, g, values.size());
    if (res < tol) {
      est.values = std::move(values);
      est.residual = res;
      est.iterations = it;
      return est;
    }
    if (it == max_iter) break;
    values = detail::push_graph(H, est.thetas, values);
  }
  throw NonConvergent(max_iter, res);
}

// ---------------------------------------------------------------------------
// Trichotomy

enum class Outcome { FiniteOrbits, MinimalCircle, MinimalCantor, Unknown };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::FiniteOrbits:
      return "FiniteOrbits";
    case Outcome::MinimalCircle:
      return "MinimalCircle";
    case Outcome::MinimalCantor:
      return "MinimalCantor";
    case Outcome::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

struct TrichotomyReport {
  RotationNumberEstimate rotation_number;  ///< of h restricted to the circle
  Outcome outcome = Outcome::Unknown;
  std::vector<Vec2> orbit;                 ///< finite orbit, or the sampled orbit on the circle
  GapDiagnostics gaps;
  std::size_t fixed_cells_on_circle = 0;
  std::string note;
};

inline constexpr double kCircleAcceptTol = 1e-6;
inline constexpr int kTrichotomyResolution = 64;

/// Restriction of h to the circle, as a lift in the fibre angle.
inline CircleLift restricted_lift(const TorusLift& h, const InvariantCircleEstimate& circle) {
  auto c = std::make_shared<InvariantCircleEstimate>(circle);
  return {[h, c](double t) { return h(c->point(t))[1]; }, {}, "h|circle", {}};
}

/**
 * Rational rotation number with a witness: look for a finite BS-orbit through
 * the witness point. Irrational: gap diagnostics of an orbit on the circle.
 */
inline TrichotomyReport classify_perturbed(const TorusAction& action, const InvariantCircleEstimate& circle,
                                           long iterates = 100000) {
  if (!(circle.residual < kCircleAcceptTol)) {
    throw std::invalid_argument("classify_perturbed: circle residual " + std::to_string(circle.residual) +
                                " is above " + std::to_string(kCircleAcceptTol));
  }
  TrichotomyReport rep;
  const CellSet fixed = fixed_cells(action.f, kTrichotomyResolution);
  CellSet on(Space::Torus, fixed.resolution());
  for (std::size_t j = 0; j < circle.thetas.size(); ++j) {
    const auto idx = fixed.index_of(Vec2{circle.values[j], circle.thetas[j]});
    if (fixed.contains(idx)) on.insert(idx);
  }
  rep.fixed_cells_on_circle = on.count();
  if (rep.fixed_cells_on_circle == 0) throw std::invalid_argument("classify_perturbed: f-fixed cells miss the circle");

  const CircleLift r = restricted_lift(action.h, circle);
  rep.rotation_number = rotation_number(r, iterates);
  if (rep.rotation_number.rational_witness) {
    const Vec2 p = circle.point(frac(rep.rotation_number.rational_witness->point));
    const auto orbit = finite_bs_orbit(action, p);
    rep.orbit = orbit.points;
    if (orbit.finite) {
      rep.outcome = Outcome::FiniteOrbits;
    } else {
      rep.note = "rational rotation number but the BS-orbit of the periodic point is not finite";
    }
    return rep;
  }
  double t = 0.0;
  for (long k = 0; k < kMinimalTransient; ++k) t = frac(r(t));
  std::vector<double> thetas;
  thetas.reserve(static_cast<std::size_t>(kGapSampleCounts.back()));
  for (long k = 0; k < kGapSampleCounts.back(); ++k) {
    thetas.push_back(t);
    t = frac(r(t));
  }
  rep.gaps = circle_gap_diagnostics(thetas);
  for (std::size_t k = 0; k < thetas.size(); k += 100) rep.orbit.push_back(circle.point(thetas[k]));
  if (rep.gaps.circle_like) {
    rep.outcome = Outcome::MinimalCircle;
  } else if (rep.gaps.cantor_like) {
    rep.outcome = Outcome::MinimalCantor;
  } else {
    rep.note = "gap diagnostics inconclusive";
  }
  return rep;
}

/// Invariant circle from the seed u = seed_u by the forward graph transform, then classify_perturbed.
inline TrichotomyReport trichotomy(const TorusAction& action, double seed_u = chart_infinity(),
                                   InvariantCircleEstimate* circle_out = nullptr) {
  const auto circle = find_invariant_circle(action.h, constant_graph(seed_u));
  if (circle_out) *circle_out = circle;
  return classify_perturbed(action, circle);
}

// ---------------------------------------------------------------------------
// Persistent global fixed points

struct GlobalFixedPoint {
  Vec2 point{0.0, 0.0};
  double h_residual = 0.0;
  double f_residual = 0.0;
};

inline constexpr double kHFixedTol = 1e-12;
inline constexpr double kFFixedTol = 1e-8;

namespace detail {

/// Newton iteration on H(x) - x - P, P the integer part of the displacement.
inline std::optional<Vec2> newton_fixed(const TorusLift& H, Vec2 x, int max_iter = 60) {
  constexpr double s = 1e-7;
  for (int it = 0; it < max_iter; ++it) {
    const Vec2 d = H(x) - x;
    const Vec2 P{std::round(d[0]), std::round(d[1])};
    const Vec2 r = d - P;
    if (norm(r) < 1e-15) return x;
    const Vec2 gx = (1.0 / (2 * s)) * ((H({x[0] + s, x[1]}) - Vec2{x[0] + s, x[1]}) - (H({x[0] - s, x[1]}) - Vec2{x[0] - s, x[1]}));
    const Vec2 gy = (1.0 / (2 * s)) * ((H({x[0], x[1] + s}) - Vec2{x[0], x[1] + s}) - (H({x[0], x[1] - s}) - Vec2{x[0], x[1] - s}));
    const double det = gx[0] * gy[1] - gy[0] * gx[1];
    if (std::abs(det) < 1e-10) return std::nullopt;
    const Vec2 step{(gy[1] * r[0] - gy[0] * r[1]) / det, (-gx[1] * r[0] + gx[0] * r[1]) / det};
    x = x - step;
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) return std::nullopt;
  }
  const Vec2 d = H(x) - x;
  if (norm(d - Vec2{std::round(d[0]), std::round(d[1])}) < kHFixedTol) return x;
  return std::nullopt;
}

}  // namespace detail

/**
 * Fixed points of h from grid local minima of |h(x) - x| refined by Newton,
 * filtered to those also fixed by f. Returns the one with the smallest f residual.
 */
inline std::optional<GlobalFixedPoint> persistent_fixed_point(const TorusAction& action, int search_resolution = 64) {
  if (search_resolution < 2) throw std::invalid_argument("persistent_fixed_point: resolution must be >= 2");
  const int R = search_resolution;
  const std::size_t total = static_cast<std::size_t>(R) * static_cast<std::size_t>(R);
  std::vector<double> d(total);
  auto center = [R](std::size_t k) {
    return Vec2{(static_cast<double>(k / R) + 0.5) / R, (static_cast<double>(k % R) + 0.5) / R};
  };
  parallel_for(total, [&](std::size_t k) {
    const Vec2 x = center(k);
    d[k] = torus_dist(action.h(x), x);
  });
  std::vector<std::size_t> minima;
  for (std::size_t k = 0; k < total; ++k) {
    const int i = static_cast<int>(k) / R, j = static_cast<int>(k) % R;
    bool is_min = true;
    for (int di = -1; di <= 1 && is_min; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const std::size_t nb = static_cast<std::size_t>(((i + di + R) % R) * R + (j + dj + R) % R);
        if (nb != k && d[nb] < d[k]) {
          is_min = false;
          break;
        }
      }
    if (is_min) minima.push_back(k);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
  if (minima.size() > 32) minima.resize(32);

  std::optional<GlobalFixedPoint> best;
  for (std::size_t k : minima) {
    const auto x = detail::newton_fixed(action.h, center(k));
    if (!x) continue;
    GlobalFixedPoint g;
    g.point = reduce(*x);
    g.h_residual = torus_dist(action.h(g.point), g.point);
    g.f_residual = torus_dist(action.f(g.point), g.point);
    if (!(g.h_residual < kHFixedTol) || !(g.f_residual < kFFixedTol)) continue;
    if (!best || g.f_residual < best->f_residual) best = g;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Rotation-set persistence

struct RotationPersistenceReport {
  RotationSetEstimate estimate;
  Vec2 centroid{0.0, 0.0};
  RationalVector2 snapped{Rational(0), Rational(0)};  ///< nearest point of (1/(n-1)) Z^2
  double window = 0.0;                               ///< 1 / (2(n-1))
  double spread = 0.0;                               ///< sup-norm distance of the hull to the snapped point
  bool passed = false;                               ///< snapped to (0,0) with the hull inside the window
};

inline RotationPersistenceReport rotation_set_persistence(const TorusLift& f, int n, const RotationSetParams& p = {}) {
  if (n < 2) throw std::invalid_argument("rotation_set_persistence: n must be >= 2");
  RotationPersistenceReport rep;
  rep.estimate = rotation_set(f, p);
  Vec2 m{0.0, 0.0};
  for (const auto& s : rep.estimate.samples) m = m + s;
  rep.centroid = (1.0 / static_cast<double>(rep.estimate.samples.size())) * m;
  const std::int64_t q = n - 1;
  rep.snapped = {Rational(std::llround(rep.centroid[0] * q), q), Rational(std::llround(rep.centroid[1] * q), q)};
  rep.window = 1.0 / (2.0 * q);
  const Vec2 s{boost::rational_cast<double>(rep.snapped[0]), boost::rational_cast<double>(rep.snapped[1])};
  for (const auto& v : rep.estimate.hull)
    rep.spread = std::max({rep.spread, std::abs(v[0] - s[0]), std::abs(v[1] - s[1])});
  rep.passed = rep.snapped[0] == Rational(0) && rep.snapped[1] == Rational(0) && rep.spread < rep.window;
  return rep;
}

}  // namespace bsdyn
