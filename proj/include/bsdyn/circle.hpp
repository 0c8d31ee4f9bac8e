#pragma once

/**
 * @file circle.hpp
 * @brief Orientation-preserving circle homeomorphisms represented by lifts.
 *
 * The circle is R/Z. The projective line R u {inf} is charted by
 *   x = tan(pi (u - 1/2)),   u in R/Z,
 * so u = 0 is the point at infinity and u = 1/2 is x = 0.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bsdyn {

inline constexpr double kPi = std::numbers::pi;

/// Signed distance from a to b on R/Z, in [-1/2, 1/2).
inline double circle_delta(double a, double b) {
  double d = b - a;
  d -= std::floor(d + 0.5);
  return d;
}
inline double circle_dist(double a, double b) { return std::abs(circle_delta(a, b)); }
/// Representative in [0, 1); tiny negative inputs round to 0 rather than 1.
inline double frac(double x) {
  const double r = x - std::floor(x);
  return r < 1.0 ? r : 0.0;
}

// ---------------------------------------------------------------------------
// Projective chart

inline double chart(double x) {
  if (std::isinf(x)) return 0.0;
  return 0.5 + std::atan(x) / kPi;
}
inline double chart_infinity() { return 0.0; }
/// Inverse chart; returns +inf for the point at infinity.
inline double unchart(double u) {
  const double t = frac(u);
  if (t == 0.0) return std::numeric_limits<double>::infinity();
  return -std::cos(kPi * t) / std::sin(kPi * t);
}

/**
 * Lift of a circle homeomorphism: eval(x + 1) = eval(x) + 1, strictly increasing.
 *
 * Values are immutable after construction and safe to evaluate concurrently.
 */
struct CircleLift {
  std::function<double(double)> eval;
  std::function<double(double)> exact_inverse;  ///< empty when unknown
  std::string label;
  /// Points of [0,1) where the map is not smooth (gluing seams).
  std::vector<double> seams;

  double operator()(double x) const { return eval(x); }
  bool has_exact_inverse() const { return static_cast<bool>(exact_inverse); }
};

inline CircleLift identity_lift() {
  auto id = [](double x) { return x; };
  return {id, id, "identity", {}};
}

inline CircleLift rotation(double alpha, std::string label = {}) {
  if (label.empty()) label = "rotation(" + std::to_string(alpha) + ")";
  return {[alpha](double x) { return x + alpha; }, [alpha](double x) { return x - alpha; }, std::move(label), {}};
}

namespace detail {

/// Action of x -> a x + b (a > 0) on chart coordinate t in [0,1], returning a value in [0,1].
/// Works in homogeneous coordinates (X, Y) = (-cos pi t, sin pi t), x = X / Y, so the
/// neighbourhood of infinity needs no special casing and never overflows.
inline double mobius_unit(double a, double b, double t) {
  const double X = -std::cos(kPi * t);
  const double Y = std::sin(kPi * t);
  const double Xp = a * X + b * Y;
  return std::atan2(Y, -Xp) / kPi;
}

}  // namespace detail

/// Lift of the Moebius map x -> a x + b (a > 0) through the projective chart. Fixes u = 0.
inline CircleLift mobius_affine(double a, double b, std::string label = {}) {
  if (!(a > 0.0)) throw std::invalid_argument("mobius_affine: a must be positive");
  if (label.empty()) label = "mobius(" + std::to_string(a) + "," + std::to_string(b) + ")";
  auto fwd = [a, b](double u) {
    const double k = std::floor(u);
    return k + detail::mobius_unit(a, b, u - k);
  };
  auto inv = [a, b](double u) {
    const double k = std::floor(u);
    return k + detail::mobius_unit(1.0 / a, -b / a, u - k);
  };
  return {fwd, inv, std::move(label), {}};
}

/**
 * Piecewise-affine lift from a monotone breakpoint table over one period.
 *
 * xs must be strictly increasing with xs.back() == xs.front() + 1 and ys strictly
 * increasing with ys.back() == ys.front() + 1.
 */
class PiecewiseTable {
 public:
  PiecewiseTable(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() < 2 || xs_.size() != ys_.size()) {
      throw std::invalid_argument("piecewise lift: need matching tables of at least two breakpoints");
    }
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1])) {
        throw std::invalid_argument("piecewise lift: breakpoints must be strictly increasing");
      }
    }
    if (std::abs(xs_.back() - xs_.front() - 1.0) > 1e-12 || std::abs(ys_.back() - ys_.front() - 1.0) > 1e-12) {
      throw std::invalid_argument("piecewise lift: table must span exactly one period");
    }
  }

  double eval(double u) const { return interp(xs_, ys_, u); }
  double inverse(double v) const { return interp(ys_, xs_, v); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  static double interp(const std::vector<double>& from, const std::vector<double>& to, double u) {
    const double k = std::floor(u - from.front());
    const double t = u - k;
    auto it = std::upper_bound(from.begin(), from.end(), t);
    std::size_t i = static_cast<std::size_t>(it - from.begin());
    i = std::clamp<std::size_t>(i, 1, from.size() - 1);
    const double s = (t - from[i - 1]) / (from[i] - from[i - 1]);
    return k + to[i - 1] + s * (to[i] - to[i - 1]);
  }

  std::vector<double> xs_, ys_;
};

inline CircleLift piecewise_lift(std::vector<double> xs, std::vector<double> ys, std::string label = "piecewise") {
  auto table = std::make_shared<const PiecewiseTable>(std::move(xs), std::move(ys));
  std::vector<double> seams;
  for (std::size_t i = 0; i + 1 < table->xs().size(); ++i) seams.push_back(frac(table->xs()[i]));
  return {[table](double u) { return table->eval(u); }, [table](double v) { return table->inverse(v); },
          std::move(label), std::move(seams)};
}

/**
 * The Moebius map x -> a x + b renormalized into each of the m blocks
 * [i/m, (i+1)/m]; both block endpoints play the role of infinity.
 */
inline CircleLift block_glued_mobius(int m, double a, double b, std::string label = {}) {
  if (m < 1) throw std::invalid_argument("block_glued_mobius: need at least one block");
  if (label.empty()) label = "glued" + std::to_string(m) + "(" + std::to_string(a) + "," + std::to_string(b) + ")";
  auto make = [m](double aa, double bb) {
    return [m, aa, bb](double u) {
      const double k = std::floor(u);
      const double t = (u - k) * m;
      const double i = std::min(std::floor(t), static_cast<double>(m - 1));
      return k + (i + detail::mobius_unit(aa, bb, t - i)) / m;
    };
  };
  std::vector<double> seams;
  for (int i = 0; i < m; ++i) seams.push_back(static_cast<double>(i) / m);
  return {make(a, b), make(1.0 / a, -b / a), std::move(label), std::move(seams)};
}

// ---------------------------------------------------------------------------
// Composition and inversion

/// Lift of f o g (g applied first).
inline CircleLift compose(const CircleLift& F, const CircleLift& G) {
  CircleLift out;
  out.eval = [f = F.eval, g = G.eval](double x) { return f(g(x)); };
  if (F.has_exact_inverse() && G.has_exact_inverse()) {
    out.exact_inverse = [fi = F.exact_inverse, gi = G.exact_inverse](double x) { return gi(fi(x)); };
  }
  out.label = F.label + "*" + G.label;
  out.seams = G.seams;
  return out;
}

inline constexpr double kInverseTol = 1e-12;
inline constexpr int kInverseMaxSteps = 60;

/// Solve F(y) = x for a monotone degree-one lift by bracketing then bisection.
inline double bisect_inverse(const std::function<double(double)>& F, double x) {
  const double guess = x - (F(x) - x);
  double lo = guess, hi = guess;
  for (int i = 0; F(lo) > x; ++i) {
    lo -= 1.0;
    if (i > 64) throw std::runtime_error("inverse: lift is not of degree one");
  }
  for (int i = 0; F(hi) < x; ++i) {
    hi += 1.0;
    if (i > 64) throw std::runtime_error("inverse: lift is not of degree one");
  }
  for (int step = 0; step < kInverseMaxSteps && hi - lo > kInverseTol * 1e-3; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (F(mid) < x ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct LiftCheck {
  double degree_one_defect = 0.0;  ///< sup |F(x+1) - F(x) - 1|
  bool monotone = true;
};

inline LiftCheck check_lift(const CircleLift& F, int grid = 1000) {
  LiftCheck r;
  double prev = F(0.0);
  for (int i = 0; i <= grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    const double y = F(x);
    r.degree_one_defect = std::max(r.degree_one_defect, std::abs(F(x + 1.0) - y - 1.0));
    if (i > 0 && !(y > prev)) r.monotone = false;
    prev = y;
  }
  return r;
}

/// Lift of f^-1. Uses the exact inverse when the lift carries one, bisection otherwise.
inline CircleLift inverse(const CircleLift& F) {
  CircleLift out;
  out.label = F.label + "^-1";
  out.exact_inverse = F.eval;
  if (F.has_exact_inverse()) {
    out.eval = F.exact_inverse;
  } else {
    if (!check_lift(F, 256).monotone) throw std::invalid_argument("inverse: lift is not strictly increasing");
    out.eval = [f = F.eval](double x) { return bisect_inverse(f, x); };
  }
  for (double s : F.seams) out.seams.push_back(frac(F(s)));
  return out;
}

/// Drop the closed-form inverse so that inversion goes through bisection.
inline CircleLift without_exact_inverse(CircleLift F) {
  F.exact_inverse = nullptr;
  return F;
}

inline double iterate(const CircleLift& F, double x, long k) {
  if (k >= 0) {
    for (long i = 0; i < k; ++i) x = F(x);
    return x;
  }
  const CircleLift G = inverse(F);
  for (long i = 0; i < -k; ++i) x = G(x);
  return x;
}

inline CircleLift power(const CircleLift& F, int k) {
  if (k == 0) return identity_lift();
  const CircleLift base = k > 0 ? F : inverse(F);
  CircleLift out = base;
  for (int i = 1; i < std::abs(k); ++i) out = compose(base, out);
  out.label = F.label + "^" + std::to_string(k);
  return out;
}

// ---------------------------------------------------------------------------
// Rotation numbers

struct RationalWitness {
  long p = 0;  ///< numerator reduced into [0, q)
  long q = 1;
  long lift_p = 0;  ///< F^q(x) = x + lift_p at the certificate point
  double point = 0.0;
  double residual = 0.0;
};

struct RotationNumberEstimate {
  double value = 0.0;  ///< in [0,1)
  long iterates_used = 0;
  std::optional<RationalWitness> rational_witness;
  double error_bound = 0.0;
  double lift_value = 0.0;  ///< (F^N(0) - 0) / N before reduction mod 1
};

inline constexpr int kRotationQMax = 64;
inline constexpr double kRotationTol = 1e-8;

namespace detail {

/// Smallest |g| found on [0,1) by grid scan, bisection on sign changes and
/// golden-section refinement at local minima of |g|.
inline std::pair<double, double> min_abs_root(const std::function<double(double)>& g, int grid) {
  std::vector<double> xs(grid + 1), gs(grid + 1);
  for (int i = 0; i <= grid; ++i) {
    xs[i] = static_cast<double>(i) / grid;
    gs[i] = g(xs[i]);
  }
  double best_x = 0.0, best = std::abs(gs[0]);
  auto consider = [&](double x, double v) {
    if (std::abs(v) < best) {
      best = std::abs(v);
      best_x = x;
    }
  };
  for (int i = 0; i <= grid; ++i) consider(xs[i], gs[i]);
  for (int i = 0; i < grid; ++i) {
    if ((gs[i] < 0) != (gs[i + 1] < 0)) {
      double lo = xs[i], hi = xs[i + 1], glo = gs[i];
      for (int s = 0; s < 60; ++s) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0) == (glo < 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      consider(lo, g(lo));
      consider(hi, g(hi));
    }
  }
  // Tangential zeros have no sign change; refine around local minima of |g|.
  for (int i = 1; i < grid; ++i) {
    const double c = std::abs(gs[i]);
    if (c <= std::abs(gs[i - 1]) && c <= std::abs(gs[i + 1])) {
      double a = xs[i - 1], b = xs[i + 1];
      constexpr double phi = 0.6180339887498949;
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double f1 = std::abs(g(x1)), f2 = std::abs(g(x2));
      for (int s = 0; s < 60; ++s) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - phi * (b - a);
          f1 = std::abs(g(x1));
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + phi * (b - a);
          f2 = std::abs(g(x2));
        }
      }
      consider(x1, g(x1));
      consider(x2, g(x2));
    }
  }
  return {best_x, best};
}

}  // namespace detail

/**
 * (F^N(0) - 0)/N reduced mod 1, plus a search for a rational certificate:
 * the first q <= q_max such that F^q(x) - x - p has a root to within tol
 * for some integer p near q times the estimate.
 */
inline RotationNumberEstimate rotation_number(const CircleLift& F, long iterates = 100000, int q_max = kRotationQMax,
                                              double tol = kRotationTol, int grid = 512) {
  if (iterates < 1) throw std::invalid_argument("rotation_number: iterates must be >= 1");
  RotationNumberEstimate est;
  est.iterates_used = iterates;
  double x = 0.0;
  for (long i = 0; i < iterates; ++i) x = F(x);
  est.lift_value = x / static_cast<double>(iterates);
  est.value = frac(est.lift_value);
  if (est.value >= 1.0) est.value = 0.0;
  est.error_bound = 1.0 / static_cast<double>(iterates) + tol;

  for (int q = 1; q <= q_max && !est.rational_witness; ++q) {
    const long p0 = std::lround(q * est.lift_value);
    for (long p : {p0, p0 - 1, p0 + 1}) {
      // |F^N(0)/N - rho| < 1/N, so p/q outside that window cannot be the rotation number.
      if (std::abs(q * est.lift_value - static_cast<double>(p)) > q * 2.0 / static_cast<double>(iterates) + tol) continue;
      auto g = [&F, q, p](double y) {
        double z = y;
        for (int i = 0; i < q; ++i) z = F(z);
        return z - y - static_cast<double>(p);
      };
      auto [xm, gm] = detail::min_abs_root(g, grid);
      if (gm < tol) {
        RationalWitness w;
        w.q = q;
        w.lift_p = p;
        w.p = ((p % q) + q) % q;
        w.point = xm;
        w.residual = gm;
        est.rational_witness = w;
        est.value = static_cast<double>(w.p) / static_cast<double>(w.q);
        break;
      }
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Denjoy-like blow-up of an irrational rotation

struct GapInterval {
  long orbit_index = 0;  ///< k such that the gap replaces the orbit point frac(k alpha)
  double left = 0.0;     ///< in [0,1)
  double length = 0.0;

  bool contains_interior(double u) const {
    const double t = frac(u - left);
    return t > 0.0 && t < length;
  }
};

struct DenjoyMap {
  CircleLift lift;
  std::vector<GapInterval> gaps;
  double alpha = 0.0;
  int depth = 0;
  double gap_ratio = 0.0;
  /// Semiconjugacy direction: old (rotation) coordinate -> new coordinate.
  std::function<double(double)> blow_up;

  double total_gap_length() const {
    double s = 0.0;
    for (const auto& g : gaps) s += g.length;
    return s;
  }
  bool in_gap(double u) const {
    return std::any_of(gaps.begin(), gaps.end(), [u](const GapInterval& g) { return g.contains_interior(u); });
  }
};

/// Fraction of the circle occupied by inserted intervals.
inline constexpr double kDenjoyGapMass = 0.5;
/// Width, in rotation coordinates, of the segment blown up into each gap.
inline constexpr double kDenjoySeedWidth = 1e-12;

/**
 * Blow up the rotation orbit points frac(k alpha), |k| <= depth, into intervals
 * of length proportional to gap_ratio^|k|. Each orbit point is first thickened
 * to a segment of width kDenjoySeedWidth so the result is a homeomorphism; the
 * map is piecewise affine, carrying gap k onto gap k+1.
 * depth == 0 gives the plain rotation.
 */
inline DenjoyMap denjoy_lift(double alpha, int depth, double gap_ratio) {
  if (!(gap_ratio > 0.0) || !(gap_ratio < 1.0)) throw std::invalid_argument("denjoy_lift: gap_ratio must lie in (0,1)");
  if (depth < 0) throw std::invalid_argument("denjoy_lift: depth must be >= 0");
  DenjoyMap out;
  out.alpha = alpha;
  out.depth = depth;
  out.gap_ratio = gap_ratio;
  if (depth == 0) {
    out.lift = rotation(alpha, "denjoy(depth=0)");
    out.blow_up = [](double x) { return x; };
    return out;
  }

  const double w = kDenjoySeedWidth;
  std::vector<double> centers, masses;
  double weight_sum = 0.0;
  for (int k = -depth; k <= depth; ++k) weight_sum += std::pow(gap_ratio, std::abs(k));
  // Inserted mass M relative to the unit circle so that gaps fill kDenjoyGapMass of the new circle.
  const double M = kDenjoyGapMass / (1.0 - kDenjoyGapMass);
  for (int k = -depth; k <= depth; ++k) {
    centers.push_back(frac(k * alpha));
    masses.push_back(M * std::pow(gap_ratio, std::abs(k)) / weight_sum);
  }
  const double total = 1.0 + M;

  // Cumulative distribution of Lebesgue + sum_k masses[k] * uniform(center_k +- w/2), normalized.
  auto phi = [centers, masses, w, total](double x) {
    double s = x;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double y = x - centers[k];
      const double n = std::floor(y + 0.5);
      const double r = y - n;
      s += masses[k] * (n + std::clamp(r / w + 0.5, 0.0, 1.0));
    }
    return s / total;
  };

  // Breakpoints of G = phi o R_alpha o phi^-1, expressed in rotation coordinates.
  std::vector<double> pts;
  for (double c : centers) {
    for (double e : {c - w / 2, c + w / 2}) {
      pts.push_back(frac(e));
      pts.push_back(frac(e - alpha));
    }
  }
  pts.push_back(0.0);
  std::sort(pts.begin(), pts.end());
  // e - alpha and the neighbouring seed edge agree up to rounding; keep one of them.
  const double merge = w * 1e-2;
  std::vector<double> kept;
  for (double p : pts) {
    if (p > 1.0 - merge) continue;
    if (kept.empty() || p - kept.back() > merge) kept.push_back(p);
  }
  pts.swap(kept);
  std::vector<double> xs, ys;
  for (double p : pts) {
    xs.push_back(phi(p));
    ys.push_back(phi(p + alpha));
  }
  xs.push_back(xs.front() + 1.0);
  ys.push_back(ys.front() + 1.0);
  auto table = std::make_shared<const PiecewiseTable>(xs, ys);
  out.lift = {[table](double u) { return table->eval(u); }, [table](double v) { return table->inverse(v); },
              "denjoy(depth=" + std::to_string(depth) + ")",
              {}};
  for (int k = -depth; k <= depth; ++k) {
    const double c = centers[static_cast<std::size_t>(k + depth)];
    const double a = phi(c - w / 2), b = phi(c + w / 2);
    out.gaps.push_back({k, frac(a), b - a});
  }
  out.blow_up = phi;
  return out;
}

}  // namespace bsdyn
