#pragma once

/**
 * @file bsgroup.hpp
 * @brief Words in BS(1,n) = <a, b | a b a^-1 = b^n> and actions a -> h, b -> f.
 *
 * A word acts as the composition of its letters, so the rightmost letter is
 * applied first: "a^-1 b a" is h^-1 o f o h.
 */

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bsdyn/circle.hpp"
#include "bsdyn/parallel.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn {

// ---------------------------------------------------------------------------
// Words

struct Run {
  char letter = 'a';  ///< 'a' or 'b'
  long long exponent = 1;
  bool operator==(const Run&) const = default;
};

/// Run-length encoded word; exponents nonzero, adjacent runs use distinct letters.
class Word {
 public:
  Word() = default;
  explicit Word(const std::vector<Run>& runs) {
    for (const auto& r : runs) append(r);
  }

  void append(Run r) {
    if (r.letter != 'a' && r.letter != 'b') throw std::invalid_argument("Word: letters must be 'a' or 'b'");
    if (r.exponent == 0) return;
    if (!runs_.empty() && runs_.back().letter == r.letter) {
      runs_.back().exponent += r.exponent;
      if (runs_.back().exponent == 0) runs_.pop_back();
      return;
    }
    runs_.push_back(r);
  }

  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }
  long long length() const {
    long long s = 0;
    for (const auto& r : runs_) s += std::llabs(r.exponent);
    return s;
  }
  bool operator==(const Word&) const = default;

  Word operator*(const Word& other) const {
    Word w = *this;
    for (const auto& r : other.runs_) w.append(r);
    return w;
  }

  Word inverse() const {
    Word w;
    for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) w.append({it->letter, -it->exponent});
    return w;
  }

  std::string to_string() const {
    std::string s;
    for (const auto& r : runs_) {
      if (!s.empty()) s += ' ';
      s += r.letter;
      if (r.exponent != 1) s += "^" + std::to_string(r.exponent);
    }
    return s;
  }

  /// Parses whitespace-separated runs such as "a^-2 b^3 a". 'A' and 'B' denote inverses.
  static Word parse(const std::string& text) {
    Word w;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      char c = tok[0];
      long long sign = 1;
      if (c == 'A' || c == 'B') {
        sign = -1;
        c = static_cast<char>(std::tolower(c));
      }
      if (c != 'a' && c != 'b') throw std::invalid_argument("Word::parse: unexpected token '" + tok + "'");
      long long e = 1;
      if (tok.size() > 1) {
        if (tok[1] != '^' || tok.size() < 3) throw std::invalid_argument("Word::parse: malformed run '" + tok + "'");
        std::size_t used = 0;
        e = std::stoll(tok.substr(2), &used);
        if (used != tok.size() - 2) throw std::invalid_argument("Word::parse: malformed exponent '" + tok + "'");
      }
      w.append({c, sign * e});
    }
    return w;
  }

 private:
  std::vector<Run> runs_;
};

/**
 * Normal form a^-p b^m a^q (p, q >= 0, and n does not divide m when p, q > 0).
 *
 * Rewrites left to right with a b^m = b^(n m) a and b^m a^-1 = a^-1 b^(n m),
 * then cancels a^-1 b^(n m) a -> b^m while possible.
 */
inline Word normalize(const Word& w, int n) {
  using boost::multiprecision::cpp_int;
  if (n < 2) throw std::invalid_argument("normalize: n must be >= 2");
  long long p = 0, q = 0;
  cpp_int m = 0;
  for (const auto& r : w.runs()) {
    if (r.letter == 'b') {
      m += boost::multiprecision::pow(cpp_int(n), static_cast<unsigned>(q)) * r.exponent;
    } else if (r.exponent > 0) {
      q += r.exponent;
    } else {
      for (long long i = 0; i < -r.exponent; ++i) {
        if (q > 0) {
          --q;
        } else {
          ++p;
          m *= n;
        }
      }
    }
  }
  while (p > 0 && q > 0 && m % n == 0) {
    m /= n;
    --p;
    --q;
  }
  if (m > std::numeric_limits<long long>::max() || m < std::numeric_limits<long long>::min()) {
    throw std::overflow_error("normalize: b exponent of the normal form exceeds 64 bits");
  }
  Word out;
  out.append({'a', -p});
  out.append({'b', static_cast<long long>(m)});
  out.append({'a', q});
  return out;
}

// ---------------------------------------------------------------------------
// Spaces

enum class Space { Circle, Torus };

inline const char* to_string(Space s) { return s == Space::Circle ? "circle" : "torus"; }

template <class Lift>
struct SpaceTraits;

template <>
struct SpaceTraits<CircleLift> {
  using Point = double;
  static constexpr Space space = Space::Circle;
  static double dist(double a, double b) { return circle_dist(a, b); }
  static double reduce(double a) { return frac(a); }
  /// `count` evenly spaced points.
  static std::vector<double> grid(int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back((i + 0.5) / count);
    return g;
  }
};

template <>
struct SpaceTraits<TorusLift> {
  using Point = Vec2;
  static constexpr Space space = Space::Torus;
  static double dist(const Vec2& a, const Vec2& b) { return torus_dist(a, b); }
  static Vec2 reduce(const Vec2& a) { return bsdyn::reduce(a); }
  /// `count` x `count` points.
  static std::vector<Vec2> grid(int count) {
    std::vector<Vec2> g;
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) g.push_back({(i + 0.5) / count, (j + 0.5) / count});
    return g;
  }
};

template <class Lift>
using PointOf = typename SpaceTraits<Lift>::Point;

// ---------------------------------------------------------------------------
// Relation residuals

struct RelationResidual {
  double residual = 0.0;           ///< sup |h f h^-1 - f^n|
  double iterated_residual = 0.0;  ///< sup |h^2 f h^-2 - f^(n^2)|
};

/// Default grids give 10^4 points on both spaces.
template <class Lift>
constexpr int default_residual_grid() {
  return SpaceTraits<Lift>::space == Space::Circle ? 10000 : 100;
}

template <class Lift>
RelationResidual relation_residual(const Lift& f, const Lift& h, int n, int grid = default_residual_grid<Lift>()) {
  using T = SpaceTraits<Lift>;
  if (n < 1) throw std::invalid_argument("relation_residual: n must be positive");
  const auto pts = T::grid(grid);
  const Lift hi = inverse(h);
  std::vector<RelationResidual> per(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto x = pts[i];
    auto lhs = h(f(hi(x)));
    auto rhs = x;
    for (int k = 0; k < n; ++k) rhs = f(rhs);
    per[i].residual = T::dist(lhs, rhs);
    auto lhs2 = h(h(f(hi(hi(x)))));
    auto rhs2 = x;
    for (int k = 0; k < n * n; ++k) rhs2 = f(rhs2);
    per[i].iterated_residual = T::dist(lhs2, rhs2);
  });
  RelationResidual r;
  for (const auto& p : per) {
    r.residual = std::max(r.residual, p.residual);
    r.iterated_residual = std::max(r.iterated_residual, p.iterated_residual);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Actions

inline constexpr double kRelationThreshold = 1e-8;

/// Generator pair (f, h) with h f h^-1 = f^n, verified at construction.
template <class Lift>
struct BSAction {
  int n = 2;
  Lift f;
  Lift h;
  RelationResidual residual;
  std::string label;
  std::string provenance;
  static constexpr Space space = SpaceTraits<Lift>::space;
};

using CircleAction = BSAction<CircleLift>;
using TorusAction = BSAction<TorusLift>;

template <class Lift>
BSAction<Lift> make_action(Lift f, Lift h, int n, std::string label, std::string provenance = {},
                           double threshold = kRelationThreshold) {
  if (n < 2) throw std::invalid_argument("make_action: n must be >= 2");
  BSAction<Lift> a{n, std::move(f), std::move(h), {}, std::move(label), std::move(provenance)};
  a.residual = relation_residual(a.f, a.h, n);
  if (!(a.residual.residual < threshold)) {
    throw std::runtime_error("make_action(" + a.label + "): relation residual " + std::to_string(a.residual.residual) +
                             " exceeds threshold");
  }
  return a;
}

template <class Lift>
PointOf<Lift> apply_power(const Lift& g, const Lift& g_inv, PointOf<Lift> x, long long e) {
  if (e >= 0) {
    for (long long i = 0; i < e; ++i) x = g(x);
  } else {
    for (long long i = 0; i < -e; ++i) x = g_inv(x);
  }
  return x;
}

/// Applies the word as a composition: the rightmost run acts first.
template <class Lift>
PointOf<Lift> evaluate(const Word& w, const BSAction<Lift>& action, PointOf<Lift> x) {
  const Lift fi = inverse(action.f), hi = inverse(action.h);
  const auto& runs = w.runs();
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    x = it->letter == 'a' ? apply_power(action.h, hi, x, it->exponent) : apply_power(action.f, fi, x, it->exponent);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Finite orbits

inline constexpr double kMergeTol = 1e-6;
inline constexpr std::size_t kMaxOrbitSize = 10000;

template <class Lift>
struct FiniteOrbitResult {
  bool finite = false;
  std::vector<PointOf<Lift>> points;  ///< closure found (truncated at max_size when not finite)
};

namespace detail {

template <class Lift>
FiniteOrbitResult<Lift> orbit_bfs(const BSAction<Lift>& action, PointOf<Lift> seed, double merge_tol,
                                  std::size_t max_size) {
  using T = SpaceTraits<Lift>;
  const Lift fi = inverse(action.f), hi = inverse(action.h);
  const Lift* gens[4] = {&action.f, &fi, &action.h, &hi};
  FiniteOrbitResult<Lift> result;
  // Spatial hash on cells of side merge_tol; neighbours within one cell are checked.
  std::unordered_map<long long, std::vector<std::size_t>> buckets;
  const long long cells = static_cast<long long>(std::ceil(1.0 / merge_tol));
  auto key_of = [&](const PointOf<Lift>& p, long long di, long long dj) {
    if constexpr (T::space == Space::Circle) {
      long long i = static_cast<long long>(std::floor(p / merge_tol));
      return ((i + di) % cells + cells) % cells;
    } else {
      long long i = static_cast<long long>(std::floor(p[0] / merge_tol));
      long long j = static_cast<long long>(std::floor(p[1] / merge_tol));
      return (((i + di) % cells + cells) % cells) * cells + (((j + dj) % cells + cells) % cells);
    }
  };
  auto find = [&](const PointOf<Lift>& p) -> bool {
    const long long span = (T::space == Space::Circle) ? 0 : 1;
    for (long long di = -1; di <= 1; ++di)
      for (long long dj = -span; dj <= span; ++dj) {
        auto it = buckets.find(key_of(p, di, dj));
        if (it == buckets.end()) continue;
        for (std::size_t idx : it->second)
          if (T::dist(result.points[idx], p) < merge_tol) return true;
      }
    return false;
  };
  auto insert = [&](const PointOf<Lift>& p) {
    buckets[key_of(p, 0, 0)].push_back(result.points.size());
    result.points.push_back(p);
  };
  insert(T::reduce(seed));
  for (std::size_t head = 0; head < result.points.size(); ++head) {
    for (const Lift* g : gens) {
      const auto y = T::reduce((*g)(result.points[head]));
      if (find(y)) continue;
      if (result.points.size() >= max_size) return result;
      insert(y);
    }
  }
  result.finite = true;
  return result;
}

}  // namespace detail

/**
 * Breadth-first closure of {seed} under f, f^-1, h, h^-1, merging points closer
 * than merge_tol. A finite answer is re-verified at merge_tol / 10 and must
 * reproduce the same cardinality.
 */
template <class Lift>
FiniteOrbitResult<Lift> finite_bs_orbit(const BSAction<Lift>& action, PointOf<Lift> seed, double merge_tol = kMergeTol,
                                        std::size_t max_size = kMaxOrbitSize) {
  auto r = detail::orbit_bfs(action, seed, merge_tol, max_size);
  if (r.finite) {
    auto check = detail::orbit_bfs(action, seed, merge_tol / 10.0, max_size);
    if (!check.finite || check.points.size() != r.points.size()) r.finite = false;
  }
  return r;
}

}  // namespace bsdyn
