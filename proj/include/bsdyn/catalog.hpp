#pragma once

/**
 * @file catalog.hpp
 * @brief Constructors for the explicit BS(1,n) actions, each returned verified.
 *
 * Every constructor runs relation_residual on a 10^4-point grid and throws if
 * h f h^-1 = f^n fails by more than 1e-8.
 */

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn {

inline double golden_fraction() { return std::numbers::phi - 1.0; }

/// Circle homeomorphism k used by the fiber of product actions.
struct KSpec {
  enum class Kind { Rotation, Denjoy, Custom };
  Kind kind = Kind::Rotation;
  double alpha = 0.0;
  int depth = 12;
  double gap_ratio = 0.5;
  std::string text;
  std::optional<CircleLift> custom;

  static KSpec rotation(double alpha, std::string text = {}) {
    KSpec k;
    k.alpha = alpha;
    k.text = text.empty() ? "rot:" + std::to_string(alpha) : std::move(text);
    return k;
  }
  static KSpec denjoy(double alpha, int depth, double gap_ratio) {
    KSpec k;
    k.kind = Kind::Denjoy;
    k.alpha = alpha;
    k.depth = depth;
    k.gap_ratio = gap_ratio;
    k.text = "denjoy:" + std::to_string(alpha) + ":" + std::to_string(depth) + ":" + std::to_string(gap_ratio);
    return k;
  }
  static KSpec from_lift(CircleLift lift) {
    KSpec k;
    k.kind = Kind::Custom;
    k.text = lift.label;
    k.custom = std::move(lift);
    return k;
  }

  /// Parses "rot:<p/q | real | ln<m> | golden>" or "denjoy[:<alpha>[:<depth>[:<ratio>]]]".
  static KSpec parse(const std::string& s) {
    auto parse_real = [](const std::string& t) -> double {
      if (t == "golden") return golden_fraction();
      if (t.rfind("ln", 0) == 0) return frac(std::log(std::stod(t.substr(2))));
      if (auto slash = t.find('/'); slash != std::string::npos) {
        const double p = std::stod(t.substr(0, slash)), q = std::stod(t.substr(slash + 1));
        if (q == 0.0) throw std::invalid_argument("k-spec: zero denominator");
        return p / q;
      }
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument("k-spec: malformed number '" + t + "'");
      return v;
    };
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i == s.size() || s[i] == ':') {
        parts.push_back(s.substr(start, i - start));
        start = i + 1;
      }
    }
    try {
      if (parts[0] == "rot" && parts.size() == 2) return rotation(parse_real(parts[1]), s);
      if (parts[0] == "denjoy" && parts.size() <= 4) {
        KSpec k = denjoy(parts.size() > 1 ? parse_real(parts[1]) : golden_fraction(),
                         parts.size() > 2 ? std::stoi(parts[2]) : 12, parts.size() > 3 ? parse_real(parts[3]) : 0.5);
        k.text = s;
        return k;
      }
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("invalid k-spec '" + s + "'");
    }
    throw std::invalid_argument("invalid k-spec '" + s + "' (expected rot:<value> or denjoy[:alpha[:depth[:ratio]]])");
  }

  std::optional<DenjoyMap> denjoy_map() const {
    if (kind != Kind::Denjoy) return std::nullopt;
    return denjoy_lift(alpha, depth, gap_ratio);
  }

  CircleLift build() const {
    switch (kind) {
      case Kind::Rotation:
        return bsdyn::rotation(alpha, text);
      case Kind::Denjoy:
        return denjoy_lift(alpha, depth, gap_ratio).lift;
      case Kind::Custom:
        return *custom;
    }
    throw std::logic_error("KSpec::build: unknown kind");
  }
};

namespace catalog {

inline double ln_mod1(int n) { return frac(std::log(static_cast<double>(n))); }

inline CircleLift f0_line() { return mobius_affine(1.0, 1.0, "x+1"); }
inline CircleLift h0_line(int n) { return mobius_affine(static_cast<double>(n), 0.0, std::to_string(n) + "x"); }

inline void require_n(int n, int min, const char* who) {
  if (n < min) throw std::invalid_argument(std::string(who) + ": n must be >= " + std::to_string(min));
}

/// f(x) = x + 1, h(x) = n x on the projective line.
inline CircleAction standard_line(int n) {
  require_n(n, 2, "standard_line");
  return make_action(f0_line(), h0_line(n), n, "standard-line", "standard action by Moebius maps");
}

/// f0(x, t) = (x + 1, t), h(x, t) = (n x, k(t)).
inline TorusAction product_action(int n, const KSpec& k) {
  require_n(n, 2, "product_action");
  const CircleLift kl = k.build();
  return make_action(product(f0_line(), identity_lift(), "f0"), product(h0_line(n), kl, "h_k"), n,
                     "product[" + k.text + "]", "extended induced action <f0, h_k>");
}

/// f0(x, t) = (x + 1, t), h0(x, t) = (n x, t + ln n).
inline TorusAction standard_torus(int n) {
  require_n(n, 2, "standard_torus");
  auto a = product_action(n, KSpec::rotation(ln_mod1(n), "rot:ln" + std::to_string(n)));
  a.label = "standard-torus";
  a.provenance = "standard action of the affine group restricted to <(1,1),(n,0)>";
  return a;
}

/// h_eps(x, t) = (n x, t + ln n + eps).
inline TorusAction perturbed_torus(int n, double eps) {
  require_n(n, 2, "perturbed_torus");
  auto a = product_action(n, KSpec::rotation(frac(std::log(static_cast<double>(n)) + eps)));
  a.label = "perturbed-torus(eps=" + std::to_string(eps) + ")";
  a.provenance = "rotation of the fiber perturbed by eps";
  return a;
}

/**
 * f = R_{1/(n-1)} o f_hat with f_hat, h the standard action glued into the n - 1
 * blocks [i/(n-1), (i+1)/(n-1)]. The relation forces the block count to divide n - 1.
 */
inline CircleAction periodic_circle_example(int n) {
  if (n == 2) {
    throw std::invalid_argument(
        "periodic_circle_example: n = 2 gives a single block and f = f_hat, which has fixed points; use n >= 3");
  }
  require_n(n, 3, "periodic_circle_example");
  const int m = n - 1;
  const CircleLift fhat = block_glued_mobius(m, 1.0, 1.0, "f_hat");
  const CircleLift h = block_glued_mobius(m, static_cast<double>(n), 0.0, "h_glued");
  CircleLift f = compose(rotation(1.0 / m, "R"), fhat);
  f.label = "R*f_hat";
  f.seams = fhat.seams;
  return make_action(f, h, n, "periodic-circle",
                     "glued standard actions on n-1 blocks; a block count not dividing n-1 breaks the relation");
}

/// F(x, y) = (x + 1, f(y)), H(x, y) = (n x, h(y)) with (f, h) the periodic circle example.
inline TorusAction periodic_torus_example(int n) {
  const CircleAction c = periodic_circle_example(n);
  return make_action(product(f0_line(), c.f, "F"), product(h0_line(n), c.h, "H"), n, "periodic-torus",
                     "product of the standard line action with the periodic circle example");
}

/// f(x, t) = (x + 1, t + 1), h(x, t) = (n x, n t), both factors projective.
inline TorusAction morse_smale_example(int n) {
  require_n(n, 2, "morse_smale_example");
  return make_action(product(f0_line(), f0_line(), "fbar0"), product(h0_line(n), h0_line(n), "hbar0"), n,
                     "morse-smale", "persistent global fixed point at (inf, inf)");
}

/// f = identity, h = k. Not faithful; residual is round-off only.
inline CircleAction nonfaithful_circle(const KSpec& k, int n = 2) {
  require_n(n, 2, "nonfaithful_circle");
  return make_action(identity_lift(), k.build(), n, "nonfaithful-circle[" + k.text + "]",
                     "affine group acting through a circle flow");
}

/// Simultaneous conjugation of both generators; always preserves the relation.
inline TorusAction conjugated(const TorusAction& a, const TorusLift& phi) {
  return make_action(conjugate(phi, a.f), conjugate(phi, a.h), a.n, a.label + "^" + phi.label, a.provenance);
}

/// One bump of C^0 size `size` with a random centre and direction.
inline TorusLift random_bump_diffeo(std::uint64_t seed, double size, double radius = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec2 c{unit(rng), unit(rng)};
  const double angle = 2.0 * kPi * unit(rng);
  return bump_diffeo({Bump{c, radius, {size * std::cos(angle), size * std::sin(angle)}}},
                     "bump(seed=" + std::to_string(seed) + ")");
}

// ---------------------------------------------------------------------------
// Registry

struct CatalogEntry {
  std::string id;
  Space space;
  std::string description;
  std::string params;
};

inline const std::vector<CatalogEntry>& entries() {
  static const std::vector<CatalogEntry> list{
      {"standard-line", Space::Circle, "f(x)=x+1, h(x)=nx on the projective line", "n"},
      {"standard-torus", Space::Torus, "f0=(x+1,t), h0=(nx, t+ln n)", "n"},
      {"product", Space::Torus, "f0=(x+1,t), h_k=(nx, k(t))", "n, k"},
      {"periodic-circle", Space::Circle, "f=R_{1/(n-1)} o f_hat: periodic points, no fixed point", "n>=3"},
      {"periodic-torus", Space::Torus, "F=(x+1, f(y)), H=(nx, h(y))", "n>=3"},
      {"perturbed-torus", Space::Torus, "f0, h_eps=(nx, t+ln n+eps)", "n, eps"},
      {"morse-smale", Space::Torus, "(x+1, t+1), (nx, nt) on (R u inf)^2", "n"},
      {"nonfaithful-circle", Space::Circle, "f=id, h=k", "n, k"},
  };
  return list;
}

struct ActionSpec {
  std::string id;
  int n = 2;
  double eps = 0.0;
  std::string k = "rot:1/3";
};

using AnyAction = std::variant<CircleAction, TorusAction>;

inline AnyAction build(const ActionSpec& s) {
  if (s.id == "standard-line") return standard_line(s.n);
  if (s.id == "standard-torus") return standard_torus(s.n);
  if (s.id == "product") return product_action(s.n, KSpec::parse(s.k));
  if (s.id == "periodic-circle") return periodic_circle_example(s.n);
  if (s.id == "periodic-torus") return periodic_torus_example(s.n);
  if (s.id == "perturbed-torus") return perturbed_torus(s.n, s.eps);
  if (s.id == "morse-smale") return morse_smale_example(s.n);
  if (s.id == "nonfaithful-circle") return nonfaithful_circle(KSpec::parse(s.k), s.n);
  throw std::invalid_argument("unknown catalog id '" + s.id + "'");
}

}  // namespace catalog

/// min over 1 <= k <= kmax of the grid sup displacement of f^k; > 1e-3 is evidence f has infinite order.
template <class Lift>
double faithfulness_evidence(const BSAction<Lift>& a, int kmax = 64, int grid = 64) {
  using T = SpaceTraits<Lift>;
  const auto pts = T::grid(grid);
  double worst = std::numeric_limits<double>::infinity();
  std::vector<PointOf<Lift>> cur(pts.begin(), pts.end());
  for (int k = 1; k <= kmax; ++k) {
    double sup = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cur[i] = a.f(cur[i]);
      sup = std::max(sup, T::dist(cur[i], pts[i]));
    }
    worst = std::min(worst, sup);
  }
  return worst;
}

}  // namespace bsdyn
