#pragma once

/**
 * @file gl2z.hpp
 * @brief Exact 2x2 integer and rational matrix algebra.
 *
 * Linear parts of torus lifts live in GL(2,Z). This header provides the
 * finite-order test, a bounded conjugacy search in GL(2,Z), the
 * compatibility check A_h A_f A_h^-1 = A_f^n, and the exact affine
 * fixed-point solver used to pin rotation vectors of BS(1,n) actions.
 * Nothing in here uses floating point.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace bsdyn {

using Rational = boost::rational<std::int64_t>;

/// Row-major 2x2 integer matrix [[a,b],[c,d]].
struct IntMatrix2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  static constexpr IntMatrix2 identity() { return {1, 0, 0, 1}; }

  constexpr std::int64_t det() const { return a * d - b * c; }
  constexpr std::int64_t trace() const { return a + d; }
  constexpr bool is_unimodular() const { return det() == 1 || det() == -1; }

  constexpr IntMatrix2 operator*(const IntMatrix2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  constexpr IntMatrix2 operator-() const { return {-a, -b, -c, -d}; }
  constexpr bool operator==(const IntMatrix2&) const = default;

  /// Exact inverse; only defined for unimodular matrices.
  IntMatrix2 inverse() const {
    const auto D = det();
    if (D != 1 && D != -1) {
      throw std::invalid_argument("IntMatrix2::inverse: matrix is not unimodular");
    }
    return {d * D, -b * D, -c * D, a * D};
  }

  std::array<std::int64_t, 2> apply(std::int64_t x, std::int64_t y) const {
    return {a * x + b * y, c * x + d * y};
  }

  std::string to_string() const {
    return "[[" + std::to_string(a) + "," + std::to_string(b) + "],[" + std::to_string(c) + "," +
           std::to_string(d) + "]]";
  }
};

inline IntMatrix2 power(IntMatrix2 m, unsigned k) {
  IntMatrix2 r = IntMatrix2::identity();
  while (k) {
    if (k & 1u) r = r * m;
    m = m * m;
    k >>= 1u;
  }
  return r;
}

/// Linear parts must be unimodular; raw matrices are unconstrained.
inline IntMatrix2 make_linear_part(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  IntMatrix2 m{a, b, c, d};
  if (!m.is_unimodular()) {
    throw std::invalid_argument("linear part must have determinant +1 or -1, got " + m.to_string());
  }
  return m;
}

using RationalVector2 = std::array<Rational, 2>;

struct RationalMatrix2 {
  Rational a{1}, b{0}, c{0}, d{1};

  static RationalMatrix2 from(const IntMatrix2& m) {
    return {Rational(m.a), Rational(m.b), Rational(m.c), Rational(m.d)};
  }
  Rational det() const { return a * d - b * c; }
  Rational trace() const { return a + d; }
  RationalVector2 apply(const RationalVector2& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }
  RationalMatrix2 operator*(const RationalMatrix2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  bool operator==(const RationalMatrix2&) const = default;
};

/// v -> linear * v + translation, over Q.
struct AffineMapQ2 {
  RationalMatrix2 linear;
  RationalVector2 translation{Rational(0), Rational(0)};

  RationalVector2 operator()(const RationalVector2& v) const {
    auto w = linear.apply(v);
    return {w[0] + translation[0], w[1] + translation[1]};
  }

  /// The map (1/n)(tau_Q o A): v -> (A v + Q) / n.
  static AffineMapQ2 bs_rotation_map(const IntMatrix2& A, std::array<std::int64_t, 2> Q, std::int64_t n) {
    if (n == 0) throw std::invalid_argument("bs_rotation_map: n must be nonzero");
    const Rational inv(1, n);
    auto L = RationalMatrix2::from(A);
    return {{L.a * inv, L.b * inv, L.c * inv, L.d * inv}, {Rational(Q[0]) * inv, Rational(Q[1]) * inv}};
  }
};

/// Least N <= 6 with A^N = I, or nullopt when A has infinite order.
inline std::optional<int> finite_order(const IntMatrix2& A) {
  if (!A.is_unimodular()) {
    throw std::invalid_argument("finite_order: |det| != 1 for " + A.to_string());
  }
  // Crystallographic restriction: any finite order in GL(2,Z) is 1, 2, 3, 4 or 6.
  IntMatrix2 p = A;
  for (int k = 1; k <= 6; ++k) {
    if (p == IntMatrix2::identity()) return k;
    p = p * A;
  }
  return std::nullopt;
}

/// True iff Ah * Af * Ah^-1 == Af^n exactly.
inline bool bs_linear_compatible(const IntMatrix2& Af, const IntMatrix2& Ah, int n) {
  if (!Af.is_unimodular() || !Ah.is_unimodular()) {
    throw std::invalid_argument("bs_linear_compatible: inputs must be unimodular");
  }
  if (n < 2) throw std::invalid_argument("bs_linear_compatible: n must be >= 2");
  return Ah * Af * Ah.inverse() == power(Af, static_cast<unsigned>(n));
}

/// Exact fixed point of v -> L v + t, when I - L is invertible.
inline std::optional<RationalVector2> affine_fixed_point(const AffineMapQ2& B) {
  // (I - L) v = t
  const Rational m00 = Rational(1) - B.linear.a, m01 = -B.linear.b;
  const Rational m10 = -B.linear.c, m11 = Rational(1) - B.linear.d;
  const Rational D = m00 * m11 - m01 * m10;
  if (D == Rational(0)) return std::nullopt;
  const auto& t = B.translation;
  return RationalVector2{(m11 * t[0] - m01 * t[1]) / D, (-m10 * t[0] + m00 * t[1]) / D};
}

namespace detail {

using IntVec4 = std::array<std::int64_t, 4>;

/// Integer basis of {v in Z^4 : M v = 0} by unimodular row reduction of [M^T | I].
inline std::vector<IntVec4> integer_kernel(const std::array<IntVec4, 4>& M) {
  std::array<IntVec4, 4> E{};  // E = M^T, reduced in place
  std::array<IntVec4, 4> U{};  // U * M^T = E
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      E[i][j] = M[j][i];
      U[i][j] = (i == j) ? 1 : 0;
    }
  }
  auto row_axpy = [&](int dst, int src, std::int64_t q) {
    for (int j = 0; j < 4; ++j) {
      E[dst][j] -= q * E[src][j];
      U[dst][j] -= q * U[src][j];
    }
  };
  int pivot_row = 0;
  for (int col = 0; col < 4 && pivot_row < 4; ++col) {
    // Euclid on the column entries below pivot_row until one nonzero remains.
    for (;;) {
      int best = -1;
      for (int r = pivot_row; r < 4; ++r) {
        if (E[r][col] != 0 && (best < 0 || std::llabs(E[r][col]) < std::llabs(E[best][col]))) best = r;
      }
      if (best < 0) break;
      std::swap(E[pivot_row], E[best]);
      std::swap(U[pivot_row], U[best]);
      bool done = true;
      for (int r = pivot_row + 1; r < 4; ++r) {
        if (E[r][col] != 0) {
          row_axpy(r, pivot_row, E[r][col] / E[pivot_row][col]);
          if (E[r][col] != 0) done = false;
        }
      }
      if (done) {
        ++pivot_row;
        break;
      }
    }
  }
  std::vector<IntVec4> basis;
  for (int r = pivot_row; r < 4; ++r) basis.push_back(U[r]);
  return basis;
}

}  // namespace detail

struct ConjugacyResult {
  std::optional<IntMatrix2> conjugator;  ///< X with X B X^-1 = A, if found
  std::vector<std::array<std::int64_t, 4>> kernel_basis;
  bool found() const { return conjugator.has_value(); }
};

/**
 * Search X in GL(2,Z) with X B X^-1 = A.
 *
 * XB = AX is a homogeneous 4x4 integer system; its solutions form a lattice.
 * Coefficient vectors over an integer basis of that lattice are enumerated
 * shell by shell in the sup norm up to `bound`; the first shell containing a
 * unimodular solution is searched completely and the solution with the
 * smallest entry 1-norm (then lexicographically largest) is returned. An
 * empty result only means no conjugator exists with coefficients <= bound.
 */
inline ConjugacyResult conjugate_in_gl2z(const IntMatrix2& A, const IntMatrix2& B, int bound) {
  if (!A.is_unimodular() || !B.is_unimodular()) {
    throw std::invalid_argument("conjugate_in_gl2z: inputs must be unimodular");
  }
  if (bound < 1) throw std::invalid_argument("conjugate_in_gl2z: bound must be positive");
  // Unknown X = (x, y, z, w) row-major. XB - AX = 0.
  const std::array<detail::IntVec4, 4> M{{
      {B.a - A.a, B.c, -A.b, 0},
      {B.b, B.d - A.a, 0, -A.b},
      {-A.c, 0, B.a - A.d, B.c},
      {0, -A.c, B.b, B.d - A.d},
  }};
  ConjugacyResult result;
  result.kernel_basis = detail::integer_kernel(M);
  const auto& basis = result.kernel_basis;
  const int k = static_cast<int>(basis.size());
  if (k == 0) return result;

  auto score = [](const IntMatrix2& X) {
    return std::llabs(X.a) + std::llabs(X.b) + std::llabs(X.c) + std::llabs(X.d);
  };
  auto better = [&](const IntMatrix2& X, const IntMatrix2& Y) {
    if (score(X) != score(Y)) return score(X) < score(Y);
    return std::array{X.a, X.b, X.c, X.d} > std::array{Y.a, Y.b, Y.c, Y.d};
  };

  std::vector<int> coeff(k);
  for (int shell = 1; shell <= bound; ++shell) {
    std::optional<IntMatrix2> best;
    std::fill(coeff.begin(), coeff.end(), -shell);
    for (;;) {
      int sup = 0;
      for (int c : coeff) sup = std::max(sup, std::abs(c));
      if (sup == shell) {
        IntMatrix2 X{0, 0, 0, 0};
        for (int i = 0; i < k; ++i) {
          X.a += coeff[i] * basis[i][0];
          X.b += coeff[i] * basis[i][1];
          X.c += coeff[i] * basis[i][2];
          X.d += coeff[i] * basis[i][3];
        }
        if (X.is_unimodular() && X * B * X.inverse() == A && (!best || better(X, *best))) best = X;
      }
      int i = 0;
      while (i < k && coeff[i] == shell) coeff[i++] = -shell;
      if (i == k) break;
      ++coeff[i];
    }
    if (best) {
      result.conjugator = best;
      return result;
    }
  }
  return result;
}

}  // namespace bsdyn
