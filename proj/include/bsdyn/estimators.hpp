#pragma once

/**
 * @file estimators.hpp
 * @brief Cell-resolution fixed sets, limit sets, BS-minimal sets, Birkhoff averages and differentials.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/parallel.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn {

// ---------------------------------------------------------------------------
// Cell sets

/// Set of cells of the uniform grid of side 1/resolution on S^1 or T^2 (chart coordinates).
class CellSet {
 public:
  CellSet() = default;
  CellSet(Space space, int resolution) : space_(space), res_(resolution) {
    if (resolution < 1) throw std::invalid_argument("CellSet: resolution must be >= 1");
    bits_.assign(total(), 0);
  }

  Space space() const { return space_; }
  int resolution() const { return res_; }
  int dims() const { return space_ == Space::Circle ? 1 : 2; }
  std::size_t total() const {
    const auto r = static_cast<std::size_t>(res_);
    return space_ == Space::Circle ? r : r * r;
  }
  /// Side length of a cell times sqrt(dims).
  double cell_diameter() const { return std::sqrt(static_cast<double>(dims())) / res_; }

  bool contains(std::size_t idx) const { return bits_.at(idx) != 0; }
  void insert(std::size_t idx) { bits_.at(idx) = 1; }
  void erase(std::size_t idx) { bits_.at(idx) = 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
  bool empty() const { return count() == 0; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out.push_back(i);
    return out;
  }

  int wrap(long i) const { return static_cast<int>(((i % res_) + res_) % res_); }

  std::size_t index_of(double u) const { return static_cast<std::size_t>(wrap(static_cast<long>(std::floor(frac(u) * res_)))); }
  std::size_t index_of(const Vec2& p) const {
    return static_cast<std::size_t>(wrap(static_cast<long>(std::floor(frac(p[0]) * res_)))) * res_ +
           static_cast<std::size_t>(wrap(static_cast<long>(std::floor(frac(p[1]) * res_))));
  }
  std::array<int, 2> coords(std::size_t idx) const {
    if (space_ == Space::Circle) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / res_), static_cast<int>(idx % res_)};
  }
  double center1(std::size_t idx) const { return (static_cast<double>(idx) + 0.5) / res_; }
  Vec2 center2(std::size_t idx) const {
    const auto c = coords(idx);
    return {(c[0] + 0.5) / res_, (c[1] + 0.5) / res_};
  }

  /// Adds every neighbour (8-neighbourhood on the torus) of every member.
  CellSet dilated() const {
    CellSet out(space_, res_);
    for (std::size_t idx : indices()) {
      const auto c = coords(idx);
      if (space_ == Space::Circle) {
        for (int d = -1; d <= 1; ++d) out.insert(static_cast<std::size_t>(wrap(c[0] + d)));
      } else {
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj)
            out.insert(static_cast<std::size_t>(wrap(c[0] + di)) * res_ + static_cast<std::size_t>(wrap(c[1] + dj)));
      }
    }
    return out;
  }

  bool subset_of(const CellSet& other) const {
    if (other.space_ != space_ || other.res_ != res_) throw std::invalid_argument("CellSet: incompatible grids");
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] && !other.bits_[i]) return false;
    return true;
  }

  friend bool operator==(const CellSet&, const CellSet&) = default;

 private:
  Space space_ = Space::Circle;
  int res_ = 0;
  std::vector<std::uint8_t> bits_;
};

namespace detail {

template <class Lift>
CellSet make_cells(int resolution) {
  return CellSet(SpaceTraits<Lift>::space, resolution);
}

template <class Lift>
PointOf<Lift> cell_center(const CellSet& c, std::size_t idx) {
  if constexpr (SpaceTraits<Lift>::space == Space::Circle) {
    return c.center1(idx);
  } else {
    return c.center2(idx);
  }
}

/// Children of a cell at twice the resolution.
inline std::vector<std::size_t> children(const CellSet& coarse, std::size_t idx) {
  const int r2 = 2 * coarse.resolution();
  const auto c = coarse.coords(idx);
  std::vector<std::size_t> out;
  if (coarse.space() == Space::Circle) {
    out = {static_cast<std::size_t>(2 * c[0]), static_cast<std::size_t>(2 * c[0] + 1)};
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        out.push_back(static_cast<std::size_t>(2 * c[0] + a) * r2 + static_cast<std::size_t>(2 * c[1] + b));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fixed cells

/**
 * Cells whose centre x has dist(f(x), x) < delta, computed at `resolution`
 * and refined once: the result has resolution 2 * resolution and contains the
 * flagged children of flagged cells. A non-positive delta means 2x the cell
 * diameter at each level.
 */
template <class Lift>
CellSet fixed_cells(const Lift& f, int resolution, double delta = 0.0) {
  using T = SpaceTraits<Lift>;
  CellSet coarse = detail::make_cells<Lift>(resolution);
  const double d0 = delta > 0.0 ? delta : 2.0 * coarse.cell_diameter();
  std::vector<std::uint8_t> flag(coarse.total(), 0);
  parallel_for(coarse.total(), [&](std::size_t i) {
    const auto x = detail::cell_center<Lift>(coarse, i);
    flag[i] = T::dist(f(x), x) < d0 ? 1 : 0;
  });
  CellSet fine = detail::make_cells<Lift>(2 * resolution);
  const double d1 = delta > 0.0 ? delta : 2.0 * fine.cell_diameter();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < flag.size(); ++i)
    if (flag[i])
      for (std::size_t c : detail::children(coarse, i)) candidates.push_back(c);
  std::vector<std::uint8_t> keep(candidates.size(), 0);
  parallel_for(candidates.size(), [&](std::size_t k) {
    const auto x = detail::cell_center<Lift>(fine, candidates[k]);
    keep[k] = T::dist(f(x), x) < d1 ? 1 : 0;
  });
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (keep[k]) fine.insert(candidates[k]);
  return fine;
}

/// The last `samples` points of the h^-1 orbit of x after `transient` steps (reduced mod 1).
template <class Lift>
std::vector<PointOf<Lift>> alpha_limit(const Lift& h, PointOf<Lift> x, long transient, long samples) {
  if (transient < 0 || samples < 1) throw std::invalid_argument("alpha_limit: need transient >= 0 and samples >= 1");
  const Lift hi = inverse(h);
  for (long k = 0; k < transient; ++k) x = SpaceTraits<Lift>::reduce(hi(x));
  std::vector<PointOf<Lift>> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (long k = 0; k < samples; ++k) {
    x = SpaceTraits<Lift>::reduce(hi(x));
    out.push_back(x);
  }
  return out;
}

/**
 * K_0 = P and K_{l+1} = { c in K_l : h(c) and h^-1(c) lie in dilate(K_l) },
 * evaluated at cell centres. One map step per level keeps the discretisation
 * error from compounding, and the one-cell dilation keeps K an over-approximation
 * of the exact intersection of the h^-j(P), |j| <= l.
 */
template <class Lift>
std::vector<CellSet> k_family(const Lift& h, const CellSet& P, int depth_l) {
  if (depth_l < 0) throw std::invalid_argument("k_family: depth must be >= 0");
  const Lift hi = inverse(h);
  const auto members = P.indices();
  std::vector<std::size_t> fwd(members.size()), bwd(members.size());
  parallel_for(members.size(), [&](std::size_t k) {
    const auto c = detail::cell_center<Lift>(P, members[k]);
    fwd[k] = P.index_of(SpaceTraits<Lift>::reduce(h(c)));
    bwd[k] = P.index_of(SpaceTraits<Lift>::reduce(hi(c)));
  });
  std::vector<CellSet> family{P};
  for (int l = 1; l <= depth_l; ++l) {
    const CellSet& prev = family.back();
    const CellSet D = prev.dilated();
    CellSet K = prev;
    for (std::size_t k = 0; k < members.size(); ++k)
      if (prev.contains(members[k]) && (!D.contains(fwd[k]) || !D.contains(bwd[k]))) K.erase(members[k]);
    family.push_back(std::move(K));
  }
  return family;
}

// ---------------------------------------------------------------------------
// Minimal sets

enum class MinimalLabel { FiniteOrbit, MinimalCircle, MinimalCantor, Unknown };

inline const char* to_string(MinimalLabel l) {
  switch (l) {
    case MinimalLabel::FiniteOrbit:
      return "FiniteOrbit";
    case MinimalLabel::MinimalCircle:
      return "MinimalCircle";
    case MinimalLabel::MinimalCantor:
      return "MinimalCantor";
    case MinimalLabel::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

/// Gap statistics of an orbit on a circle, used to tell circles from Cantor sets.
struct GapDiagnostics {
  std::vector<long> sample_counts;      ///< N values
  std::vector<double> largest_gaps;     ///< largest gap g_N of the first N samples
  std::vector<int> refinements;         ///< cell resolutions
  std::vector<double> cell_gaps;        ///< largest run of empty cells, as a length
  std::vector<std::size_t> cell_counts; ///< occupied cells per refinement
  bool circle_like = false;             ///< g_N < 5 / sqrt(N) for all N, non-increasing
  bool cantor_like = false;             ///< cell gaps > 10 cells and stable across refinements
};

inline constexpr std::array<long, 3> kGapSampleCounts{1000, 10000, 100000};
inline constexpr std::array<int, 3> kGapRefinements{256, 512, 1024};

/// Largest gap between consecutive values of a finite subset of R/Z.
inline double largest_circle_gap(std::vector<double> t) {
  if (t.empty()) return 1.0;
  for (auto& v : t) v = frac(v);
  std::sort(t.begin(), t.end());
  double g = t.front() + 1.0 - t.back();
  for (std::size_t i = 1; i < t.size(); ++i) g = std::max(g, t[i] - t[i - 1]);
  return g;
}

/// Longest circular run of unoccupied cells (as a length) and the number of occupied cells.
inline std::pair<double, std::size_t> largest_cell_gap(const std::vector<double>& t, int res) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(res), 0);
  for (double v : t) occ[static_cast<std::size_t>(std::min(res - 1, static_cast<int>(frac(v) * res)))] = 1;
  const auto filled = static_cast<std::size_t>(std::count(occ.begin(), occ.end(), 1));
  if (filled == 0) return {1.0, 0};
  int best = 0, run = 0;
  for (int k = 0; k < 2 * res; ++k) {
    if (occ[static_cast<std::size_t>(k % res)]) {
      run = 0;
    } else {
      best = std::max(best, ++run);
    }
  }
  return {std::min(best, res) / static_cast<double>(res), filled};
}

/// Diagnostics for an orbit sequence on a circle; thetas should hold at least the largest sample count.
inline GapDiagnostics circle_gap_diagnostics(const std::vector<double>& thetas) {
  GapDiagnostics d;
  for (long N : kGapSampleCounts) {
    const auto m = std::min<std::size_t>(static_cast<std::size_t>(N), thetas.size());
    d.sample_counts.push_back(static_cast<long>(m));
    d.largest_gaps.push_back(largest_circle_gap({thetas.begin(), thetas.begin() + static_cast<std::ptrdiff_t>(m)}));
  }
  for (int r : kGapRefinements) {
    const auto [g, filled] = largest_cell_gap(thetas, r);
    d.refinements.push_back(r);
    d.cell_gaps.push_back(g);
    d.cell_counts.push_back(filled);
  }
  d.circle_like = true;
  for (std::size_t i = 0; i < d.largest_gaps.size(); ++i) {
    if (!(d.largest_gaps[i] < 5.0 / std::sqrt(static_cast<double>(d.sample_counts[i])))) d.circle_like = false;
    if (i > 0 && d.largest_gaps[i] > d.largest_gaps[i - 1]) d.circle_like = false;
  }
  d.cantor_like = true;
  const double coarse = 1.0 / kGapRefinements.front();
  for (std::size_t i = 0; i < d.cell_gaps.size(); ++i) {
    if (!(d.cell_gaps[i] > 10.0 / d.refinements[i])) d.cantor_like = false;
    if (std::abs(d.cell_gaps[i] - d.cell_gaps.front()) > 2.0 * coarse) d.cantor_like = false;
  }
  return d;
}

/// Number of clusters of a point cloud at a merge tolerance (greedy, in sample order).
template <class Point>
std::vector<Point> cluster_representatives(const std::vector<Point>& pts, double tol, std::size_t cap) {
  using Traits = std::conditional_t<std::is_same_v<Point, double>, SpaceTraits<CircleLift>, SpaceTraits<TorusLift>>;
  std::vector<Point> reps;
  for (const auto& p : pts) {
    bool found = false;
    for (const auto& r : reps)
      if (Traits::dist(p, r) < tol) {
        found = true;
        break;
      }
    if (!found) {
      reps.push_back(p);
      if (reps.size() > cap) break;
    }
  }
  return reps;
}

inline constexpr std::size_t kFiniteClusterCap = 64;
inline constexpr long kMinimalTransient = 1000;

template <class Lift>
struct MinimalSetEstimate {
  std::vector<PointOf<Lift>> points;  ///< orbit cloud (FiniteOrbit: the orbit itself)
  MinimalLabel label = MinimalLabel::Unknown;
  CellSet fixed;                      ///< P = fixed_cells(f)
  std::vector<std::size_t> k_counts;  ///< |K_l| for l = 0..depth_l
  CellSet cells;                      ///< cells of the cloud at the resolution of P
  std::size_t clusters = 0;           ///< clusters of the first 1000 samples at merge tolerance
  GapDiagnostics gaps;
  std::string note;
};

/// Circle coordinate used for gap statistics: the point itself on S^1, the fibre angle on T^2.
inline double circle_coordinate(double x) { return x; }
inline double circle_coordinate(const Vec2& x) { return x[1]; }

/**
 * Constructive BS-minimal set search: P = fixed_cells(f), K = K_L, then the
 * h-orbit closure of a point of K labelled by cluster and gap diagnostics.
 */
template <class Lift>
MinimalSetEstimate<Lift> bs_minimal_set(const BSAction<Lift>& action, int resolution, int depth_l,
                                        long samples = kGapSampleCounts.back()) {
  using T = SpaceTraits<Lift>;
  MinimalSetEstimate<Lift> est;
  est.fixed = fixed_cells(action.f, resolution);
  est.cells = CellSet(T::space, est.fixed.resolution());
  if (est.fixed.empty()) {
    est.note = "fixed_cells(f) is empty";
    return est;
  }
  const auto family = k_family(action.h, est.fixed, depth_l);
  for (const auto& K : family) est.k_counts.push_back(K.count());
  const CellSet& K = family.back();
  if (K.empty()) {
    est.note = "K is empty at this resolution";
    return est;
  }
  // Start from the K cell whose centre moves least under f.
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t idx : K.indices()) {
    const auto c = detail::cell_center<Lift>(K, idx);
    const double d = T::dist(action.f(c), c);
    if (d < best_d) {
      best_d = d;
      best = idx;
    }
  }
  auto x = detail::cell_center<Lift>(K, best);
  for (long k = 0; k < kMinimalTransient; ++k) x = T::reduce(action.h(x));
  est.points.reserve(static_cast<std::size_t>(samples));
  for (long k = 0; k < samples; ++k) {
    est.points.push_back(x);
    x = T::reduce(action.h(x));
  }
  for (const auto& p : est.points) est.cells.insert(est.cells.index_of(p));

  const std::vector<PointOf<Lift>> head(est.points.begin(),
                                        est.points.begin() + std::min<std::ptrdiff_t>(1000, static_cast<std::ptrdiff_t>(est.points.size())));
  const auto reps = cluster_representatives(head, kMergeTol, kFiniteClusterCap);
  est.clusters = reps.size();
  if (reps.size() <= kFiniteClusterCap) {
    const auto orbit = finite_bs_orbit(action, reps.front());
    if (orbit.finite) {
      est.label = MinimalLabel::FiniteOrbit;
      est.points = orbit.points;
      est.cells = CellSet(T::space, est.fixed.resolution());
      for (const auto& p : est.points) est.cells.insert(est.cells.index_of(p));
      return est;
    }
  }
  std::vector<double> thetas;
  thetas.reserve(est.points.size());
  for (const auto& p : est.points) thetas.push_back(circle_coordinate(p));
  est.gaps = circle_gap_diagnostics(thetas);
  if (est.gaps.circle_like) {
    est.label = MinimalLabel::MinimalCircle;
  } else if (est.gaps.cantor_like) {
    est.label = MinimalLabel::MinimalCantor;
  } else {
    est.note = "gap diagnostics inconclusive";
  }
  return est;
}

// ---------------------------------------------------------------------------
// Birkhoff averages

/// (1/N) sum_{k<N} (F(x_k) - x_k) along the lifted orbit.
inline Vec2 birkhoff_displacement(const TorusLift& F, Vec2 x, long iterates) {
  require_identity_linear_part(F, "birkhoff_displacement");
  if (iterates < 1) throw std::invalid_argument("birkhoff_displacement: iterates must be >= 1");
  Vec2 sum{0.0, 0.0};
  for (long k = 0; k < iterates; ++k) {
    const Vec2 y = F(x);
    sum = sum + (y - x);
    x = y;
  }
  return (1.0 / static_cast<double>(iterates)) * sum;
}

// ---------------------------------------------------------------------------
// Differentials

inline constexpr double kDifferentialStep = 1e-4;
inline constexpr double kRichardsonStep = 1e-2;

struct DifferentialEstimate {
  std::array<double, 4> jacobian{1.0, 0.0, 0.0, 1.0};  ///< row-major; 1x1 in entry 0 for circle maps
  std::vector<double> moduli;                          ///< eigenvalue moduli, ascending
  double richardson_ratio = std::numeric_limits<double>::quiet_NaN();
  bool affine = false;      ///< step-to-step differences at round-off: the map is affine near x
  bool near_seam = false;   ///< a gluing seam lies within the stencil
};

namespace detail {

inline std::array<double, 4> jacobian_at(const CircleLift& f, double x, double s) {
  return {(f(x + s) - f(x - s)) / (2 * s), 0.0, 0.0, 0.0};
}

inline std::array<double, 4> jacobian_at(const TorusLift& f, const Vec2& x, double s) {
  const Vec2 dx = (1.0 / (2 * s)) * (f({x[0] + s, x[1]}) - f({x[0] - s, x[1]}));
  const Vec2 dy = (1.0 / (2 * s)) * (f({x[0], x[1] + s}) - f({x[0], x[1] - s}));
  return {dx[0], dy[0], dx[1], dy[1]};
}

inline std::vector<double> moduli_of(const std::array<double, 4>& J, int dims) {
  if (dims == 1) return {std::abs(J[0])};
  const double tr = J[0] + J[3], det = J[0] * J[3] - J[1] * J[2];
  const double disc = tr * tr - 4.0 * det;
  std::vector<double> m;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    m = {std::abs((tr - r) / 2), std::abs((tr + r) / 2)};
  } else {
    const double mod = std::sqrt(std::abs(det));
    m = {mod, mod};
  }
  std::sort(m.begin(), m.end());
  return m;
}

inline double max_abs_diff(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool seam_near(const std::vector<double>& seams, double x, double r) {
  for (double s : seams)
    if (circle_dist(s, x) <= r) return true;
  return false;
}

}  // namespace detail

/**
 * Central-difference Jacobian at `step`, eigenvalue moduli, and the Richardson
 * ratio |J(s) - J(s/2)| / |J(s/2) - J(s/4)| at s = 1e-2, which is close to 4 for
 * smooth maps.
 */
template <class Lift>
DifferentialEstimate differential_at(const Lift& f, const PointOf<Lift>& x, double step = kDifferentialStep) {
  if (!(step > 0.0)) throw std::invalid_argument("differential_at: step must be positive");
  DifferentialEstimate d;
  constexpr int dims = SpaceTraits<Lift>::space == Space::Circle ? 1 : 2;
  d.jacobian = detail::jacobian_at(f, x, step);
  d.moduli = detail::moduli_of(d.jacobian, dims);
  const double s = kRichardsonStep;
  const auto j1 = detail::jacobian_at(f, x, s), j2 = detail::jacobian_at(f, x, s / 2), j4 = detail::jacobian_at(f, x, s / 4);
  const double num = detail::max_abs_diff(j1, j2), den = detail::max_abs_diff(j2, j4);
  if (num < 1e-11 && den < 1e-11) {
    d.affine = true;
  } else if (den > 0.0) {
    d.richardson_ratio = num / den;
  }
  const double reach = std::max(step, s);
  if constexpr (dims == 1) {
    d.near_seam = detail::seam_near(f.seams, x, reach);
  } else {
    d.near_seam = detail::seam_near(f.seams[0], x[0], reach) || detail::seam_near(f.seams[1], x[1], reach);
  }
  return d;
}

}  // namespace bsdyn
