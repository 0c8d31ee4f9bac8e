#pragma once

/**
 * @file io.hpp
 * @brief JSON and CSV serialization, lift specs, atomic file writes.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsdyn/bsgroup.hpp"
#include "bsdyn/catalog.hpp"
#include "bsdyn/circle.hpp"
#include "bsdyn/estimators.hpp"
#include "bsdyn/experiments.hpp"
#include "bsdyn/gl2z.hpp"
#include "bsdyn/torus.hpp"

namespace bsdyn {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Exact types

inline void to_json(json& j, const IntMatrix2& m) { j = json::array({{m.a, m.b}, {m.c, m.d}}); }

inline void from_json(const json& j, IntMatrix2& m) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 || j[1].size() != 2) {
    throw std::invalid_argument("matrix must be [[a,b],[c,d]]");
  }
  for (const auto& row : j)
    for (const auto& e : row)
      if (!e.is_number_integer()) throw std::invalid_argument("matrix entries must be integers");
  m = {j[0][0].get<std::int64_t>(), j[0][1].get<std::int64_t>(), j[1][0].get<std::int64_t>(), j[1][1].get<std::int64_t>()};
}

inline json rational_json(const Rational& r) { return {{"num", r.numerator()}, {"den", r.denominator()}}; }

inline Rational rational_from_json(const json& j) {
  const auto num = j.at("num").get<std::int64_t>();
  const auto den = j.at("den").get<std::int64_t>();
  if (den <= 0) throw std::invalid_argument("rational denominator must be positive");
  const Rational r(num, den);
  if (r.denominator() != den) throw std::invalid_argument("rational must be in lowest terms");
  return r;
}

inline IntMatrix2 parse_matrix(const std::string& text) {
  try {
    return json::parse(text).get<IntMatrix2>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed matrix: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("malformed matrix: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RelationResidual& r) {
  return {{"residual", r.residual}, {"iterated_residual", r.iterated_residual}};
}

inline json to_json(const RotationNumberEstimate& e) {
  json j{{"value", e.value}, {"iterates_used", e.iterates_used}, {"error_bound", e.error_bound}};
  if (e.rational_witness) {
    const auto& w = *e.rational_witness;
    j["rational_witness"] = {{"p", w.p}, {"q", w.q}, {"point", w.point}, {"residual", w.residual}};
  } else {
    j["rational_witness"] = nullptr;
  }
  return j;
}

inline json to_json(const RotationSetEstimate& e) {
  json j{{"samples_count", e.samples.size()}, {"hull", e.hull}, {"diameter", e.diameter},
         {"is_point", e.is_point}, {"error_bound", e.error_bound}};
  j["point"] = e.point ? json(*e.point) : json(nullptr);
  return j;
}

inline json to_json(const RotationConstraintReport& r) {
  json j{{"consistent", r.consistent}, {"Q", r.Q}, {"residual", r.residual}, {"det_linear", rational_json(r.det_linear)}};
  j["fixed_point"] = r.fixed_point ? json::array({rational_json((*r.fixed_point)[0]), rational_json((*r.fixed_point)[1])})
                                   : json(nullptr);
  return j;
}

inline json to_json(const CellSet& c) {
  json cells = json::array();
  for (std::size_t idx : c.indices()) {
    const auto k = c.coords(idx);
    if (c.space() == Space::Circle) {
      cells.push_back(k[0]);
    } else {
      cells.push_back({k[0], k[1]});
    }
  }
  return {{"space", to_string(c.space())}, {"resolution", c.resolution()}, {"cells", std::move(cells)}};
}

inline json to_json(const GapDiagnostics& d) {
  return {{"sample_counts", d.sample_counts}, {"largest_gaps", d.largest_gaps}, {"refinements", d.refinements},
          {"cell_gaps", d.cell_gaps},         {"cell_counts", d.cell_counts},   {"circle_like", d.circle_like},
          {"cantor_like", d.cantor_like}};
}

template <class Lift>
json to_json(const MinimalSetEstimate<Lift>& e) {
  return {{"label", to_string(e.label)},
          {"points_count", e.points.size()},
          {"clusters", e.clusters},
          {"fixed_cells", e.fixed.count()},
          {"fixed_resolution", e.fixed.resolution()},
          {"k_counts", e.k_counts},
          {"cloud_cells", e.cells.count()},
          {"diagnostics", to_json(e.gaps)},
          {"note", e.note}};
}

inline json to_json(const InvariantCircleEstimate& c) {
  double lo = 0.0, hi = 0.0;
  if (!c.values.empty()) {
    lo = *std::min_element(c.values.begin(), c.values.end());
    hi = *std::max_element(c.values.begin(), c.values.end());
  }
  return {{"samples", c.values.size()}, {"residual", c.residual}, {"side", to_string(c.side)},
          {"iterations", c.iterations}, {"min_u", lo},                {"max_u", hi}};
}

inline json to_json(const TrichotomyReport& r) {
  return {{"outcome", to_string(r.outcome)},
          {"rotation_number", to_json(r.rotation_number)},
          {"orbit_size", r.orbit.size()},
          {"fixed_cells_on_circle", r.fixed_cells_on_circle},
          {"diagnostics", to_json(r.gaps)},
          {"note", r.note}};
}

inline json to_json(const std::optional<GlobalFixedPoint>& p) {
  if (!p) return {{"found", false}};
  return {{"found", true}, {"point", p->point}, {"h_residual", p->h_residual}, {"f_residual", p->f_residual}};
}

inline json to_json(const RotationPersistenceReport& r) {
  return {{"estimate", to_json(r.estimate)},
          {"centroid", r.centroid},
          {"snapped", json::array({rational_json(r.snapped[0]), rational_json(r.snapped[1])})},
          {"window", r.window},
          {"spread", r.spread},
          {"passed", r.passed}};
}

template <class Lift>
json describe_action(const BSAction<Lift>& a) {
  json j{{"label", a.label},
         {"space", to_string(a.space)},
         {"n", a.n},
         {"relation", to_json(a.residual)},
         {"provenance", a.provenance}};
  if constexpr (SpaceTraits<Lift>::space == Space::Torus) {
    j["linear_part_f"] = a.f.linear_part;
    j["linear_part_h"] = a.h.linear_part;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Lift specs

/// {type: rotation|mobius|denjoy|piecewise, ...} to a circle lift.
inline CircleLift circle_lift_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rotation") return rotation(j.at("alpha").get<double>(), j.value("label", std::string{}));
  if (type == "mobius") return mobius_affine(j.at("a").get<double>(), j.value("b", 0.0), j.value("label", std::string{}));
  if (type == "denjoy") {
    const double alpha = j.contains("alpha") ? j["alpha"].get<double>() : golden_fraction();
    return denjoy_lift(alpha, j.value("depth", 12), j.value("gap_ratio", 0.5)).lift;
  }
  if (type == "piecewise") {
    auto xs = j.at("xs").get<std::vector<double>>();
    auto ys = j.at("ys").get<std::vector<double>>();
    return piecewise_lift(std::move(xs), std::move(ys), j.value("label", std::string("piecewise")));
  }
  throw std::invalid_argument("unknown lift type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Files

/// Writes via a temporary sibling and rename, so readers never see partial files.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("output directory does not exist: " + dir.string());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into place: " + path.string());
  }
}

namespace detail {
inline void csv_number(std::ostream& os, double v) { os << std::setprecision(17) << v; }
}  // namespace detail

/// step,x,y rows of a torus orbit.
inline std::string orbit_csv(const std::vector<Vec2>& pts) {
  std::ostringstream os;
  os << "step,x,y\n";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    os << k << ',';
    detail::csv_number(os, pts[k][0]);
    os << ',';
    detail::csv_number(os, pts[k][1]);
    os << '\n';
  }
  return os.str();
}

/// step,x rows of a circle orbit.
inline std::string orbit_csv(const std::vector<double>& pts) {
  std::ostringstream os;
  os << "step,x\n";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    os << k << ',';
    detail::csv_number(os, pts[k]);
    os << '\n';
  }
  return os.str();
}

/// theta,u rows of an invariant circle.
inline std::string circle_graph_csv(const InvariantCircleEstimate& c) {
  std::ostringstream os;
  os << "theta,u\n";
  for (std::size_t j = 0; j < c.values.size(); ++j) {
    detail::csv_number(os, c.thetas[j]);
    os << ',';
    detail::csv_number(os, c.values[j]);
    os << '\n';
  }
  return os.str();
}

}  // namespace bsdyn
