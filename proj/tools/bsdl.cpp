// bsdl: command-line front end for the bsdyn library.
//
// Exit status: 0 success, 2 inconclusive classification, 1 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "bsdyn/bsdyn.hpp"

using namespace bsdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;

struct RunConfig {
  catalog::ActionSpec action{"standard-torus", 2, 0.0, "rot:1/3"};
  std::string action_file;
  std::string out;
  std::string csv;
  std::string map = "f";
  std::string point;
  std::string matrix;
  std::string other;
  std::string ids;
  bool ids_given = false;
  int resolution = 64;
  int depth = 8;
  int grid = 32;
  int bound = 10;
  int q_max = kRotationQMax;
  long iterates = 100000;
  double tol = 1e-8;
  double perturb = 0.0;
  std::uint64_t seed = acceptance::kDefaultSeed;
};

void add_action_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--catalog", cfg.action.id, "catalog id (see `catalog list`)");
  cmd->add_option("--n", cfg.action.n, "exponent n of BS(1,n)")->check(CLI::Range(2, 1000));
  cmd->add_option("--eps", cfg.action.eps, "fiber rotation perturbation for perturbed-torus");
  cmd->add_option("--k", cfg.action.k, "fiber map: rot:<p/q|real|ln<m>|golden> or denjoy[:alpha[:depth[:ratio]]]");
  cmd->add_option("--action", cfg.action_file, "JSON descriptor written by `catalog build`");
}

void add_output_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--out", cfg.out, "write the JSON report here (atomically)");
}

json spec_json(const catalog::ActionSpec& s) { return {{"id", s.id}, {"n", s.n}, {"eps", s.eps}, {"k", s.k}}; }

catalog::ActionSpec resolve_spec(const RunConfig& cfg) {
  if (cfg.action_file.empty()) return cfg.action;
  std::ifstream in(cfg.action_file);
  if (!in) throw std::runtime_error("cannot read action file " + cfg.action_file);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed action file: " + std::string(e.what()));
  }
  const json& s = j.contains("spec") ? j["spec"] : j;
  catalog::ActionSpec spec;
  spec.id = s.at("id").get<std::string>();
  spec.n = s.value("n", 2);
  spec.eps = s.value("eps", 0.0);
  spec.k = s.value("k", std::string("rot:1/3"));
  return spec;
}

TorusAction require_torus(const catalog::AnyAction& a, const char* cmd) {
  if (const auto* t = std::get_if<TorusAction>(&a)) return *t;
  throw std::invalid_argument(std::string(cmd) + " needs a torus action");
}

template <class Lift>
const Lift& pick_map(const BSAction<Lift>& a, const std::string& which) {
  if (which == "f") return a.f;
  if (which == "h") return a.h;
  throw std::invalid_argument("--map must be f or h");
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(tok, &used));
    if (used != tok.size()) throw std::invalid_argument("malformed number '" + tok + "'");
  }
  return out;
}

void emit(const json& report, const RunConfig& cfg) {
  const std::string text = report.dump(2) + "\n";
  if (!cfg.out.empty()) atomic_write(cfg.out, text);
  std::cout << text;
}

void emit_csv(const std::string& content, const RunConfig& cfg) {
  if (!cfg.csv.empty()) atomic_write(cfg.csv, content);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_catalog_list(const RunConfig& cfg) {
  json list = json::array();
  for (const auto& e : catalog::entries())
    list.push_back({{"id", e.id}, {"space", to_string(e.space)}, {"description", e.description}, {"params", e.params}});
  emit({{"entries", list}}, cfg);
  return kExitOk;
}

int cmd_catalog_build(RunConfig cfg, const std::string& id) {
  if (!id.empty()) cfg.action.id = id;
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  json j = std::visit([](const auto& x) { return describe_action(x); }, a);
  j["spec"] = spec_json(spec);
  emit(j, cfg);
  return kExitOk;
}

int cmd_verify_relation(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  json j = std::visit([](const auto& x) { return describe_action(x); }, a);
  const RelationResidual r = std::visit([](const auto& x) { return x.residual; }, a);
  j["spec"] = spec_json(spec);
  j["tol"] = cfg.tol;
  j["passed"] = r.residual < cfg.tol;
  emit(j, cfg);
  return r.residual < cfg.tol ? kExitOk : kExitError;
}

int cmd_rotation_number(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  CircleLift F;
  std::string what;
  if (const auto* c = std::get_if<CircleAction>(&a)) {
    F = pick_map(*c, cfg.map);
    what = cfg.map;
  } else {
    // Torus actions: restriction of the chosen generator to the circle u = 0.
    F = acceptance::restriction_to_infinity(pick_map(std::get<TorusAction>(a), cfg.map));
    what = cfg.map + "|C1";
  }
  const auto est = rotation_number(F, cfg.iterates, cfg.q_max, cfg.tol);
  emit({{"spec", spec_json(spec)}, {"map", what}, {"rotation_number", to_json(est)}}, cfg);
  return kExitOk;
}

int cmd_rotation_set(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = require_torus(catalog::build(spec), "rotation-set");
  const TorusLift& F = pick_map(a, cfg.map);
  RotationSetParams p;
  p.grid = cfg.grid;
  p.iterates = std::min<long>(cfg.iterates, 10000);
  const auto est = rotation_set(F, p);
  json j{{"spec", spec_json(spec)}, {"map", cfg.map}, {"rotation_set", to_json(est)}};
  if (est.point) j["constraint"] = to_json(bs_rotation_constraint(*est.point, a.h.linear_part, a.n));
  emit(j, cfg);
  return kExitOk;
}

int cmd_fixed_set(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  const json cells = std::visit([&](const auto& x) { return to_json(fixed_cells(pick_map(x, cfg.map), cfg.resolution)); }, a);
  emit({{"spec", spec_json(spec)}, {"map", cfg.map}, {"fixed_cells", cells}}, cfg);
  return kExitOk;
}

int cmd_minimal_set(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  MinimalLabel label = MinimalLabel::Unknown;
  json j{{"spec", spec_json(spec)}, {"resolution", cfg.resolution}, {"depth", cfg.depth}};
  std::visit(
      [&](const auto& x) {
        const auto est = bs_minimal_set(x, cfg.resolution, cfg.depth);
        label = est.label;
        j["minimal_set"] = to_json(est);
        emit_csv(orbit_csv(est.points), cfg);
      },
      a);
  if (spec.id == "product" && KSpec::parse(spec.k).kind == KSpec::Kind::Denjoy)
    j["denjoy_depth"] = KSpec::parse(spec.k).depth;
  emit(j, cfg);
  return label == MinimalLabel::Unknown ? kExitInconclusive : kExitOk;
}

int cmd_finite_orbit(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = catalog::build(spec);
  const auto coords = cfg.point.empty() ? std::vector<double>{} : parse_numbers(cfg.point);
  bool finite = false;
  json j{{"spec", spec_json(spec)}};
  if (const auto* c = std::get_if<CircleAction>(&a)) {
    if (coords.size() > 1) throw std::invalid_argument("--point takes one coordinate on the circle");
    const auto r = finite_bs_orbit(*c, coords.empty() ? 0.0 : coords[0]);
    finite = r.finite;
    j["points"] = r.points;
    emit_csv(orbit_csv(r.points), cfg);
  } else {
    if (!coords.empty() && coords.size() != 2) throw std::invalid_argument("--point takes u,t on the torus");
    const Vec2 p = coords.empty() ? Vec2{0.0, 0.0} : Vec2{coords[0], coords[1]};
    const auto r = finite_bs_orbit(std::get<TorusAction>(a), p);
    finite = r.finite;
    j["points"] = r.points;
    emit_csv(orbit_csv(r.points), cfg);
  }
  j["finite"] = finite;
  j["size"] = j["points"].size();
  if (!finite) j.erase("points");
  emit(j, cfg);
  return kExitOk;
}

int cmd_classify_matrix(const RunConfig& cfg) {
  const IntMatrix2 A = parse_matrix(cfg.matrix);
  if (!A.is_unimodular()) throw std::invalid_argument("matrix must have determinant +1 or -1");
  const auto order = finite_order(A);
  json j{{"matrix", A}, {"det", A.det()}, {"trace", A.a + A.d}};
  j["order"] = order ? json(*order) : json(nullptr);
  if (!cfg.other.empty()) {
    const IntMatrix2 B = parse_matrix(cfg.other);
    const auto r = conjugate_in_gl2z(A, B, cfg.bound);
    j["conjugate_to"] = B;
    j["bound"] = cfg.bound;
    j["conjugator"] = r.found() ? json(*r.conjugator) : json(nullptr);
  }
  emit(j, cfg);
  return kExitOk;
}

int cmd_trichotomy(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  const auto a = require_torus(catalog::build(spec), "trichotomy");
  InvariantCircleEstimate circle;
  const auto rep = trichotomy(a, chart_infinity(), &circle);
  json j = to_json(rep);
  j["spec"] = spec_json(spec);
  j["circle"] = to_json(circle);
  emit_csv(circle_graph_csv(circle), cfg);
  emit(j, cfg);
  return rep.outcome == Outcome::Unknown ? kExitInconclusive : kExitOk;
}

int cmd_persistent_fp(const RunConfig& cfg) {
  const auto spec = resolve_spec(cfg);
  auto a = require_torus(catalog::build(spec), "persistent-fp");
  json j{{"spec", spec_json(spec)}};
  if (cfg.perturb > 0.0) {
    a = catalog::conjugated(a, catalog::random_bump_diffeo(cfg.seed, cfg.perturb));
    j["perturbation"] = {{"size", cfg.perturb}, {"seed", cfg.seed}, {"relation", to_json(a.residual)}};
  }
  j["fixed_point"] = to_json(persistent_fixed_point(a, cfg.resolution));
  emit(j, cfg);
  return kExitOk;
}

int cmd_reproduce_all(const RunConfig& cfg) {
  std::vector<int> ids;
  if (cfg.ids_given) {
    for (double v : parse_numbers(cfg.ids)) ids.push_back(static_cast<int>(v));
  }
  const bool empty_suite = cfg.ids_given && ids.empty();
  acceptance::ReproduceReport rep;
  if (!empty_suite) {
    rep = acceptance::reproduce_all(ids, cfg.seed, [](const acceptance::CriterionResult& r) {
      std::fprintf(stderr, "%3d  %-40s %s  %7.2fs%s%s\n", r.id, r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds,
                   r.error.empty() ? "" : "  ", r.error.c_str());
    });
  } else {
    rep.seed = cfg.seed;
  }
  emit(rep.to_json(), cfg);
  return rep.all_passed() ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bsdl: BS(1,n) actions on the circle and the torus"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string build_id;

  auto* catalog_cmd = app.add_subcommand("catalog", "list or build catalog actions");
  catalog_cmd->require_subcommand(1);
  auto* list_cmd = catalog_cmd->add_subcommand("list", "list catalog entries");
  add_output_options(list_cmd, cfg);
  auto* build_cmd = catalog_cmd->add_subcommand("build", "build and verify one catalog action");
  build_cmd->add_option("id", build_id, "catalog id");
  add_action_options(build_cmd, cfg);
  add_output_options(build_cmd, cfg);

  auto* verify = app.add_subcommand("verify-relation", "relation residual of a catalog action");
  add_action_options(verify, cfg);
  add_output_options(verify, cfg);
  verify->add_option("--tol", cfg.tol, "pass threshold")->check(CLI::PositiveNumber);

  auto* rotnum = app.add_subcommand("rotation-number", "rotation number of a circle map, or of a torus map on u = 0");
  add_action_options(rotnum, cfg);
  add_output_options(rotnum, cfg);
  rotnum->add_option("--map", cfg.map, "generator: f or h");
  rotnum->add_option("--iterates", cfg.iterates, "orbit length")->check(CLI::PositiveNumber);
  rotnum->add_option("--tol", cfg.tol, "periodic-point certificate tolerance")->check(CLI::PositiveNumber);
  rotnum->add_option("--q-max", cfg.q_max, "largest witness denominator")->check(CLI::PositiveNumber);

  auto* rotset = app.add_subcommand("rotation-set", "rotation set of a torus map");
  add_action_options(rotset, cfg);
  add_output_options(rotset, cfg);
  rotset->add_option("--map", cfg.map, "generator: f or h");
  rotset->add_option("--grid", cfg.grid, "start points per side")->check(CLI::PositiveNumber);
  rotset->add_option("--iterates", cfg.iterates, "orbit length (capped at 10^4)")->check(CLI::PositiveNumber);

  auto* fixed = app.add_subcommand("fixed-set", "cells of approximate fixed points");
  add_action_options(fixed, cfg);
  add_output_options(fixed, cfg);
  fixed->add_option("--map", cfg.map, "generator: f or h");
  fixed->add_option("--resolution", cfg.resolution, "cells per side")->check(CLI::PositiveNumber);

  auto* minimal = app.add_subcommand("minimal-set", "constructive BS-minimal set estimate");
  add_action_options(minimal, cfg);
  add_output_options(minimal, cfg);
  minimal->add_option("--resolution", cfg.resolution, "cells per side")->check(CLI::PositiveNumber);
  minimal->add_option("--depth", cfg.depth, "K_l depth")->check(CLI::NonNegativeNumber);
  minimal->add_option("--csv", cfg.csv, "point cloud CSV");

  auto* orbit = app.add_subcommand("finite-orbit", "closure of a point under the generators");
  add_action_options(orbit, cfg);
  add_output_options(orbit, cfg);
  orbit->add_option("--point", cfg.point, "chart coordinates: u on the circle, u,t on the torus (default: infinity)");
  orbit->add_option("--csv", cfg.csv, "orbit CSV");

  auto* classify = app.add_subcommand("classify-matrix", "finite order and GL(2,Z) conjugacy");
  add_output_options(classify, cfg);
  classify->add_option("--matrix", cfg.matrix, "[[a,b],[c,d]]")->required();
  classify->add_option("--conjugate-to", cfg.other, "second matrix B: search X with X B X^-1 = A");
  classify->add_option("--bound", cfg.bound, "lattice coefficient bound")->check(CLI::PositiveNumber);

  auto* tri = app.add_subcommand("trichotomy", "invariant circle and minimal-set outcome");
  add_action_options(tri, cfg);
  add_output_options(tri, cfg);
  tri->add_option("--csv", cfg.csv, "invariant circle CSV (theta,u)");

  auto* pfp = app.add_subcommand("persistent-fp", "common fixed point of both generators");
  add_action_options(pfp, cfg);
  add_output_options(pfp, cfg);
  pfp->add_option("--resolution", cfg.resolution, "search grid per side")->check(CLI::PositiveNumber);
  pfp->add_option("--perturb", cfg.perturb, "conjugate by a random bump of this C0 size")->check(CLI::NonNegativeNumber);
  pfp->add_option("--seed", cfg.seed, "random seed");

  auto* repro = app.add_subcommand("reproduce-all", "run the acceptance criteria");
  add_output_options(repro, cfg);
  repro->add_option("--seed", cfg.seed, "random seed");
  auto* ids_opt = repro->add_option("--ids", cfg.ids, "comma-separated criterion ids (default: all; bare --ids: none)")
                     ->expected(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }
  cfg.ids_given = ids_opt->count() > 0;

  try {
    if (*list_cmd) return cmd_catalog_list(cfg);
    if (*build_cmd) return cmd_catalog_build(cfg, build_id);
    if (*verify) return cmd_verify_relation(cfg);
    if (*rotnum) return cmd_rotation_number(cfg);
    if (*rotset) return cmd_rotation_set(cfg);
    if (*fixed) return cmd_fixed_set(cfg);
    if (*minimal) return cmd_minimal_set(cfg);
    if (*orbit) return cmd_finite_orbit(cfg);
    if (*classify) return cmd_classify_matrix(cfg);
    if (*tri) return cmd_trichotomy(cfg);
    if (*pfp) return cmd_persistent_fp(cfg);
    if (*repro) return cmd_reproduce_all(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
