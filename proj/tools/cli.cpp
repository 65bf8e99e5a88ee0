#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "homocut/geometries.hpp"
#include "homocut/graphflow.hpp"
#include "homocut/homology.hpp"
#include "homocut/integrand.hpp"
#include "homocut/leastgradient.hpp"
#include "homocut/mesh.hpp"
#include "homocut/mesh_io.hpp"
#include "homocut/packing.hpp"

namespace homocut::cli {

using nlohmann::json;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(std::filesystem::path(dir) / name);
  if (!f) throw std::runtime_error("cannot write " + (std::filesystem::path(dir) / name).string());
  return f;
}

// ---- solve -----------------------------------------------------------------

GeometrySpec geometry_from_json(const json& g) {
  check_keys(g, "geometry", {"kind", "n", "n_x", "n_theta", "n_rings", "n_sectors", "n_z", "x_min", "x_max", "length",
                             "circumference", "radius"});
  GeometrySpec spec;
  spec.kind = get_or<std::string>(g, "kind", spec.kind);
  spec.n = get_or(g, "n", spec.n);
  spec.n_x = get_or(g, "n_x", spec.n_x);
  spec.n_theta = get_or(g, "n_theta", spec.n_theta);
  spec.n_rings = get_or(g, "n_rings", spec.n_rings);
  spec.n_sectors = get_or(g, "n_sectors", spec.n_sectors);
  spec.x_min = get_or(g, "x_min", spec.x_min);
  spec.x_max = get_or(g, "x_max", spec.x_max);
  spec.length = get_or(g, "length", spec.length);
  spec.circumference = get_or(g, "circumference", spec.circumference);
  spec.radius = get_or(g, "radius", spec.radius);
  if (spec.kind == "solid_torus") spec.n_theta = get_or(g, "n_z", spec.n);
  return spec;
}

bool is_cylinder(const std::string& kind) { return kind == "flat_cylinder" || kind == "hyperbolic_cylinder"; }

std::vector<Stage> schedule_from_json(const json& cfg) {
  if (!cfg.contains("schedule")) return default_schedule();
  const auto& s = cfg.at("schedule");
  if (!s.is_array() || s.empty()) throw ConfigError("schedule must be a non-empty array of [p, eps] pairs");
  std::vector<Stage> out;
  for (const auto& st : s) {
    Stage stage;
    if (st.is_array() && st.size() == 2) {
      stage.p = st[0].get<double>();
      stage.eps = st[1].get<double>();
    } else if (st.is_object()) {
      stage.p = st.at("p").get<double>();
      stage.eps = st.at("eps").get<double>();
    } else {
      throw ConfigError("schedule entries must be [p, eps] or {\"p\": .., \"eps\": ..}");
    }
    if (!(stage.p >= 1.0 && stage.p <= 2.0)) throw ConfigError("schedule: p = " + num(stage.p) + " is outside [1, 2]");
    if (!(stage.eps > 0.0)) throw ConfigError("schedule: eps must be positive");
    if (!out.empty()) {
      const auto& prev = out.back();
      if (stage.p > prev.p || stage.eps > prev.eps || (stage.p == prev.p && stage.eps == prev.eps)) {
        throw ConfigError("schedule must decrease: stage " + std::to_string(out.size()) + " (p=" + num(stage.p) +
                          ", eps=" + num(stage.eps) + ") does not follow (p=" + num(prev.p) +
                          ", eps=" + num(prev.eps) + ")");
      }
    }
    out.push_back(stage);
  }
  return out;
}

int ring_count(const SimplicialMesh& mesh, int n_theta) { return mesh.num_vertices() / n_theta; }

BoundaryCycle cycle_from_json(const json& cfg, const SimplicialMesh& mesh, const GeometrySpec* spec,
                              std::vector<double>* angles) {
  BoundaryCycle s;
  if (!cfg.contains("boundary_cycle")) return s;
  const auto& arr = cfg.at("boundary_cycle");
  if (!arr.is_array()) throw ConfigError("boundary_cycle must be an array");
  for (const auto& item : arr) {
    check_keys(item, "boundary_cycle entry", {"vertex", "angle", "ring", "theta", "weight"});
    const double w = get_or(item, "weight", 1.0);
    int v = -1;
    if (item.contains("vertex")) {
      v = item.at("vertex").get<int>();
      if (v < 0 || v >= mesh.num_vertices()) throw ConfigError("boundary_cycle vertex out of range");
    } else if (item.contains("angle")) {
      if (!spec || spec->kind != "flat_disk") throw ConfigError("boundary_cycle 'angle' needs a flat_disk geometry");
      const double a = item.at("angle").get<double>();
      v = disk_boundary_vertex(mesh, a);
      if (angles) angles->push_back(a);
    } else if (item.contains("ring")) {
      if (!spec || !is_cylinder(spec->kind)) throw ConfigError("boundary_cycle 'ring' needs a cylinder geometry");
      const auto ring = item.at("ring").get<std::string>();
      if (ring != "inner" && ring != "outer") throw ConfigError("ring must be \"inner\" or \"outer\"");
      const int i = ring == "inner" ? 0 : ring_count(mesh, spec->n_theta) - 1;
      const double theta = get_or(item, "theta", 0.0);
      const int j = static_cast<int>(std::lround(theta / (2 * std::numbers::pi) * spec->n_theta));
      v = grid_vertex(spec->n_theta, i, j);
    } else {
      throw ConfigError("boundary_cycle entry needs 'vertex', 'angle' or 'ring'");
    }
    s.push_back({v, w});
  }
  return s;
}

json class_json(const HomologyClass& c) {
  json coeffs = json::array();
  for (double x : c.coefficients()) coeffs.push_back(x);
  return {{"degree", c.degree},
          {"complex", c.kind == ComplexKind::Relative ? "relative" : c.kind == ComplexKind::Absolute ? "absolute"
                                                                                                     : "boundary"},
          {"field", c.field == Field::Rational ? "Q" : "R"},
          {"basis_id", c.basis ? c.basis->id() : ""},
          {"coefficients", coeffs}};
}

struct Assembled {
  SimplicialMesh mesh;
  std::optional<GeometrySpec> spec;
  std::string source;
};

Assembled load_mesh(const json& cfg) {
  if (cfg.contains("mesh")) {
    const auto path = cfg.at("mesh").get<std::string>();
    if (path.size() > 4 && path.substr(path.size() - 4) == ".off") {
      return {read_off_file(path, get_or<std::string>(cfg, "metric_file", "")), std::nullopt, path};
    }
    return {read_mesh_json_file(path), std::nullopt, path};
  }
  if (!cfg.contains("geometry")) throw ConfigError("config needs 'geometry' or 'mesh'");
  auto spec = geometry_from_json(cfg.at("geometry"));
  return {build_geometry(spec), spec, spec.kind};
}

}  // namespace

int thread_cap() {
  const char* env = std::getenv("HOMOCUT_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw std::runtime_error(std::string("HOMOCUT_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<int>(n);
}

int cmd_solve(const json& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    thread_cap();
    check_keys(cfg, "solve config", {"command", "geometry", "mesh", "metric_file", "class", "boundary_cycle", "norm",
                                     "schedule", "tolerance", "sharpen", "seed", "newton", "adhesion_threshold",
                                     "mean_convexity_tolerance"});
    auto schedule = schedule_from_json(cfg);
    const double tolerance = opts.tolerance.value_or(get_or(cfg, "tolerance", 1e-2));
    const auto norm = integrand_by_name(get_or<std::string>(cfg, "norm", "riemannian"));
    Assembled as = load_mesh(cfg);
    const SimplicialMesh& mesh = as.mesh;
    const GeometrySpec* spec = as.spec ? &*as.spec : nullptr;
    const int d = mesh.dimension();

    std::vector<double> angles;
    const BoundaryCycle s = cycle_from_json(cfg, mesh, spec, &angles);

    // Class: catalogued coefficients on a named geometry, or coefficients on a computed basis.
    LeastGradientProblem prob;
    json cls_out;
    std::vector<double> catalog_class;
    const json cls = cfg.contains("class") ? cfg.at("class") : json::array();
    if (cls.is_array()) {
      if (!spec) throw ConfigError("class coefficients as an array need a catalogued geometry");
      for (const auto& x : cls) catalog_class.push_back(x.get<double>());
      std::vector<double> eta(mesh.count(1), 0.0);
      if (spec->kind == "flat_torus") {
        if (catalog_class.size() != 2) throw ConfigError("flat_torus class needs two coefficients [a, b]");
        eta = torus_constant_form(mesh, catalog_class[0], catalog_class[1]);
      } else if (is_cylinder(spec->kind)) {
        if (catalog_class.size() != 1) throw ConfigError("cylinder class needs one coefficient [c] of the core circle");
        eta = cylinder_core_cochain(mesh, spec->n_theta, ring_count(mesh, spec->n_theta) / 2 - 1);
        for (auto& x : eta) x *= catalog_class[0];
      } else if (!catalog_class.empty()) {
        throw ConfigError(spec->kind + " has no catalogued classes; give {\"complex\", \"coefficients\"}");
      }
      prob = make_problem(mesh, std::move(eta), s, norm);
      cls_out = {{"catalog", spec->kind}, {"coefficients", catalog_class}};
    } else {
      check_keys(cls, "class", {"complex", "coefficients"});
      const auto kind_name = get_or<std::string>(cls, "complex", "relative");
      if (kind_name != "relative" && kind_name != "absolute") throw ConfigError("class complex must be relative or absolute");
      const auto kind = kind_name == "relative" ? ComplexKind::Relative : ComplexKind::Absolute;
      auto basis = std::make_shared<const HomologyBasis>(homology_basis(mesh, kind, d - 1));
      const auto coeffs = cls.at("coefficients").get<std::vector<double>>();
      if (static_cast<int>(coeffs.size()) != basis->dimension()) {
        throw ConfigError("class has " + std::to_string(coeffs.size()) + " coefficients but H_" + std::to_string(d - 1) +
                          " has dimension " + std::to_string(basis->dimension()));
      }
      std::vector<Rational> exact;
      for (double x : coeffs) exact.emplace_back(x);
      auto alpha = HomologyClass::rational(basis, exact);
      prob = make_problem(mesh, alpha, s, norm);
      cls_out = class_json(alpha);
    }

    ContinuationOptions copt;
    copt.sharpen_integral_classes = get_or(cfg, "sharpen", true);
    copt.adhesion_threshold = get_or(cfg, "adhesion_threshold", copt.adhesion_threshold);
    if (cfg.contains("newton")) {
      check_keys(cfg.at("newton"), "newton", {"max_iterations", "tolerance"});
      copt.newton.max_iterations = get_or(cfg.at("newton"), "max_iterations", copt.newton.max_iterations);
      copt.newton.tolerance = get_or(cfg.at("newton"), "tolerance", copt.newton.tolerance);
    }

    auto sol = continuation(prob, schedule, copt);
    const auto cut = extract_cut(prob, sol);
    const auto gap = duality_gap(prob, sol);

    std::vector<std::string> warnings = sol.warnings;
    json convexity = nullptr;
    if (mesh.has_boundary() && d >= 2) {
      auto mc = boundary_mean_curvature(mesh, get_or(cfg, "mean_convexity_tolerance", -1.0));
      const auto [lo, hi] = std::minmax_element(mc.values.begin(), mc.values.end());
      convexity = {{"min", *lo}, {"max", *hi}, {"tolerance", mc.tolerance},
                   {"strictly_mean_convex", mc.strictly_mean_convex}};
      if (!mc.strictly_mean_convex) {
        warnings.push_back("boundary is not strictly mean convex: min mean curvature " + num(*lo));
      }
    }
    if (gap.relative_gap > tolerance) {
      warnings.push_back("relative duality gap " + num(gap.relative_gap) + " exceeds tolerance " + num(tolerance));
    }
    if (gap.gamma_sup > 1.0 + 1e-2) warnings.push_back("calibration exceeds the unit dual ball: " + num(gap.gamma_sup));

    json oracle = nullptr;
    if (spec) {
      std::vector<double> key = spec->kind == "flat_disk" ? angles : catalog_class;
      try {
        const auto ov = oracle_values(*spec, key);
        oracle = {{"min_mass", ov.min_mass},
                  {"relative_error", (sol.mass - ov.min_mass) / ov.min_mass},
                  {"calibration", ov.calibration},
                  {"provenance", ov.provenance}};
      } catch (const std::invalid_argument&) {
      }
    }

    const int code = warnings.empty() ? kOk : kWarnings;
    json trace = json::array();
    for (const auto& r : sol.trace) {
      trace.push_back({{"p", r.p}, {"eps", r.eps}, {"energy", r.energy}, {"mass", r.mass},
                       {"iterations", r.iterations}, {"converged", r.converged}, {"residual", r.residual}});
    }
    json report = {{"source", as.source},
                   {"dimension", d},
                   {"vertices", mesh.num_vertices()},
                   {"edges", mesh.count(1)},
                   {"cells", mesh.count(d)},
                   {"norm", norm->name()},
                   {"class", cls_out},
                   {"mass", sol.mass},
                   {"oracle", oracle},
                   {"duality",
                    {{"pairing", gap.pairing},
                     {"gap", gap.gap},
                     {"relative_gap", gap.relative_gap},
                     {"gamma_sup", gap.gamma_sup},
                     {"divergence", gap.divergence}}},
                   {"cut",
                    {{"mass", cut.mass},
                     {"support_fraction", cut.support_fraction},
                     {"boundary_defect", cut.boundary_defect},
                     {"periods", cut.periods}}},
                   {"adhesion", boundary_adhesion(prob, sol.omega)},
                   {"mean_convexity", convexity},
                   {"converged", sol.converged},
                   {"sharpened", sol.sharpened},
                   {"trace", trace},
                   {"warnings", warnings},
                   {"exit_code", code}};

    if (!opts.out_dir.empty()) {
      open_out(opts.out_dir, "solution.json") << report.dump(2) << "\n";
      auto csv = open_out(opts.out_dir, "cut.csv");
      csv << "edge,v0,v1,crossing,weight,dual_volume";
      const int dims = static_cast<int>(mesh.coords(0).size());
      for (int k = 0; k < dims; ++k) csv << ",mid" << k;
      csv << "\n";
      for (int e = 0; e < mesh.count(1); ++e) {
        const auto& ab = mesh.simplex(1, e);
        csv << e << "," << ab[0] << "," << ab[1] << "," << num(cut.crossing[e]) << "," << num(cut.weight[e]) << ","
            << num(mesh.dual_volume(1, e));
        for (int k = 0; k < dims; ++k) csv << "," << num(0.5 * (mesh.coords(ab[0])[k] + mesh.coords(ab[1])[k]));
        csv << "\n";
      }
      auto tr = open_out(opts.out_dir, "trace.csv");
      tr << "stage,p,eps,energy,mass,iterations,converged,residual\n";
      for (std::size_t i = 0; i < sol.trace.size(); ++i) {
        const auto& r = sol.trace[i];
        tr << i << "," << num(r.p) << "," << num(r.eps) << "," << num(r.energy) << "," << num(r.mass) << ","
           << r.iterations << "," << (r.converged ? 1 : 0) << "," << num(r.residual) << "\n";
      }
    }

    out << "mass " << num(sol.mass) << "\n";
    if (!oracle.is_null()) out << "oracle " << num(oracle["min_mass"].get<double>()) << "\n";
    out << "relative_gap " << num(gap.relative_gap) << "\n";
    out << "support_fraction " << num(cut.support_fraction) << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    out << "exit " << code << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

// ---- flow ------------------------------------------------------------------

int cmd_flow(const json& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    thread_cap();
    check_keys(cfg, "flow config", {"command", "network", "random", "packing", "seed"});
    if (cfg.contains("packing")) {
      const auto& pk = cfg.at("packing");
      check_keys(pk, "packing", {"geometry", "length", "circumference", "x_min", "x_max", "schedule", "theta", "samples",
                                 "reference_circumference"});
      const auto name = get_or<std::string>(pk, "geometry", "flat_cylinder");
      PackingGeometry geom;
      if (name == "flat_cylinder") {
        geom = flat_cylinder_geometry(get_or(pk, "length", 1.0), get_or(pk, "circumference", 1.0));
      } else if (name == "hyperbolic_cylinder") {
        geom = hyperbolic_cylinder_geometry(get_or(pk, "x_min", -1.0), get_or(pk, "x_max", 1.0));
      } else {
        throw ConfigError("packing geometry must be flat_cylinder or hyperbolic_cylinder");
      }
      std::vector<std::pair<double, double>> schedule;
      for (const auto& row : pk.at("schedule")) schedule.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
      ConvergenceOptions co;
      co.theta = get_or(pk, "theta", co.theta);
      co.samples = get_or(pk, "samples", co.samples);
      co.reference_circumference = get_or(pk, "reference_circumference", co.reference_circumference);
      co.seed = opts.seed.value_or(get_or<std::uint64_t>(cfg, "seed", co.seed));
      const auto rows = convergence_experiment(geom, schedule, co);
      std::ostringstream csv;
      write_convergence_csv(csv, rows);
      out << csv.str();
      if (!opts.out_dir.empty()) open_out(opts.out_dir, "convergence.csv") << csv.str();
      return kOk;
    }

    FlowNetwork net;
    if (cfg.contains("network")) {
      net = read_network_file(cfg.at("network").get<std::string>());
    } else if (cfg.contains("random")) {
      const auto& r = cfg.at("random");
      check_keys(r, "random", {"n", "p", "seed"});
      net = random_unit_network(get_or(r, "n", 10), get_or(r, "p", 0.3),
                                opts.seed.value_or(get_or<std::uint64_t>(r, "seed", 1)));
    } else {
      throw ConfigError("flow config needs 'network', 'random' or 'packing'");
    }
    net.validate();
    const auto flow = max_flow(net);
    const auto cut = min_cut(net);
    out << "vertices " << net.num_vertices << "\n";
    out << "edges " << net.edges.size() << "\n";
    out << "max_flow " << num(flow.value) << "\n";
    out << "min_cut " << num(cut.capacity) << "\n";
    out << "cut_edges";
    for (int e : cut.edges) out << " " << net.edges[e].from << "->" << net.edges[e].to;
    out << "\n";
    int code = kOk;
    if (opts.oracle) {
      if (net.num_vertices > 20) throw FlowError("oracle guard exceeded: brute force needs at most 20 vertices");
      const double bf = brute_force_min_cut(net);
      const bool match = std::abs(bf - flow.value) <= 1e-9 * std::max(1.0, bf);
      out << "brute_force " << num(bf) << (match ? " match" : " MISMATCH") << "\n";
      if (!match) code = kError;
    }
    if (!opts.out_dir.empty()) {
      auto f = open_out(opts.out_dir, "flow.csv");
      f << "edge,from,to,capacity,flow,in_cut\n";
      std::vector<char> in_cut(net.edges.size(), 0);
      for (int e : cut.edges) in_cut[e] = 1;
      for (std::size_t e = 0; e < net.edges.size(); ++e) {
        f << e << "," << net.edges[e].from << "," << net.edges[e].to << "," << num(net.edges[e].capacity) << ","
          << num(flow.flow[e]) << "," << int(in_cut[e]) << "\n";
      }
    }
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

// ---- verify ----------------------------------------------------------------

namespace {

CheckResult check(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

std::vector<CheckResult> suite_homology_signs() {
  std::vector<CheckResult> r;
  {
    const auto m = flat_disk_mesh(3, 6);
    const auto path = shortest_edge_path(m, disk_boundary_vertex(m, 0.0), disk_boundary_vertex(m, std::numbers::pi));
    const auto a = class_of_cycle(m, ComplexKind::Relative, 1, path_chain(m, path, false));
    const auto rep = verify_sign_diagram(m, a);
    r.push_back(check("disk_diameter", rep.commutes, rep.report));
  }
  {
    const int nt = 6;
    const auto m = flat_cylinder_mesh(4, nt);
    const auto path = shortest_edge_path(m, grid_vertex(nt, 0, 0), grid_vertex(nt, ring_count(m, nt) - 1, 0));
    const auto a = class_of_cycle(m, ComplexKind::Relative, 1, path_chain(m, path, false));
    const auto rep = verify_sign_diagram(m, a);
    r.push_back(check("cylinder_generator", rep.commutes, rep.report));
  }
  {
    const auto m = solid_torus_mesh(2, 3);
    const auto basis = std::make_shared<const HomologyBasis>(homology_basis(m, ComplexKind::Relative, 2));
    bool ok = basis->dimension() == 1;
    std::string detail = "relative H_2 dimension " + std::to_string(basis->dimension());
    if (ok) {
      const auto rep = verify_sign_diagram(m, HomologyClass::rational(basis, {Rational(1)}));
      ok = rep.commutes;
      detail = rep.report;
    }
    r.push_back(check("solid_torus_meridian", ok, detail));
  }
  return r;
}

// Competitor potentials with the problem's boundary data.
std::vector<double> random_competitor(const LeastGradientProblem& prob, std::mt19937_64& rng, double scale) {
  auto u = initial_potential(prob);
  std::vector<int> dof;
  const int n = prob.dof_map(dof);
  std::vector<double> shift(n);
  for (auto& x : shift) x = scale * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  for (int v = 0; v < prob.mesh->num_vertices(); ++v) {
    if (dof[v] >= 0) u[v] += shift[dof[v]];
  }
  return total_form(prob, u);
}

std::vector<CheckResult> suite_duality(std::uint64_t seed) {
  std::vector<CheckResult> r;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 0}, {1, 1}}) {
    const auto m = flat_torus_mesh(8);
    const auto prob = make_problem(m, torus_constant_form(m, a, b), {});
    const auto sol = continuation(prob, default_schedule());
    const auto g = duality_gap(prob, sol);
    r.push_back(check("torus_gap_" + num(a) + "_" + num(b), std::abs(g.relative_gap) <= 1e-3 && g.gamma_sup <= 1.01,
                      "relative gap " + num(g.relative_gap) + ", gamma sup " + num(g.gamma_sup)));
  }
  const int n = 24;
  const auto hyp = hyperbolic_cylinder_mesh(-1, 1, n, n);
  const auto prob = make_problem(hyp, cylinder_core_cochain(hyp, n, ring_count(hyp, n) / 2 - 1), {});
  const auto sol = continuation(prob, default_schedule());
  const auto g = duality_gap(prob, sol);
  r.push_back(check("hyperbolic_core_gap", std::abs(g.relative_gap) <= 1e-2 && g.gamma_sup <= 1.01,
                    "mass " + num(sol.mass) + ", relative gap " + num(g.relative_gap) + ", divergence " +
                        num(g.divergence)));
  std::mt19937_64 rng(seed);
  int violations = 0;
  double worst = -1e300;
  for (int i = 0; i < 200; ++i) {
    const auto omega = random_competitor(prob, rng, 1.0 + i % 5);
    const double pairing = calibration_pairing(prob, sol.calibration, omega);
    const double mass = form_mass(prob, omega);
    worst = std::max(worst, pairing - mass);
    if (pairing > mass + 1e-12 * std::max(1.0, mass)) ++violations;
  }
  r.push_back(check("weak_duality_competitors", violations == 0,
                    std::to_string(violations) + " violations, max pairing - mass " + num(worst)));
  return r;
}

std::vector<CheckResult> suite_oracle(std::uint64_t seed) {
  std::vector<CheckResult> r;
  for (int i = 0; i < 5; ++i) {
    const std::uint64_t s = seed * 1000 + i;
    LeastGradientProblem prob;
    SimplicialMesh m = i % 2 == 0 ? perturbed_mesh(flat_torus_mesh(3), 0.1, s) : perturbed_mesh(flat_cylinder_mesh(3, 4), 0.1, s);
    if (i % 2 == 0) {
      prob = make_problem(m, torus_constant_form(m, 1.0, 0.25 * i), {});
    } else {
      prob = make_problem(m, cylinder_core_cochain(m, 4, 1), {});
    }
    const auto sol = continuation(prob, default_schedule());
    const auto o = exact_small_oracle(prob);
    const bool ok = std::abs(sol.mass - o.value) <= 1e-4 && o.certified;
    r.push_back(check("oracle_" + std::to_string(i), ok,
                      "continuation " + num(sol.mass) + ", oracle " + num(o.value) + " (lower " + num(o.lower) + ")"));
  }
  return r;
}

std::vector<CheckResult> suite_flow(std::uint64_t seed) {
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto net = random_unit_network(4 + i % 9, 0.35, seed * 7919 + i);
    if (max_flow(net).value != brute_force_min_cut(net)) ++mismatches;
  }
  return {check("mfmc_random_networks", mismatches == 0, std::to_string(mismatches) + " mismatches in 100 networks")};
}

std::vector<CheckResult> suite_gradient(std::uint64_t seed) {
  std::vector<CheckResult> r;
  std::mt19937_64 rng(seed);
  const auto m = perturbed_mesh(flat_disk_mesh(2, 4), 0.1, seed);
  const auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0),
                                 {{disk_boundary_vertex(m, 0.0), 1.0}, {disk_boundary_vertex(m, std::numbers::pi), -1.0}});
  double worst = 0.0;
  for (double p : {1.1, 1.5, 2.0}) {
    auto u = initial_potential(prob);
    const auto free = prob.free_vertices();
    for (int v : free) u[v] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    std::vector<double> grad;
    p_energy(prob, u, p, 1e-2, &grad);
    for (int v : free) {
      const double h = 1e-5;
      auto up = u, um = u;
      up[v] += h;
      um[v] -= h;
      const double fd = (p_energy(prob, up, p, 1e-2) - p_energy(prob, um, p, 1e-2)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[v]) / std::max(1.0, std::abs(grad[v])));
    }
  }
  r.push_back(check("energy_gradient", worst < 1e-6, "max relative error " + num(worst)));
  return r;
}

std::vector<CheckResult> suite_integrand(std::uint64_t seed) {
  const auto m = flat_torus_mesh(4);
  const auto rr = validate_integrand(*riemannian_integrand(), m, 200, seed);
  const auto rl = validate_integrand(*l1_integrand(), m, 200, seed);
  const auto rq = validate_integrand(
      [](std::span<const double> a) {
        double s = 0;
        for (double x : a) s += x * x;
        return s;
      },
      2, 20, seed);
  const bool quad_rejected = !rq.passed && std::any_of(rq.failures.begin(), rq.failures.end(),
                                                       [](const IntegrandFailure& f) { return f.axiom == "homogeneity"; });
  return {check("riemannian_norm", rr.passed, std::to_string(rr.failures.size()) + " failures"),
          check("l1_norm", rl.passed, std::to_string(rl.failures.size()) + " failures"),
          check("quadratic_rejected", quad_rejected, rq.failures.empty() ? "accepted" : rq.failures[0].witness)};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> verify_suites() {
  return {"homology-signs", "duality", "oracle", "flow", "gradient", "integrand", "all"};
}

std::optional<std::vector<CheckResult>> run_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto add = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  const bool all = suite == "all";
  if (all || suite == "homology-signs") add(suite_homology_signs());
  if (all || suite == "duality") add(suite_duality(seed));
  if (all || suite == "oracle") add(suite_oracle(seed));
  if (all || suite == "flow") add(suite_flow(seed));
  if (all || suite == "gradient") add(suite_gradient(seed));
  if (all || suite == "integrand") add(suite_integrand(seed));
  if (out.empty()) return std::nullopt;
  return out;
}

std::string junit_xml(const std::string& suite, const std::vector<CheckResult>& checks) {
  const auto failures = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<testsuite name=\"" << xml_escape(suite) << "\" tests=\"" << checks.size() << "\" failures=\"" << failures
     << "\">\n";
  for (const auto& c : checks) {
    os << "  <testcase classname=\"" << xml_escape(suite) << "\" name=\"" << xml_escape(c.name) << "\">";
    if (c.passed) {
      os << "<system-out>" << xml_escape(c.detail) << "</system-out>";
    } else {
      os << "<failure message=\"" << xml_escape(c.detail) << "\"/>";
    }
    os << "</testcase>\n";
  }
  os << "</testsuite>\n";
  return os.str();
}

int cmd_verify(const std::string& suite, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    thread_cap();
    const auto checks = run_suite(suite, opts.seed.value_or(1));
    if (!checks) {
      err << "error: unknown suite '" << suite << "' (available:";
      for (const auto& s : verify_suites()) err << " " << s;
      err << ")\n";
      return kError;
    }
    bool ok = true;
    for (const auto& c : *checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
      ok = ok && c.passed;
    }
    if (!opts.out_dir.empty()) open_out(opts.out_dir, "verify-" + suite + ".xml") << junit_xml(suite, *checks);
    return ok ? kOk : kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace homocut::cli
