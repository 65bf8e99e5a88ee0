// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli.hpp"
#include "homocut/geometries.hpp"
#include "homocut/graphflow.hpp"
#include "homocut/leastgradient.hpp"
#include "homocut/packing.hpp"

using namespace homocut;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

json load_config(const std::string& rel) {
  std::ifstream in(std::string(HOMOCUT_SOURCE_DIR) + "/" + rel);
  return json::parse(in);
}

// Potential with the boundary data of prob and random values on every unknown.
std::vector<double> random_potential(const LeastGradientProblem& prob, std::mt19937_64& rng, double scale) {
  auto u = initial_potential(prob);
  std::vector<int> dof;
  const int n = prob.dof_map(dof);
  std::vector<double> shift(n);
  for (auto& x : shift) x = scale * (2.0 * uniform(rng) - 1.0);
  for (int v = 0; v < prob.mesh->num_vertices(); ++v) {
    if (dof[v] >= 0) u[v] += shift[dof[v]];
  }
  return u;
}

BoundaryCycle disk_diameter(const SimplicialMesh& m) {
  return {{disk_boundary_vertex(m, 0.0), -1.0}, {disk_boundary_vertex(m, std::numbers::pi), 1.0}};
}

Outcome c1_mfmc() {
  const auto t0 = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + i % 11;
    const auto net = random_unit_network(n, 0.2 + 0.05 * (i % 7), 1000 + i);
    if (max_flow(net).value != brute_force_min_cut(net)) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 5.0,
          std::to_string(mismatches) + " mismatches in 500 networks, " + fmt("%.2f s", t)};
}

Outcome c2_weak_duality() {
  std::mt19937_64 rng(2);
  int violations = 0, pairs = 0;
  double worst = -1e300;

  // Flow/cut pairs: scaled maximum flows against random partitions.
  for (int i = 0; pairs < 5000; ++i) {
    const auto net = random_unit_network(3 + i % 10, 0.35, 5000 + i);
    const auto mf = max_flow(net);
    for (int k = 0; k < 50 && pairs < 5000; ++k, ++pairs) {
      const double lambda = uniform(rng);
      std::vector<double> f(mf.flow);
      for (auto& x : f) x *= lambda;
      std::vector<std::uint8_t> side(net.num_vertices);
      for (auto& s : side) s = rng() & 1u;
      side[net.source] = 1;
      side[net.sink] = 0;
      const double value = flow_value(net, f), cap = cut_capacity(net, side);
      worst = std::max(worst, value - cap);
      if (value > cap + 1e-12) ++violations;
    }
  }

  // Competitor/calibration pairs from three solved problems.
  std::vector<SimplicialMesh> meshes;
  meshes.push_back(flat_torus_mesh(8));
  meshes.push_back(hyperbolic_cylinder_mesh(-1, 1, 16, 16));
  meshes.push_back(flat_disk_mesh(6, 6));
  std::vector<LeastGradientProblem> probs;
  probs.push_back(make_problem(meshes[0], torus_constant_form(meshes[0], 1, 1), {}));
  probs.push_back(make_problem(meshes[1], cylinder_core_cochain(meshes[1], 16, 7), {}));
  probs.push_back(make_problem(meshes[2], std::vector<double>(meshes[2].count(1), 0.0), disk_diameter(meshes[2])));
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const auto sol = continuation(probs[j], default_schedule());
    const int quota = j + 1 < probs.size() ? 1667 : 10000 - pairs;
    for (int k = 0; k < quota; ++k, ++pairs) {
      const auto omega = total_form(probs[j], random_potential(probs[j], rng, 0.01 + k % 10));
      const double pairing = calibration_pairing(probs[j], sol.calibration, omega);
      const double mass = form_mass(probs[j], omega);
      worst = std::max(worst, pairing - mass);
      if (pairing > mass + 1e-12 * std::max(1.0, mass)) ++violations;
    }
  }
  return {violations == 0 && pairs == 10000,
          std::to_string(violations) + " violations in " + std::to_string(pairs) + " pairs, max excess " +
              fmt("%.3e", worst)};
}

Outcome c3_stable_norm() {
  struct Case {
    double a, b, expected, tol;
  };
  const Case cases[] = {{1, 0, 1.0, 1e-3}, {1, 1, std::sqrt(2.0), 0.02 * std::sqrt(2.0)}, {3, 4, 5.0, 0.1}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sn = stable_norm(32, c.a, c.b);
    const double t = seconds_since(t0);
    const bool pass = std::abs(sn.mass - c.expected) <= c.tol && t < 60.0;
    ok = ok && pass;
    detail += "(" + fmt("%g", c.a) + "," + fmt("%g", c.b) + ") " + fmt("%.6f", sn.mass) + " in " + fmt("%.1f s", t) +
              "; ";
  }
  return {ok, detail};
}

Outcome c4_foliation() {
  const double phi = 1.6180339887;
  const double expected = std::sqrt(1 + phi * phi);
  const auto golden = stable_norm(64, 1, phi);
  const auto rational = stable_norm(64, 1, 0);
  const bool ok = std::abs(golden.mass / expected - 1) <= 0.02 && golden.support_fraction > 0.5 &&
                  rational.support_fraction < 0.1;
  return {ok, "mass " + fmt("%.5f", golden.mass) + " vs " + fmt("%.5f", expected) + ", support " +
                  fmt("%.3f", golden.support_fraction) + " (class (1,0): " + fmt("%.3f", rational.support_fraction) +
                  ")"};
}

Outcome c5_hyperbolic() {
  const int n = 96;
  const auto m = hyperbolic_cylinder_mesh(-1, 1, n, n);
  const int rings = m.num_vertices() / n;
  const auto prob = make_problem(m, cylinder_core_cochain(m, n, rings / 2 - 1), {});
  const auto sol = continuation(prob, default_schedule());
  const auto gap = duality_gap(prob, sol);
  // Cell layer l lies between rings l and l + 1; skip two layers next to each boundary circle.
  double worst = 0.0;
  for (int t = 0; t < m.count(2); ++t) {
    const auto& s = m.simplex(2, t);
    const int layer = *std::min_element(s.begin(), s.end()) / n;
    if (layer < 2 || layer > rings - 4) continue;
    double x = 0.0;
    for (int v : s) x += m.coords(v)[0] / 3.0;
    const double norm = prob.norm->dual_value(m, t, std::span<const double>(sol.calibration.data() + 2 * t, 2));
    worst = std::max(worst, std::abs(norm * std::cosh(x) - 1.0));
  }
  const double rel = std::abs(sol.mass / kTwoPi - 1);
  const bool ok = rel <= 0.01 && worst < 0.03 && std::abs(gap.relative_gap) <= 1e-2;
  return {ok, "mass " + fmt("%.6f", sol.mass) + " (rel " + fmt("%.2e", rel) + "), profile deviation " +
                  fmt("%.2e", worst) + ", relative gap " + fmt("%.2e", gap.relative_gap)};
}

Outcome c6_adhesion() {
  const auto cfg = load_config("configs/half_cylinder_core.json");
  const auto dir = fs::temp_directory_path() / "homocut_acceptance_adhesion";
  fs::remove_all(dir);
  fs::create_directories(dir);
  cli::RunOptions opts;
  opts.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = cli::cmd_solve(cfg, opts, out, err);
  double mass = 0.0;
  bool adhesion = false;
  if (fs::exists(dir / "solution.json")) {
    std::ifstream in(dir / "solution.json");
    const auto sol = json::parse(in);
    mass = sol.at("mass").get<double>();
    for (const auto& w : sol.at("warnings")) adhesion = adhesion || w.get<std::string>().find("adhesion") != std::string::npos;
  }
  const auto& g = cfg.at("geometry");
  const auto m = hyperbolic_cylinder_mesh(g.at("x_min").get<double>(), g.at("x_max").get<double>(),
                                          g.at("n_x").get<int>(), g.at("n_theta").get<int>());
  const auto rep = boundary_mean_curvature(m);
  double h0 = 0.0;
  for (std::size_t i = 0; i < rep.hinges.size(); ++i) {
    if (m.coords(rep.hinges[i])[0] < 1.0) h0 = std::max(h0, std::abs(rep.values[i]));
  }
  const double rel = std::abs(mass / kTwoPi - 1);
  const bool ok = code == cli::kWarnings && adhesion && rel <= 0.01 && h0 < 1e-2 && !rep.strictly_mean_convex;
  return {ok, "exit " + std::to_string(code) + ", adhesion warning " + (adhesion ? "yes" : "no") + ", mass " +
                  fmt("%.5f", mass) + ", max |H| on x=0 " + fmt("%.2e", h0)};
}

Outcome c7_sign_diagram() {
  int passed = 0;
  {
    const auto m = flat_disk_mesh(3, 6);
    const auto path = shortest_edge_path(m, disk_boundary_vertex(m, 0.0), disk_boundary_vertex(m, std::numbers::pi));
    passed += verify_sign_diagram(m, class_of_cycle(m, ComplexKind::Relative, 1, path_chain(m, path, false))).commutes;
  }
  {
    const int nt = 6;
    const auto m = flat_cylinder_mesh(4, nt);
    const auto path = shortest_edge_path(m, grid_vertex(nt, 0, 0), grid_vertex(nt, m.num_vertices() / nt - 1, 0));
    passed += verify_sign_diagram(m, class_of_cycle(m, ComplexKind::Relative, 1, path_chain(m, path, false))).commutes;
  }
  {
    const auto m = solid_torus_mesh(2, 3);
    auto basis = std::make_shared<const HomologyBasis>(homology_basis(m, ComplexKind::Relative, 2));
    if (basis->dimension() == 1) passed += verify_sign_diagram(m, HomologyClass::rational(basis, {Rational(1)})).commutes;
  }
  return {passed == 3, std::to_string(passed) + " of 3 diagrams commute (disk, cylinder, solid torus)"};
}

Outcome c8_oracle() {
  int matched = 0;
  double worst = 0.0;
  int max_edges = 0;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t seed = 100 + i;
    LeastGradientProblem prob;
    SimplicialMesh m = i % 3 == 0   ? perturbed_mesh(flat_torus_mesh(3), 0.1, seed)
                       : i % 3 == 1 ? perturbed_mesh(flat_cylinder_mesh(3, 4), 0.1, seed)
                                    : perturbed_mesh(flat_disk_mesh(3, 3), 0.1, seed);
    if (i % 3 == 0) {
      prob = make_problem(m, torus_constant_form(m, 1.0, 0.1 * (i % 7)), {});
    } else if (i % 3 == 1) {
      prob = make_problem(m, cylinder_core_cochain(m, 4, 1), {});
    } else {
      prob = make_problem(m, std::vector<double>(m.count(1), 0.0), disk_diameter(m));
    }
    max_edges = std::max(max_edges, m.count(1));
    const auto sol = continuation(prob, default_schedule());
    const auto o = exact_small_oracle(prob);
    const double diff = std::abs(sol.mass - o.value);
    worst = std::max(worst, diff);
    if (diff <= 1e-4 && o.certified) ++matched;
  }
  return {matched == 20 && max_edges <= 60, std::to_string(matched) + " of 20 match, max difference " +
                                                fmt("%.2e", worst) + ", largest mesh " + std::to_string(max_edges) +
                                                " edges"};
}

Outcome c9_gradient() {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  const double ps[] = {1.1, 1.5, 2.0};
  for (int i = 0; i < 50; ++i) {
    const double p = ps[i % 3];
    SimplicialMesh m = i % 2 == 0 ? perturbed_mesh(flat_disk_mesh(3, 4), 0.1, i)
                                  : perturbed_mesh(hyperbolic_cylinder_mesh(-1, 1, 4, 5), 0.1, i);
    const auto prob = i % 2 == 0 ? make_problem(m, std::vector<double>(m.count(1), 0.0), disk_diameter(m))
                                 : make_problem(m, cylinder_core_cochain(m, 5, 1), {});
    const auto u = random_potential(prob, rng, 1.0);
    std::vector<double> grad;
    const double eps = 1e-2;
    p_energy(prob, u, p, eps, &grad);
    double num = 0.0, den = 0.0;
    for (int v : prob.free_vertices()) {
      const double h = 1e-5;
      auto up = u, um = u;
      up[v] += h;
      um[v] -= h;
      const double fd = (p_energy(prob, up, p, eps) - p_energy(prob, um, p, eps)) / (2 * h);
      num += (fd - grad[v]) * (fd - grad[v]);
      den += fd * fd;
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst < 1e-6, "max relative error " + fmt("%.2e", worst) + " over 50 instances"};
}

Outcome c10_packing() {
  const auto cfg = load_config("configs/packing_cylinder.json");
  const auto& pk = cfg.at("packing");
  std::vector<std::pair<double, double>> schedule;
  for (const auto& row : pk.at("schedule")) schedule.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  ConvergenceOptions opts;
  opts.samples = pk.at("samples").get<int>();
  opts.seed = cfg.at("seed").get<std::uint64_t>();
  const auto geom = flat_cylinder_geometry(pk.at("length").get<double>(), pk.at("circumference").get<double>());
  const auto rows = convergence_experiment(geom, schedule, opts);
  bool monotone = true;
  std::string detail = "rms error";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += " " + fmt("%.4f", rows[i].rms_error);
    if (i > 0 && !(rows[i].rms_error < rows[i - 1].rms_error)) monotone = false;
  }
  const bool ok = rows.size() == 4 && monotone && rows.back().rms_error < 0.10;

  ConvergenceOptions hopts;
  hopts.samples = 4;
  const auto hyp = convergence_experiment(hyperbolic_cylinder_geometry(-1, 1), {{0.4, 0.08}, {0.25, 0.03125}}, hopts);
  detail += "; hyperbolic trend (report only):";
  for (const auto& r : hyp) detail += " " + fmt("%.4f", r.rms_error);
  return {ok, detail};
}

Outcome c11_determinism() {
  std::string summaries[2], xml[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = fs::temp_directory_path() / ("homocut_acceptance_verify_" + std::to_string(k));
    fs::remove_all(dir);
    fs::create_directories(dir);
    cli::RunOptions opts;
    opts.out_dir = dir.string();
    opts.seed = 3;
    std::ostringstream out, err;
    cli::cmd_verify("all", opts, out, err);
    summaries[k] = out.str();
    std::ifstream in(dir / "verify-all.xml");
    std::stringstream ss;
    ss << in.rdbuf();
    xml[k] = ss.str();
  }
  const bool ok = !xml[0].empty() && summaries[0] == summaries[1] && xml[0] == xml[1];
  return {ok, "stdout " + std::string(summaries[0] == summaries[1] ? "identical" : "differs") + ", JUnit " +
                  (xml[0] == xml[1] ? "identical" : "differs") + " (" + std::to_string(xml[0].size()) + " bytes)"};
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, c1_mfmc},        {2, c2_weak_duality}, {3, c3_stable_norm}, {4, c4_foliation},
      {5, c5_hyperbolic},  {6, c6_adhesion}, {7, c7_sign_diagram}, {8, c8_oracle},
      {9, c9_gradient},    {10, c10_packing},    {11, c11_determinism}};
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
