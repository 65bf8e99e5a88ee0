#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "homocut/geometries.hpp"
#include "homocut/leastgradient.hpp"

using namespace homocut;

namespace {

double coordinate_gradient_sq(const SimplicialMesh& m, int t, const std::vector<double>& u) {
  const auto& s = m.simplex(2, t);
  Eigen::Matrix2d e;
  Eigen::Vector2d du;
  for (int k = 1; k <= 2; ++k) {
    e(k - 1, 0) = m.coords(s[k])[0] - m.coords(s[0])[0];
    e(k - 1, 1) = m.coords(s[k])[1] - m.coords(s[0])[1];
    du(k - 1) = u[s[k]] - u[s[0]];
  }
  return (e.inverse() * du).squaredNorm();
}

double triangle_area(const SimplicialMesh& m, int t) {
  const auto& s = m.simplex(2, t);
  const auto a = m.coords(s[0]), b = m.coords(s[1]), c = m.coords(s[2]);
  return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

// Dirichlet problem for the cotangent Laplacian, assembled densely from coordinates.
std::vector<double> cotan_harmonic(const SimplicialMesh& m, const std::vector<double>& f) {
  const int n = m.num_vertices();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < m.count(2); ++t) {
    const auto& s = m.simplex(2, t);
    for (int k = 0; k < 3; ++k) {
      const int i = s[k], j = s[(k + 1) % 3], o = s[(k + 2) % 3];
      const Eigen::Vector2d a(m.coords(i)[0] - m.coords(o)[0], m.coords(i)[1] - m.coords(o)[1]);
      const Eigen::Vector2d b(m.coords(j)[0] - m.coords(o)[0], m.coords(j)[1] - m.coords(o)[1]);
      const double w = 0.5 * a.dot(b) / std::abs(a.x() * b.y() - a.y() * b.x());
      L(i, j) -= w;
      L(j, i) -= w;
      L(i, i) += w;
      L(j, j) += w;
    }
  }
  std::vector<int> interior;
  for (int v = 0; v < n; ++v) {
    if (!m.on_boundary(0, v)) interior.push_back(v);
  }
  const int k = static_cast<int>(interior.size());
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) A(a, b) = L(interior[a], interior[b]);
    for (int v = 0; v < n; ++v) {
      if (m.on_boundary(0, v)) rhs(a) -= L(interior[a], v) * f[v];
    }
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(rhs);
  std::vector<double> u(f);
  for (int a = 0; a < k; ++a) u[interior[a]] = x(a);
  return u;
}

BoundaryCycle diameter(const SimplicialMesh& m, double weight = 1.0) {
  return {{disk_boundary_vertex(m, 0.0), -weight}, {disk_boundary_vertex(m, std::numbers::pi), weight}};
}

std::vector<double> random_potential(const SimplicialMesh& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> u(m.num_vertices());
  for (auto& x : u) x = g(rng);
  return u;
}

}  // namespace

TEST_SUITE("leastgradient") {

TEST_CASE("p = 2 energy is the area-weighted squared gradient") {
  const auto m = flat_disk_mesh(3, 5);
  auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), {});
  const auto u = random_potential(m, 1);
  double expected = 0.0, eps = 0.3;
  for (int t = 0; t < m.count(2); ++t) expected += triangle_area(m, t) * (coordinate_gradient_sq(m, t, u) + eps * eps);
  CHECK(p_energy(prob, u, 2.0, eps) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("energy gradient matches finite differences") {
  const auto m = hyperbolic_cylinder_mesh(-1, 1, 3, 6);
  const auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), {});
  auto u = random_potential(m, 2);
  for (double p : {1.1, 1.5, 2.0}) {
    std::vector<double> grad;
    p_energy(prob, u, p, 0.05, &grad);
    const double h = 1e-6;
    for (int v = 0; v < m.num_vertices(); v += 3) {
      auto up = u, um = u;
      up[v] += h;
      um[v] -= h;
      const double fd = (p_energy(prob, up, p, 0.05) - p_energy(prob, um, p, 0.05)) / (2 * h);
      CHECK(grad[v] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("energy is invariant under constant shifts on a closed surface") {
  const auto m = flat_torus_mesh(4);
  const auto prob = make_problem(m, torus_constant_form(m, 1, 0), {});
  auto u = random_potential(m, 3);
  const double before = p_energy(prob, u, 1.3, 0.01);
  for (auto& x : u) x += 2.5;
  CHECK(p_energy(prob, u, 1.3, 0.01) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("constant unit form on the torus") {
  const auto m = flat_torus_mesh(5);
  const auto prob = make_problem(m, torus_constant_form(m, 0.6, 0.8), {});
  const std::vector<double> zero(m.num_vertices(), 0.0);
  for (double p : {1.1, 1.5, 2.0}) CHECK(p_energy(prob, zero, p, 1e-9) == doctest::Approx(1.0).epsilon(1e-9));
  // Constant-norm forms are p-harmonic: the solve stays at u = 0.
  const auto r = solve_p_laplacian(prob, 1.5, 1e-2, zero);
  CHECK(r.converged);
  for (double x : r.u) CHECK(x == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("p = 2 solve equals the dense cotangent Dirichlet solve") {
  const auto m = flat_disk_mesh(4, 5);
  auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), {});
  std::vector<double> f(m.num_vertices(), 0.0);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const double x = m.coords(v)[0], y = m.coords(v)[1];
    f[v] = x * x * x - 3 * x * y * y + 0.5 * y;
  }
  prob.boundary_values = f;
  const auto r = solve_p_laplacian(prob, 2.0, 0.0, initial_potential(prob));
  CHECK(r.converged);
  const auto expected = cotan_harmonic(m, f);
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(r.u[v] == doctest::Approx(expected[v]).epsilon(1e-8));
}

TEST_CASE("linear boundary data extend linearly") {
  const auto m = flat_disk_mesh(3, 6);
  auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), {});
  std::vector<double> f(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) f[v] = 2 * m.coords(v)[0] - m.coords(v)[1];
  prob.boundary_values = f;
  const auto r = solve_p_laplacian(prob, 1.5, 1e-3, initial_potential(prob));
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(r.u[v] == doctest::Approx(f[v]).epsilon(1e-6));
}

TEST_CASE("boundary data jump by the weight of S") {
  const auto m = flat_disk_mesh(4, 6);
  const std::vector<double> zero(m.count(1), 0.0);
  for (double w : {1.0, 2.0, -1.0}) {
    const auto f = boundary_data_from_cycle(m, diameter(m, w), zero);
    double lo = 0.0, hi = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (!m.on_boundary(0, v)) continue;
      lo = std::min(lo, f[v]);
      hi = std::max(hi, f[v]);
    }
    CHECK(hi - lo == doctest::Approx(std::abs(w)));
  }
  CHECK_THROWS_AS(boundary_data_from_cycle(m, {{disk_boundary_vertex(m, 0.0), 1.0}}, zero), SolverError);
}

TEST_CASE("invalid solver input") {
  const auto m = flat_disk_mesh(2, 5);
  const auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), diameter(m));
  const auto u = initial_potential(prob);
  CHECK_THROWS_AS(p_energy(prob, u, 2.5, 0.1), SolverError);
  CHECK_THROWS_AS(p_energy(prob, u, 1.5, 0.0), SolverError);
  CHECK_THROWS_AS(continuation(prob, {{1.5, 0.1}, {2.0, 0.1}}), SolverError);
  CHECK_THROWS_AS(continuation(prob, {{1.5, 0.1}, {1.4, 0.2}}), SolverError);
  const auto big = flat_torus_mesh(6);
  CHECK_THROWS_AS(exact_small_oracle(make_problem(big, torus_constant_form(big, 1, 0), {})), SolverError);
}

TEST_CASE("disk diameter cut has mass close to 2") {
  const auto m = flat_disk_mesh(12, 6);
  const auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), diameter(m));
  const auto sol = continuation(prob, default_schedule());
  CHECK(sol.mass == doctest::Approx(2.0).epsilon(0.02));
  const auto cut = extract_cut(prob, sol);
  CHECK(cut.mass == doctest::Approx(sol.mass).epsilon(1e-9));
  CHECK(cut.boundary_defect < 1e-9);
  const auto gap = duality_gap(prob, sol);
  CHECK(gap.pairing <= gap.mass * (1 + 1e-9));
  CHECK(gap.gamma_sup == doctest::Approx(1.0));
}

TEST_CASE("zero data give the zero current") {
  const auto m = flat_torus_mesh(4);
  const auto prob = make_problem(m, std::vector<double>(m.count(1), 0.0), {});
  const auto sol = continuation(prob, default_schedule());
  CHECK(sol.mass == doctest::Approx(0.0));
  const auto cut = extract_cut(prob, sol);
  CHECK(cut.mass == doctest::Approx(0.0));
  for (double w : cut.weight) CHECK(w == doctest::Approx(0.0));
}

TEST_CASE("scaling the data scales the minimum") {
  const auto m = flat_disk_mesh(6, 6);
  const std::vector<double> zero(m.count(1), 0.0);
  const double one = continuation(make_problem(m, zero, diameter(m, 1.0)), default_schedule()).mass;
  const double three = continuation(make_problem(m, zero, diameter(m, 3.0)), default_schedule()).mass;
  CHECK(three == doctest::Approx(3.0 * one).epsilon(1e-4));
}

TEST_CASE("scaling every edge length scales the minimum") {
  const auto m = flat_disk_mesh(6, 6);
  std::map<std::pair<int, int>, double> lengths;
  for (int e = 0; e < m.count(1); ++e) lengths[{m.simplex(1, e)[0], m.simplex(1, e)[1]}] = 2.5 * m.edge_length(e);
  std::vector<std::vector<double>> verts;
  for (int v = 0; v < m.num_vertices(); ++v) verts.emplace_back(m.coords(v).begin(), m.coords(v).end());
  std::vector<std::vector<int>> tris;
  for (int t = 0; t < m.count(2); ++t) {
    auto s = m.simplex(2, t);
    if (m.orientation(t) < 0) std::swap(s[0], s[1]);
    tris.push_back(s);
  }
  const auto big = build_mesh(verts, tris, MetricSpec::explicit_lengths(lengths));
  const std::vector<double> zero(m.count(1), 0.0);
  const double a = continuation(make_problem(m, zero, diameter(m)), default_schedule()).mass;
  const double b = continuation(make_problem(big, zero, diameter(big)), default_schedule()).mass;
  CHECK(b == doctest::Approx(2.5 * a).epsilon(1e-6));
}

TEST_CASE("changing the representative by an exact form keeps the minimum") {
  const auto m = flat_torus_mesh(6);
  const auto eta = torus_constant_form(m, 1, 1);
  const auto g = random_potential(m, 4);
  auto shifted = eta;
  for (int e = 0; e < m.count(1); ++e) {
    const auto& s = m.simplex(1, e);
    shifted[e] += g[s[1]] - g[s[0]];
  }
  const double a = continuation(make_problem(m, eta, {}), default_schedule()).mass;
  const double b = continuation(make_problem(m, shifted, {}), default_schedule()).mass;
  CHECK(b == doctest::Approx(a).epsilon(1e-6));
}

TEST_CASE("stage masses settle as p decreases") {
  const auto m = flat_disk_mesh(6, 6);
  const auto sol = continuation(make_problem(m, std::vector<double>(m.count(1), 0.0), diameter(m)), default_schedule());
  REQUIRE(sol.trace.size() == default_schedule().size());
  for (const auto& rec : sol.trace) CHECK(rec.converged);
  // Each stage's potential is a competitor for the final problem.
  for (const auto& rec : sol.trace) CHECK(rec.mass >= sol.mass * (1 - 1e-6));
}

TEST_CASE("small oracle on the 3 x 3 torus") {
  const auto m = flat_torus_mesh(3);
  for (auto [a, b] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
    const auto prob = make_problem(m, torus_constant_form(m, a, b), {});
    const auto ex = exact_small_oracle(prob);
    CHECK(ex.certified);
    CHECK(ex.value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ex.lower <= ex.value + 1e-12);
    CHECK(continuation(prob, default_schedule()).mass == doctest::Approx(ex.value).epsilon(1e-4));
  }
}

TEST_CASE("homology class input on the cylinder") {
  const int nt = 6;
  const auto m = flat_cylinder_mesh(4, nt);
  const auto alpha = class_of_cycle(m, ComplexKind::Absolute, 1, cylinder_ring(m, nt, 2));
  const auto prob = make_problem(m, alpha, {});
  const auto sol = continuation(prob, default_schedule());
  // Shortest closed curve around a circle of circumference 1.
  CHECK(sol.mass == doctest::Approx(1.0).epsilon(1e-3));
}

}  // TEST_SUITE
