#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homocut/geometries.hpp"

using namespace homocut;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TEST_SUITE("geometries") {

TEST_CASE("flat cylinder counts and area") {
  const auto m = flat_cylinder_mesh(5, 7, 2.0, 3.0);
  CHECK(m.num_vertices() == 6 * 7);
  CHECK(m.count(2) == 2 * 5 * 7);
  CHECK(m.num_vertices() - m.count(1) + m.count(2) == 0);
  CHECK(m.total_volume() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(m.boundary_components().size() == 2);
}

TEST_CASE("disk triangles tile the outer polygon") {
  const int rings = 5, sectors = 6;
  const auto m = flat_disk_mesh(rings, sectors, 2.0);
  const int n = rings * sectors;
  CHECK(m.total_volume() == doctest::Approx(0.5 * n * 4.0 * std::sin(kTwoPi / n)).epsilon(1e-12));
  CHECK(m.num_vertices() - m.count(1) + m.count(2) == 1);
  CHECK(m.boundary_components().size() == 1);
}

TEST_CASE("hyperbolic cylinder area approaches the surface area") {
  const auto m = hyperbolic_cylinder_mesh(-1.0, 1.0, 32, 64);
  CHECK(m.total_volume() == doctest::Approx(kTwoPi * 2 * std::sinh(1.0)).epsilon(5e-3));
}

TEST_CASE("solid torus is a 3-manifold with a torus boundary") {
  const auto m = solid_torus_mesh(2, 3);
  CHECK(m.dimension() == 3);
  CHECK(m.count(3) == 6 * 2 * 2 * 3);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.num_vertices() - m.count(1) + m.count(2) - m.count(3) == 0);
}

TEST_CASE("torus requires n >= 3") { CHECK_THROWS_AS(flat_torus_mesh(2), MeshError); }

TEST_CASE("closed-form oracle values") {
  GeometrySpec s;
  s.kind = "flat_torus";
  CHECK(oracle_values(s, {3, 4}).min_mass == doctest::Approx(5.0));
  s.kind = "flat_cylinder";
  s.circumference = 3.0;
  CHECK(oracle_values(s, {-2}).min_mass == doctest::Approx(6.0));
  s.kind = "hyperbolic_cylinder";
  CHECK(oracle_values(s, {1}).min_mass == doctest::Approx(kTwoPi));
  s.x_min = 0.5;
  s.x_max = 2.0;
  CHECK(oracle_values(s, {1}).min_mass == doctest::Approx(kTwoPi * std::cosh(0.5)));
  s.kind = "flat_disk";
  CHECK(oracle_values(s, {0.0, std::numbers::pi}).min_mass == doctest::Approx(2.0));
  CHECK(oracle_values(s, {0.0, std::numbers::pi / 3}).min_mass == doctest::Approx(1.0));
  s.kind = "solid_torus";
  CHECK_THROWS_AS(oracle_values(s, {1}), std::invalid_argument);
  s.kind = "flat_torus";
  CHECK_THROWS_AS(oracle_values(s, {1}), std::invalid_argument);
}

TEST_CASE("strip distance special cases") {
  // The core x = 0 is a geodesic and the x lines are geodesics.
  CHECK(hyperbolic_strip_distance(0, 0, 0, 1.3) == doctest::Approx(1.3));
  CHECK(hyperbolic_strip_distance(-0.4, 2, 0.9, 2) == doctest::Approx(1.3));
  CHECK(hyperbolic_strip_distance(1, 0, 1, 0.5) == doctest::Approx(hyperbolic_strip_distance(-1, 0, -1, 0.5)));
  CHECK(hyperbolic_strip_distance(1, 0, 1, 0.5) < std::cosh(1.0) * 0.5);
}

TEST_CASE("shooting agrees with the closed-form distance") {
  for (auto [x0, dt] : {std::pair{2.0, 1.0}, std::pair{1.0, 0.5}, std::pair{2.0, std::numbers::pi}}) {
    const auto arc = shoot_geodesic_arc(x0, dt);
    CHECK(arc.length == doctest::Approx(hyperbolic_strip_distance(x0, 0, x0, dt)).epsilon(1e-6));
    CHECK(arc.turning_x < x0);
  }
}

TEST_CASE("core cochain pairs to one with a transverse arc") {
  const int nt = 6;
  const auto m = flat_cylinder_mesh(4, nt);
  const auto eta = cylinder_core_cochain(m, nt, 1);
  const auto arc = shortest_edge_path(m, grid_vertex(nt, 0, 0), grid_vertex(nt, 4, 0));
  CHECK(std::abs(pair(eta, path_chain(m, arc, false))) == doctest::Approx(1.0));
  CHECK(pair(eta, cylinder_ring(m, nt, 3)) == doctest::Approx(0.0));
  for (int e = 0; e < m.count(1); ++e) {
    if (m.on_boundary(1, e)) CHECK(eta[e] == 0.0);
  }
}

TEST_CASE("torus constant form integrates to the class") {
  const int n = 5;
  const auto m = flat_torus_mesh(n);
  const auto eta = torus_constant_form(m, 2, -3);
  std::vector<int> hor, ver;
  for (int i = 0; i < n; ++i) hor.push_back(grid_vertex(n, i, 0));
  for (int j = 0; j < n; ++j) ver.push_back(grid_vertex(n, 0, j));
  CHECK(pair(eta, path_chain(m, hor, true)) == doctest::Approx(2.0));
  CHECK(pair(eta, path_chain(m, ver, true)) == doctest::Approx(-3.0));
}

TEST_CASE("perturbed meshes are deterministic and within the amplitude") {
  const auto m = flat_disk_mesh(2, 5);
  const auto a = perturbed_mesh(m, 0.1, 3), b = perturbed_mesh(m, 0.1, 3);
  for (int e = 0; e < m.count(1); ++e) {
    CHECK(a.edge_length(e) == b.edge_length(e));
    const double r = a.edge_length(e) / m.edge_length(e);
    CHECK(r >= 0.9 - 1e-12);
    CHECK(r <= 1.1 + 1e-12);
  }
}

TEST_CASE("stable norm on an 8 x 8 torus") {
  const auto sn = stable_norm(8, 1, 0);
  CHECK(sn.converged);
  CHECK(sn.mass == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(sn.dual_bound <= sn.mass * (1 + 1e-9));
  CHECK(sn.support_fraction < 0.5);
}

TEST_CASE("build_geometry dispatch") {
  GeometrySpec s;
  s.kind = "flat_disk";
  s.n_rings = 3;
  s.n_sectors = 5;
  CHECK(build_geometry(s).num_vertices() == 1 + 5 * (1 + 2 + 3));
  s.kind = "moebius";
  CHECK_THROWS_AS(build_geometry(s), MeshError);
}

}  // TEST_SUITE
