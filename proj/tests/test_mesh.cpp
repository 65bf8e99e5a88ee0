#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "homocut/geometries.hpp"
#include "homocut/mesh.hpp"
#include "homocut/mesh_io.hpp"

using namespace homocut;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

SimplicialMesh unit_square() {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, MetricSpec::euclidean());
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("unit square split in two triangles") {
  const auto m = unit_square();
  CHECK(m.num_vertices() == 4);
  CHECK(m.count(1) == 5);
  CHECK(m.count(2) == 2);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.has_boundary());
  int boundary_edges = 0;
  for (int e = 0; e < m.count(1); ++e) boundary_edges += m.on_boundary(1, e);
  CHECK(boundary_edges == 4);
}

TEST_CASE("segment has two boundary points and half-length vertex stars") {
  const auto m = build_mesh({{0.0}, {1.0}}, {{0, 1}}, MetricSpec::euclidean());
  CHECK(m.dimension() == 1);
  CHECK(m.edge_length(0) == doctest::Approx(1.0));
  CHECK(m.on_boundary(0, 0));
  CHECK(m.on_boundary(0, 1));
  const auto star = hodge_star(m, 0);
  CHECK(star[0] == doctest::Approx(0.5));
  CHECK(star[1] == doctest::Approx(0.5));
}

TEST_CASE("8x8 torus counts, area and vertex stars") {
  const auto m = flat_torus_mesh(8);
  CHECK(m.num_vertices() == 64);
  CHECK(m.count(1) == 192);
  CHECK(m.count(2) == 128);
  CHECK(m.num_vertices() - m.count(1) + m.count(2) == 0);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(m.has_boundary());
  const auto star0 = hodge_star(m, 0);
  for (double s : star0) CHECK(s == doctest::Approx(1.0 / 64).epsilon(1e-12));
  CHECK(sum(star0) == doctest::Approx(1.0));
}

TEST_CASE("hodge star entries are positive") {
  const auto tri = build_mesh({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}}, MetricSpec::euclidean());
  for (int k = 0; k <= 2; ++k) {
    for (double s : hodge_star(tri, k)) CHECK(s > 0);
  }
  // Circumcentric dual of an equilateral edge: distance from circumcenter to the edge.
  CHECK(hodge_star(tri, 1)[0] == doctest::Approx((1.0 / (2 * std::sqrt(3.0))) / 1.0).epsilon(1e-12));
}

TEST_CASE("vertex dual areas partition the disk") {
  const auto m = flat_disk_mesh(5, 6);
  double total = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) total += m.dual_volume(0, v);
  CHECK(total == doctest::Approx(m.total_volume()).epsilon(1e-12));
}

TEST_CASE("build errors") {
  SUBCASE("non-manifold edge") {
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}}, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}},
                               MetricSpec::euclidean()),
                    MeshError);
  }
  SUBCASE("inconsistent orientation") {
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 3, 2}}, MetricSpec::euclidean()),
                    MeshError);
  }
  SUBCASE("degenerate simplex") {
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, MetricSpec::euclidean()), MeshError);
  }
  SUBCASE("triangle inequality") {
    std::map<std::pair<int, int>, double> l{{{0, 1}, 1.0}, {{1, 2}, 1.0}, {{0, 2}, 3.0}};
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, MetricSpec::explicit_lengths(l)), MeshError);
  }
}

TEST_CASE("orientation is consistent across interior facets") {
  const auto m = flat_disk_mesh(4, 5);
  for (int f = 0; f < m.count(1); ++f) {
    const auto& co = m.cofaces(1, f);
    if (co.size() != 2) continue;
    const int s0 = co[0].sign * m.orientation(co[0].face);
    const int s1 = co[1].sign * m.orientation(co[1].face);
    CHECK(s0 == -s1);
  }
}

TEST_CASE("json round trip keeps the metric") {
  const auto m = hyperbolic_cylinder_mesh(-1, 1, 4, 6);
  std::stringstream ss;
  write_mesh_json(ss, m);
  const auto r = read_mesh_json(ss);
  REQUIRE(r.count(1) == m.count(1));
  for (int e = 0; e < m.count(1); ++e) CHECK(r.edge_length(e) == doctest::Approx(m.edge_length(e)).epsilon(1e-14));
  CHECK(r.total_volume() == doctest::Approx(m.total_volume()).epsilon(1e-13));
}

TEST_CASE("off import with a sidecar edge-length file") {
  std::stringstream off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  std::stringstream side("0 1 2\n1 2 2\n0 2 2\n");
  const auto m = read_off(off, &side);
  CHECK(m.total_volume() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("mean curvature of the unit disk boundary is about 1") {
  const auto m = flat_disk_mesh(16, 6);
  const auto rep = boundary_mean_curvature(m);
  REQUIRE_FALSE(rep.values.empty());
  for (double h : rep.values) CHECK(h == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(rep.strictly_mean_convex);
}

TEST_CASE("mean curvature on the x in [0, 2] hyperbolic cylinder follows tanh") {
  const auto m = hyperbolic_cylinder_mesh(0.0, 2.0, 128, 32);
  const auto rep = boundary_mean_curvature(m);
  for (std::size_t i = 0; i < rep.hinges.size(); ++i) {
    const double x = m.coords(rep.hinges[i])[0];
    if (x < 1.0) {
      CHECK(std::abs(rep.values[i]) < 1e-2);
    } else {
      CHECK(rep.values[i] == doctest::Approx(std::tanh(2.0)).epsilon(2e-2));
    }
  }
  CHECK_FALSE(rep.strictly_mean_convex);
}

TEST_CASE("closed mesh: vacuous verdict with a warning") {
  const auto rep = boundary_mean_curvature(flat_torus_mesh(4));
  CHECK(rep.values.empty());
  CHECK(rep.strictly_mean_convex);
  CHECK_FALSE(rep.warnings.empty());
}

}  // TEST_SUITE
