#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "homocut/packing.hpp"

using namespace homocut;

namespace {

// Monte Carlo count of unordered pairs at distance in [r1, r2] whose
// segment crosses the horizontal lines y = 0 and y = L/2 of a periodic
// L x L square, per unit line length.
double sampled_crossing_density(double density, double r1, double r2, int trials) {
  const double L = 8.0;
  const int n = static_cast<int>(density * L * L);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, L);
  long hits = 0;
  std::vector<std::array<double, 2>> p(n);
  for (int t = 0; t < trials; ++t) {
    for (auto& q : p) q = {u(rng), u(rng)};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dx = std::remainder(p[j][0] - p[i][0], L);
        const double dy = std::remainder(p[j][1] - p[i][1], L);
        const double r = std::hypot(dx, dy);
        if (r < r1 || r > r2) continue;
        for (double line : {0.0, L / 2}) {
          // Signed offset of p_i from the line.
          const double y0 = std::remainder(p[i][1] - line, L);
          if ((y0 < 0) != (y0 + dy < 0)) ++hits;
        }
      }
    }
  }
  return static_cast<double>(hits) / (2.0 * L * trials);
}

}  // namespace

TEST_SUITE("packing") {

TEST_CASE("centers are 2 eps1 apart and edges respect the slack") {
  const auto geom = flat_cylinder_geometry(1.0, 2.0);
  const double eps0 = 0.2, eps1 = 0.03, theta = 0.25;
  const auto g = packing_graph(geom, eps0, eps1, theta, 3);
  REQUIRE(g.points.size() > 10);
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    CHECK(g.points[i][0] >= geom.x_min);
    CHECK(g.points[i][0] <= geom.x_max);
    for (std::size_t j = i + 1; j < g.points.size(); ++j) {
      CHECK(geom.distance(g.points[i], g.points[j]) >= 2 * eps1 - 1e-12);
    }
  }
  for (const auto& [a, b] : g.edges) {
    CHECK(std::abs(geom.distance(g.points[a], g.points[b]) - eps0) <= theta * eps0 + 1e-12);
  }
}

TEST_CASE("packing is deterministic in the seed") {
  const auto geom = hyperbolic_cylinder_geometry(-1.0, 1.0);
  const auto a = packing_graph(geom, 0.3, 0.05, 0.25, 11), b = packing_graph(geom, 0.3, 0.05, 0.25, 11);
  CHECK(a.points == b.points);
  CHECK(a.edges == b.edges);
  const auto c = packing_graph(geom, 0.3, 0.05, 0.25, 12);
  CHECK(c.points != a.points);
}

TEST_CASE("parameter validation") {
  const auto geom = flat_cylinder_geometry(1.0, 1.0);
  CHECK_THROWS_AS(packing_graph(geom, 0.1, 0.2, 0.25, 1), std::invalid_argument);
  CHECK_THROWS_AS(packing_graph(geom, 0.1, 0.0, 0.25, 1), std::invalid_argument);
  CHECK_THROWS_AS(packing_graph(geom, 0.2, 0.05, 1.0, 1), std::invalid_argument);
  const auto torus = flat_torus_geometry();
  const auto g = packing_graph(torus, 0.2, 0.05, 0.25, 1);
  CHECK_THROWS_AS(packing_network(g, torus, 0.05), std::invalid_argument);
  ConvergenceOptions opts;
  CHECK_THROWS_AS(convergence_experiment(geom, {}, opts), std::invalid_argument);
}

TEST_CASE("network terminals attach to the boundary layers") {
  const auto geom = flat_cylinder_geometry(1.0, 1.0);
  const double eps1 = 0.03;
  const auto g = packing_graph(geom, 0.2, eps1, 0.25, 5);
  const auto net = packing_network(g, geom, eps1);
  const int m = static_cast<int>(g.points.size());
  CHECK(net.num_vertices == m + 2);
  for (const auto& e : net.edges) {
    if (e.from == net.source) CHECK(g.points[e.to][0] <= 2 * eps1 + 1e-12);
    if (e.to == net.sink) CHECK(g.points[e.from][0] >= 1.0 - 2 * eps1 - 1e-12);
  }
  const auto c = min_cut(net);
  CHECK(c.capacity == doctest::Approx(c.flow_value));
  CHECK(c.capacity > 0);
}

TEST_CASE("crossing density matches a Monte Carlo count") {
  const double density = 4.0, eps0 = 0.5, theta = 0.25;
  const double expected = crossing_density(density, eps0, theta);
  const double sampled = sampled_crossing_density(density, (1 - theta) * eps0, (1 + theta) * eps0, 200);
  CHECK(sampled == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("convergence rows are consistent") {
  const auto geom = flat_cylinder_geometry(1.0, 1.0);
  ConvergenceOptions opts;
  opts.samples = 2;
  const auto rows = convergence_experiment(geom, {{0.4, 0.08}, {0.3, 0.045}}, opts);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.kappa > 0);
    CHECK(r.cut == doctest::Approx(r.flow));
    CHECK(r.normalized_cut == doctest::Approx(r.kappa * r.cut));
    CHECK(r.error == doctest::Approx(std::abs(r.normalized_cut / geom.continuum_cut - 1.0)));
    CHECK(r.rms_error >= r.error - 1e-12);
  }
  std::stringstream ss;
  write_convergence_csv(ss, rows);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "eps0,eps1,cut,flow,kappa,normalized_cut,normalized_flow,error,rms_error");
  const auto again = convergence_experiment(geom, {{0.4, 0.08}, {0.3, 0.045}}, opts);
  CHECK(again[1].cut == rows[1].cut);
}

}  // TEST_SUITE
