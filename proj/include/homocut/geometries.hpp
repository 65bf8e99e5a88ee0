#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homocut/homology.hpp"
#include "homocut/leastgradient.hpp"
#include "homocut/mesh.hpp"

namespace homocut {

/// Unit square torus on an n x n grid, each square split along its diagonal.
/// Requires n >= 3 (for n = 2 two grid edges would join the same vertex pair).
SimplicialMesh flat_torus_mesh(int n);

/// [0, length] x circle of the given circumference; n_theta >= 3.
SimplicialMesh flat_cylinder_mesh(int n_x, int n_theta, double length = 1.0, double circumference = 1.0);

/// [x_min, x_max] x [0, 2pi) with metric dx^2 + cosh^2(x) dtheta^2.
SimplicialMesh hyperbolic_cylinder_mesh(double x_min, double x_max, int n_x, int n_theta);

/// Disk of the given radius in polar rings; ring k carries k * n_sectors vertices.
SimplicialMesh flat_disk_mesh(int n_rings, int n_sectors, double radius = 1.0);

/// Solid torus [0,1]^2 x circle of length 1, n x n x n_z cubes split into 6 tetrahedra each.
SimplicialMesh solid_torus_mesh(int n, int n_z);

/// Vertex id of grid point (i, j) in the cylinder and torus generators (i along x, j around the circle).
inline int grid_vertex(int n_theta, int i, int j) { return i * n_theta + ((j % n_theta) + n_theta) % n_theta; }

/// Closed 1-cochain a dx + b dy on a flat torus mesh.
std::vector<double> torus_constant_form(const SimplicialMesh& mesh, double a, double b);

/// Cycle {x = x_i} of a structured cylinder, oriented by increasing theta.
ChainQ cylinder_ring(const SimplicialMesh& mesh, int n_theta, int i);

/// Relative 1-cocycle of a structured cylinder dual to the core circle:
/// the coboundary of the indicator of the rings beyond ring i.
std::vector<double> cylinder_core_cochain(const SimplicialMesh& mesh, int n_theta, int i);

/// Boundary vertex of a disk mesh closest to the given angle.
int disk_boundary_vertex(const SimplicialMesh& mesh, double angle);

/// Same complex with every edge length multiplied by an independent factor in
/// [1 - amplitude, 1 + amplitude]; redraws until all simplices stay
/// nondegenerate. Deterministic in the seed.
SimplicialMesh perturbed_mesh(const SimplicialMesh& mesh, double amplitude, std::uint64_t seed);

/// Vertices of a shortest edge path from a to b (Dijkstra on edge lengths).
std::vector<int> shortest_edge_path(const SimplicialMesh& mesh, int a, int b);

struct StableNorm {
  double mass = 0.0;          // minimal mass of the class on the mesh
  double dual_bound = 0.0;    // calibration pairing divided by its largest dual norm
  double support_fraction = 0.0;
  double divergence = 0.0;    // relative divergence of the calibration
  bool converged = false;
};

/// Stable norm of the class a dx + b dy on the n x n flat torus: least mass
/// over closed forms in the class, with the calibration lower bound.
StableNorm stable_norm(int n, double a, double b, const std::vector<Stage>& schedule = default_schedule());

struct GeometrySpec {
  std::string kind = "flat_torus";  // flat_torus | flat_cylinder | hyperbolic_cylinder | flat_disk | solid_torus
  int n = 16;
  int n_x = 16;
  int n_theta = 16;
  int n_rings = 8;
  int n_sectors = 6;
  double x_min = -1.0;
  double x_max = 1.0;
  double length = 1.0;
  double circumference = 1.0;
  double radius = 1.0;
};

SimplicialMesh build_geometry(const GeometrySpec& spec);

struct OracleValue {
  double min_mass = 0.0;
  std::string calibration;
  std::string provenance;
};

/// Closed-form minimal cut mass for catalogued problems.
///   flat_torus: class (a, b) of the cochain a dx + b dy
///   flat_cylinder, hyperbolic_cylinder: multiple c of the core circle
/// Throws std::invalid_argument for an unsupported geometry or class.
OracleValue oracle_values(const GeometrySpec& spec, const std::vector<double>& cls);

/// Hyperbolic distance between (x1, t1) and (x2, t2) for dx^2 + cosh^2 x dtheta^2
/// with theta not identified.
double hyperbolic_strip_distance(double x1, double t1, double x2, double t2);

struct GeodesicArc {
  double length = 0.0;
  double turning_x = 0.0;    // smallest x reached
  double launch_angle = 0.0; // angle from the inward normal
  int iterations = 0;
};

/// Geodesic from (x0, 0) to (x0, dtheta) on the side x < x0, by shooting
/// with RK4 and bisection on the launch angle until the endpoint angle
/// matches to the given tolerance.
GeodesicArc shoot_geodesic_arc(double x0, double dtheta, double tolerance = 1e-8);

}  // namespace homocut
