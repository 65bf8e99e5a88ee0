#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "homocut/graphflow.hpp"

namespace homocut {

using Point2 = std::array<double, 2>;

/// A surface given in a chart [x_min, x_max] x [0, period) whose metric
/// dominates the flat chart metric, so chart balls contain metric balls.
struct PackingGeometry {
  std::string name;
  double x_min = 0.0;
  double x_max = 1.0;
  double period = 1.0;
  bool periodic_x = false;  // true for the torus (no boundary)
  double area = 1.0;
  double continuum_cut = 0.0;  // minimal length separating the two boundary circles
  std::function<double(const Point2&, const Point2&)> distance;
  /// Point at approximately the given metric distance from p in direction angle.
  std::function<Point2(const Point2&, double angle, double dist)> offset;
  /// Distance from p to boundary component 0 (x = x_min) or 1 (x = x_max).
  std::function<double(const Point2&, int component)> boundary_distance;
};

PackingGeometry flat_cylinder_geometry(double length, double circumference);
PackingGeometry hyperbolic_cylinder_geometry(double x_min, double x_max);
PackingGeometry flat_torus_geometry();

struct PackingGraph {
  std::vector<Point2> points;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> warnings;
};

/// Greedy maximal packing of eps1-balls (centers at mutual distance >= 2 eps1)
/// with edges between centers whose distance is within theta * eps0 of eps0.
/// Throws std::invalid_argument unless 0 < eps1 < eps0 and 0 < theta < 1.
PackingGraph packing_graph(const PackingGeometry& geom, double eps0, double eps1, double theta, std::uint64_t seed);

/// Unit-capacity network; centers within 2 eps1 of boundary component 0
/// (resp. 1) are merged into the source (resp. sink).
FlowNetwork packing_network(const PackingGraph& graph, const PackingGeometry& geom, double eps1);

/// Expected number of edges crossing a unit-length curve for centers of the
/// given density, pairs at distance in [(1 - theta) eps0, (1 + theta) eps0].
double crossing_density(double density, double eps0, double theta);

struct ConvergenceRow {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double cut = 0.0;
  double flow = 0.0;
  double kappa = 0.0;
  double normalized_cut = 0.0;
  double normalized_flow = 0.0;
  double error = 0.0;      // |normalized_cut / continuum_cut - 1| of the sample mean
  double rms_error = 0.0;  // root mean square of the per-sample relative errors
};

struct ConvergenceOptions {
  double theta = 0.25;
  std::uint64_t seed = 1;
  int samples = 1;  // independent packings averaged per row
  double reference_circumference = 2.0;
};

/// Normalization constant kappa(eps0, eps1, theta): the known circumference of
/// a reference flat cylinder divided by its packing-graph minimum cut.
/// The reference uses its own seeds, distinct from experiment seeds.
double calibrate_kappa(double eps0, double eps1, const ConvergenceOptions& opts);

/// One row per (eps0, eps1); throws std::invalid_argument on an empty schedule.
std::vector<ConvergenceRow> convergence_experiment(const PackingGeometry& geom,
                                                   const std::vector<std::pair<double, double>>& schedule,
                                                   const ConvergenceOptions& opts);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace homocut
