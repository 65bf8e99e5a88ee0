#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace homocut {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vertex ids of a simplex, sorted ascending.
using Simplex = std::vector<int>;

/// How edge lengths are obtained when a mesh is built.
///
/// Lengths are the only metric data a SimplicialMesh keeps. An analytic
/// metric is diagonal in the chart, ds^2 = sum_i s_i(x)^2 dx_i^2, and is
/// sampled at the edge midpoint. Periodic chart axes use the minimal image
/// displacement.
struct MetricSpec {
  enum class Kind { Euclidean, Diagonal, Explicit };

  Kind kind = Kind::Euclidean;
  std::vector<double> periods;  // 0 for a non-periodic axis
  std::function<std::vector<double>(std::span<const double>)> scale;
  std::map<std::pair<int, int>, double> lengths;  // keyed by (min, max)
  std::string name = "euclidean";

  static MetricSpec euclidean(std::vector<double> periods = {});
  static MetricSpec diagonal(std::function<std::vector<double>(std::span<const double>)> scale,
                             std::vector<double> periods = {}, std::string name = "diagonal");
  static MetricSpec explicit_lengths(std::map<std::pair<int, int>, double> lengths);

  /// Chart displacement b - a, wrapped on periodic axes.
  std::vector<double> displacement(std::span<const double> a, std::span<const double> b) const;
  double edge_length(int i, int j, std::span<const double> a, std::span<const double> b) const;
};

/// Face of a simplex with its incidence sign in the simplicial boundary.
struct Incidence {
  int face;
  int sign;
};

/// Immutable oriented simplicial manifold-with-boundary with Regge metric.
///
/// Simplices of every dimension are stored with sorted vertex lists; the
/// boundary operator uses the sorted order, so face i of [v0..vk] carries
/// sign (-1)^i. Only top simplices carry an orientation sign relative to
/// their sorted order; the fundamental chain is sum_T orientation(T) * T.
class SimplicialMesh {
 public:
  int dimension() const { return dim_; }
  int num_vertices() const { return static_cast<int>(coords_.size()); }
  int count(int k) const { return static_cast<int>(simplices_.at(k).size()); }

  std::span<const double> coords(int v) const { return coords_[v]; }
  const Simplex& simplex(int k, int i) const { return simplices_[k][i]; }
  const std::vector<Simplex>& simplices(int k) const { return simplices_[k]; }
  /// Index of a simplex given its (unsorted) vertices, or -1.
  int find(std::vector<int> vertices) const;
  int edge_index(int a, int b) const;

  /// Faces of the i-th k-simplex with signs (k >= 1).
  const std::vector<Incidence>& faces(int k, int i) const { return faces_[k][i]; }
  /// Cofaces of the i-th k-simplex with signs (k < d).
  const std::vector<Incidence>& cofaces(int k, int i) const { return cofaces_[k][i]; }

  int orientation(int top) const { return orientation_[top]; }
  bool on_boundary(int k, int i) const { return boundary_flags_[k][i] != 0; }
  bool has_boundary() const;
  /// Coefficient of a boundary (d-1)-simplex in the boundary of the fundamental chain, 0 for interior ones.
  int induced_orientation(int facet) const { return induced_[facet]; }
  /// Connected components of the boundary, as lists of vertex ids.
  const std::vector<std::vector<int>>& boundary_components() const { return boundary_components_; }
  /// Boundary component index of a vertex, -1 for interior vertices.
  int boundary_component_of(int v) const { return component_of_vertex_[v]; }

  double edge_length(int e) const { return volumes_[1][e]; }
  double volume(int k, int i) const { return volumes_[k][i]; }
  double dual_volume(int k, int i) const { return dual_volumes_[k][i]; }
  double total_volume() const;
  double diameter_estimate() const;

  /// Gram matrix inverse of the i-th top simplex in the edge basis e_k = v_k - v_0
  /// (row-major, d x d). Gives inner products of barycentric gradients.
  std::span<const double> inverse_gram(int top) const {
    return {inv_gram_.data() + static_cast<std::size_t>(top) * dim_ * dim_,
            static_cast<std::size_t>(dim_ * dim_)};
  }
  /// Edge ids (v0, vk) for k = 1..d of the i-th top simplex.
  std::span<const int> cell_edges(int top) const {
    return {cell_edges_.data() + static_cast<std::size_t>(top) * dim_, static_cast<std::size_t>(dim_)};
  }
  bool uses_circumcentric_dual(int top) const { return circumcentric_[top] != 0; }
  const std::string& metric_name() const { return metric_name_; }

  friend SimplicialMesh build_mesh(std::vector<std::vector<double>> vertices,
                                   const std::vector<std::vector<int>>& simplices,
                                   const MetricSpec& metric);

 private:
  int dim_ = 0;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<std::map<Simplex, int>> index_;
  std::vector<std::vector<std::vector<Incidence>>> faces_;
  std::vector<std::vector<std::vector<Incidence>>> cofaces_;
  std::vector<int> orientation_;
  std::vector<std::vector<std::uint8_t>> boundary_flags_;
  std::vector<int> induced_;
  std::vector<std::vector<int>> boundary_components_;
  std::vector<int> component_of_vertex_;
  std::vector<std::vector<double>> volumes_;
  std::vector<std::vector<double>> dual_volumes_;
  std::vector<double> inv_gram_;
  std::vector<int> cell_edges_;
  std::vector<std::uint8_t> circumcentric_;
  std::string metric_name_;
};

/// Builds and validates a mesh. Top simplices are given as ordered vertex
/// tuples; their order defines the orientation.
///
/// Throws MeshError on a non-manifold facet, inconsistent orientation,
/// degenerate simplex or a violated triangle inequality.
SimplicialMesh build_mesh(std::vector<std::vector<double>> vertices,
                          const std::vector<std::vector<int>>& simplices, const MetricSpec& metric);

/// Diagonal Hodge star on k-cochains: dual volume over primal volume.
std::vector<double> hodge_star(const SimplicialMesh& mesh, int k);

struct MeanCurvatureReport {
  std::vector<int> hinges;      // boundary (d-2)-simplex ids
  std::vector<double> values;   // inward mean curvature per hinge
  double tolerance = 0.0;
  bool strictly_mean_convex = true;
  std::vector<std::string> warnings;
};

/// Discrete inward mean curvature of the boundary at each boundary hinge,
/// from the angle defect pi - (sum of interior dihedral angles).
///
/// tolerance < 0 selects the default 1e-6 / diameter.
MeanCurvatureReport boundary_mean_curvature(const SimplicialMesh& mesh, double tolerance = -1.0);

}  // namespace homocut
