#pragma once

#include <iosfwd>
#include <string>

#include "homocut/mesh.hpp"

namespace homocut {

/// Mesh file: a JSON document with sections "vertices", "simplices" and
/// "metric". The metric section is one of
///   {"type": "euclidean", "periods": [...]}
///   {"type": "hyperbolic_cylinder", "periods": [0, 2pi]}   (dx^2 + cosh^2 x dtheta^2)
///   {"type": "edge_lengths", "lengths": [[i, j, l], ...]}
/// Floats are written as round-trippable decimal text.
SimplicialMesh read_mesh_json(std::istream& in);
SimplicialMesh read_mesh_json_file(const std::string& path);
void write_mesh_json(std::ostream& out, const SimplicialMesh& mesh);

/// OFF triangle file plus a sidecar metric file of "i j length" lines.
/// An empty sidecar path means the Euclidean metric of the OFF coordinates.
SimplicialMesh read_off(std::istream& off, std::istream* sidecar);
SimplicialMesh read_off_file(const std::string& off_path, const std::string& sidecar_path = "");

/// Metric by name, as used in mesh files and CLI configs.
MetricSpec named_metric(const std::string& name, std::vector<double> periods);

}  // namespace homocut
