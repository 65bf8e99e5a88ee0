#include "homocut/mesh_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace homocut {

using nlohmann::json;

MetricSpec named_metric(const std::string& name, std::vector<double> periods) {
  if (name == "euclidean") return MetricSpec::euclidean(std::move(periods));
  if (name == "hyperbolic_cylinder") {
    return MetricSpec::diagonal(
        [](std::span<const double> x) { return std::vector<double>{1.0, std::cosh(x[0])}; }, std::move(periods),
        "hyperbolic_cylinder");
  }
  throw MeshError("unknown metric '" + name + "'");
}

SimplicialMesh read_mesh_json(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw MeshError(std::string("mesh file: ") + e.what());
  }
  auto vertices = doc.at("vertices").get<std::vector<std::vector<double>>>();
  auto simplices = doc.at("simplices").get<std::vector<std::vector<int>>>();
  const json metric = doc.value("metric", json{{"type", "euclidean"}});
  const std::string type = metric.value("type", "euclidean");
  std::vector<double> periods = metric.value("periods", std::vector<double>{});
  if (type == "edge_lengths") {
    std::map<std::pair<int, int>, double> lengths;
    for (const auto& row : metric.at("lengths")) {
      const int i = row.at(0).get<int>(), j = row.at(1).get<int>();
      lengths[{std::min(i, j), std::max(i, j)}] = row.at(2).get<double>();
    }
    return build_mesh(std::move(vertices), simplices, MetricSpec::explicit_lengths(std::move(lengths)));
  }
  return build_mesh(std::move(vertices), simplices, named_metric(type, std::move(periods)));
}

SimplicialMesh read_mesh_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path);
  return read_mesh_json(in);
}

void write_mesh_json(std::ostream& out, const SimplicialMesh& mesh) {
  const int d = mesh.dimension();
  json doc;
  json verts = json::array();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    auto c = mesh.coords(v);
    verts.push_back(std::vector<double>(c.begin(), c.end()));
  }
  json tops = json::array();
  for (int t = 0; t < mesh.count(d); ++t) {
    auto s = mesh.simplex(d, t);
    if (mesh.orientation(t) < 0) std::swap(s[0], s[1]);
    tops.push_back(s);
  }
  json lengths = json::array();
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& s = mesh.simplex(1, e);
    lengths.push_back({s[0], s[1], mesh.edge_length(e)});
  }
  doc["dimension"] = d;
  doc["vertices"] = std::move(verts);
  doc["simplices"] = std::move(tops);
  doc["metric"] = {{"type", "edge_lengths"}, {"lengths", std::move(lengths)}};
  out << doc.dump(1) << '\n';
}

SimplicialMesh read_off(std::istream& off, std::istream* sidecar) {
  std::string header;
  off >> header;
  if (header != "OFF") throw MeshError("OFF file: missing OFF header");
  int nv = 0, nf = 0, ne = 0;
  if (!(off >> nv >> nf >> ne)) throw MeshError("OFF file: bad counts line");
  std::vector<std::vector<double>> verts(nv, std::vector<double>(3));
  for (auto& v : verts) {
    if (!(off >> v[0] >> v[1] >> v[2])) throw MeshError("OFF file: truncated vertex list");
  }
  std::vector<std::vector<int>> faces(nf);
  for (auto& f : faces) {
    int n = 0;
    off >> n;
    if (n != 3) throw MeshError("OFF file: only triangle faces are supported");
    f.resize(3);
    if (!(off >> f[0] >> f[1] >> f[2])) throw MeshError("OFF file: truncated face list");
  }
  if (sidecar == nullptr) return build_mesh(std::move(verts), faces, MetricSpec::euclidean());
  std::map<std::pair<int, int>, double> lengths;
  std::string line;
  while (std::getline(*sidecar, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int i = 0, j = 0;
    double l = 0.0;
    if (!(ls >> i >> j >> l)) throw MeshError("metric sidecar: malformed line '" + line + "'");
    lengths[{std::min(i, j), std::max(i, j)}] = l;
  }
  return build_mesh(std::move(verts), faces, MetricSpec::explicit_lengths(std::move(lengths)));
}

SimplicialMesh read_off_file(const std::string& off_path, const std::string& sidecar_path) {
  std::ifstream off(off_path);
  if (!off) throw MeshError("cannot open OFF file " + off_path);
  if (sidecar_path.empty()) return read_off(off, nullptr);
  std::ifstream side(sidecar_path);
  if (!side) throw MeshError("cannot open metric sidecar " + sidecar_path);
  return read_off(off, &side);
}

}  // namespace homocut
