#include "homocut/geometries.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <limits>
#include <queue>
#include <numbers>
#include <stdexcept>

#include "homocut/mesh_io.hpp"

namespace homocut {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::vector<int>> grid_triangles(int n_x_cells, int n_theta, bool periodic_x) {
  std::vector<std::vector<int>> tris;
  const int rows = periodic_x ? n_x_cells : n_x_cells + 1;
  auto v = [&](int i, int j) { return grid_vertex(n_theta, ((i % rows) + rows) % rows, j); };
  for (int i = 0; i < n_x_cells; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      tris.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
      tris.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
    }
  }
  return tris;
}

}  // namespace

SimplicialMesh flat_torus_mesh(int n) {
  if (n < 3) throw MeshError("flat_torus_mesh: n must be at least 3");
  std::vector<std::vector<double>> verts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) verts.push_back({double(i) / n, double(j) / n});
  }
  return build_mesh(std::move(verts), grid_triangles(n, n, true), MetricSpec::euclidean({1.0, 1.0}));
}

SimplicialMesh flat_cylinder_mesh(int n_x, int n_theta, double length, double circumference) {
  if (n_x < 1 || n_theta < 3 || !(length > 0) || !(circumference > 0)) {
    throw MeshError("flat_cylinder_mesh: invalid parameters");
  }
  std::vector<std::vector<double>> verts;
  for (int i = 0; i <= n_x; ++i) {
    for (int j = 0; j < n_theta; ++j) verts.push_back({length * i / n_x, circumference * j / n_theta});
  }
  return build_mesh(std::move(verts), grid_triangles(n_x, n_theta, false),
                    MetricSpec::euclidean({0.0, circumference}));
}

SimplicialMesh hyperbolic_cylinder_mesh(double x_min, double x_max, int n_x, int n_theta) {
  if (!(x_min < x_max) || n_x < 3 || n_theta < 3) throw MeshError("hyperbolic_cylinder_mesh: invalid parameters");
  std::vector<std::vector<double>> verts;
  for (int i = 0; i <= n_x; ++i) {
    const double x = x_min + (x_max - x_min) * i / n_x;
    for (int j = 0; j < n_theta; ++j) verts.push_back({x, kTwoPi * j / n_theta});
  }
  return build_mesh(std::move(verts), grid_triangles(n_x, n_theta, false),
                    named_metric("hyperbolic_cylinder", {0.0, kTwoPi}));
}

SimplicialMesh flat_disk_mesh(int n_rings, int n_sectors, double radius) {
  if (n_rings < 1 || n_sectors < 3 || !(radius > 0)) throw MeshError("flat_disk_mesh: invalid parameters");
  std::vector<std::vector<double>> verts{{0.0, 0.0}};
  std::vector<std::vector<int>> rings{{0}};
  for (int k = 1; k <= n_rings; ++k) {
    std::vector<int> ring;
    const int m = k * n_sectors;
    for (int q = 0; q < m; ++q) {
      const double a = kTwoPi * q / m;
      ring.push_back(static_cast<int>(verts.size()));
      verts.push_back({radius * k / n_rings * std::cos(a), radius * k / n_rings * std::sin(a)});
    }
    rings.push_back(std::move(ring));
  }
  std::vector<std::vector<int>> tris;
  for (int k = 1; k <= n_rings; ++k) {
    const auto& in = rings[k - 1];
    const auto& out = rings[k];
    const int ni = static_cast<int>(in.size()), no = static_cast<int>(out.size());
    int i = 0, o = 0;
    while (i < ni || o < no) {
      const double next_in = k == 1 ? 1e9 : double(i + 1) / ni;
      const double next_out = double(o + 1) / no;
      if (o < no && (next_out <= next_in || i >= ni || k == 1)) {
        tris.push_back({in[i % ni], out[o % no], out[(o + 1) % no]});
        ++o;
        if (k == 1 && o == no) i = ni;
      } else {
        tris.push_back({in[i % ni], out[o % no], in[(i + 1) % ni]});
        ++i;
      }
    }
  }
  for (auto& t : tris) {
    const auto& a = verts[t[0]];
    const auto& b = verts[t[1]];
    const auto& c = verts[t[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if (det < 0) std::swap(t[1], t[2]);
  }
  return build_mesh(std::move(verts), tris, MetricSpec::euclidean());
}

SimplicialMesh solid_torus_mesh(int n, int n_z) {
  if (n < 1 || n_z < 3) throw MeshError("solid_torus_mesh: need n >= 1 and n_z >= 3");
  auto id = [&](int i, int j, int k) { return (i * (n + 1) + j) * n_z + ((k % n_z) + n_z) % n_z; };
  std::vector<std::vector<double>> verts;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k < n_z; ++k) verts.push_back({double(i) / n, double(j) / n, double(k) / n_z});
    }
  }
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<std::vector<int>> tets;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n_z; ++k) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::vector<int> tet{id(c[0], c[1], c[2])};
          for (int axis : p) {
            ++c[axis];
            tet.push_back(id(c[0], c[1], c[2]));
          }
          int inversions = 0;
          for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) inversions += p[a] > p[b];
          }
          if (inversions % 2) std::swap(tet[1], tet[2]);
          tets.push_back(std::move(tet));
        }
      }
    }
  }
  return build_mesh(std::move(verts), tets, MetricSpec::euclidean({0.0, 0.0, 1.0}));
}

std::vector<double> torus_constant_form(const SimplicialMesh& mesh, double a, double b) {
  std::vector<double> eta(mesh.count(1));
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& s = mesh.simplex(1, e);
    auto p = mesh.coords(s[0]);
    auto q = mesh.coords(s[1]);
    const double dx = (q[0] - p[0]) - std::round(q[0] - p[0]);
    const double dy = (q[1] - p[1]) - std::round(q[1] - p[1]);
    eta[e] = a * dx + b * dy;
  }
  return eta;
}

ChainQ cylinder_ring(const SimplicialMesh& mesh, int n_theta, int i) {
  std::vector<int> loop;
  for (int j = 0; j < n_theta; ++j) loop.push_back(grid_vertex(n_theta, i, j));
  return path_chain(mesh, loop, true);
}

std::vector<double> cylinder_core_cochain(const SimplicialMesh& mesh, int n_theta, int i) {
  const int rings = mesh.num_vertices() / n_theta;
  if (i < 0 || i + 1 >= rings) throw MeshError("cylinder_core_cochain: ring index out of range");
  std::vector<double> eta(mesh.count(1), 0.0);
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    eta[e] = (ab[1] / n_theta > i ? 1.0 : 0.0) - (ab[0] / n_theta > i ? 1.0 : 0.0);
  }
  return eta;
}

int disk_boundary_vertex(const SimplicialMesh& mesh, double angle) {
  int best = -1;
  double best_gap = 1e300;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.on_boundary(0, v)) continue;
    auto c = mesh.coords(v);
    double gap = std::abs(std::remainder(std::atan2(c[1], c[0]) - angle, kTwoPi));
    if (gap < best_gap - 1e-12) {
      best_gap = gap;
      best = v;
    }
  }
  if (best < 0) throw MeshError("disk_boundary_vertex: mesh has no boundary");
  return best;
}

SimplicialMesh perturbed_mesh(const SimplicialMesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) throw MeshError("perturbed_mesh: amplitude must lie in [0, 1)");
  const int d = mesh.dimension();
  std::vector<std::vector<double>> verts;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    auto c = mesh.coords(v);
    verts.emplace_back(c.begin(), c.end());
  }
  std::vector<std::vector<int>> tops;
  for (int t = 0; t < mesh.count(d); ++t) {
    auto s = mesh.simplex(d, t);
    if (mesh.orientation(t) < 0) std::swap(s[0], s[1]);
    tops.push_back(std::move(s));
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::map<std::pair<int, int>, double> lengths;
    for (int e = 0; e < mesh.count(1); ++e) {
      const auto& ab = mesh.simplex(1, e);
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      lengths[{ab[0], ab[1]}] = mesh.edge_length(e) * (1.0 + amplitude * (2.0 * u - 1.0));
    }
    try {
      return build_mesh(verts, tops, MetricSpec::explicit_lengths(std::move(lengths)));
    } catch (const MeshError&) {
    }
  }
  throw MeshError("perturbed_mesh: no nondegenerate perturbation found");
}

std::vector<int> shortest_edge_path(const SimplicialMesh& mesh, int a, int b) {
  const int nv = mesh.num_vertices();
  std::vector<std::vector<std::pair<int, int>>> adj(nv);
  for (int e = 0; e < mesh.count(1); ++e) {
    const auto& ab = mesh.simplex(1, e);
    adj[ab[0]].push_back({ab[1], e});
    adj[ab[1]].push_back({ab[0], e});
  }
  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  std::vector<int> prev(nv, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[a] = 0.0;
  heap.push({0.0, a});
  while (!heap.empty()) {
    const auto [dv, v] = heap.top();
    heap.pop();
    if (dv > dist[v]) continue;
    if (v == b) break;
    for (const auto& [w, e] : adj[v]) {
      const double nd = dv + mesh.edge_length(e);
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = v;
        heap.push({nd, w});
      }
    }
  }
  if (a != b && prev[b] < 0) throw MeshError("shortest_edge_path: vertices are not connected");
  std::vector<int> path{b};
  while (path.back() != a) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

StableNorm stable_norm(int n, double a, double b, const std::vector<Stage>& schedule) {
  const auto mesh = flat_torus_mesh(n);
  const auto prob = make_problem(mesh, torus_constant_form(mesh, a, b), {});
  const auto sol = continuation(prob, schedule);
  const auto cut = extract_cut(prob, sol);
  const auto gap = duality_gap(prob, sol);
  StableNorm out;
  out.mass = sol.mass;
  out.dual_bound = gap.gamma_sup > 0 ? gap.pairing / gap.gamma_sup : 0.0;
  out.support_fraction = cut.support_fraction;
  out.divergence = gap.divergence;
  out.converged = sol.converged;
  return out;
}

SimplicialMesh build_geometry(const GeometrySpec& spec) {
  if (spec.kind == "flat_torus") return flat_torus_mesh(spec.n);
  if (spec.kind == "flat_cylinder") return flat_cylinder_mesh(spec.n_x, spec.n_theta, spec.length, spec.circumference);
  if (spec.kind == "hyperbolic_cylinder") return hyperbolic_cylinder_mesh(spec.x_min, spec.x_max, spec.n_x, spec.n_theta);
  if (spec.kind == "flat_disk") return flat_disk_mesh(spec.n_rings, spec.n_sectors, spec.radius);
  if (spec.kind == "solid_torus") return solid_torus_mesh(spec.n, spec.n_theta);
  throw MeshError("unknown geometry '" + spec.kind + "'");
}

OracleValue oracle_values(const GeometrySpec& spec, const std::vector<double>& cls) {
  OracleValue out;
  if (spec.kind == "flat_torus") {
    if (cls.size() != 2) throw std::invalid_argument("flat_torus oracle needs a class (a, b)");
    out.min_mass = std::hypot(cls[0], cls[1]);
    out.calibration = "constant form (a dx + b dy) / |(a, b)|";
    out.provenance = "integral |w| >= |integral w| over the unit torus, attained by the constant form";
    return out;
  }
  if (spec.kind == "flat_cylinder") {
    if (cls.size() != 1) throw std::invalid_argument("flat_cylinder oracle needs a core multiple c");
    out.min_mass = std::abs(cls[0]) * spec.circumference;
    out.calibration = "constant unit field along x";
    out.provenance = "every closed curve around the cylinder has length >= circumference";
    return out;
  }
  if (spec.kind == "hyperbolic_cylinder") {
    if (cls.size() != 1) throw std::invalid_argument("hyperbolic_cylinder oracle needs a core multiple c");
    const double x = std::clamp(0.0, spec.x_min, spec.x_max);
    out.min_mass = std::abs(cls[0]) * kTwoPi * std::cosh(x);
    out.calibration = "field dx / cosh(x), pointwise norm 1/cosh(x)";
    out.provenance = "flux of the divergence-free field (1/cosh x) d/dx through any circle is 2 pi; shortest circle is x = " +
                     std::to_string(x);
    return out;
  }
  if (spec.kind == "flat_disk") {
    if (cls.size() != 2) throw std::invalid_argument("flat_disk oracle needs endpoint angles (theta_p, theta_q)");
    out.min_mass = 2.0 * spec.radius * std::abs(std::sin((cls[1] - cls[0]) / 2.0));
    out.calibration = "constant unit field along the chord normal";
    out.provenance = "straight chord between the two boundary points";
    return out;
  }
  throw std::invalid_argument("no oracle for geometry '" + spec.kind + "'");
}

double hyperbolic_strip_distance(double x1, double t1, double x2, double t2) {
  const double c = std::cosh(x1) * std::cosh(x2) * std::cosh(t2 - t1) - std::sinh(x1) * std::sinh(x2);
  return std::acosh(std::max(1.0, c));
}

namespace {

struct GeoState {
  double x, t, vx, vt;
};

GeoState geo_rhs(const GeoState& s) {
  return {s.vx, s.vt, std::sinh(s.x) * std::cosh(s.x) * s.vt * s.vt, -2.0 * std::tanh(s.x) * s.vx * s.vt};
}

GeoState rk4(const GeoState& s, double h) {
  auto add = [](const GeoState& a, const GeoState& b, double c) {
    return GeoState{a.x + c * b.x, a.t + c * b.t, a.vx + c * b.vx, a.vt + c * b.vt};
  };
  const GeoState k1 = geo_rhs(s);
  const GeoState k2 = geo_rhs(add(s, k1, h / 2));
  const GeoState k3 = geo_rhs(add(s, k2, h / 2));
  const GeoState k4 = geo_rhs(add(s, k3, h));
  return {s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.t + h / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t),
          s.vx + h / 6 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx),
          s.vt + h / 6 * (k1.vt + 2 * k2.vt + 2 * k3.vt + k4.vt)};
}

struct ShotResult {
  double theta_end;
  double length;
  double min_x;
};

// Integrates until the geodesic returns to x = x0, or theta passes the cap.
ShotResult shoot(double x0, double psi, double theta_cap) {
  GeoState s{x0, 0.0, -std::cos(psi), std::sin(psi) / std::cosh(x0)};
  const double h = 1e-3;
  double len = 0.0, min_x = x0;
  for (int step = 0; step < 10000000; ++step) {
    GeoState next = rk4(s, h);
    if (next.x >= x0 && next.vx > 0 && step > 0) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rk4(s, mid).x >= x0) hi = mid;
        else lo = mid;
      }
      const GeoState end = rk4(s, hi);
      return {end.t, len + hi, min_x};
    }
    s = next;
    len += h;
    min_x = std::min(min_x, s.x);
    if (s.t > theta_cap) return {std::numeric_limits<double>::infinity(), len, min_x};
  }
  return {std::numeric_limits<double>::infinity(), len, min_x};
}

}  // namespace

GeodesicArc shoot_geodesic_arc(double x0, double dtheta, double tolerance) {
  if (!(x0 > 0) || !(dtheta > 0)) throw std::invalid_argument("shoot_geodesic_arc: need x0 > 0 and dtheta > 0");
  // Returning geodesics have Clairaut constant cosh(x0) sin(psi) >= 1.
  double lo = std::asin(1.0 / std::cosh(x0)), hi = std::numbers::pi / 2;
  GeodesicArc arc;
  ShotResult best{0, 0, x0};
  for (int it = 0; it < 200; ++it) {
    const double psi = 0.5 * (lo + hi);
    const ShotResult r = shoot(x0, psi, 2.0 * dtheta + 1.0);
    arc.iterations = it + 1;
    best = r;
    arc.launch_angle = psi;
    if (std::abs(r.theta_end - dtheta) < tolerance) break;
    if (r.theta_end > dtheta) lo = psi;
    else hi = psi;
  }
  arc.length = best.length;
  arc.turning_x = best.min_x;
  return arc;
}

}  // namespace homocut
