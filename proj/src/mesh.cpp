#include "homocut/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

namespace homocut {

MetricSpec MetricSpec::euclidean(std::vector<double> periods) {
  MetricSpec m;
  m.kind = Kind::Euclidean;
  m.periods = std::move(periods);
  m.name = "euclidean";
  return m;
}

MetricSpec MetricSpec::diagonal(std::function<std::vector<double>(std::span<const double>)> scale,
                                std::vector<double> periods, std::string name) {
  MetricSpec m;
  m.kind = Kind::Diagonal;
  m.scale = std::move(scale);
  m.periods = std::move(periods);
  m.name = std::move(name);
  return m;
}

MetricSpec MetricSpec::explicit_lengths(std::map<std::pair<int, int>, double> lengths) {
  MetricSpec m;
  m.kind = Kind::Explicit;
  m.lengths = std::move(lengths);
  m.name = "explicit";
  return m;
}

std::vector<double> MetricSpec::displacement(std::span<const double> a, std::span<const double> b) const {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = b[i] - a[i];
    if (i < periods.size() && periods[i] > 0.0) {
      const double p = periods[i];
      d[i] -= p * std::round(d[i] / p);
    }
  }
  return d;
}

double MetricSpec::edge_length(int i, int j, std::span<const double> a, std::span<const double> b) const {
  if (kind == Kind::Explicit) {
    auto it = lengths.find({std::min(i, j), std::max(i, j)});
    if (it == lengths.end()) {
      throw MeshError("metric: no length given for edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    return it->second;
  }
  const auto d = displacement(a, b);
  if (kind == Kind::Euclidean) {
    double s = 0.0;
    for (double x : d) s += x * x;
    return std::sqrt(s);
  }
  std::vector<double> mid(a.begin(), a.end());
  for (std::size_t k = 0; k < mid.size(); ++k) mid[k] += 0.5 * d[k];
  const auto s = scale(mid);
  if (s.size() != d.size()) throw MeshError("metric: scale function has wrong arity");
  double acc = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) acc += (s[k] * d[k]) * (s[k] * d[k]);
  return std::sqrt(acc);
}

namespace {

int permutation_parity(std::vector<int> v) {
  int parity = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[j] < v[i]) parity ^= 1;
    }
  }
  return parity ? -1 : 1;
}

// Gram matrix of a simplex in the edge basis, from its pairwise lengths.
Eigen::MatrixXd gram_from_lengths(const std::vector<std::vector<double>>& len) {
  const int k = static_cast<int>(len.size()) - 1;
  Eigen::MatrixXd g(k, k);
  for (int i = 1; i <= k; ++i) {
    for (int j = 1; j <= k; ++j) {
      const double a = len[0][i], b = len[0][j], c = len[i][j];
      g(i - 1, j - 1) = 0.5 * (a * a + b * b - c * c);
    }
  }
  return g;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Volume of the simplex spanned by points (as rows).
double point_simplex_volume(const std::vector<Eigen::VectorXd>& pts) {
  const int k = static_cast<int>(pts.size()) - 1;
  if (k == 0) return 1.0;
  Eigen::MatrixXd e(pts[0].size(), k);
  for (int i = 0; i < k; ++i) e.col(i) = pts[i + 1] - pts[0];
  const double det = (e.transpose() * e).determinant();
  return std::sqrt(std::max(det, 0.0)) / factorial(k);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

int SimplicialMesh::find(std::vector<int> vertices) const {
  std::sort(vertices.begin(), vertices.end());
  const int k = static_cast<int>(vertices.size()) - 1;
  if (k < 0 || k > dim_) return -1;
  auto it = index_[k].find(vertices);
  return it == index_[k].end() ? -1 : it->second;
}

int SimplicialMesh::edge_index(int a, int b) const { return find({a, b}); }

bool SimplicialMesh::has_boundary() const {
  return std::any_of(induced_.begin(), induced_.end(), [](int c) { return c != 0; });
}

double SimplicialMesh::total_volume() const {
  return std::accumulate(volumes_[dim_].begin(), volumes_[dim_].end(), 0.0);
}

double SimplicialMesh::diameter_estimate() const {
  // Double sweep of Dijkstra over the 1-skeleton.
  const int n = num_vertices();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (int e = 0; e < count(1); ++e) {
    const auto& s = simplices_[1][e];
    adj[s[0]].push_back({s[1], volumes_[1][e]});
    adj[s[1]].push_back({s[0], volumes_[1][e]});
  }
  auto sweep = [&](int src, int& far) {
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (auto [w, l] : adj[v]) {
        if (d + l < dist[w]) {
          dist[w] = d + l;
          pq.push({dist[w], w});
        }
      }
    }
    double best = 0.0;
    far = src;
    for (int v = 0; v < n; ++v) {
      if (std::isfinite(dist[v]) && dist[v] > best) {
        best = dist[v];
        far = v;
      }
    }
    return best;
  };
  int a = 0, b = 0;
  sweep(0, a);
  return sweep(a, b);
}

SimplicialMesh build_mesh(std::vector<std::vector<double>> vertices,
                          const std::vector<std::vector<int>>& simplices, const MetricSpec& metric) {
  if (simplices.empty()) throw MeshError("mesh has no simplices");
  const int d = static_cast<int>(simplices.front().size()) - 1;
  if (d < 1) throw MeshError("mesh dimension must be at least 1");
  const int nv = static_cast<int>(vertices.size());

  SimplicialMesh m;
  m.dim_ = d;
  m.metric_name_ = metric.name;
  m.coords_ = std::move(vertices);
  m.simplices_.assign(d + 1, {});
  m.index_.assign(d + 1, {});

  // Top simplices keep the input order.
  for (const auto& raw : simplices) {
    if (static_cast<int>(raw.size()) != d + 1) throw MeshError("simplices do not form a pure complex");
    for (int v : raw) {
      if (v < 0 || v >= nv) throw MeshError("simplex references missing vertex " + std::to_string(v));
    }
    Simplex s = raw;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw MeshError("degenerate simplex: repeated vertex");
    if (m.index_[d].count(s)) throw MeshError("duplicate top simplex");
    m.index_[d][s] = static_cast<int>(m.simplices_[d].size());
    m.simplices_[d].push_back(s);
    m.orientation_.push_back(permutation_parity(raw));
  }

  // Lower-dimensional faces, numbered in lexicographic order.
  for (int k = d - 1; k >= 0; --k) {
    std::map<Simplex, int> faces;
    for (const auto& s : m.simplices_[k + 1]) {
      for (int i = 0; i <= k + 1; ++i) {
        Simplex f;
        f.reserve(k + 1);
        for (int j = 0; j <= k + 1; ++j) {
          if (j != i) f.push_back(s[j]);
        }
        faces.emplace(std::move(f), 0);
      }
    }
    int id = 0;
    for (auto& [f, idx] : faces) {
      idx = id++;
      m.simplices_[k].push_back(f);
    }
    m.index_[k] = std::move(faces);
  }
  if (m.count(0) != nv) throw MeshError("mesh has isolated vertices");

  m.faces_.assign(d + 1, {});
  m.cofaces_.assign(d + 1, {});
  for (int k = 0; k <= d; ++k) m.cofaces_[k].assign(m.count(k), {});
  for (int k = 1; k <= d; ++k) {
    m.faces_[k].assign(m.count(k), {});
    for (int i = 0; i < m.count(k); ++i) {
      const auto& s = m.simplices_[k][i];
      for (int r = 0; r <= k; ++r) {
        Simplex f;
        for (int j = 0; j <= k; ++j) {
          if (j != r) f.push_back(s[j]);
        }
        const int fid = m.index_[k - 1].at(f);
        const int sign = (r % 2 == 0) ? 1 : -1;
        m.faces_[k][i].push_back({fid, sign});
        m.cofaces_[k - 1][fid].push_back({i, sign});
      }
    }
  }

  // Manifold and orientation checks on facets.
  m.induced_.assign(m.count(d - 1), 0);
  m.boundary_flags_.assign(d + 1, {});
  for (int k = 0; k <= d; ++k) m.boundary_flags_[k].assign(m.count(k), 0);
  for (int f = 0; f < m.count(d - 1); ++f) {
    const auto& co = m.cofaces_[d - 1][f];
    if (co.size() >= 3) {
      std::ostringstream os;
      os << "non-manifold face: facet " << f << " has " << co.size() << " cofaces";
      throw MeshError(os.str());
    }
    if (co.size() == 2) {
      const int a = m.orientation_[co[0].face] * co[0].sign;
      const int b = m.orientation_[co[1].face] * co[1].sign;
      if (a + b != 0) throw MeshError("inconsistent orientation across facet " + std::to_string(f));
    } else {
      m.induced_[f] = m.orientation_[co[0].face] * co[0].sign;
      m.boundary_flags_[d - 1][f] = 1;
    }
  }
  for (int k = d - 1; k >= 1; --k) {
    for (int i = 0; i < m.count(k); ++i) {
      if (!m.boundary_flags_[k][i]) continue;
      for (const auto& inc : m.faces_[k][i]) m.boundary_flags_[k - 1][inc.face] = 1;
    }
  }
  if (d >= 2) {
    for (int h = 0; h < m.count(d - 2); ++h) {
      if (!m.boundary_flags_[d - 2][h]) continue;
      int n = 0;
      for (const auto& inc : m.cofaces_[d - 2][h]) n += m.boundary_flags_[d - 1][inc.face];
      if (n != 2) throw MeshError("boundary is not a closed manifold near simplex " + std::to_string(h));
    }
  }

  // Boundary components.
  {
    UnionFind uf(nv);
    for (int f = 0; f < m.count(d - 1); ++f) {
      if (!m.boundary_flags_[d - 1][f]) continue;
      const auto& s = m.simplices_[d - 1][f];
      for (std::size_t j = 1; j < s.size(); ++j) uf.unite(s[0], s[j]);
    }
    std::map<int, int> root_to_comp;
    m.component_of_vertex_.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
      if (!m.boundary_flags_[0][v]) continue;
      const int r = uf.find(v);
      auto [it, inserted] = root_to_comp.emplace(r, static_cast<int>(m.boundary_components_.size()));
      if (inserted) m.boundary_components_.emplace_back();
      m.boundary_components_[it->second].push_back(v);
      m.component_of_vertex_[v] = it->second;
    }
  }

  // Primal volumes.
  m.volumes_.assign(d + 1, {});
  m.volumes_[0].assign(nv, 1.0);
  m.volumes_[1].resize(m.count(1));
  for (int e = 0; e < m.count(1); ++e) {
    const auto& s = m.simplices_[1][e];
    const double l = metric.edge_length(s[0], s[1], m.coords_[s[0]], m.coords_[s[1]]);
    if (!(l > 0.0) || !std::isfinite(l)) throw MeshError("degenerate simplex: edge " + std::to_string(e) + " has length " + std::to_string(l));
    m.volumes_[1][e] = l;
  }
  auto local_lengths = [&](const Simplex& s) {
    const int k = static_cast<int>(s.size());
    std::vector<std::vector<double>> len(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        len[i][j] = len[j][i] = m.volumes_[1][m.index_[1].at({s[i], s[j]})];
      }
    }
    return len;
  };
  for (int k = 2; k <= d; ++k) {
    m.volumes_[k].resize(m.count(k));
    for (int i = 0; i < m.count(k); ++i) {
      const auto g = gram_from_lengths(local_lengths(m.simplices_[k][i]));
      const double det = g.determinant();
      const double vol = det > 0.0 ? std::sqrt(det) / factorial(k) : 0.0;
      double scale = 1.0;
      for (const auto& row : local_lengths(m.simplices_[k][i])) {
        for (double l : row) scale = std::max(scale, l);
      }
      if (!(vol > 1e-14 * std::pow(scale, k))) {
        throw MeshError("degenerate simplex or triangle inequality violated: " + std::to_string(k) + "-simplex " +
                        std::to_string(i));
      }
      m.volumes_[k][i] = vol;
    }
  }

  // Per-cell data for the solver and circumcentric/barycentric duals.
  m.dual_volumes_.assign(d + 1, {});
  for (int k = 0; k <= d; ++k) m.dual_volumes_[k].assign(m.count(k), 0.0);
  m.inv_gram_.resize(static_cast<std::size_t>(m.count(d)) * d * d);
  m.cell_edges_.resize(static_cast<std::size_t>(m.count(d)) * d);
  m.circumcentric_.assign(m.count(d), 0);

  const int nloc = d + 1;
  const int nmask = 1 << nloc;
  for (int t = 0; t < m.count(d); ++t) {
    const auto& s = m.simplices_[d][t];
    const auto g = gram_from_lengths(local_lengths(s));
    const Eigen::MatrixXd ginv = g.inverse();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m.inv_gram_[(static_cast<std::size_t>(t) * d + i) * d + j] = ginv(i, j);
      m.cell_edges_[static_cast<std::size_t>(t) * d + i] = m.index_[1].at({s[0], s[i + 1]});
    }

    // Local embedding: p_0 = 0, p_k = k-th row of the Cholesky factor.
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    const Eigen::MatrixXd lower = llt.matrixL();
    std::vector<Eigen::VectorXd> p(nloc, Eigen::VectorXd::Zero(d));
    for (int k = 1; k <= d; ++k) p[k] = lower.row(k - 1).transpose();

    std::vector<Eigen::VectorXd> circ(nmask), bary(nmask);
    bool well_centered = true;
    for (int mask = 1; mask < nmask; ++mask) {
      std::vector<int> ids;
      for (int i = 0; i < nloc; ++i) {
        if (mask & (1 << i)) ids.push_back(i);
      }
      const int q = static_cast<int>(ids.size());
      Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
      for (int i : ids) b += p[i];
      bary[mask] = b / q;
      if (q == 1) {
        circ[mask] = p[ids[0]];
        continue;
      }
      Eigen::MatrixXd a(q - 1, q - 1);
      Eigen::VectorXd rhs(q - 1);
      for (int i = 1; i < q; ++i) {
        const Eigen::VectorXd ei = p[ids[i]] - p[ids[0]];
        rhs(i - 1) = ei.squaredNorm();
        for (int j = 1; j < q; ++j) a(i - 1, j - 1) = 2.0 * ei.dot(p[ids[j]] - p[ids[0]]);
      }
      const Eigen::VectorXd coef = a.partialPivLu().solve(rhs);
      Eigen::VectorXd c = p[ids[0]];
      double first = 1.0;
      for (int i = 1; i < q; ++i) {
        c += coef(i - 1) * (p[ids[i]] - p[ids[0]]);
        first -= coef(i - 1);
        if (coef(i - 1) <= 1e-9) well_centered = false;
      }
      if (first <= 1e-9) well_centered = false;
      circ[mask] = c;
    }
    m.circumcentric_[t] = well_centered ? 1 : 0;
    const auto& centers = well_centered ? circ : bary;

    // Sum flag simplices (c(F_k), ..., c(T)) over chains F_k < ... < T.
    const int full = nmask - 1;
    std::function<double(int, std::vector<Eigen::VectorXd>&)> chains = [&](int mask,
                                                                          std::vector<Eigen::VectorXd>& pts) {
      pts.push_back(centers[mask]);
      double acc = 0.0;
      if (mask == full) {
        acc = point_simplex_volume(pts);
      } else {
        for (int i = 0; i < nloc; ++i) {
          if (!(mask & (1 << i))) acc += chains(mask | (1 << i), pts);
        }
      }
      pts.pop_back();
      return acc;
    };
    for (int mask = 1; mask < full; ++mask) {
      Simplex f;
      for (int i = 0; i < nloc; ++i) {
        if (mask & (1 << i)) f.push_back(s[i]);
      }
      const int k = static_cast<int>(f.size()) - 1;
      std::vector<Eigen::VectorXd> pts;
      m.dual_volumes_[k][m.index_[k].at(f)] += chains(mask, pts);
    }
    m.dual_volumes_[d][t] = 1.0;
  }
  for (int k = 0; k <= d; ++k) {
    for (int i = 0; i < m.count(k); ++i) {
      if (!(m.dual_volumes_[k][i] > 0.0)) {
        throw MeshError("degenerate simplex: non-positive dual volume for " + std::to_string(k) + "-simplex " +
                        std::to_string(i));
      }
    }
  }
  return m;
}

std::vector<double> hodge_star(const SimplicialMesh& mesh, int k) {
  if (k < 0 || k > mesh.dimension()) throw MeshError("hodge_star: degree out of range");
  std::vector<double> star(mesh.count(k));
  for (int i = 0; i < mesh.count(k); ++i) star[i] = mesh.dual_volume(k, i) / mesh.volume(k, i);
  return star;
}

MeanCurvatureReport boundary_mean_curvature(const SimplicialMesh& mesh, double tolerance) {
  const int d = mesh.dimension();
  if (d < 2) throw MeshError("boundary_mean_curvature requires dimension >= 2");
  MeanCurvatureReport rep;
  rep.tolerance = tolerance >= 0.0 ? tolerance : 1e-6 / mesh.diameter_estimate();
  if (!mesh.has_boundary()) {
    rep.warnings.push_back("mesh has no boundary; mean convexity holds vacuously");
    return rep;
  }

  const int h_dim = d - 2;
  double min_value = std::numeric_limits<double>::infinity();
  for (int h = 0; h < mesh.count(h_dim); ++h) {
    if (!mesh.on_boundary(h_dim, h)) continue;
    const auto& hinge = mesh.simplex(h_dim, h);

    // Interior dihedral angles of all top simplices around the hinge.
    double angle_sum = 0.0;
    std::vector<int> tops;
    {
      // Collect top simplices containing the hinge by walking cofaces upward.
      std::vector<int> level{h};
      for (int k = h_dim; k < d; ++k) {
        std::vector<int> next;
        for (int s : level) {
          for (const auto& inc : mesh.cofaces(k, s)) next.push_back(inc.face);
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        level = std::move(next);
      }
      tops = std::move(level);
    }
    for (int t : tops) {
      const auto& s = mesh.simplex(d, t);
      std::vector<int> others;  // local indices of the two vertices not in the hinge
      for (int i = 0; i <= d; ++i) {
        if (!std::binary_search(hinge.begin(), hinge.end(), s[i])) others.push_back(i);
      }
      const auto ginv = mesh.inverse_gram(t);
      // Inner products of barycentric gradients: <grad l_i, grad l_j> = Ginv(i-1, j-1), l_0 = -sum.
      auto grad_dot = [&](int a, int b) {
        auto coeff = [&](int i) {
          std::vector<double> c(d, 0.0);
          if (i == 0) {
            std::fill(c.begin(), c.end(), -1.0);
          } else {
            c[i - 1] = 1.0;
          }
          return c;
        };
        const auto ca = coeff(a), cb = coeff(b);
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) acc += ca[i] * ginv[i * d + j] * cb[j];
        }
        return acc;
      };
      const int a = others[0], b = others[1];
      const double c = -grad_dot(a, b) / std::sqrt(grad_dot(a, a) * grad_dot(b, b));
      angle_sum += std::acos(std::clamp(c, -1.0, 1.0));
    }

    double area = 0.0;
    for (const auto& inc : mesh.cofaces(h_dim, h)) {
      if (mesh.on_boundary(d - 1, inc.face)) area += mesh.volume(d - 1, inc.face) / d;
    }
    const double value = (std::numbers::pi - angle_sum) * mesh.volume(h_dim, h) / ((d - 1) * area);
    rep.hinges.push_back(h);
    rep.values.push_back(value);
    min_value = std::min(min_value, value);
  }
  rep.strictly_mean_convex = min_value > rep.tolerance;
  return rep;
}

}  // namespace homocut
