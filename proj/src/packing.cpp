#include "homocut/packing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>

#include "homocut/geometries.hpp"

namespace homocut {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double wrap(double t, double period) {
  t = std::fmod(t, period);
  return t < 0 ? t + period : t;
}

// Bucket grid over the chart; cells are at least `cell` wide in both axes.
class ChartGrid {
 public:
  ChartGrid(const PackingGeometry& g, double cell) : g_(g) {
    nx_ = std::max(1, static_cast<int>(std::floor((g.x_max - g.x_min) / cell)));
    nt_ = std::max(1, static_cast<int>(std::floor(g.period / cell)));
    wx_ = (g.x_max - g.x_min) / nx_;
    wt_ = g.period / nt_;
    buckets_.resize(static_cast<std::size_t>(nx_) * nt_);
  }

  void insert(int id, const Point2& p) { buckets_[index(cx(p[0]), ct(p[1]))].push_back(id); }

  template <class Fn>
  void for_each_near(const Point2& p, double r, Fn&& fn) const {
    const int kx = static_cast<int>(std::ceil(r / wx_)), kt = static_cast<int>(std::ceil(r / wt_));
    const int x0 = cx(p[0]), t0 = ct(p[1]);
    const bool all_x = 2 * kx + 1 >= nx_, all_t = 2 * kt + 1 >= nt_;
    const int xlo = all_x ? 0 : x0 - kx, xhi = all_x ? nx_ - 1 : x0 + kx;
    const int tlo = all_t ? 0 : t0 - kt, thi = all_t ? nt_ - 1 : t0 + kt;
    for (int i = xlo; i <= xhi; ++i) {
      int ii = i;
      if (ii < 0 || ii >= nx_) {
        if (!g_.periodic_x) continue;
        ii = ((ii % nx_) + nx_) % nx_;
      }
      for (int j = tlo; j <= thi; ++j) {
        for (int id : buckets_[index(ii, ((j % nt_) + nt_) % nt_)]) fn(id);
      }
    }
  }

 private:
  int cx(double x) const { return std::clamp(static_cast<int>((x - g_.x_min) / wx_), 0, nx_ - 1); }
  int ct(double t) const { return std::clamp(static_cast<int>(wrap(t, g_.period) / wt_), 0, nt_ - 1); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nt_ + j; }

  const PackingGeometry& g_;
  int nx_, nt_;
  double wx_, wt_;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

PackingGeometry flat_cylinder_geometry(double length, double circumference) {
  PackingGeometry g;
  g.name = "flat_cylinder";
  g.x_min = 0.0;
  g.x_max = length;
  g.period = circumference;
  g.area = length * circumference;
  g.continuum_cut = circumference;
  g.distance = [circumference](const Point2& a, const Point2& b) {
    const double dx = b[0] - a[0];
    const double dt = std::remainder(b[1] - a[1], circumference);
    return std::hypot(dx, dt);
  };
  g.offset = [circumference](const Point2& p, double angle, double d) {
    return Point2{p[0] + d * std::cos(angle), wrap(p[1] + d * std::sin(angle), circumference)};
  };
  g.boundary_distance = [length](const Point2& p, int c) { return c == 0 ? p[0] : length - p[0]; };
  return g;
}

PackingGeometry hyperbolic_cylinder_geometry(double x_min, double x_max) {
  PackingGeometry g;
  g.name = "hyperbolic_cylinder";
  g.x_min = x_min;
  g.x_max = x_max;
  g.period = kTwoPi;
  g.area = kTwoPi * (std::sinh(x_max) - std::sinh(x_min));
  g.continuum_cut = kTwoPi * std::cosh(std::clamp(0.0, x_min, x_max));
  g.distance = [](const Point2& a, const Point2& b) {
    const double dt = std::abs(std::remainder(b[1] - a[1], kTwoPi));
    return hyperbolic_strip_distance(a[0], 0.0, b[0], dt);
  };
  g.offset = [](const Point2& p, double angle, double d) {
    return Point2{p[0] + d * std::cos(angle), wrap(p[1] + d * std::sin(angle) / std::cosh(p[0]), kTwoPi)};
  };
  g.boundary_distance = [x_min, x_max](const Point2& p, int c) { return c == 0 ? p[0] - x_min : x_max - p[0]; };
  return g;
}

PackingGeometry flat_torus_geometry() {
  PackingGeometry g = flat_cylinder_geometry(1.0, 1.0);
  g.name = "flat_torus";
  g.periodic_x = true;
  g.continuum_cut = 0.0;
  g.distance = [](const Point2& a, const Point2& b) {
    return std::hypot(std::remainder(b[0] - a[0], 1.0), std::remainder(b[1] - a[1], 1.0));
  };
  g.offset = [](const Point2& p, double angle, double d) {
    return Point2{wrap(p[0] + d * std::cos(angle), 1.0), wrap(p[1] + d * std::sin(angle), 1.0)};
  };
  g.boundary_distance = [](const Point2&, int) { return std::numeric_limits<double>::infinity(); };
  return g;
}

PackingGraph packing_graph(const PackingGeometry& geom, double eps0, double eps1, double theta, std::uint64_t seed) {
  if (!(eps1 > 0) || !(eps1 < eps0)) throw std::invalid_argument("packing_graph: need 0 < eps1 < eps0");
  if (!(theta > 0) || !(theta < 1)) throw std::invalid_argument("packing_graph: need 0 < theta < 1");
  const double r = 2.0 * eps1;
  PackingGraph out;
  ChartGrid grid(geom, r);
  std::mt19937_64 rng(seed);

  auto inside = [&](const Point2& p) { return geom.periodic_x || (p[0] >= geom.x_min && p[0] <= geom.x_max); };
  auto try_insert = [&](Point2 p) {
    if (!inside(p)) return false;
    if (geom.periodic_x) p[0] = geom.x_min + wrap(p[0] - geom.x_min, geom.x_max - geom.x_min);
    bool free = true;
    grid.for_each_near(p, r, [&](int id) {
      if (free && geom.distance(p, out.points[id]) < r) free = false;
    });
    if (!free) return false;
    grid.insert(static_cast<int>(out.points.size()), p);
    out.points.push_back(p);
    return true;
  };
  auto random_point = [&] {
    return Point2{geom.x_min + (geom.x_max - geom.x_min) * unit_random(rng), geom.period * unit_random(rng)};
  };

  // Random sequential addition, then saturation along the exclusion circles
  // and the boundary lines, then random probes.
  const double chart_area = (geom.x_max - geom.x_min) * geom.period;
  const auto candidates = static_cast<long>(std::ceil(6.0 * chart_area / (std::numbers::pi * eps1 * eps1)));
  for (long i = 0; i < candidates; ++i) try_insert(random_point());

  constexpr int kAngles = 96;
  for (bool grew = true; grew;) {
    grew = false;
    if (!geom.periodic_x) {
      const int steps = static_cast<int>(std::ceil(geom.period / (eps1 / 8)));
      for (double x : {geom.x_min, geom.x_max}) {
        for (int s = 0; s < steps; ++s) grew |= try_insert({x, geom.period * s / steps});
      }
    }
    for (std::size_t c = 0; c < out.points.size(); ++c) {
      const double phase = unit_random(rng) * kTwoPi / kAngles;
      for (int k = 0; k < kAngles; ++k) {
        grew |= try_insert(geom.offset(out.points[c], phase + kTwoPi * k / kAngles, r * (1.0 + 1e-3)));
      }
    }
  }
  for (int i = 0; i < 20000; ++i) try_insert(random_point());

  if (out.points.empty()) throw std::invalid_argument("packing_graph: empty packing");

  const double reach = (1.0 + theta) * eps0;
  ChartGrid edge_grid(geom, reach);
  for (std::size_t i = 0; i < out.points.size(); ++i) edge_grid.insert(static_cast<int>(i), out.points[i]);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    std::vector<int> nbrs;
    edge_grid.for_each_near(out.points[i], reach, [&](int j) {
      if (j > static_cast<int>(i) && std::abs(geom.distance(out.points[i], out.points[j]) - eps0) <= theta * eps0) {
        nbrs.push_back(j);
      }
    });
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    for (int j : nbrs) out.edges.emplace_back(static_cast<int>(i), j);
  }

  std::vector<std::vector<int>> adj(out.points.size());
  for (const auto& [a, b] : out.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(out.points.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  if (reached != out.points.size()) {
    out.warnings.push_back("packing graph is disconnected: " + std::to_string(reached) + " of " +
                           std::to_string(out.points.size()) + " vertices reachable");
  }
  return out;
}

FlowNetwork packing_network(const PackingGraph& graph, const PackingGeometry& geom, double eps1) {
  if (geom.periodic_x) throw std::invalid_argument("packing_network: geometry has no boundary components");
  const int m = static_cast<int>(graph.points.size());
  FlowNetwork net;
  net.num_vertices = m + 2;
  net.source = m;
  net.sink = m + 1;
  const double big = static_cast<double>(2 * graph.edges.size() + 1);
  for (const auto& [a, b] : graph.edges) {
    net.edges.push_back({a, b, 1.0});
    net.edges.push_back({b, a, 1.0});
  }
  for (int v = 0; v < m; ++v) {
    if (geom.boundary_distance(graph.points[v], 0) <= 2 * eps1) net.edges.push_back({m, v, big});
    if (geom.boundary_distance(graph.points[v], 1) <= 2 * eps1) net.edges.push_back({v, m + 1, big});
  }
  return net;
}

double crossing_density(double density, double eps0, double theta) {
  const double r1 = (1.0 - theta) * eps0, r2 = (1.0 + theta) * eps0;
  return 2.0 / 3.0 * density * density * (r2 * r2 * r2 - r1 * r1 * r1);
}

namespace {

double mean_min_cut(const PackingGeometry& geom, double eps0, double eps1, double theta, std::uint64_t seed,
                    int samples, double* flow_out, std::vector<double>* per_sample = nullptr) {
  double cut = 0.0, flow = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto graph = packing_graph(geom, eps0, eps1, theta, mix_seed(seed, static_cast<std::uint64_t>(s)));
    const auto net = packing_network(graph, geom, eps1);
    const Cut c = min_cut(net);
    flow += c.flow_value;
    cut += c.capacity;
    if (per_sample) per_sample->push_back(c.capacity);
  }
  if (flow_out) *flow_out = flow / samples;
  return cut / samples;
}

}  // namespace

double calibrate_kappa(double eps0, double eps1, const ConvergenceOptions& opts) {
  const auto ref = flat_cylinder_geometry(1.0, opts.reference_circumference);
  const double cut = mean_min_cut(ref, eps0, eps1, opts.theta, mix_seed(opts.seed, 0xC0FFEEull), opts.samples, nullptr);
  if (!(cut > 0)) throw std::runtime_error("calibrate_kappa: reference cut is zero");
  return opts.reference_circumference / cut;
}

std::vector<ConvergenceRow> convergence_experiment(const PackingGeometry& geom,
                                                   const std::vector<std::pair<double, double>>& schedule,
                                                   const ConvergenceOptions& opts) {
  if (schedule.empty()) throw std::invalid_argument("convergence_experiment: empty schedule");
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    ConvergenceRow row;
    row.eps0 = schedule[i].first;
    row.eps1 = schedule[i].second;
    row.kappa = calibrate_kappa(row.eps0, row.eps1, opts);
    std::vector<double> cuts;
    row.cut = mean_min_cut(geom, row.eps0, row.eps1, opts.theta, mix_seed(opts.seed, 1000 + i), opts.samples,
                           &row.flow, &cuts);
    row.normalized_cut = row.kappa * row.cut;
    row.normalized_flow = row.kappa * row.flow;
    if (geom.continuum_cut > 0) {
      row.error = std::abs(row.normalized_cut / geom.continuum_cut - 1.0);
      double sq = 0.0;
      for (double c : cuts) sq += std::pow(row.kappa * c / geom.continuum_cut - 1.0, 2);
      row.rms_error = std::sqrt(sq / static_cast<double>(cuts.size()));
    }
    rows.push_back(row);
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "eps0,eps1,cut,flow,kappa,normalized_cut,normalized_flow,error,rms_error\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.eps0, r.eps1, r.cut,
                  r.flow, r.kappa, r.normalized_cut, r.normalized_flow, r.error, r.rms_error);
    out << buf;
  }
}

}  // namespace homocut
