#include "homocut/graphflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

namespace homocut {

namespace {

constexpr double kResidualEps = 1e-12;

double unit_random(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Residual {
  std::vector<std::vector<int>> out;  // arc ids leaving each vertex
  std::vector<int> head;
  std::vector<double> cap;

  explicit Residual(const FlowNetwork& net) : out(net.num_vertices) {
    for (const auto& e : net.edges) {
      out[e.from].push_back(static_cast<int>(head.size()));
      head.push_back(e.to);
      cap.push_back(e.capacity);
      out[e.to].push_back(static_cast<int>(head.size()));
      head.push_back(e.from);
      cap.push_back(0.0);
    }
  }

  std::vector<int> bfs(int s, std::vector<int>* parent_arc) const {
    std::vector<int> seen(out.size(), 0);
    if (parent_arc) parent_arc->assign(out.size(), -1);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a : out[v]) {
        if (cap[a] <= kResidualEps || seen[head[a]]) continue;
        seen[head[a]] = 1;
        if (parent_arc) (*parent_arc)[head[a]] = a;
        q.push(head[a]);
      }
    }
    return seen;
  }
};

}  // namespace

void FlowNetwork::validate() const {
  if (num_vertices < 2) throw FlowError("network needs at least two vertices");
  if (source < 0 || source >= num_vertices || sink < 0 || sink >= num_vertices) {
    throw FlowError("terminal index out of range");
  }
  if (source == sink) throw FlowError("source and sink coincide");
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= num_vertices || e.to < 0 || e.to >= num_vertices) {
      throw FlowError("edge endpoint out of range");
    }
    if (!(e.capacity >= 0) || !std::isfinite(e.capacity)) throw FlowError("capacities must be finite and nonnegative");
  }
  Residual r(*this);
  if (!r.bfs(source, nullptr)[sink]) throw FlowError("no path from source to sink");
}

FlowResult max_flow(const FlowNetwork& net) {
  net.validate();
  Residual r(net);
  const int n = net.num_vertices;
  std::vector<int> level(n), next_arc(n);

  // Augments along shortest residual paths, one BFS layering at a time.
  auto build_levels = [&] {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    q.push(net.source);
    level[net.source] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int a : r.out[v]) {
        if (r.cap[a] > kResidualEps && level[r.head[a]] < 0) {
          level[r.head[a]] = level[v] + 1;
          q.push(r.head[a]);
        }
      }
    }
    return level[net.sink] >= 0;
  };
  std::vector<int> path;
  while (build_levels()) {
    std::fill(next_arc.begin(), next_arc.end(), 0);
    // Iterative depth-first search for augmenting paths in the level graph.
    for (;;) {
      path.clear();
      int v = net.source;
      while (v != net.sink) {
        auto& i = next_arc[v];
        const auto& arcs = r.out[v];
        while (i < static_cast<int>(arcs.size()) &&
               !(r.cap[arcs[i]] > kResidualEps && level[r.head[arcs[i]]] == level[v] + 1)) {
          ++i;
        }
        if (i == static_cast<int>(arcs.size())) {
          if (path.empty()) break;
          level[v] = -1;
          v = r.head[path.back() ^ 1];
          path.pop_back();
          continue;
        }
        path.push_back(arcs[i]);
        v = r.head[arcs[i]];
      }
      if (v != net.sink) break;
      double push = std::numeric_limits<double>::infinity();
      for (int a : path) push = std::min(push, r.cap[a]);
      for (int a : path) {
        r.cap[a] -= push;
        r.cap[a ^ 1] += push;
      }
    }
  }
  FlowResult res;
  res.flow.resize(net.edges.size());
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    res.flow[i] = std::clamp(net.edges[i].capacity - r.cap[2 * i], 0.0, net.edges[i].capacity);
  }
  res.value = flow_value(net, res.flow);
  return res;
}

Cut min_cut(const FlowNetwork& net) {
  const FlowResult f = max_flow(net);
  Residual r(net);
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    r.cap[2 * i] = net.edges[i].capacity - f.flow[i];
    r.cap[2 * i + 1] = f.flow[i];
  }
  const auto seen = r.bfs(net.source, nullptr);
  Cut cut;
  cut.source_side.assign(seen.begin(), seen.end());
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    if (cut.source_side[net.edges[i].from] && !cut.source_side[net.edges[i].to]) cut.edges.push_back(int(i));
  }
  cut.capacity = cut_capacity(net, cut.source_side);
  cut.flow_value = f.value;
  return cut;
}

double cut_capacity(const FlowNetwork& net, const std::vector<std::uint8_t>& side) {
  double c = 0.0;
  for (const auto& e : net.edges) {
    if (side[e.from] && !side[e.to]) c += e.capacity;
  }
  return c;
}

double conservation_residual(const FlowNetwork& net, const std::vector<double>& flow) {
  std::vector<double> excess(net.num_vertices, 0.0);
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    excess[net.edges[i].from] -= flow[i];
    excess[net.edges[i].to] += flow[i];
  }
  double worst = 0.0;
  for (int v = 0; v < net.num_vertices; ++v) {
    if (v != net.source && v != net.sink) worst = std::max(worst, std::abs(excess[v]));
  }
  return worst;
}

double flow_value(const FlowNetwork& net, const std::vector<double>& flow) {
  double out = 0.0;
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    if (net.edges[i].from == net.source) out += flow[i];
    if (net.edges[i].to == net.source) out -= flow[i];
  }
  return out;
}

double brute_force_min_cut(const FlowNetwork& net) {
  net.validate();
  if (net.num_vertices > 20) throw FlowError("brute_force_min_cut: more than 20 vertices");
  std::vector<int> free;
  for (int v = 0; v < net.num_vertices; ++v) {
    if (v != net.source && v != net.sink) free.push_back(v);
  }
  std::vector<std::uint8_t> side(net.num_vertices, 0);
  side[net.source] = 1;
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t total = 1u << free.size();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < free.size(); ++i) side[free[i]] = (mask >> i) & 1u;
    best = std::min(best, cut_capacity(net, side));
  }
  return best;
}

FlowNetwork read_network(std::istream& in) {
  FlowNetwork net;
  bool header = false;
  int max_vertex = -1, declared = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (!header) {
      if (first.rfind("source=", 0) != 0) throw FlowError("network file: expected header 'source=... sink=...'");
      std::istringstream hs(line);
      std::string tok;
      bool have_sink = false;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw FlowError("network file: bad header token '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const int val = std::stoi(tok.substr(eq + 1));
        if (key == "source") net.source = val;
        else if (key == "sink") net.sink = val, have_sink = true;
        else if (key == "vertices") declared = val;
        else throw FlowError("network file: unknown header key '" + key + "'");
      }
      if (!have_sink) throw FlowError("network file: header lacks sink");
      header = true;
      continue;
    }
    FlowEdge e;
    std::istringstream es(line);
    if (!(es >> e.from >> e.to >> e.capacity)) {
      throw FlowError("network file: line " + std::to_string(lineno) + " is not 'u v capacity'");
    }
    max_vertex = std::max({max_vertex, e.from, e.to});
    net.edges.push_back(e);
  }
  if (!header) throw FlowError("network file: missing header");
  net.num_vertices = std::max({declared, max_vertex + 1, net.source + 1, net.sink + 1});
  net.validate();
  return net;
}

FlowNetwork read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FlowError("cannot open network file " + path);
  return read_network(in);
}

void write_network(std::ostream& out, const FlowNetwork& net) {
  out << "source=" << net.source << " sink=" << net.sink << " vertices=" << net.num_vertices << "\n";
  out << std::setprecision(17);
  for (const auto& e : net.edges) out << e.from << " " << e.to << " " << e.capacity << "\n";
}

FlowNetwork random_unit_network(int n, double p, std::uint64_t seed) {
  if (n < 2) throw FlowError("random_unit_network: need at least two vertices");
  std::mt19937_64 rng(seed);
  FlowNetwork net;
  net.num_vertices = n;
  net.source = 0;
  net.sink = n - 1;
  std::vector<std::vector<std::uint8_t>> has(n, std::vector<std::uint8_t>(n, 0));
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && unit_random(rng) < p) {
        net.edges.push_back({u, v, 1.0});
        has[u][v] = 1;
      }
    }
  }
  // A random simple path source -> ... -> sink keeps the network valid.
  std::vector<int> path{0};
  for (int v = 1; v < n - 1; ++v) {
    if (unit_random(rng) < 0.3) path.push_back(v);
  }
  path.push_back(n - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!has[path[i]][path[i + 1]]) {
      net.edges.push_back({path[i], path[i + 1], 1.0});
      has[path[i]][path[i + 1]] = 1;
    }
  }
  return net;
}

}  // namespace homocut
