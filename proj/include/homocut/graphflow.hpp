#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace homocut {

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlowEdge {
  int from = 0;
  int to = 0;
  double capacity = 1.0;
};

/// Directed network with nonnegative capacities and distinct terminals.
struct FlowNetwork {
  int num_vertices = 0;
  std::vector<FlowEdge> edges;
  int source = 0;
  int sink = 1;

  /// Throws FlowError on bad indices, negative capacity, equal terminals,
  /// or when no directed path of positive capacity joins source to sink.
  void validate() const;
};

struct FlowResult {
  double value = 0.0;
  std::vector<double> flow;  // per edge, 0 <= flow <= capacity
};

/// Maximum flow by augmenting along shortest residual paths (BFS level graphs).
FlowResult max_flow(const FlowNetwork& net);

struct Cut {
  std::vector<std::uint8_t> source_side;  // 1 for vertices in S0
  std::vector<int> edges;                 // edges from S0 to S1
  double capacity = 0.0;
  double flow_value = 0.0;  // value of the maximum flow it was read from
};

/// Minimum cut read off the residual network of a maximum flow.
Cut min_cut(const FlowNetwork& net);

/// Capacity of the partition given by source_side.
double cut_capacity(const FlowNetwork& net, const std::vector<std::uint8_t>& source_side);

/// Largest violation of flow conservation over non-terminal vertices.
double conservation_residual(const FlowNetwork& net, const std::vector<double>& flow);

/// Net outflow of the source.
double flow_value(const FlowNetwork& net, const std::vector<double>& flow);

/// Exhaustive minimum over all partitions; at most 20 vertices.
double brute_force_min_cut(const FlowNetwork& net);

/// Text format: a header "source=S sink=T" (optionally "vertices=N"), then
/// one "u v capacity" line per edge. '#' starts a comment.
FlowNetwork read_network(std::istream& in);
FlowNetwork read_network_file(const std::string& path);
void write_network(std::ostream& out, const FlowNetwork& net);

/// Random unit-capacity network on n vertices with edge probability p and a
/// guaranteed source-to-sink path, deterministic in the seed.
FlowNetwork random_unit_network(int n, double p, std::uint64_t seed);

}  // namespace homocut
