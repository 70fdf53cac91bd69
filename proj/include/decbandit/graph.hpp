#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace decbandit {

/// Undirected neighbor graph. Every node is implicitly a neighbor of itself,
/// so the neighborhood size of node i is degree(i) + 1.
class NeighborGraph {
public:
    NeighborGraph(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return node_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    /// Neighbors of i excluding i itself, sorted ascending.
    const std::vector<int>& adjacent(int i) const { return adjacency_[i]; }

    /// |N_i|, counting the implicit self-loop.
    int neighborhood_size(int i) const { return static_cast<int>(adjacency_[i].size()) + 1; }

    bool is_isolated(int i) const { return adjacency_[i].empty(); }
    bool is_connected() const;

    /// Stable hash of the node count and canonical edge list.
    std::uint64_t fingerprint() const;

private:
    int node_count_;
    std::vector<std::pair<int, int>> edges_;          // canonical i<j pairs, sorted
    std::vector<std::vector<int>> adjacency_;         // self excluded
};

/// Metropolis fusion weights and the second-largest eigenvalue magnitude.
struct WeightMatrix {
    Eigen::MatrixXd entries;
    double rho2 = 0.0;
};

struct DistanceTable {
    static constexpr int kUnreachable = -1;

    int node_count = 0;
    std::vector<int> d;  // row-major, kUnreachable across components

    int at(int i, int j) const { return d[static_cast<std::size_t>(i) * node_count + j]; }
    bool reachable(int i, int j) const { return at(i, j) != kUnreachable; }
};

WeightMatrix metropolis_weights(const NeighborGraph& g);

NeighborGraph gen_erdos_renyi(int n, double p, std::uint64_t seed, bool require_connected,
                              int max_attempts);

NeighborGraph complete_graph(int n);
NeighborGraph cycle_graph(int n);
NeighborGraph path_graph(int n);

/// Twelve nodes: 1-6 a complete graph, 7-12 a cycle, no edges between the two.
NeighborGraph two_component_benchmark_graph();

DistanceTable shortest_distances(const NeighborGraph& g);

/// Partition of the node set; components sorted by smallest member.
std::vector<std::vector<int>> connected_components(const NeighborGraph& g);

}  // namespace decbandit
