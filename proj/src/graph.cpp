#include "decbandit/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "decbandit/errors.hpp"
#include "decbandit/rng.hpp"

namespace decbandit {

NeighborGraph::NeighborGraph(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count) {
    if (node_count < 1) throw ConfigError("graph needs at least one node");
    std::set<std::pair<int, int>> canonical;
    for (auto [a, b] : edges) {
        if (a == b) continue;  // self-loops are implicit, never stored
        if (a > b) std::swap(a, b);
        if (a < 0 || b >= node_count)
            throw ConfigError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") out of range for " + std::to_string(node_count) + " nodes");
        canonical.emplace(a, b);
    }
    edges_.assign(canonical.begin(), canonical.end());
    adjacency_.resize(node_count);
    for (auto [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool NeighborGraph::is_connected() const {
    return connected_components(*this).size() == 1;
}

std::uint64_t NeighborGraph::fingerprint() const {
    // FNV-1a over the node count and the canonical edge list.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    feed(static_cast<std::uint64_t>(node_count_));
    for (auto [a, b] : edges_) {
        feed(static_cast<std::uint64_t>(a));
        feed(static_cast<std::uint64_t>(b));
    }
    return h;
}

namespace {

double rho2_dense(const Eigen::MatrixXd& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
    Eigen::VectorXd mags = solver.eigenvalues().cwiseAbs();
    std::vector<double> sorted(mags.data(), mags.data() + mags.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted.size() > 1 ? sorted[1] : 0.0;
}

// Power iteration on W - (1/N) 1 1^T; the known top eigenpair of a stochastic
// symmetric W is deflated by the rank-one subtraction.
double rho2_power_iteration(const Eigen::MatrixXd& w, double tol) {
    const int n = static_cast<int>(w.rows());
    Eigen::MatrixXd b = w - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.01 * i;  // fixed, not orthogonal to anything likely
    v -= Eigen::VectorXd::Constant(n, v.mean());
    if (v.norm() == 0.0) return 0.0;
    v.normalize();
    double prev = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        Eigen::VectorXd bv = b * v;
        double norm = bv.norm();
        if (norm < tol) return 0.0;
        v = bv / norm;
        double est = std::abs(v.dot(b * v));
        if (std::abs(est - prev) <= tol) return est;
        prev = est;
    }
    return prev;
}

}  // namespace

WeightMatrix metropolis_weights(const NeighborGraph& g) {
    const int n = g.node_count();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double off_sum = 0.0;
        for (int j : g.adjacent(i)) {
            double wij = 1.0 / std::max(g.neighborhood_size(i), g.neighborhood_size(j));
            w(i, j) = wij;
            off_sum += wij;
        }
        w(i, i) = 1.0 - off_sum;
    }
    WeightMatrix out;
    out.entries = std::move(w);
    out.rho2 = n <= 64 ? rho2_dense(out.entries) : rho2_power_iteration(out.entries, 1e-12);
    return out;
}

NeighborGraph gen_erdos_renyi(int n, double p, std::uint64_t seed, bool require_connected,
                              int max_attempts) {
    if (p < 0.0 || p > 1.0) throw ConfigError("edge probability must be in [0,1]");
    if (n < 1) throw ConfigError("graph needs at least one node");
    RandomStream stream(seed);
    for (int attempt = 0; attempt < std::max(max_attempts, 1); ++attempt) {
        std::vector<std::pair<int, int>> edges;
        // Canonical pair order keeps the construction reproducible from the seed.
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (stream.uniform01() < p) edges.emplace_back(i, j);
        NeighborGraph g(n, std::move(edges));
        if (!require_connected || g.is_connected()) return g;
    }
    throw RunError("no connected Erdos-Renyi graph with p=" + std::to_string(p) + " after " +
                   std::to_string(max_attempts) + " attempts");
}

NeighborGraph complete_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return NeighborGraph(n, std::move(edges));
}

NeighborGraph cycle_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    if (n == 2) {
        edges.emplace_back(0, 1);
    } else if (n >= 3) {
        for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    }
    return NeighborGraph(n, std::move(edges));
}

NeighborGraph path_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return NeighborGraph(n, std::move(edges));
}

NeighborGraph two_component_benchmark_graph() {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) edges.emplace_back(i, j);
    for (int i = 6; i < 12; ++i) edges.emplace_back(i, i == 11 ? 6 : i + 1);
    return NeighborGraph(12, std::move(edges));
}

DistanceTable shortest_distances(const NeighborGraph& g) {
    const int n = g.node_count();
    DistanceTable table;
    table.node_count = n;
    table.d.assign(static_cast<std::size_t>(n) * n, DistanceTable::kUnreachable);
    for (int src = 0; src < n; ++src) {
        auto* row = table.d.data() + static_cast<std::size_t>(src) * n;
        row[src] = 0;
        std::deque<int> queue{src};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : g.adjacent(u)) {
                if (row[v] == DistanceTable::kUnreachable) {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return table;
}

std::vector<std::vector<int>> connected_components(const NeighborGraph& g) {
    const int n = g.node_count();
    std::vector<int> label(n, -1);
    std::vector<std::vector<int>> components;
    for (int src = 0; src < n; ++src) {
        if (label[src] != -1) continue;
        int id = static_cast<int>(components.size());
        components.emplace_back();
        std::deque<int> queue{src};
        label[src] = id;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            components[id].push_back(u);
            for (int v : g.adjacent(u)) {
                if (label[v] == -1) {
                    label[v] = id;
                    queue.push_back(v);
                }
            }
        }
        std::sort(components[id].begin(), components[id].end());
    }
    return components;
}

}  // namespace decbandit
