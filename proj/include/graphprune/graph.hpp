#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graphprune/bitset.hpp"

namespace graphprune {

using Edge = std::pair<int, int>; // stored with first < second

enum class GraphKind { RingLattice, RandomRegular, FromFile };

// Simple undirected graph with uniform degree. Immutable after construction;
// the constructor validates simplicity and regularity.
class RegularGraph {
public:
    RegularGraph(int n, int k, std::vector<Edge> edges);

    int node_count() const { return n_; }
    int degree() const { return k_; }

    // Sorted lexicographically, each pair with u < v.
    const std::vector<Edge>& edges() const { return edges_; }

    // Sorted neighbor ids.
    const std::vector<int>& neighbors(int v) const { return adjacency_[v]; }

    bool has_edge(int u, int v) const { return adj_bits_[u].test(v); }

    const detail::AdjBits& adjacency_bits() const { return adj_bits_; }

private:
    int n_;
    int k_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    detail::AdjBits adj_bits_;
};

// Circulant graph: node i adjacent to i+-1 ... i+-k/2 (mod n). Requires even k.
RegularGraph ring_lattice(int n, int k);

// Simple k-regular graph via the pairing model, rejecting and reshuffling on
// any self-loop or parallel edge. Deterministic for a given seed.
RegularGraph random_regular(int n, int k, std::uint64_t seed, int max_retries = 10000);

bool is_connected(const RegularGraph& g);

// BFS 2-coloring. Requires a connected graph.
bool is_bipartite(const RegularGraph& g);

// Sum of shortest-path lengths over ordered node pairs. Throws Disconnected.
std::int64_t shortest_path_sum(const RegularGraph& g);

// Mean shortest-path length over ordered pairs (u, v), u != v.
double aspl(const RegularGraph& g);

// Edge-list text format: header "n k", then one "u v" line per edge with
// u < v, sorted; '#' starts a comment.
RegularGraph read_graph(const std::string& path);
void write_graph(const RegularGraph& g, const std::string& path);

} // namespace graphprune
