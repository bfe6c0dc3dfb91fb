#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphprune/graph.hpp"

namespace graphprune {

// Exact-length walk sets from one source: by_round[r] holds every node
// reachable by a walk of exactly r edges.
struct WalkFrontier {
    int source = 0;
    std::vector<std::vector<int>> by_round;
};

WalkFrontier walk_frontier(const RegularGraph& g, int source, int rounds);

// Smallest round count after which the exact-length walk set from `node`
// covers the whole graph. Throws InfiniteGr on bipartite graphs, where the
// walk sets alternate sides forever.
int gr_node(const RegularGraph& g, int node);

// Mean of gr_node over all nodes.
double gr_graph(const RegularGraph& g);

// Surviving parameters on gradient paths feeding output group `node` of an
// equal-width masked MLP with `layers` layers and group size `group_size`:
// sum over backward depths d = 0..layers-2 of deg(v)*s^2 for v in the
// exact-length-d walk set. Biases excluded.
std::int64_t aopu_node(const RegularGraph& g, int node, int layers, int group_size);

// Mean of aopu_node over all nodes.
double aopu(const RegularGraph& g, int layers, int group_size);

// Breadth-first-search spanning tree.
struct Bfsst {
    int root = 0;
    std::vector<int> parent; // -1 at the root
    std::vector<int> depth;

    // Per-root ASPL term: depth sum over the n-1 non-root nodes.
    double root_aspl() const;
};

Bfsst bfsst(const RegularGraph& g, int root);

// Number of completely filled layers in the ideal BFS tree of an N-node
// k-regular graph: largest t with k*(k-1)^t <= (N-1)(k-2) + k, evaluated in
// exact integer arithmetic. Requires k >= 3.
int theta(int n, int k);

// ASPL of the ideal BFS tree: layers 1..theta full with k*(k-1)^(i-1) nodes
// at depth i, the remaining nodes at depth theta+1, averaged over N-1.
double lower_bound_aspl(int n, int k);

struct MetricsReport {
    int n = 0;
    int k = 0;
    double aspl = 0.0;
    std::optional<double> gr;    // nullopt = infinite (bipartite graph)
    double aopu = 0.0;
    std::optional<double> lower_bound; // nullopt when k < 3
    std::optional<int> theta;
};

MetricsReport metrics_report(const RegularGraph& g, int layers, int group_size);

// {"n":..,"k":..,"aspl":..,"gr":..|"inf","aopu":..,"lower_bound":..,"theta":..}
std::string metrics_report_json(const MetricsReport& r);

} // namespace graphprune
