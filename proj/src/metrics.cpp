#include "graphprune/metrics.hpp"


#include <nlohmann/json.hpp>

#include "graphprune/errors.hpp"

namespace graphprune {

namespace {

void require_connected(const RegularGraph& g) {
    if (!is_connected(g)) raise(ErrorKind::Disconnected, "graph must be connected");
}

detail::Bitset next_walk_set(const RegularGraph& g, const detail::Bitset& current) {
    detail::Bitset next(g.node_count());
    current.for_each([&](int v) { next |= g.adjacency_bits()[v]; });
    return next;
}

} // namespace

WalkFrontier walk_frontier(const RegularGraph& g, int source, int rounds) {
    WalkFrontier wf;
    wf.source = source;
    detail::Bitset cur(g.node_count());
    cur.set(source);
    for (int r = 0; r <= rounds; ++r) {
        std::vector<int> members;
        members.reserve(static_cast<std::size_t>(cur.count()));
        cur.for_each([&](int v) { members.push_back(v); });
        wf.by_round.push_back(std::move(members));
        if (r < rounds) cur = next_walk_set(g, cur);
    }
    return wf;
}

int gr_node(const RegularGraph& g, int node) {
    require_connected(g);
    if (is_bipartite(g))
        raise(ErrorKind::InfiniteGr, "walk sets of a bipartite graph never cover all nodes");
    const int n = g.node_count();
    detail::Bitset cur(n);
    cur.set(node);
    // A connected non-bipartite graph covers well before 4n rounds.
    for (int round = 1; round <= 4 * n; ++round) {
        cur = next_walk_set(g, cur);
        if (cur.count() == n) return round;
    }
    raise(ErrorKind::InfiniteGr, "walk sets failed to cover the graph");
}

double gr_graph(const RegularGraph& g) {
    const int n = g.node_count();
    std::int64_t total = 0;
    for (int v = 0; v < n; ++v) total += gr_node(g, v);
    return static_cast<double>(total) / n;
}

std::int64_t aopu_node(const RegularGraph& g, int node, int layers, int group_size) {
    require_connected(g);
    if (layers < 2) raise(ErrorKind::InvariantViolation, "need at least 2 layers");
    const std::int64_t block = static_cast<std::int64_t>(group_size) * group_size;
    detail::Bitset cur(g.node_count());
    cur.set(node);
    std::int64_t used = 0;
    for (int d = 0; d <= layers - 2; ++d) {
        // uniform degree: each reached group pulls k input blocks
        used += static_cast<std::int64_t>(cur.count()) * g.degree() * block;
        if (d < layers - 2) cur = next_walk_set(g, cur);
    }
    return used;
}

double aopu(const RegularGraph& g, int layers, int group_size) {
    const int n = g.node_count();
    std::int64_t total = 0;
    for (int v = 0; v < n; ++v) total += aopu_node(g, v, layers, group_size);
    return static_cast<double>(total) / n;
}

double Bfsst::root_aspl() const {
    std::int64_t sum = 0;
    for (int d : depth) sum += d;
    return static_cast<double>(sum) / (static_cast<double>(depth.size()) - 1);
}

Bfsst bfsst(const RegularGraph& g, int root) {
    require_connected(g);
    const int n = g.node_count();
    Bfsst tree;
    tree.root = root;
    tree.parent.assign(n, -1);
    tree.depth.assign(n, -1);
    tree.depth[root] = 0;
    std::vector<int> queue{root};
    std::size_t head = 0;
    while (head < queue.size()) {
        int v = queue[head++];
        for (int u : g.neighbors(v)) {
            if (tree.depth[u] == -1) {
                tree.depth[u] = tree.depth[v] + 1;
                tree.parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    return tree;
}

int theta(int n, int k) {
    if (k <= 2) raise(ErrorKind::UnsupportedDegree, "theta requires degree >= 3");
    if (n <= k) raise(ErrorKind::InvalidNodeCount, "need more nodes than the degree");
    // largest t with k*(k-1)^t <= (n-1)(k-2) + k; the division keeps the
    // running power inside int64 range
    const std::int64_t limit = static_cast<std::int64_t>(n - 1) * (k - 2) + k;
    std::int64_t value = k;
    int t = 0;
    while (value <= limit / (k - 1)) {
        value *= (k - 1);
        ++t;
    }
    return t;
}

double lower_bound_aspl(int n, int k) {
    const int th = theta(n, k);
    std::int64_t weighted = 0; // sum of i * layer_i over full layers
    std::int64_t filled = 0;   // nodes in full layers
    std::int64_t layer = k;    // k*(k-1)^(i-1)
    for (int i = 1; i <= th; ++i) {
        weighted += static_cast<std::int64_t>(i) * layer;
        filled += layer;
        layer *= (k - 1);
    }
    std::int64_t remainder = static_cast<std::int64_t>(n) - 1 - filled;
    if (remainder < 0)
        raise(ErrorKind::InvalidNodeCount, "filled layers exceed n-1; theta overestimated");
    weighted += static_cast<std::int64_t>(th + 1) * remainder;
    return static_cast<double>(weighted) / (n - 1);
}

MetricsReport metrics_report(const RegularGraph& g, int layers, int group_size) {
    require_connected(g);
    MetricsReport r;
    r.n = g.node_count();
    r.k = g.degree();
    r.aspl = aspl(g);
    r.gr = is_bipartite(g) ? std::nullopt : std::optional<double>(gr_graph(g));
    r.aopu = aopu(g, layers, group_size);
    if (r.k >= 3) {
        r.theta = theta(r.n, r.k);
        r.lower_bound = lower_bound_aspl(r.n, r.k);
    }
    return r;
}

std::string metrics_report_json(const MetricsReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["aspl"] = r.aspl;
    if (r.gr)
        j["gr"] = *r.gr;
    else
        j["gr"] = "inf";
    j["aopu"] = r.aopu;
    if (r.lower_bound)
        j["lower_bound"] = *r.lower_bound;
    else
        j["lower_bound"] = nullptr;
    if (r.theta)
        j["theta"] = *r.theta;
    else
        j["theta"] = nullptr;
    return j.dump();
}

} // namespace graphprune
