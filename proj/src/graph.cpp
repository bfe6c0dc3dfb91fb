#include "graphprune/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "graphprune/errors.hpp"

namespace graphprune {

RegularGraph::RegularGraph(int n, int k, std::vector<Edge> edges)
    : n_(n), k_(k), edges_(std::move(edges)) {
    if (n <= 0 || k <= 0)
        raise(ErrorKind::InvariantViolation, "node count and degree must be positive");
    if (k >= n)
        raise(ErrorKind::InvariantViolation, "degree must be smaller than node count");
    if ((static_cast<std::int64_t>(n) * k) % 2 != 0)
        raise(ErrorKind::InvariantViolation, "n*k must be even");

    for (auto& [u, v] : edges_) {
        if (u == v)
            raise(ErrorKind::InvariantViolation, "self-loop on node " + std::to_string(u));
        if (u > v) std::swap(u, v);
        if (u < 0 || v >= n)
            raise(ErrorKind::InvariantViolation, "edge endpoint out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        raise(ErrorKind::InvariantViolation, "parallel edge");
    if (edges_.size() != static_cast<std::size_t>(n) * k / 2)
        raise(ErrorKind::InvariantViolation, "edge count does not match n*k/2");

    adjacency_.assign(n_, {});
    adj_bits_.assign(n_, detail::Bitset(n_));
    for (const auto& [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
        adj_bits_[u].set(v);
        adj_bits_[v].set(u);
    }
    for (int v = 0; v < n_; ++v) {
        if (static_cast<int>(adjacency_[v].size()) != k_)
            raise(ErrorKind::InvariantViolation,
                  "node " + std::to_string(v) + " has degree " +
                      std::to_string(adjacency_[v].size()) + ", expected " + std::to_string(k_));
        std::sort(adjacency_[v].begin(), adjacency_[v].end());
    }
}

RegularGraph ring_lattice(int n, int k) {
    if (k <= 0)
        raise(ErrorKind::InvariantViolation, "degree must be positive");
    if (k % 2 != 0)
        raise(ErrorKind::OddDegree, "ring lattice needs an even degree, got " + std::to_string(k));
    if (k >= n)
        raise(ErrorKind::DegreeTooLarge,
              "degree " + std::to_string(k) + " too large for " + std::to_string(n) + " nodes");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * k / 2);
    for (int i = 0; i < n; ++i) {
        for (int off = 1; off <= k / 2; ++off) {
            int j = (i + off) % n;
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    }
    return RegularGraph(n, k, std::move(edges));
}

RegularGraph random_regular(int n, int k, std::uint64_t seed, int max_retries) {
    if (k <= 0 || k >= n || (static_cast<std::int64_t>(n) * k) % 2 != 0)
        raise(ErrorKind::InfeasibleDegree,
              "no simple " + std::to_string(k) + "-regular graph on " + std::to_string(n) +
                  " nodes");
    std::mt19937_64 rng(seed);
    std::vector<int> stubs(static_cast<std::size_t>(n) * k);
    for (int v = 0; v < n; ++v)
        std::fill_n(stubs.begin() + static_cast<std::size_t>(v) * k, k, v);

    std::vector<Edge> edges(stubs.size() / 2);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) * n, 0);
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        bool simple = true;
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t i = 0; i < stubs.size(); i += 2) {
            int u = stubs[i], v = stubs[i + 1];
            if (u == v || seen[static_cast<std::size_t>(u) * n + v]) {
                simple = false;
                break;
            }
            seen[static_cast<std::size_t>(u) * n + v] = 1;
            seen[static_cast<std::size_t>(v) * n + u] = 1;
            edges[i / 2] = {std::min(u, v), std::max(u, v)};
        }
        if (simple) return RegularGraph(n, k, std::move(edges));
    }
    raise(ErrorKind::RetryExhausted,
          "no simple pairing found in " + std::to_string(max_retries) + " shuffles");
}

bool is_connected(const RegularGraph& g) {
    return detail::bfs_reaches_all(g.adjacency_bits(), g.node_count(), 0);
}

bool is_bipartite(const RegularGraph& g) {
    if (!is_connected(g))
        raise(ErrorKind::Disconnected, "bipartiteness undefined on a disconnected graph");
    const int n = g.node_count();
    std::vector<int> color(n, -1);
    std::vector<int> queue;
    queue.reserve(n);
    color[0] = 0;
    queue.push_back(0);
    std::size_t head = 0;
    while (head < queue.size()) {
        int v = queue[head++];
        for (int u : g.neighbors(v)) {
            if (color[u] == -1) {
                color[u] = color[v] ^ 1;
                queue.push_back(u);
            } else if (color[u] == color[v]) {
                return false;
            }
        }
    }
    return true;
}

std::int64_t shortest_path_sum(const RegularGraph& g) {
    const int n = g.node_count();
    std::int64_t total = 0;
    for (int s = 0; s < n; ++s) {
        std::int64_t row = detail::bfs_distance_sum(g.adjacency_bits(), n, s);
        if (row < 0) raise(ErrorKind::Disconnected, "ASPL undefined on a disconnected graph");
        total += row;
    }
    return total;
}

double aspl(const RegularGraph& g) {
    const int n = g.node_count();
    return static_cast<double>(shortest_path_sum(g)) /
           (static_cast<double>(n) * (n - 1));
}

RegularGraph read_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoError, "cannot open " + path);
    std::string line;
    int n = -1, k = -1;
    std::vector<Edge> edges;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        int a, b;
        if (!(ss >> a)) continue; // blank or comment-only line
        if (!(ss >> b) || (ss >> std::ws, !ss.eof()))
            raise(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": expected two integers");
        if (!header_seen) {
            n = a;
            k = b;
            header_seen = true;
            continue;
        }
        if (a < 0 || a >= n || b < 0 || b >= n)
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": node id out of range");
        edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (!header_seen) raise(ErrorKind::ParseError, path + ": missing 'n k' header");
    return RegularGraph(n, k, std::move(edges));
}

void write_graph(const RegularGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << g.node_count() << ' ' << g.degree() << '\n';
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
    if (!out) raise(ErrorKind::IoError, "write failed on " + path);
}

} // namespace graphprune
