#include "graphprune/search.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "graphprune/errors.hpp"

namespace graphprune {

namespace {

// Live search state; RegularGraph itself is immutable.
struct Workspace {
    int n;
    std::vector<Edge> edges;
    detail::AdjBits adj;

    explicit Workspace(const RegularGraph& g)
        : n(g.node_count()), edges(g.edges()), adj(g.adjacency_bits()) {}

    bool has_edge(int u, int v) const { return adj[u].test(v); }

    void toggle(int u, int v) {
        if (adj[u].test(v)) {
            adj[u].unset(v);
            adj[v].unset(u);
        } else {
            adj[u].set(v);
            adj[v].set(u);
        }
    }

    std::optional<std::int64_t> try_distance_sum() const {
        std::int64_t total = 0;
        for (int s = 0; s < n; ++s) {
            std::int64_t row = detail::bfs_distance_sum(adj, n, s);
            if (row < 0) return std::nullopt;
            total += row;
        }
        return total;
    }
};

std::optional<SwapCandidate> draw_candidate(const std::vector<Edge>& edges,
                                            const Workspace& ws, std::mt19937_64& rng) {
    const std::size_t m = edges.size();
    std::uniform_int_distribution<std::size_t> first(0, m - 1);
    std::uniform_int_distribution<std::size_t> second(0, m - 2);
    std::uniform_int_distribution<int> coin(0, 1);

    std::size_t e1 = first(rng);
    std::size_t e2 = second(rng);
    if (e2 >= e1) ++e2;
    // Each selected edge is oriented at random so both rewirings of a pair
    // are reachable even though only (i,p),(j,q) is ever formed.
    int i = edges[e1].first, j = edges[e1].second;
    int p = edges[e2].first, q = edges[e2].second;
    if (coin(rng)) std::swap(i, j);
    if (coin(rng)) std::swap(p, q);

    if (i == p || i == q || j == p || j == q) return std::nullopt;
    if (ws.has_edge(i, p) || ws.has_edge(j, q)) return std::nullopt;
    return SwapCandidate{i, j, p, q};
}

} // namespace

std::optional<SwapCandidate> propose_swap(const RegularGraph& g, std::mt19937_64& rng) {
    if (g.edges().size() < 2)
        raise(ErrorKind::DegenerateGraph, "need at least two edges to swap");
    Workspace ws(g);
    return draw_candidate(ws.edges, ws, rng);
}

SearchResult minimize_aspl(const RegularGraph& g0, const SearchConfig& cfg,
                           const SearchObserver& observer) {
    if (cfg.attempts < 1)
        raise(ErrorKind::InvariantViolation, "attempt budget must be at least 1");
    if (cfg.record_every < 1)
        raise(ErrorKind::InvariantViolation, "record_every must be at least 1");
    if (g0.edges().size() < 2)
        raise(ErrorKind::DegenerateGraph, "need at least two edges to swap");
    if (!is_connected(g0))
        raise(ErrorKind::Disconnected, "search requires a connected starting graph");

    Workspace ws(g0);
    const int n = ws.n;
    const double pairs = static_cast<double>(n) * (n - 1);
    std::int64_t current_sum = *ws.try_distance_sum();

    std::mt19937_64 rng(cfg.seed);
    SearchResult result{g0, {}, static_cast<double>(current_sum) / pairs, 0.0, 0};

    // Index of each selected edge in ws.edges is needed for in-place replace,
    // so the draw is inlined here rather than shared with propose_swap.
    const std::size_t m = ws.edges.size();
    std::uniform_int_distribution<std::size_t> first(0, m - 1);
    std::uniform_int_distribution<std::size_t> second(0, m - 2);
    std::uniform_int_distribution<int> coin(0, 1);

    for (std::int64_t attempt = 1; attempt <= cfg.attempts; ++attempt) {
        std::size_t e1 = first(rng);
        std::size_t e2 = second(rng);
        if (e2 >= e1) ++e2;
        int i = ws.edges[e1].first, j = ws.edges[e1].second;
        int p = ws.edges[e2].first, q = ws.edges[e2].second;
        if (coin(rng)) std::swap(i, j);
        if (coin(rng)) std::swap(p, q);

        bool accepted = false;
        std::optional<SwapCandidate> cand;
        bool degenerate = (i == p || i == q || j == p || j == q) || ws.has_edge(i, p) ||
                          ws.has_edge(j, q);
        if (!degenerate) {
            cand = SwapCandidate{i, j, p, q};
            ws.toggle(i, j);
            ws.toggle(p, q);
            ws.toggle(i, p);
            ws.toggle(j, q);
            auto new_sum = ws.try_distance_sum();
            if (new_sum && *new_sum <= current_sum) {
                accepted = true;
                current_sum = *new_sum;
                ws.edges[e1] = {std::min(i, p), std::max(i, p)};
                ws.edges[e2] = {std::min(j, q), std::max(j, q)};
            } else {
                ws.toggle(i, p);
                ws.toggle(j, q);
                ws.toggle(i, j);
                ws.toggle(p, q);
            }
        }

        if (accepted) {
            ++result.accepted;
            if (observer) observer(attempt, RegularGraph(n, g0.degree(), ws.edges));
        }
        if ((attempt - 1) % cfg.record_every == 0) {
            result.trajectory.push_back(
                {attempt, accepted, static_cast<double>(current_sum) / pairs, cand});
        }
    }

    result.graph = RegularGraph(n, g0.degree(), ws.edges);
    result.final_aspl = static_cast<double>(current_sum) / pairs;
    return result;
}

void write_trajectory(const SearchTrajectory& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << "attempt,accepted,aspl\n";
    char buf[64];
    for (const auto& row : t) {
        std::snprintf(buf, sizeof buf, "%lld,%d,%.6f", static_cast<long long>(row.attempt),
                      row.accepted ? 1 : 0, row.aspl_after);
        out << buf << '\n';
    }
    if (!out) raise(ErrorKind::IoError, "write failed on " + path);
}

} // namespace graphprune
