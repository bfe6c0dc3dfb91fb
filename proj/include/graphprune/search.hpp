#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "graphprune/graph.hpp"

namespace graphprune {

struct SearchConfig {
    std::int64_t attempts = 10000; // swap attempts, counting rejected proposals
    std::uint64_t seed = 0;
    std::int64_t record_every = 1; // trajectory sampling stride
};

// Remove (i,j) and (p,q), add (i,p) and (j,q).
struct SwapCandidate {
    int i, j, p, q;
};

struct TrajectoryRow {
    std::int64_t attempt = 0; // 1-based
    bool accepted = false;
    double aspl_after = 0.0; // ASPL of the live graph after this attempt
    std::optional<SwapCandidate> swap;
};

using SearchTrajectory = std::vector<TrajectoryRow>;

struct SearchResult {
    RegularGraph graph;
    SearchTrajectory trajectory;
    double initial_aspl = 0.0;
    double final_aspl = 0.0;
    std::int64_t accepted = 0;
};

// Invoked after every accepted swap with the new state.
using SearchObserver = std::function<void(std::int64_t attempt, const RegularGraph& state)>;

// Draw two distinct edges, orient each at random, and propose the rewiring
// (i,p),(j,q). Returns nullopt when the four endpoints are not distinct or
// when either replacement edge already exists.
std::optional<SwapCandidate> propose_swap(const RegularGraph& g, std::mt19937_64& rng);

// Degree-preserving edge-swap descent on the shortest-path sum: a proposal is
// applied tentatively, dropped if it disconnects the graph, and kept iff the
// exact distance sum does not grow. Runs exactly cfg.attempts proposals.
SearchResult minimize_aspl(const RegularGraph& g0, const SearchConfig& cfg,
                           const SearchObserver& observer = {});

// CSV: header "attempt,accepted,aspl", ASPL with six decimals.
void write_trajectory(const SearchTrajectory& t, const std::string& path);

} // namespace graphprune
