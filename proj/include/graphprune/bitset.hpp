#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace graphprune::detail {

// Fixed-width bitset sized at runtime. Node sets for BFS frontiers and
// walk-set iteration; word-parallel union is what makes the swap search and
// the per-node metrics cheap at the scales this library targets.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    int size() const { return bits_; }

    void set(int i) { words_[static_cast<std::size_t>(i) >> 6] |= (1ULL << (i & 63)); }

    void unset(int i) { words_[static_cast<std::size_t>(i) >> 6] &= ~(1ULL << (i & 63)); }

    bool test(int i) const {
        return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1ULL;
    }

    void clear() {
        for (auto& w : words_) w = 0;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    int count() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    Bitset& operator|=(const Bitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }

    // this &= ~o
    void subtract(const Bitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    }

    bool operator==(const Bitset& o) const { return words_ == o.words_; }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                int b = std::countr_zero(w);
                f(static_cast<int>(wi * 64 + static_cast<std::size_t>(b)));
                w &= w - 1;
            }
        }
    }

private:
    int bits_ = 0;
    std::vector<std::uint64_t> words_;
};

using AdjBits = std::vector<Bitset>;

// Distance sum from `source` over a graph given as adjacency bitsets.
// Returns -1 when some node is unreachable.
inline std::int64_t bfs_distance_sum(const AdjBits& adj, int n, int source) {
    Bitset visited(n);
    Bitset frontier(n);
    visited.set(source);
    frontier.set(source);
    std::int64_t sum = 0;
    int reached = 1;
    int level = 0;
    while (true) {
        Bitset next(n);
        frontier.for_each([&](int v) { next |= adj[v]; });
        next.subtract(visited);
        ++level;
        int c = next.count();
        if (c == 0) break;
        sum += static_cast<std::int64_t>(level) * c;
        reached += c;
        visited |= next;
        frontier = next;
    }
    return reached == n ? sum : -1;
}

inline bool bfs_reaches_all(const AdjBits& adj, int n, int source) {
    return bfs_distance_sum(adj, n, source) >= 0;
}

} // namespace graphprune::detail
