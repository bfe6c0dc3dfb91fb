#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "graphprune/metrics.hpp"
#include "graphprune/mlp.hpp"
#include "test_util.hpp"

using namespace graphprune;
using test_util::kind_of;

TEST_CASE("build places weights exactly on allowed blocks") {
    RegularGraph g = ring_lattice(8, 4);
    TinyMLP m = build_mlp(g, 4, 2, 42);
    CHECK(m.surviving_weights() == 3LL * 8 * 4 * 4); // (layers-1) * n * k * s^2

    std::int64_t nonzero = 0;
    for (const auto& w : m.weights)
        for (int r = 0; r < w.rows; ++r)
            for (int c = 0; c < w.cols; ++c) {
                const bool allowed = g.has_edge(r / 2, c / 2);
                if (allowed) {
                    CHECK(w(r, c) >= 0.1);
                    CHECK(w(r, c) <= 1.0);
                    ++nonzero;
                } else {
                    CHECK(w(r, c) == 0.0);
                }
            }
    CHECK(nonzero == m.surviving_weights());

    TinyMLP again = build_mlp(g, 4, 2, 42);
    for (std::size_t t = 0; t < m.weights.size(); ++t)
        CHECK(again.weights[t].data == m.weights[t].data);
    TinyMLP other = build_mlp(g, 4, 2, 43);
    CHECK(other.weights[0].data != m.weights[0].data);

    TinyMLP dense = build_dense_mlp(4, 3, 2, 1);
    for (const auto& w : dense.weights)
        for (double v : w.data) CHECK(v >= 0.1);
}

TEST_CASE("forward pass") {
    RegularGraph c5 = ring_lattice(5, 2);
    TinyMLP m = build_mlp(c5, 2, 2, 7);

    auto zero = forward(m, std::vector<double>(10, 0.0));
    for (double v : zero.back()) CHECK(v == 0.0);

    // one-hot probe lands exactly on the neighbor groups' rows
    std::vector<double> probe(10, 0.0);
    probe[2 * 2] = 1.0; // first unit of group 2
    auto acts = forward(m, probe);
    for (int o = 0; o < 10; ++o) {
        const bool neighbor = c5.has_edge(o / 2, 2);
        CHECK((acts.back()[o] != 0.0) == neighbor);
    }

    // identity network equals the explicit matrix-chain product
    RegularGraph g = random_regular(6, 3, 2);
    REQUIRE(is_connected(g));
    TinyMLP chain = build_mlp(g, 4, 1, 3);
    std::vector<double> x{0.5, -1.0, 2.0, 0.25, -0.75, 1.5};
    auto out = forward(chain, x).back();
    std::vector<double> ref = x;
    for (const auto& w : chain.weights) {
        std::vector<double> next(6, 0.0);
        for (int o = 0; o < 6; ++o)
            for (int i = 0; i < 6; ++i) next[o] += w(o, i) * ref[i];
        ref = next;
    }
    for (int o = 0; o < 6; ++o) CHECK(out[o] == doctest::Approx(ref[o]).epsilon(1e-12));

    CHECK(kind_of([&] { forward(m, std::vector<double>(7, 0.0)); }) ==
          ErrorKind::ShapeMismatch);
}

TEST_CASE("gradient reach on the dense mapping") {
    const int n = 6, s = 2, layers = 5;
    TinyMLP dense = build_dense_mlp(n, layers, s, 9);
    GradReachReport r = grad_reach_count(dense, 2);
    // the last matrix contributes only the output group's own row blocks
    const std::int64_t expect =
        static_cast<std::int64_t>(n) * s * s + (layers - 2) * n * n * s * s;
    CHECK(r.reached_params == expect);
    CHECK(r.gr_observed == 1);
}

TEST_CASE("gradient reach equals the walk-set count") {
    int checked = 0;
    for (int n : {8, 16}) {
        for (int k : {3, 4}) {
            for (std::uint64_t seed = 0; seed < 6; ++seed) {
                RegularGraph g = random_regular(n, k, seed);
                if (!is_connected(g) || is_bipartite(g)) continue;
                const int layers = 5;
                TinyMLP m = build_mlp(g, layers, 2, seed + 50);
                for (int j = 0; j < n; ++j) {
                    GradReachReport r = grad_reach_count(m, j);
                    CHECK(r.reached_params == aopu_node(g, j, layers, 2));
                    const int rounds = gr_node(g, j);
                    if (rounds <= layers - 1) {
                        REQUIRE(r.gr_observed.has_value());
                        CHECK(*r.gr_observed == rounds);
                    } else {
                        CHECK_FALSE(r.gr_observed.has_value());
                    }
                }
                ++checked;
            }
        }
    }
    CHECK(checked >= 8);
}

TEST_CASE("reach counts are invariant under node relabeling") {
    RegularGraph g = random_regular(8, 3, 4);
    REQUIRE(is_connected(g));
    std::vector<int> perm{5, 2, 7, 0, 3, 6, 1, 4};
    std::vector<Edge> relabeled;
    for (auto [u, v] : g.edges())
        relabeled.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
    RegularGraph gp(8, 3, relabeled);
    TinyMLP m = build_mlp(g, 5, 2, 1);
    TinyMLP mp = build_mlp(gp, 5, 2, 99); // weights differ, structure decides
    for (int j = 0; j < 8; ++j)
        CHECK(grad_reach_count(m, j).reached_params ==
              grad_reach_count(mp, perm[j]).reached_params);
}

TEST_CASE("oracle mode is required") {
    RegularGraph g = ring_lattice(6, 2);
    TinyMLP m = build_mlp(g, 3, 1, 0, Activation::LeakyRelu);
    CHECK(kind_of([&] { grad_reach_count(m, 0); }) == ErrorKind::NotOracleMode);
}

TEST_CASE("analytic gradient matches central finite differences") {
    RegularGraph g = random_regular(8, 3, 6);
    REQUIRE(is_connected(g));
    TinyMLP m = build_mlp(g, 4, 2, 12, Activation::LeakyRelu);
    // mixed-sign input keeps some pre-activations in the negative branch
    std::vector<double> x;
    for (int i = 0; i < m.width(); ++i) x.push_back(i % 2 ? 0.8 : -0.6);
    const int group = 3;

    auto loss_of = [&] {
        auto acts = forward(m, x);
        double loss = 0.0;
        for (int o = 0; o < m.s; ++o) loss += acts.back()[group * m.s + o];
        return loss;
    };
    LossBackprop bp = backprop_loss(m, x, group);

    std::mt19937_64 rng(77);
    int tested = 0;
    while (tested < 10) {
        int t = static_cast<int>(rng() % m.weights.size());
        int j = static_cast<int>(rng() % static_cast<std::uint64_t>(m.n));
        const auto& nb = m.block_neighbors[j];
        int v = nb[rng() % nb.size()];
        int o = static_cast<int>(rng() % static_cast<std::uint64_t>(m.s));
        int i = static_cast<int>(rng() % static_cast<std::uint64_t>(m.s));
        const int r = j * m.s + o, c = v * m.s + i;
        const double h = 1e-6;
        const double orig = m.weights[t](r, c);
        m.weights[t](r, c) = orig + h;
        double up = loss_of();
        m.weights[t](r, c) = orig - h;
        double down = loss_of();
        m.weights[t](r, c) = orig;
        const double fd = (up - down) / (2 * h);
        const double an = bp.weight_grads[t](r, c);
        if (std::abs(fd) < 1e-9 && std::abs(an) < 1e-9) continue; // off-path weight
        CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(fd)));
        ++tested;
    }
}

TEST_CASE("blobs generator") {
    BlobsConfig cfg{2, 2, 100, 5};
    Dataset a = make_blobs(cfg);
    Dataset b = make_blobs(cfg);
    CHECK(a.x.data == b.x.data);
    CHECK(a.y == b.y);
    CHECK(a.x.rows == 100);
    CHECK(a.x.cols == 2);
    for (int label : a.y) CHECK((label == 0 || label == 1));

    {
        std::ofstream out("tmp_blobs.json");
        out << R"({"classes":3,"dims":4,"points":60,"seed":11})";
    }
    BlobsConfig loaded = load_blobs_config("tmp_blobs.json");
    CHECK(loaded.classes == 3);
    CHECK(loaded.dims == 4);
    CHECK(loaded.points == 60);
    CHECK(loaded.seed == 11);
    std::remove("tmp_blobs.json");
}

TEST_CASE("training demo") {
    BlobsConfig cfg{2, 4, 240, 3};
    Dataset data = make_blobs(cfg);

    // pruned weights stay exactly zero through every update
    RegularGraph g = random_regular(16, 4, 2);
    REQUIRE(is_connected(g));
    TrainDemoResult masked = train_demo(g, data, 12, 5, 3, 1);
    CHECK(masked.max_pruned_abs == 0.0);
    CHECK(masked.trace.size() == 12);
    for (const auto& row : masked.trace) {
        CHECK(row.train_acc >= 0.0);
        CHECK(row.train_acc <= 1.0);
    }

    // the dense mapping separates two well-separated blobs
    TrainDemoResult dense = train_demo_dense(16, data, 50, 5, 3, 1);
    CHECK(dense.trace.back().val_acc >= 0.95);

    write_accuracy_trace(masked.trace, "tmp_trace.csv");
    std::ifstream in("tmp_trace.csv");
    std::string line;
    CHECK(std::getline(in, line));
    CHECK(line == "epoch,train_acc,val_acc");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 12);
    std::remove("tmp_trace.csv");
}
