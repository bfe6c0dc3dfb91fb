#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "graphprune/graph.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace graphprune;
using test_util::kind_of;

namespace {

RegularGraph complete(int n) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return RegularGraph(n, n - 1, edges);
}

} // namespace

TEST_CASE("ring lattice structure") {
    RegularGraph c5 = ring_lattice(5, 2);
    CHECK(c5.edges() == std::vector<Edge>{{0, 1}, {0, 4}, {1, 2}, {2, 3}, {3, 4}});

    RegularGraph g = ring_lattice(64, 4);
    CHECK(g.edges().size() == 128);
    for (int i = 0; i < 64; ++i) {
        CHECK(g.has_edge(i, (i + 1) % 64));
        CHECK(g.has_edge(i, (i + 2) % 64));
        CHECK(g.neighbors(i).size() == 4);
    }

    CHECK(kind_of([] { ring_lattice(6, 3); }) == ErrorKind::OddDegree);
    CHECK(kind_of([] { ring_lattice(4, 4); }) == ErrorKind::DegreeTooLarge);
    CHECK(kind_of([] { ring_lattice(4, 0); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("constructor rejects invalid graphs") {
    CHECK(kind_of([] { RegularGraph(3, 2, {{0, 1}, {1, 2}, {1, 1}}); }) ==
          ErrorKind::InvariantViolation); // self-loop
    CHECK(kind_of([] { RegularGraph(3, 2, {{0, 1}, {0, 1}, {1, 2}}); }) ==
          ErrorKind::InvariantViolation); // parallel edge
    CHECK(kind_of([] { RegularGraph(4, 2, {{0, 1}, {1, 2}, {2, 3}}); }) ==
          ErrorKind::InvariantViolation); // degree mismatch
    CHECK(kind_of([] { RegularGraph(4, 2, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}}); }) ==
          ErrorKind::InvariantViolation); // edge count
    CHECK(kind_of([] { RegularGraph(3, 3, {{0, 1}, {1, 2}, {0, 2}}); }) ==
          ErrorKind::InvariantViolation); // k >= n
}

TEST_CASE("random regular generation") {
    // the only simple 3-regular graph on 4 nodes is K4
    for (std::uint64_t seed : {0u, 1u, 42u}) {
        RegularGraph g = random_regular(4, 3, seed);
        CHECK(g.edges().size() == 6);
    }
    // and the only 2-regular on 3 nodes is the triangle
    RegularGraph tri = random_regular(3, 2, 9);
    CHECK(tri.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});

    RegularGraph a = random_regular(64, 4, 7);
    RegularGraph b = random_regular(64, 4, 7);
    CHECK(a.edges() == b.edges()); // bit-identical for equal seeds
    RegularGraph c = random_regular(64, 4, 8);
    CHECK(a.edges() != c.edges());

    CHECK(kind_of([] { random_regular(5, 3, 0); }) == ErrorKind::InfeasibleDegree);
    CHECK(kind_of([] { random_regular(4, 4, 0); }) == ErrorKind::InfeasibleDegree);
    CHECK(kind_of([] { random_regular(64, 8, 0, 1); }) == ErrorKind::RetryExhausted);
}

TEST_CASE("connectivity") {
    CHECK(is_connected(ring_lattice(64, 4)));
    CHECK(is_connected(complete(4)));
    RegularGraph two_triangles(6, 2, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK_FALSE(is_connected(two_triangles));
}

TEST_CASE("bipartiteness") {
    CHECK(is_bipartite(ring_lattice(4, 2)));        // C4
    CHECK_FALSE(is_bipartite(ring_lattice(5, 2)));  // C5
    CHECK_FALSE(is_bipartite(complete(4)));
    RegularGraph two_triangles(6, 2, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK(kind_of([&] { is_bipartite(two_triangles); }) == ErrorKind::Disconnected);
}

TEST_CASE("aspl on known graphs") {
    for (int n = 2; n <= 6; ++n) CHECK(aspl(complete(n)) == doctest::Approx(1.0));
    CHECK(aspl(ring_lattice(5, 2)) == doctest::Approx(1.5));
    // 64-node 2-neighbor ring: distance ceil(d/2), summing to 528 per node
    CHECK(aspl(ring_lattice(64, 4)) == doctest::Approx(528.0 / 63.0));
    CHECK(shortest_path_sum(ring_lattice(64, 4)) == 528 * 64);

    RegularGraph two_triangles(6, 2, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK(kind_of([&] { aspl(two_triangles); }) == ErrorKind::Disconnected);
}

TEST_CASE("aspl and bipartiteness match the brute-force oracle on small graphs") {
    for (int n = 4; n <= 12; ++n) {
        for (int k : {3, 4}) {
            if (k >= n || (n * k) % 2 != 0) continue;
            for (std::uint64_t seed = 0; seed < 12; ++seed) {
                RegularGraph g = random_regular(n, k, seed);
                auto dist = oracles::floyd_warshall(g);
                if (!oracles::connected(dist)) {
                    CHECK_FALSE(is_connected(g));
                    continue;
                }
                CHECK(is_connected(g));
                CHECK(aspl(g) == doctest::Approx(oracles::aspl(g)).epsilon(1e-12));
                CHECK(is_bipartite(g) == oracles::bipartite(g));
                CHECK(aspl(g) >= 1.0);
                if (k == n - 1) CHECK(aspl(g) == doctest::Approx(1.0));
            }
        }
    }
}

TEST_CASE("edge list file round trip") {
    const char* path = "tmp_roundtrip.graph";
    RegularGraph g = ring_lattice(5, 2);
    write_graph(g, path);
    RegularGraph back = read_graph(path);
    CHECK(back.node_count() == 5);
    CHECK(back.degree() == 2);
    CHECK(back.edges() == g.edges());
    std::remove(path);
}

TEST_CASE("read_graph rejects malformed and inconsistent files") {
    auto write_file = [](const char* path, const char* body) {
        std::ofstream out(path);
        out << body;
    };

    write_file("tmp_dup.graph", "3 2\n0 1\n0 1\n1 2\n");
    CHECK(kind_of([] { read_graph("tmp_dup.graph"); }) == ErrorKind::InvariantViolation);

    write_file("tmp_degree.graph", "4 2\n0 1\n1 2\n2 3\n");
    CHECK(kind_of([] { read_graph("tmp_degree.graph"); }) == ErrorKind::InvariantViolation);

    write_file("tmp_parse.graph", "3 2\n0 one\n");
    CHECK(kind_of([] { read_graph("tmp_parse.graph"); }) == ErrorKind::ParseError);

    write_file("tmp_range.graph", "3 2\n0 7\n");
    CHECK(kind_of([] { read_graph("tmp_range.graph"); }) == ErrorKind::ParseError);

    write_file("tmp_comment.graph", "# cycle\n3 2\n0 1\n0 2\n1 2 # last\n");
    CHECK(read_graph("tmp_comment.graph").edges().size() == 3);

    CHECK(kind_of([] { read_graph("tmp_missing_file.graph"); }) == ErrorKind::IoError);

    for (const char* p : {"tmp_dup.graph", "tmp_degree.graph", "tmp_parse.graph",
                          "tmp_range.graph", "tmp_comment.graph"})
        std::remove(p);
}
