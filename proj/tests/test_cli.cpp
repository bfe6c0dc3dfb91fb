#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "graphprune/graph.hpp"

using namespace graphprune;
using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GRAPHPRUNE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult r;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kModels = GRAPHPRUNE_MODELS_DIR;

} // namespace

TEST_CASE("gen writes a graph and reports the keep ratio") {
    CmdResult r = run_cli("gen --nodes 64 --degree 4 --kind ring -o tmp_cli_ring.graph");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["aspl"].get<double>() == doctest::Approx(528.0 / 63.0));
    CHECK(j["keep_ratio_percent"].get<double>() == doctest::Approx(6.25));

    CmdResult again = run_cli("gen --nodes 64 --degree 4 --kind ring -o tmp_cli_ring2.graph");
    CHECK(slurp("tmp_cli_ring.graph") == slurp("tmp_cli_ring2.graph"));

    CmdResult rnd1 = run_cli("--seed 5 gen --nodes 16 --degree 3 --kind random -o tmp_cli_r1.graph");
    CmdResult rnd2 = run_cli("--seed 5 gen --nodes 16 --degree 3 --kind random -o tmp_cli_r2.graph");
    CHECK(rnd1.exit_code == 0);
    CHECK(slurp("tmp_cli_r1.graph") == slurp("tmp_cli_r2.graph"));

    CHECK(run_cli("gen --nodes 6 --degree 3 --kind ring -o tmp_cli_odd.graph").exit_code == 2);
    CHECK(run_cli("gen --degree 4 --kind ring -o tmp_cli_x.graph").exit_code == 1);
    CHECK(run_cli("gen --nodes 8 --degree 2 --kind hexagonal -o tmp_cli_x.graph").exit_code == 1);

    for (const char* p : {"tmp_cli_ring.graph", "tmp_cli_ring2.graph", "tmp_cli_r1.graph",
                          "tmp_cli_r2.graph"})
        std::remove(p);
}

TEST_CASE("search subcommand") {
    write_graph(ring_lattice(16, 4), "tmp_cli_in.graph");
    CmdResult r = run_cli("--seed 3 search -i tmp_cli_in.graph --attempts 200 "
                          "-o tmp_cli_out.graph --trace tmp_cli_trace.csv");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["final_aspl"].get<double>() <= j["initial_aspl"].get<double>());
    CHECK(j["attempts"] == 200);

    RegularGraph out = read_graph("tmp_cli_out.graph");
    CHECK(out.degree() == 4);
    CHECK(is_connected(out));

    std::ifstream trace("tmp_cli_trace.csv");
    std::string line;
    int rows = -1; // header
    while (std::getline(trace, line)) ++rows;
    CHECK(rows == 200);

    CHECK(run_cli("search -i tmp_cli_in.graph --attempts 0 -o tmp_cli_out.graph").exit_code == 1);
    CHECK(run_cli("search -i tmp_cli_nofile.graph --attempts 5 -o tmp_cli_out.graph").exit_code ==
          3);

    {
        std::ofstream bad("tmp_cli_disconnected.graph");
        bad << "6 2\n0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n";
    }
    CHECK(run_cli("search -i tmp_cli_disconnected.graph --attempts 5 -o tmp_cli_out.graph")
              .exit_code == 2);

    {
        std::ofstream bad("tmp_cli_corrupt.graph");
        bad << "4 2\n0 1\n0 1\n2 3\n2 3\n";
    }
    CHECK(run_cli("metrics -i tmp_cli_corrupt.graph").exit_code == 2);

    for (const char* p : {"tmp_cli_in.graph", "tmp_cli_out.graph", "tmp_cli_trace.csv",
                          "tmp_cli_disconnected.graph", "tmp_cli_corrupt.graph"})
        std::remove(p);
}

TEST_CASE("metrics subcommand") {
    RegularGraph k4(4, 3, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    write_graph(k4, "tmp_cli_k4.graph");
    CmdResult r = run_cli("metrics -i tmp_cli_k4.graph --layers 3");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["aspl"].get<double>() == doctest::Approx(1.0));
    CHECK(j["gr"].get<double>() == doctest::Approx(2.0));

    write_graph(ring_lattice(4, 2), "tmp_cli_c4.graph");
    CmdResult c4 = run_cli("metrics -i tmp_cli_c4.graph");
    CHECK(c4.exit_code == 0);
    CHECK(json::parse(c4.out)["gr"] == "inf");

    std::remove("tmp_cli_k4.graph");
    std::remove("tmp_cli_c4.graph");
}

TEST_CASE("mask subcommand") {
    write_graph(ring_lattice(64, 16), "tmp_cli_g16.graph");
    CmdResult r = run_cli("mask -i tmp_cli_g16.graph --model " + kModels +
                          "/vgg16_cifar.json -o tmp_cli_mask.json");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(j["params_reduction"].get<double>() - 75.00) <= 0.5);
    json mask = json::parse(slurp("tmp_cli_mask.json"));
    CHECK(mask["schema_version"] == 1);
    CHECK(mask["k"] == 16);

    CmdResult dense = run_cli("mask --dense --nodes 64 --model " + kModels +
                              "/vgg16_cifar.json -o tmp_cli_dense.json");
    CHECK(dense.exit_code == 0);
    CHECK(json::parse(dense.out)["params_reduction"].get<double>() == doctest::Approx(0.0));

    // a 32-wide prunable layer cannot host 64 groups
    {
        std::ofstream out("tmp_cli_narrow.json");
        out << R"({"name":"narrow","layers":[
            {"name":"a","kind":"fc","in":32,"out":32,"prunable":true}]})";
    }
    CHECK(run_cli("mask -i tmp_cli_g16.graph --model tmp_cli_narrow.json -o tmp_cli_m2.json")
              .exit_code == 2);

    for (const char* p : {"tmp_cli_g16.graph", "tmp_cli_mask.json", "tmp_cli_dense.json",
                          "tmp_cli_narrow.json"})
        std::remove(p);
}

TEST_CASE("verify subcommand") {
    RegularGraph k4(4, 3, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    write_graph(k4, "tmp_cli_vk4.graph");
    CmdResult r = run_cli("verify -i tmp_cli_vk4.graph --layers 3");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["aopu_match"] == true);
    CHECK(j["gr_match"] == true);
    CHECK(j["gr_graph"].get<double>() == doctest::Approx(2.0));
    CHECK(j["aopu_graph"].get<double>() == j["aopu_gradient"].get<double>());

    write_graph(ring_lattice(4, 2), "tmp_cli_vc4.graph");
    CHECK(run_cli("verify -i tmp_cli_vc4.graph").exit_code == 2);

    std::remove("tmp_cli_vk4.graph");
    std::remove("tmp_cli_vc4.graph");
}

TEST_CASE("bench subcommand") {
    CmdResult r = run_cli("bench --nodes 16 --degree 4 --group-size 4 --batch 8 --repeats 3 "
                          "--self-check");
    CHECK(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["flops_ratio"].get<double>() == doctest::Approx(0.25));
    CHECK(j["threads"] == 1);
    for (const char* key : {"n", "k", "s", "batch", "t_naive_ms", "t_regular_ms"})
        CHECK(j.contains(key));

    CHECK(run_cli("bench --nodes 16 --degree 4 --repeats 0").exit_code == 1);
}
