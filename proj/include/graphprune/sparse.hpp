#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphprune/graph.hpp"
#include "graphprune/matrix.hpp"

namespace graphprune {

// Which input groups each output group reads, in fixed sorted order so the
// accumulation order is deterministic. Derived from the topology alone.
struct GatherPlan {
    int n = 0;
    int s_in = 0;
    int s_out = 0;
    std::vector<std::vector<int>> gather; // per out group, sorted input group ids

    // multiply-adds one regular_matmul executes, counted over the plan
    std::int64_t mac_count(int batch) const;
};

GatherPlan make_gather_plan(const RegularGraph& g, int s_in, int s_out);

// Dense-equivalent plan: every output group gathers all n input groups.
GatherPlan make_full_plan(int n, int s_in, int s_out);

// The surviving blocks of a regular-sparse weight matrix, packed dense. For
// output group j, blocks[j] holds its gathered s_out x s_in blocks in the
// plan's neighbor order.
struct BlockWeights {
    int n = 0;
    int s_in = 0;
    int s_out = 0;
    std::vector<std::vector<int>> neighbors; // sorted, same as the plan
    std::vector<Matrix> blocks_by_group;     // s_out x (deg * s_in) packed per group

    Matrix decode() const; // expand back to the (n*s_out) x (n*s_in) matrix
};

// Pack a mask-conforming dense matrix. Throws NonconformingSparsity when a
// nonzero sits outside an allowed block.
BlockWeights encode(const Matrix& w, const RegularGraph& g, int s_in, int s_out);

// Pack without the conformance check, reading only allowed blocks; utility
// for building packed weights straight from a plan.
BlockWeights pack_blocks(const Matrix& w, const GatherPlan& plan);

// Gather-dense product: x is batch x (n*s_in), result batch x (n*s_out).
Matrix regular_matmul(const BlockWeights& bw, const GatherPlan& plan, const Matrix& x);

// Reference path: elementwise mask times weights, then a full dense product.
Matrix naive_masked_matmul(const Matrix& w, const std::vector<std::uint8_t>& mask,
                           const Matrix& x);

struct BenchReport {
    int n = 0;
    int k = 0;
    int s = 0;
    int batch = 0;
    int repeats = 0;
    int threads = 1;
    double t_naive_ms = 0.0;   // median over repeats
    double t_regular_ms = 0.0; // median over repeats
    double flops_ratio = 0.0;  // k / n
    double max_abs_diff = 0.0; // regular vs naive on the benched operands
    double max_abs_out = 0.0;  // output magnitude, for relative comparison
};

// k == n benchmarks the dense-equivalent gather (all groups, self included).
BenchReport bench(int n, int k, int s, int batch, int repeats, std::uint64_t seed = 1,
                  int threads = 1);

std::string bench_report_json(const BenchReport& r);

} // namespace graphprune
