#include "graphprune/sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "graphprune/errors.hpp"

namespace graphprune {

namespace {

void check_group_sizes(int n, int s_in, int s_out) {
    if (n < 1 || s_in < 1 || s_out < 1)
        raise(ErrorKind::ShapeMismatch, "group counts and sizes must be positive");
}

// Run fn(first_row, last_row) over [0, rows) on `threads` workers.
template <class F>
void parallel_rows(int rows, int threads, F&& fn) {
    if (threads <= 1 || rows < 2 * threads) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk;
        int hi = std::min(rows, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace

std::int64_t GatherPlan::mac_count(int batch) const {
    std::int64_t blocks = 0;
    for (const auto& row : gather) blocks += static_cast<std::int64_t>(row.size());
    return blocks * s_in * s_out * batch;
}

GatherPlan make_gather_plan(const RegularGraph& g, int s_in, int s_out) {
    check_group_sizes(g.node_count(), s_in, s_out);
    GatherPlan plan;
    plan.n = g.node_count();
    plan.s_in = s_in;
    plan.s_out = s_out;
    plan.gather.reserve(plan.n);
    for (int j = 0; j < plan.n; ++j) plan.gather.push_back(g.neighbors(j));
    return plan;
}

GatherPlan make_full_plan(int n, int s_in, int s_out) {
    check_group_sizes(n, s_in, s_out);
    GatherPlan plan;
    plan.n = n;
    plan.s_in = s_in;
    plan.s_out = s_out;
    plan.gather.assign(n, {});
    for (int j = 0; j < n; ++j) {
        plan.gather[j].resize(n);
        for (int v = 0; v < n; ++v) plan.gather[j][v] = v;
    }
    return plan;
}

BlockWeights pack_blocks(const Matrix& w, const GatherPlan& plan) {
    if (w.rows != plan.n * plan.s_out || w.cols != plan.n * plan.s_in)
        raise(ErrorKind::ShapeMismatch, "weight matrix does not match the plan");
    BlockWeights bw;
    bw.n = plan.n;
    bw.s_in = plan.s_in;
    bw.s_out = plan.s_out;
    bw.neighbors = plan.gather;
    bw.blocks_by_group.reserve(plan.n);
    for (int j = 0; j < plan.n; ++j) {
        const auto& nb = plan.gather[j];
        Matrix packed(plan.s_out, static_cast<int>(nb.size()) * plan.s_in);
        for (int o = 0; o < plan.s_out; ++o) {
            const double* src = w.row(j * plan.s_out + o);
            double* dst = packed.row(o);
            for (std::size_t b = 0; b < nb.size(); ++b)
                for (int i = 0; i < plan.s_in; ++i)
                    dst[b * plan.s_in + i] = src[nb[b] * plan.s_in + i];
        }
        bw.blocks_by_group.push_back(std::move(packed));
    }
    return bw;
}

BlockWeights encode(const Matrix& w, const RegularGraph& g, int s_in, int s_out) {
    GatherPlan plan = make_gather_plan(g, s_in, s_out);
    if (w.rows != plan.n * s_out || w.cols != plan.n * s_in)
        raise(ErrorKind::ShapeMismatch, "weight matrix does not match n and group sizes");
    for (int j = 0; j < plan.n; ++j) {
        for (int v = 0; v < plan.n; ++v) {
            if (g.has_edge(j, v)) continue;
            for (int o = 0; o < s_out; ++o)
                for (int i = 0; i < s_in; ++i)
                    if (w(j * s_out + o, v * s_in + i) != 0.0)
                        raise(ErrorKind::NonconformingSparsity,
                              "nonzero weight in pruned block (" + std::to_string(j) + "," +
                                  std::to_string(v) + ")");
        }
    }
    return pack_blocks(w, plan);
}

Matrix BlockWeights::decode() const {
    Matrix w(n * s_out, n * s_in);
    for (int j = 0; j < n; ++j) {
        const auto& nb = neighbors[j];
        const Matrix& packed = blocks_by_group[j];
        for (int o = 0; o < s_out; ++o) {
            const double* src = packed.row(o);
            double* dst = w.row(j * s_out + o);
            for (std::size_t b = 0; b < nb.size(); ++b)
                for (int i = 0; i < s_in; ++i)
                    dst[nb[b] * s_in + i] = src[b * s_in + i];
        }
    }
    return w;
}

namespace {

void regular_matmul_rows(const BlockWeights& bw, const GatherPlan& plan, const Matrix& x,
                         Matrix& y, int row_lo, int row_hi) {
    const int s_in = plan.s_in;
    const int s_out = plan.s_out;
    std::vector<double> gathered;
    for (int b = row_lo; b < row_hi; ++b) {
        const double* xr = x.row(b);
        double* yr = y.row(b);
        for (int j = 0; j < plan.n; ++j) {
            const auto& nb = plan.gather[j];
            gathered.resize(nb.size() * static_cast<std::size_t>(s_in));
            for (std::size_t g = 0; g < nb.size(); ++g)
                std::copy_n(xr + nb[g] * s_in, s_in, gathered.data() + g * s_in);
            const Matrix& packed = bw.blocks_by_group[j];
            for (int o = 0; o < s_out; ++o) {
                const double* wr = packed.row(o);
                double acc = 0.0;
                for (std::size_t i = 0; i < gathered.size(); ++i) acc += wr[i] * gathered[i];
                yr[j * s_out + o] = acc;
            }
        }
    }
}

} // namespace

Matrix regular_matmul(const BlockWeights& bw, const GatherPlan& plan, const Matrix& x) {
    if (bw.n != plan.n || bw.s_in != plan.s_in || bw.s_out != plan.s_out)
        raise(ErrorKind::ShapeMismatch, "weights do not match the plan");
    if (x.cols != plan.n * plan.s_in)
        raise(ErrorKind::ShapeMismatch, "input width must be n * s_in");
    Matrix y(x.rows, plan.n * plan.s_out);
    regular_matmul_rows(bw, plan, x, y, 0, x.rows);
    return y;
}

Matrix naive_masked_matmul(const Matrix& w, const std::vector<std::uint8_t>& mask,
                           const Matrix& x) {
    if (mask.size() != w.data.size())
        raise(ErrorKind::ShapeMismatch, "mask must have one entry per weight");
    if (x.cols != w.cols) raise(ErrorKind::ShapeMismatch, "input width must match weights");
    Matrix masked(w.rows, w.cols);
    for (std::size_t i = 0; i < w.data.size(); ++i) masked.data[i] = w.data[i] * mask[i];
    Matrix y(x.rows, w.rows);
    for (int b = 0; b < x.rows; ++b) {
        const double* xr = x.row(b);
        double* yr = y.row(b);
        for (int o = 0; o < w.rows; ++o) {
            const double* wr = masked.row(o);
            double acc = 0.0;
            for (int i = 0; i < w.cols; ++i) acc += wr[i] * xr[i];
            yr[o] = acc;
        }
    }
    return y;
}

namespace {

double median_ms(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size() / 2;
    return samples.size() % 2 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
}

template <class F>
double time_ms(F&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

} // namespace

BenchReport bench(int n, int k, int s, int batch, int repeats, std::uint64_t seed, int threads) {
    if (n < 1 || k < 1 || s < 1 || batch < 1 || repeats < 1 || threads < 1)
        raise(ErrorKind::InvariantViolation, "bench parameters must be positive");
    if (k > n) raise(ErrorKind::InfeasibleDegree, "degree cannot exceed node count");

    GatherPlan plan;
    if (k == n) {
        plan = make_full_plan(n, s, s);
    } else {
        RegularGraph g = (k % 2 == 0) ? ring_lattice(n, k) : random_regular(n, k, seed);
        plan = make_gather_plan(g, s, s);
    }

    const int width = n * s;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix w(width, width);
    std::vector<std::uint8_t> mask(w.data.size(), 0);
    for (int j = 0; j < n; ++j)
        for (int v : plan.gather[j])
            for (int o = 0; o < s; ++o)
                for (int i = 0; i < s; ++i) {
                    w(j * s + o, v * s + i) = unit(rng);
                    mask[static_cast<std::size_t>(j * s + o) * width + v * s + i] = 1;
                }
    Matrix x(batch, width);
    for (auto& v : x.data) v = unit(rng);

    BlockWeights bw = pack_blocks(w, plan);

    auto run_naive = [&] {
        Matrix masked(w.rows, w.cols);
        for (std::size_t i = 0; i < w.data.size(); ++i) masked.data[i] = w.data[i] * mask[i];
        Matrix y(batch, width);
        parallel_rows(batch, threads, [&](int lo, int hi) {
            for (int b = lo; b < hi; ++b) {
                const double* xr = x.row(b);
                double* yr = y.row(b);
                for (int o = 0; o < width; ++o) {
                    const double* wr = masked.row(o);
                    double acc = 0.0;
                    for (int i = 0; i < width; ++i) acc += wr[i] * xr[i];
                    yr[o] = acc;
                }
            }
        });
        return y;
    };
    auto run_regular = [&] {
        Matrix y(batch, width);
        parallel_rows(batch, threads,
                      [&](int lo, int hi) { regular_matmul_rows(bw, plan, x, y, lo, hi); });
        return y;
    };

    Matrix y_naive = run_naive();
    Matrix y_regular = run_regular();
    double max_diff = 0.0;
    double max_out = 0.0;
    for (std::size_t i = 0; i < y_naive.data.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(y_naive.data[i] - y_regular.data[i]));
        max_out = std::max(max_out, std::abs(y_naive.data[i]));
    }

    std::vector<double> t_naive, t_regular;
    for (int r = 0; r < repeats; ++r) {
        t_naive.push_back(time_ms([&] { run_naive(); }));
        t_regular.push_back(time_ms([&] { run_regular(); }));
    }

    BenchReport report;
    report.n = n;
    report.k = k;
    report.s = s;
    report.batch = batch;
    report.repeats = repeats;
    report.threads = threads;
    report.t_naive_ms = median_ms(t_naive);
    report.t_regular_ms = median_ms(t_regular);
    report.flops_ratio = static_cast<double>(k) / n;
    report.max_abs_diff = max_diff;
    report.max_abs_out = max_out;
    return report;
}

std::string bench_report_json(const BenchReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["s"] = r.s;
    j["batch"] = r.batch;
    j["t_naive_ms"] = r.t_naive_ms;
    j["t_regular_ms"] = r.t_regular_ms;
    j["flops_ratio"] = r.flops_ratio;
    j["threads"] = r.threads;
    return j.dump();
}

} // namespace graphprune
