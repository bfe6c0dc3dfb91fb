#include "graphprune/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "graphprune/errors.hpp"

namespace graphprune {

namespace {

TinyMLP build_from_topology(int n, int group_size, int layers, std::uint64_t seed,
                            Activation activation,
                            std::vector<std::vector<int>> block_neighbors) {
    if (layers < 2) raise(ErrorKind::InvariantViolation, "need at least 2 layers");
    if (group_size < 1) raise(ErrorKind::InvariantViolation, "group size must be >= 1");
    TinyMLP m;
    m.n = n;
    m.s = group_size;
    m.layers = layers;
    m.activation = activation;
    m.block_neighbors = std::move(block_neighbors);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.1, 1.0); // bounded away from zero
    const int width = m.width();
    m.weights.reserve(layers - 1);
    for (int t = 0; t < layers - 1; ++t) {
        Matrix w(width, width);
        for (int j = 0; j < n; ++j)
            for (int v : m.block_neighbors[j])
                for (int o = 0; o < m.s; ++o)
                    for (int i = 0; i < m.s; ++i) w(j * m.s + o, v * m.s + i) = unit(rng);
        m.weights.push_back(std::move(w));
    }
    return m;
}

double activate(double z, Activation a, double alpha) {
    if (a == Activation::Identity) return z;
    return z > 0.0 ? z : alpha * z;
}

} // namespace

std::int64_t TinyMLP::surviving_weights() const {
    std::int64_t blocks = 0;
    for (const auto& row : block_neighbors) blocks += static_cast<std::int64_t>(row.size());
    return blocks * s * s * (layers - 1);
}

TinyMLP build_mlp(const RegularGraph& g, int layers, int group_size, std::uint64_t seed,
                  Activation activation) {
    std::vector<std::vector<int>> neighbors;
    neighbors.reserve(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) neighbors.push_back(g.neighbors(v));
    return build_from_topology(g.node_count(), group_size, layers, seed, activation,
                               std::move(neighbors));
}

TinyMLP build_dense_mlp(int n, int layers, int group_size, std::uint64_t seed,
                        Activation activation) {
    std::vector<std::vector<int>> neighbors(n);
    for (int j = 0; j < n; ++j) {
        neighbors[j].resize(n);
        std::iota(neighbors[j].begin(), neighbors[j].end(), 0);
    }
    return build_from_topology(n, group_size, layers, seed, activation, std::move(neighbors));
}

std::vector<std::vector<double>> forward(const TinyMLP& m, const std::vector<double>& x) {
    const int width = m.width();
    if (static_cast<int>(x.size()) != width)
        raise(ErrorKind::ShapeMismatch, "input width must be n * s");
    std::vector<std::vector<double>> acts;
    acts.reserve(m.layers);
    acts.push_back(x);
    for (const auto& w : m.weights) {
        std::vector<double> next(width, 0.0);
        for (int o = 0; o < width; ++o) {
            const double* wr = w.row(o);
            double acc = 0.0;
            for (int i = 0; i < width; ++i) acc += wr[i] * acts.back()[i];
            next[o] = activate(acc, m.activation, m.leaky_alpha);
        }
        acts.push_back(std::move(next));
    }
    return acts;
}

LossBackprop backprop_loss(const TinyMLP& m, const std::vector<double>& x, int output_group) {
    if (output_group < 0 || output_group >= m.n)
        raise(ErrorKind::ShapeMismatch, "output group out of range");
    const int width = m.width();
    if (static_cast<int>(x.size()) != width)
        raise(ErrorKind::ShapeMismatch, "input width must be n * s");

    // forward, keeping pre-activations for the LeakyRelu derivative
    std::vector<std::vector<double>> acts{x};
    std::vector<std::vector<double>> pre;
    for (const auto& w : m.weights) {
        std::vector<double> z(width, 0.0);
        for (int o = 0; o < width; ++o) {
            const double* wr = w.row(o);
            double acc = 0.0;
            for (int i = 0; i < width; ++i) acc += wr[i] * acts.back()[i];
            z[o] = acc;
        }
        pre.push_back(z);
        for (auto& v : z) v = activate(v, m.activation, m.leaky_alpha);
        acts.push_back(std::move(z));
    }

    LossBackprop bp;
    bp.deltas.assign(m.layers, std::vector<double>(width, 0.0));
    for (int o = 0; o < m.s; ++o) bp.deltas[m.layers - 1][output_group * m.s + o] = 1.0;
    for (int t = m.layers - 2; t >= 0; --t) {
        const Matrix& w = m.weights[t];
        // gradient w.r.t. pre-activation of layer t+1
        std::vector<double> dz(width);
        for (int o = 0; o < width; ++o) {
            double grad_act = 1.0;
            if (m.activation == Activation::LeakyRelu)
                grad_act = pre[t][o] > 0.0 ? 1.0 : m.leaky_alpha;
            dz[o] = bp.deltas[t + 1][o] * grad_act;
        }
        for (int o = 0; o < width; ++o) {
            if (dz[o] == 0.0) continue;
            const double* wr = w.row(o);
            for (int i = 0; i < width; ++i) bp.deltas[t][i] += dz[o] * wr[i];
        }
        Matrix grad(width, width);
        for (int j = 0; j < m.n; ++j)
            for (int v : m.block_neighbors[j])
                for (int o = 0; o < m.s; ++o) {
                    const int r = j * m.s + o;
                    if (dz[r] == 0.0) continue;
                    for (int i = 0; i < m.s; ++i) {
                        const int c = v * m.s + i;
                        grad(r, c) = dz[r] * acts[t][c];
                    }
                }
        bp.weight_grads.insert(bp.weight_grads.begin(), std::move(grad));
    }
    return bp;
}

GradReachReport grad_reach_count(const TinyMLP& m, int output_group) {
    if (m.activation != Activation::Identity)
        raise(ErrorKind::NotOracleMode, "gradient counting requires the identity activation");

    LossBackprop bp = backprop_loss(m, std::vector<double>(m.width(), 1.0), output_group);

    GradReachReport report;
    report.output_group = output_group;
    for (int t = 0; t < m.layers - 1; ++t) {
        const Matrix& grad = bp.weight_grads[t];
        for (int j = 0; j < m.n; ++j)
            for (int v : m.block_neighbors[j])
                for (int o = 0; o < m.s; ++o)
                    for (int i = 0; i < m.s; ++i)
                        if (grad(j * m.s + o, v * m.s + i) != 0.0) ++report.reached_params;
    }
    for (int d = 1; d <= m.layers - 1; ++d) {
        const auto& delta = bp.deltas[m.layers - 1 - d];
        if (std::all_of(delta.begin(), delta.end(), [](double v) { return v != 0.0; })) {
            report.gr_observed = d;
            break;
        }
    }
    return report;
}

BlobsConfig load_blobs_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
        BlobsConfig cfg;
        cfg.classes = j.at("classes").get<int>();
        cfg.dims = j.at("dims").get<int>();
        cfg.points = j.at("points").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
}

Dataset make_blobs(const BlobsConfig& cfg) {
    if (cfg.classes < 2 || cfg.dims < 1 || cfg.points < cfg.classes)
        raise(ErrorKind::InvariantViolation, "blobs need >= 2 classes and points >= classes");
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    // centers on +-3.5 e_axis while those last, random beyond
    std::vector<std::vector<double>> centers(cfg.classes, std::vector<double>(cfg.dims, 0.0));
    for (int c = 0; c < cfg.classes; ++c) {
        if (c < 2 * cfg.dims) {
            centers[c][c % cfg.dims] = (c < cfg.dims) ? 3.5 : -3.5;
        } else {
            for (int d = 0; d < cfg.dims; ++d) centers[c][d] = 3.5 * noise(rng);
        }
    }

    Dataset data;
    data.x = Matrix(cfg.points, cfg.dims);
    data.y.resize(cfg.points);
    for (int p = 0; p < cfg.points; ++p) {
        int c = p % cfg.classes;
        data.y[p] = c;
        for (int d = 0; d < cfg.dims; ++d) data.x(p, d) = centers[c][d] + noise(rng);
    }
    return data;
}

namespace {

struct DemoNet {
    Matrix w_in;  // width x dims
    std::vector<double> b_in;
    TinyMLP trunk;
    Matrix w_out; // classes x width
    std::vector<double> b_out;
    double alpha = 0.1;

    int dims() const { return w_in.cols; }
    int classes() const { return w_out.rows; }
};

double lrelu(double z, double a) { return z > 0.0 ? z : a * z; }
double lrelu_grad(double z, double a) { return z > 0.0 ? 1.0 : a; }

} // namespace

TrainDemoResult train_demo_with_trunk(TinyMLP trunk, const Dataset& data, int epochs,
                                      std::uint64_t seed) {
    if (epochs < 1) raise(ErrorKind::InvariantViolation, "epochs must be >= 1");
    const int points = data.x.rows;
    const int dims = data.x.cols;
    const int classes = 1 + *std::max_element(data.y.begin(), data.y.end());
    const int trunk_layers = trunk.layers;

    DemoNet net;
    net.trunk = std::move(trunk);
    const int width = net.trunk.width();
    net.alpha = net.trunk.leaky_alpha;

    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> init(0.0, 1.0);
    net.w_in = Matrix(width, dims);
    for (auto& v : net.w_in.data) v = init(rng) / std::sqrt(dims);
    net.b_in.assign(width, 0.0);
    net.w_out = Matrix(classes, width);
    for (auto& v : net.w_out.data) v = init(rng) / std::sqrt(width);
    net.b_out.assign(classes, 0.0);
    // trunk init rescaled: positive [0.1,1] rows of uniform in-degree blow up
    const double row_blocks = static_cast<double>(net.trunk.block_neighbors[0].size());
    for (auto& w : net.trunk.weights)
        for (auto& v : w.data) v = v * 2.0 / (row_blocks * net.trunk.s);

    const int val_count = std::max(1, points / 5);
    const int train_count = points - val_count;
    std::vector<int> order(points);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng); // fixed split, reshuffled per epoch below

    const double lr = 0.05;
    const int batch_size = 16;
    const int trunk_mats = trunk_layers - 1;

    auto predict = [&](int row, std::vector<std::vector<double>>* z_layers,
                       std::vector<std::vector<double>>* a_layers) {
        std::vector<double> a(width);
        std::vector<double> z(width);
        for (int o = 0; o < width; ++o) {
            double acc = net.b_in[o];
            for (int d = 0; d < dims; ++d) acc += net.w_in(o, d) * data.x(row, d);
            z[o] = acc;
            a[o] = lrelu(acc, net.alpha);
        }
        if (z_layers) z_layers->push_back(z), a_layers->push_back(a);
        for (int t = 0; t < trunk_mats; ++t) {
            std::vector<double> zn(width);
            for (int o = 0; o < width; ++o) {
                const double* wr = net.trunk.weights[t].row(o);
                double acc = 0.0;
                for (int i = 0; i < width; ++i) acc += wr[i] * a[i];
                zn[o] = acc;
            }
            for (int o = 0; o < width; ++o) a[o] = lrelu(zn[o], net.alpha);
            if (z_layers) z_layers->push_back(zn), a_layers->push_back(a);
        }
        std::vector<double> logits(classes);
        for (int c = 0; c < classes; ++c) {
            double acc = net.b_out[c];
            for (int i = 0; i < width; ++i) acc += net.w_out(c, i) * a[i];
            logits[c] = acc;
        }
        return logits;
    };

    auto accuracy = [&](int lo, int hi) {
        int hit = 0;
        for (int idx = lo; idx < hi; ++idx) {
            auto logits = predict(order[idx], nullptr, nullptr);
            int best = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                                        logits.begin());
            hit += (best == data.y[order[idx]]);
        }
        return static_cast<double>(hit) / (hi - lo);
    };

    TrainDemoResult result;
    std::vector<int> train_order(order.begin(), order.begin() + train_count);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        std::shuffle(train_order.begin(), train_order.end(), rng);
        for (int start = 0; start < train_count; start += batch_size) {
            const int stop = std::min(train_count, start + batch_size);
            Matrix g_w_in(width, dims);
            std::vector<double> g_b_in(width, 0.0);
            std::vector<Matrix> g_trunk;
            for (int t = 0; t < trunk_mats; ++t) g_trunk.emplace_back(width, width);
            Matrix g_w_out(classes, width);
            std::vector<double> g_b_out(classes, 0.0);

            for (int idx = start; idx < stop; ++idx) {
                const int row = train_order[idx];
                std::vector<std::vector<double>> zs, as;
                auto logits = predict(row, &zs, &as);
                // softmax cross-entropy
                double mx = *std::max_element(logits.begin(), logits.end());
                double sum = 0.0;
                std::vector<double> p(classes);
                for (int c = 0; c < classes; ++c) sum += (p[c] = std::exp(logits[c] - mx));
                for (int c = 0; c < classes; ++c) p[c] /= sum;
                p[data.y[row]] -= 1.0;

                for (int c = 0; c < classes; ++c) {
                    g_b_out[c] += p[c];
                    for (int i = 0; i < width; ++i) g_w_out(c, i) += p[c] * as.back()[i];
                }
                std::vector<double> delta(width, 0.0);
                for (int c = 0; c < classes; ++c)
                    for (int i = 0; i < width; ++i) delta[i] += net.w_out(c, i) * p[c];
                for (int i = 0; i < width; ++i)
                    delta[i] *= lrelu_grad(zs.back()[i], net.alpha);

                for (int t = trunk_mats - 1; t >= 0; --t) {
                    const auto& a_prev = as[t];
                    auto& gw = g_trunk[t];
                    for (int j = 0; j < net.trunk.n; ++j)
                        for (int v : net.trunk.block_neighbors[j])
                            for (int o = 0; o < net.trunk.s; ++o) {
                                const int r = j * net.trunk.s + o;
                                if (delta[r] == 0.0) continue;
                                for (int i = 0; i < net.trunk.s; ++i) {
                                    const int cidx = v * net.trunk.s + i;
                                    gw(r, cidx) += delta[r] * a_prev[cidx];
                                }
                            }
                    std::vector<double> prev(width, 0.0);
                    for (int o = 0; o < width; ++o) {
                        if (delta[o] == 0.0) continue;
                        const double* wr = net.trunk.weights[t].row(o);
                        for (int i = 0; i < width; ++i) prev[i] += delta[o] * wr[i];
                    }
                    for (int i = 0; i < width; ++i)
                        prev[i] *= lrelu_grad(zs[t][i], net.alpha);
                    delta = std::move(prev);
                }
                for (int o = 0; o < width; ++o) {
                    g_b_in[o] += delta[o];
                    for (int d = 0; d < dims; ++d) g_w_in(o, d) += delta[o] * data.x(row, d);
                }
            }

            const double step = lr / (stop - start);
            for (std::size_t i = 0; i < net.w_in.data.size(); ++i)
                net.w_in.data[i] -= step * g_w_in.data[i];
            for (int o = 0; o < width; ++o) net.b_in[o] -= step * g_b_in[o];
            for (int t = 0; t < trunk_mats; ++t) {
                auto& w = net.trunk.weights[t];
                for (int j = 0; j < net.trunk.n; ++j)
                    for (int v : net.trunk.block_neighbors[j])
                        for (int o = 0; o < net.trunk.s; ++o)
                            for (int i = 0; i < net.trunk.s; ++i) {
                                const int r = j * net.trunk.s + o;
                                const int cidx = v * net.trunk.s + i;
                                w(r, cidx) -= step * g_trunk[t](r, cidx);
                            }
            }
            for (std::size_t i = 0; i < net.w_out.data.size(); ++i)
                net.w_out.data[i] -= step * g_w_out.data[i];
            for (int c = 0; c < classes; ++c) net.b_out[c] -= step * g_b_out[c];

            // pruned entries must stay untouched
            double worst = 0.0;
            for (int t = 0; t < trunk_mats; ++t) {
                const auto& w = net.trunk.weights[t];
                for (int j = 0; j < net.trunk.n; ++j) {
                    std::size_t nb = 0;
                    const auto& row_nb = net.trunk.block_neighbors[j];
                    for (int v = 0; v < net.trunk.n; ++v) {
                        if (nb < row_nb.size() && row_nb[nb] == v) {
                            ++nb;
                            continue;
                        }
                        for (int o = 0; o < net.trunk.s; ++o)
                            for (int i = 0; i < net.trunk.s; ++i)
                                worst = std::max(worst,
                                                 std::abs(w(j * net.trunk.s + o,
                                                            v * net.trunk.s + i)));
                    }
                }
            }
            result.max_pruned_abs = std::max(result.max_pruned_abs, worst);
        }

        EpochRow rowstat;
        rowstat.epoch = epoch;
        rowstat.train_acc = accuracy(0, train_count);
        rowstat.val_acc = accuracy(train_count, points);
        result.trace.push_back(rowstat);
    }
    result.trunk = net.trunk;
    return result;
}

TrainDemoResult train_demo(const RegularGraph& g, const Dataset& data, int epochs,
                           std::uint64_t seed, int trunk_layers, int group_size) {
    return train_demo_with_trunk(build_mlp(g, trunk_layers, group_size, seed,
                                           Activation::LeakyRelu),
                                 data, epochs, seed);
}

TrainDemoResult train_demo_dense(int n, const Dataset& data, int epochs, std::uint64_t seed,
                                 int trunk_layers, int group_size) {
    return train_demo_with_trunk(build_dense_mlp(n, trunk_layers, group_size, seed,
                                                 Activation::LeakyRelu),
                                 data, epochs, seed);
}

void write_accuracy_trace(const std::vector<EpochRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << "epoch,train_acc,val_acc\n";
    char buf[64];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof buf, "%d,%.4f,%.4f", row.epoch, row.train_acc, row.val_acc);
        out << buf << '\n';
    }
    if (!out) raise(ErrorKind::IoError, "write failed on " + path);
}

} // namespace graphprune
