#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphprune/graph.hpp"
#include "graphprune/matrix.hpp"

namespace graphprune {

enum class Activation { Identity, LeakyRelu };

// Equal-width MLP whose weight matrices are masked by a block topology: unit
// group j of layer t+1 reads only the groups adjacent to node j. No biases.
// With Identity activation and weights bounded away from zero, a parameter
// has a nonzero gradient exactly when a masked path connects it to the loss,
// which is what makes this the ground truth for the walk-set metrics.
struct TinyMLP {
    int n = 0;      // groups per layer
    int s = 1;      // units per group
    int layers = 2; // layer count, so layers-1 weight matrices
    Activation activation = Activation::Identity;
    double leaky_alpha = 0.1;
    std::vector<std::vector<int>> block_neighbors; // sorted, self included when dense
    std::vector<Matrix> weights;                   // width x width each

    int width() const { return n * s; }
    std::int64_t surviving_weights() const;
};

TinyMLP build_mlp(const RegularGraph& g, int layers, int group_size, std::uint64_t seed,
                  Activation activation = Activation::Identity);

// Dense mapping: every group reads every group, self included.
TinyMLP build_dense_mlp(int n, int layers, int group_size, std::uint64_t seed,
                        Activation activation = Activation::Identity);

// Activations per layer; [0] is the input itself.
std::vector<std::vector<double>> forward(const TinyMLP& m, const std::vector<double>& x);

// Analytic gradients of loss = sum of output group j's units for a given
// input; works for both activations. weight_grads are zero outside allowed
// blocks; deltas[t] is the loss gradient of layer t's activations.
struct LossBackprop {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> deltas;
};

LossBackprop backprop_loss(const TinyMLP& m, const std::vector<double>& x, int output_group);

struct GradReachReport {
    int output_group = 0;
    std::int64_t reached_params = 0;   // surviving weights with nonzero gradient
    std::optional<int> gr_observed;    // first backward depth covering a full layer
};

// Analytic backprop of loss = sum of output group j, on an all-ones input.
// Requires Identity activation (oracle mode).
GradReachReport grad_reach_count(const TinyMLP& m, int output_group);

// Gaussian blobs for the training demo; deterministic per seed.
struct BlobsConfig {
    int classes = 2;
    int dims = 2;
    int points = 200;
    std::uint64_t seed = 0;
};

BlobsConfig load_blobs_config(const std::string& path); // {"classes","dims","points","seed"}

struct Dataset {
    Matrix x;           // points x dims
    std::vector<int> y; // class labels
};

Dataset make_blobs(const BlobsConfig& cfg);

struct EpochRow {
    int epoch = 0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainDemoResult {
    std::vector<EpochRow> trace;
    TinyMLP trunk;               // trained masked trunk
    double max_pruned_abs = 0.0; // largest |pruned weight| seen after any step
};

// Dense input/output heads around a LeakyRelu masked trunk, minibatch SGD
// with a fixed step, softmax cross-entropy. Pruned trunk weights are never
// updated. Qualitative demo only.
TrainDemoResult train_demo(const RegularGraph& g, const Dataset& data, int epochs,
                           std::uint64_t seed, int trunk_layers = 4, int group_size = 1);

// Same demo with the dense (unpruned) mapping as the trunk.
TrainDemoResult train_demo_dense(int n, const Dataset& data, int epochs, std::uint64_t seed,
                                 int trunk_layers = 4, int group_size = 1);

// CSV: "epoch,train_acc,val_acc"
void write_accuracy_trace(const std::vector<EpochRow>& trace, const std::string& path);

} // namespace graphprune
