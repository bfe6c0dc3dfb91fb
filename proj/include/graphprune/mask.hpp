#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphprune/graph.hpp"

namespace graphprune {

enum class LayerKind { FullyConnected, Conv };

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::FullyConnected;
    int in_width = 1;       // neurons or channels feeding the layer
    int out_width = 1;      // neurons or channels produced
    int kernel_elems = 1;   // spatial kernel element count, 1 for FC
    bool prunable = true;
    bool bias = true;       // biases are never pruned when present
};

struct ModelSpec {
    std::string name;
    std::vector<LayerSpec> layers;
};

// Model JSON also carries per-layer output spatial size (H*W, 1 for FC),
// which reduction_stats needs for conv FLOPs.
struct ModelFile {
    ModelSpec model;
    std::vector<std::int64_t> spatial;
};

ModelFile load_model_spec(const std::string& path);

// Split `width` units into `groups` contiguous parts: equal when divisible,
// otherwise equal leading groups with a strictly smaller last group where
// that is satisfiable, else a ceil/floor split.
struct Partition {
    int width = 0;
    int groups = 0;
    std::vector<int> bounds; // groups+1 ascending cuts covering [0, width)

    int size(int group) const { return bounds[group + 1] - bounds[group]; }
};

Partition partition(int width, int groups);

// Block-level mask of one layer: output group j may read input group k iff
// v_k is a graph neighbor of v_j. Non-prunable layers are all-allowed.
struct BlockMask {
    bool all_allowed = false;
    Partition in_parts;
    Partition out_parts;
    std::vector<std::vector<int>> allowed; // per out group, sorted in-group ids

    bool block(int out_group, int in_group) const;
};

BlockMask layer_mask(const RegularGraph& g, const LayerSpec& layer);

// Per-layer masks for a whole model, one graph reused for every prunable
// layer. The dense mapping (complete graph with self-loops) is the identity
// pruning used as a baseline.
struct MaskSet {
    int n = 0;
    int k = 0;
    bool dense_mapping = false;
    std::vector<Edge> edges;                      // self-pairs included when dense
    std::vector<std::vector<int>> block_neighbors; // sorted, includes self when dense

    struct Layer {
        std::string name;
        LayerKind kind = LayerKind::FullyConnected;
        int in_width = 1;
        int out_width = 1;
        int kernel_elems = 1;
        bool prunable = true;
        Partition in_parts;
        Partition out_parts;
    };
    std::vector<Layer> layers;

    std::vector<std::string> dense_layer_names() const;
    bool block_allowed(int layer, int out_group, int in_group) const;

    // Unit-level boolean mask, out_width x in_width row-major.
    std::vector<std::uint8_t> unit_mask(int layer) const;
};

MaskSet model_masks(const RegularGraph& g, const ModelSpec& model);
MaskSet dense_model_masks(int n, const ModelSpec& model);

struct ReductionStats {
    std::int64_t params_orig = 0;
    std::int64_t params_pruned = 0; // parameter count of the pruned model
    std::int64_t flops_orig = 0;
    std::int64_t flops_pruned = 0;
    double params_reduction = 0.0; // percent
    double flops_reduction = 0.0;  // percent
};

// spatial: output H*W per layer (use 1 for FC layers). Biases are counted in
// parameter totals and never pruned; FLOPs are 2 per multiply-accumulate,
// weights only.
ReductionStats reduction_stats(const MaskSet& masks, const ModelSpec& model,
                               const std::vector<std::int64_t>& spatial);

std::string reduction_stats_json(const ReductionStats& s);

// JSON schema v1; unit-level masks are derived on read, never stored.
void write_maskset(const MaskSet& m, const std::string& path);
MaskSet read_maskset(const std::string& path);

} // namespace graphprune
