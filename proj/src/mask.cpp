#include "graphprune/mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "graphprune/errors.hpp"

namespace graphprune {

using nlohmann::json;

namespace {

void validate_layer(const LayerSpec& layer) {
    if (layer.in_width < 1 || layer.out_width < 1)
        raise(ErrorKind::InvariantViolation, "layer " + layer.name + ": widths must be >= 1");
    if (layer.kernel_elems < 1)
        raise(ErrorKind::InvariantViolation, "layer " + layer.name + ": kernel_elems must be >= 1");
    if (layer.kind == LayerKind::FullyConnected && layer.kernel_elems != 1)
        raise(ErrorKind::InvariantViolation,
              "layer " + layer.name + ": fc layers have kernel_elems = 1");
}

Partition trivial_partition(int width) {
    return Partition{width, 1, {0, width}};
}

json partition_bounds(const Partition& p) {
    return json(p.bounds);
}

} // namespace

ModelFile load_model_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
    ModelFile mf;
    try {
        mf.model.name = j.value("name", "");
        for (const auto& jl : j.at("layers")) {
            LayerSpec layer;
            layer.name = jl.at("name").get<std::string>();
            std::string kind = jl.at("kind").get<std::string>();
            if (kind == "fc")
                layer.kind = LayerKind::FullyConnected;
            else if (kind == "conv")
                layer.kind = LayerKind::Conv;
            else
                raise(ErrorKind::ParseError, path + ": unknown layer kind '" + kind + "'");
            layer.in_width = jl.at("in").get<int>();
            layer.out_width = jl.at("out").get<int>();
            layer.kernel_elems = jl.value("kernel_elems", 1);
            layer.prunable = jl.at("prunable").get<bool>();
            layer.bias = jl.value("bias", true);
            validate_layer(layer);
            mf.model.layers.push_back(std::move(layer));
            mf.spatial.push_back(jl.value("spatial", 1));
        }
    } catch (const json::exception& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (mf.model.layers.empty()) raise(ErrorKind::ParseError, path + ": no layers");
    return mf;
}

Partition partition(int width, int groups) {
    if (groups < 1) raise(ErrorKind::InvariantViolation, "group count must be >= 1");
    if (width < groups)
        raise(ErrorKind::TooFewUnits, "cannot split " + std::to_string(width) + " units into " +
                                          std::to_string(groups) + " groups");
    const int floor_size = width / groups;
    const int rem = width % groups;
    std::vector<int> sizes;
    if (rem == 0) {
        sizes.assign(groups, floor_size);
    } else if (floor_size + rem >= groups) {
        // equal leading groups of ceil size with a strictly smaller last
        // group; feasible iff width - (groups-1)*ceil >= 1
        const int lead = floor_size + 1;
        sizes.assign(groups - 1, lead);
        sizes.push_back(width - (groups - 1) * lead);
    } else {
        // not satisfiable (e.g. 65 units in 64 groups): ceil for the first
        // rem groups, floor for the rest
        sizes.assign(rem, floor_size + 1);
        sizes.resize(groups, floor_size);
    }
    Partition p;
    p.width = width;
    p.groups = groups;
    p.bounds.resize(groups + 1);
    p.bounds[0] = 0;
    for (int g = 0; g < groups; ++g) p.bounds[g + 1] = p.bounds[g] + sizes[g];
    return p;
}

bool BlockMask::block(int out_group, int in_group) const {
    if (all_allowed) return true;
    const auto& row = allowed[out_group];
    return std::binary_search(row.begin(), row.end(), in_group);
}

BlockMask layer_mask(const RegularGraph& g, const LayerSpec& layer) {
    validate_layer(layer);
    BlockMask mask;
    if (!layer.prunable) {
        mask.all_allowed = true;
        mask.in_parts = trivial_partition(layer.in_width);
        mask.out_parts = trivial_partition(layer.out_width);
        return mask;
    }
    const int n = g.node_count();
    mask.in_parts = partition(layer.in_width, n);
    mask.out_parts = partition(layer.out_width, n);
    mask.allowed.reserve(n);
    for (int j = 0; j < n; ++j) mask.allowed.push_back(g.neighbors(j));
    return mask;
}

std::vector<std::string> MaskSet::dense_layer_names() const {
    std::vector<std::string> names;
    for (const auto& layer : layers)
        if (!layer.prunable) names.push_back(layer.name);
    return names;
}

bool MaskSet::block_allowed(int layer, int out_group, int in_group) const {
    const auto& l = layers[layer];
    if (!l.prunable) return true;
    const auto& row = block_neighbors[out_group];
    return std::binary_search(row.begin(), row.end(), in_group);
}

std::vector<std::uint8_t> MaskSet::unit_mask(int layer) const {
    const auto& l = layers[layer];
    std::vector<std::uint8_t> m(static_cast<std::size_t>(l.out_width) * l.in_width, 0);
    if (!l.prunable) {
        std::fill(m.begin(), m.end(), 1);
        return m;
    }
    for (int j = 0; j < l.out_parts.groups; ++j) {
        for (int kg : block_neighbors[j]) {
            for (int r = l.out_parts.bounds[j]; r < l.out_parts.bounds[j + 1]; ++r) {
                auto* row = m.data() + static_cast<std::size_t>(r) * l.in_width;
                std::fill(row + l.in_parts.bounds[kg], row + l.in_parts.bounds[kg + 1],
                          std::uint8_t{1});
            }
        }
    }
    return m;
}

namespace {

MaskSet build_maskset(int n, int k, bool dense, std::vector<Edge> edges,
                      std::vector<std::vector<int>> neighbors, const ModelSpec& model) {
    MaskSet ms;
    ms.n = n;
    ms.k = k;
    ms.dense_mapping = dense;
    ms.edges = std::move(edges);
    ms.block_neighbors = std::move(neighbors);
    for (const auto& spec : model.layers) {
        validate_layer(spec);
        MaskSet::Layer layer;
        layer.name = spec.name;
        layer.kind = spec.kind;
        layer.in_width = spec.in_width;
        layer.out_width = spec.out_width;
        layer.kernel_elems = spec.kernel_elems;
        layer.prunable = spec.prunable;
        if (spec.prunable) {
            if (spec.in_width < n || spec.out_width < n)
                raise(ErrorKind::TooFewUnits,
                      "layer " + spec.name + ": width below the " + std::to_string(n) +
                          " graph nodes");
            layer.in_parts = partition(spec.in_width, n);
            layer.out_parts = partition(spec.out_width, n);
        } else {
            layer.in_parts = trivial_partition(spec.in_width);
            layer.out_parts = trivial_partition(spec.out_width);
        }
        ms.layers.push_back(std::move(layer));
    }
    return ms;
}

} // namespace

MaskSet model_masks(const RegularGraph& g, const ModelSpec& model) {
    std::vector<std::vector<int>> neighbors;
    neighbors.reserve(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) neighbors.push_back(g.neighbors(v));
    return build_maskset(g.node_count(), g.degree(), false, g.edges(), std::move(neighbors),
                         model);
}

MaskSet dense_model_masks(int n, const ModelSpec& model) {
    if (n < 1) raise(ErrorKind::InvariantViolation, "node count must be >= 1");
    std::vector<Edge> edges;
    std::vector<std::vector<int>> neighbors(n);
    for (int u = 0; u < n; ++u) {
        neighbors[u].resize(n);
        for (int v = 0; v < n; ++v) neighbors[u][v] = v;
        for (int v = u; v < n; ++v) edges.emplace_back(u, v); // self-pair included
    }
    return build_maskset(n, n, true, std::move(edges), std::move(neighbors), model);
}

ReductionStats reduction_stats(const MaskSet& masks, const ModelSpec& model,
                               const std::vector<std::int64_t>& spatial) {
    if (model.layers.size() != masks.layers.size())
        raise(ErrorKind::InvariantViolation, "mask set and model have different layer counts");
    if (spatial.size() != model.layers.size())
        raise(ErrorKind::MissingSpatialDims, "need one spatial size per layer");

    ReductionStats stats;
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const auto& spec = model.layers[li];
        const auto& layer = masks.layers[li];
        if (spec.name != layer.name || spec.in_width != layer.in_width ||
            spec.out_width != layer.out_width)
            raise(ErrorKind::InvariantViolation,
                  "mask set does not match model at layer " + spec.name);
        if (spec.kind == LayerKind::Conv && spatial[li] < 1)
            raise(ErrorKind::MissingSpatialDims, "layer " + spec.name + ": spatial size missing");

        const std::int64_t dense_weights = static_cast<std::int64_t>(spec.in_width) *
                                           spec.out_width * spec.kernel_elems;
        std::int64_t kept_weights = dense_weights;
        if (layer.prunable) {
            kept_weights = 0;
            for (int j = 0; j < layer.out_parts.groups; ++j) {
                std::int64_t in_units = 0;
                for (int kg : masks.block_neighbors[j]) in_units += layer.in_parts.size(kg);
                kept_weights += static_cast<std::int64_t>(layer.out_parts.size(j)) * in_units *
                                spec.kernel_elems;
            }
        }
        const std::int64_t bias = spec.bias ? spec.out_width : 0;
        const std::int64_t hw = spec.kind == LayerKind::Conv ? spatial[li] : 1;

        stats.params_orig += dense_weights + bias;
        stats.params_pruned += kept_weights + bias;
        stats.flops_orig += 2 * dense_weights * hw;
        stats.flops_pruned += 2 * kept_weights * hw;
    }
    stats.params_reduction =
        100.0 * (1.0 - static_cast<double>(stats.params_pruned) / stats.params_orig);
    stats.flops_reduction =
        100.0 * (1.0 - static_cast<double>(stats.flops_pruned) / stats.flops_orig);
    return stats;
}

std::string reduction_stats_json(const ReductionStats& s) {
    auto pct = [](double x) { return std::round(x * 100.0) / 100.0; };
    json j;
    j["params_orig"] = s.params_orig;
    j["params_pruned"] = s.params_pruned;
    j["flops_orig"] = s.flops_orig;
    j["flops_pruned"] = s.flops_pruned;
    j["params_reduction"] = pct(s.params_reduction);
    j["flops_reduction"] = pct(s.flops_reduction);
    return j.dump();
}

void write_maskset(const MaskSet& m, const std::string& path) {
    json j;
    j["schema_version"] = 1;
    j["n"] = m.n;
    j["k"] = m.k;
    json edges = json::array();
    for (const auto& [u, v] : m.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    json layers = json::array();
    for (const auto& layer : m.layers) {
        json jl;
        jl["name"] = layer.name;
        jl["kind"] = layer.kind == LayerKind::Conv ? "conv" : "fc";
        jl["in"] = layer.in_width;
        jl["out"] = layer.out_width;
        jl["kernel_elems"] = layer.kernel_elems;
        jl["prunable"] = layer.prunable;
        jl["in_bounds"] = partition_bounds(layer.in_parts);
        jl["out_bounds"] = partition_bounds(layer.out_parts);
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);

    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) raise(ErrorKind::IoError, "write failed on " + path);
}

MaskSet read_maskset(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoError, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (!j.contains("schema_version"))
        raise(ErrorKind::ParseError, path + ": missing schema_version");
    if (j["schema_version"] != 1)
        raise(ErrorKind::SchemaVersionMismatch,
              path + ": unsupported schema_version " + j["schema_version"].dump());

    MaskSet ms;
    try {
        ms.n = j.at("n").get<int>();
        ms.k = j.at("k").get<int>();
        ms.dense_mapping = (ms.k == ms.n);
        ms.block_neighbors.assign(ms.n, {});
        for (const auto& je : j.at("edges")) {
            int u = je.at(0).get<int>();
            int v = je.at(1).get<int>();
            if (u < 0 || v < 0 || u >= ms.n || v >= ms.n)
                raise(ErrorKind::ParseError, path + ": edge endpoint out of range");
            ms.edges.emplace_back(u, v);
            ms.block_neighbors[u].push_back(v);
            if (u != v) ms.block_neighbors[v].push_back(u);
        }
        for (auto& row : ms.block_neighbors) std::sort(row.begin(), row.end());
        for (const auto& jl : j.at("layers")) {
            MaskSet::Layer layer;
            layer.name = jl.at("name").get<std::string>();
            std::string kind = jl.at("kind").get<std::string>();
            if (kind == "fc")
                layer.kind = LayerKind::FullyConnected;
            else if (kind == "conv")
                layer.kind = LayerKind::Conv;
            else
                raise(ErrorKind::ParseError, path + ": unknown layer kind '" + kind + "'");
            layer.in_width = jl.at("in").get<int>();
            layer.out_width = jl.at("out").get<int>();
            layer.kernel_elems = jl.at("kernel_elems").get<int>();
            layer.prunable = jl.at("prunable").get<bool>();
            auto bounds_of = [&](const json& jb) {
                Partition p;
                p.bounds = jb.get<std::vector<int>>();
                p.groups = static_cast<int>(p.bounds.size()) - 1;
                p.width = p.bounds.back();
                return p;
            };
            layer.in_parts = bounds_of(jl.at("in_bounds"));
            layer.out_parts = bounds_of(jl.at("out_bounds"));
            ms.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        raise(ErrorKind::ParseError, path + ": " + e.what());
    }

    // sanity on the reconstructed topology
    if (!ms.dense_mapping) (void)RegularGraph(ms.n, ms.k, ms.edges);
    return ms;
}

} // namespace graphprune
