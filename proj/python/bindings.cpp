#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "graphprune/errors.hpp"
#include "graphprune/graph.hpp"
#include "graphprune/mask.hpp"
#include "graphprune/metrics.hpp"
#include "graphprune/mlp.hpp"
#include "graphprune/search.hpp"
#include "graphprune/sparse.hpp"

namespace py = pybind11;
using namespace graphprune;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) raise(ErrorKind::ShapeMismatch, "expected a 2-d array");
    Matrix m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy_n(a.data(), m.data.size(), m.data.begin());
    return m;
}

py::array_t<double> numpy_from_matrix(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::copy_n(m.data.data(), m.data.size(), a.mutable_data());
    return a;
}

py::dict reduction_dict(const ReductionStats& s) {
    py::dict d;
    d["params_orig"] = s.params_orig;
    d["params_pruned"] = s.params_pruned;
    d["flops_orig"] = s.flops_orig;
    d["flops_pruned"] = s.flops_pruned;
    d["params_reduction"] = s.params_reduction;
    d["flops_reduction"] = s.flops_reduction;
    return d;
}

py::dict masks_to_arrays(const MaskSet& ms) {
    py::dict out;
    for (std::size_t li = 0; li < ms.layers.size(); ++li) {
        const auto& layer = ms.layers[li];
        auto flat = ms.unit_mask(static_cast<int>(li));
        py::array_t<bool> a({layer.out_width, layer.in_width});
        for (std::size_t i = 0; i < flat.size(); ++i) a.mutable_data()[i] = flat[i] != 0;
        out[py::str(layer.name)] = a;
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pruning-mask synthesis from regular graph topology";

    py::register_exception<Error>(m, "GraphPruneError");

    py::class_<RegularGraph>(m, "RegularGraph")
        .def(py::init<int, int, std::vector<Edge>>(), py::arg("n"), py::arg("k"),
             py::arg("edges"))
        .def_property_readonly("n", &RegularGraph::node_count)
        .def_property_readonly("k", &RegularGraph::degree)
        .def("edges", [](const RegularGraph& g) { return g.edges(); })
        .def("neighbors", &RegularGraph::neighbors, py::arg("node"))
        .def("has_edge", &RegularGraph::has_edge, py::arg("u"), py::arg("v"))
        .def("__repr__", [](const RegularGraph& g) {
            return "RegularGraph(n=" + std::to_string(g.node_count()) +
                   ", k=" + std::to_string(g.degree()) + ")";
        });

    m.def("ring_lattice", &ring_lattice, py::arg("n"), py::arg("k"));
    m.def("random_regular", &random_regular, py::arg("n"), py::arg("k"), py::arg("seed"),
          py::arg("max_retries") = 10000);
    m.def("is_connected", &is_connected, py::arg("g"));
    m.def("is_bipartite", &is_bipartite, py::arg("g"));
    m.def("aspl", &aspl, py::arg("g"));
    m.def("read_graph", &read_graph, py::arg("path"));
    m.def("write_graph", &write_graph, py::arg("g"), py::arg("path"));

    m.def(
        "minimize_aspl",
        [](const RegularGraph& g0, std::int64_t attempts, std::uint64_t seed,
           std::int64_t record_every) {
            SearchConfig cfg;
            cfg.attempts = attempts;
            cfg.seed = seed;
            cfg.record_every = record_every;
            SearchResult r = minimize_aspl(g0, cfg);
            py::list rows;
            for (const auto& row : r.trajectory)
                rows.append(py::make_tuple(row.attempt, row.accepted, row.aspl_after));
            py::dict d;
            d["graph"] = r.graph;
            d["trajectory"] = rows;
            d["initial_aspl"] = r.initial_aspl;
            d["final_aspl"] = r.final_aspl;
            d["accepted"] = r.accepted;
            return d;
        },
        py::arg("g"), py::arg("attempts") = 10000, py::arg("seed") = 0,
        py::arg("record_every") = 1);

    m.def("gr_node", &gr_node, py::arg("g"), py::arg("node"));
    m.def("gr_graph", &gr_graph, py::arg("g"));
    m.def("aopu", &aopu, py::arg("g"), py::arg("layers"), py::arg("group_size") = 1);
    m.def("aopu_node", &aopu_node, py::arg("g"), py::arg("node"), py::arg("layers"),
          py::arg("group_size") = 1);
    m.def("theta", &theta, py::arg("n"), py::arg("k"));
    m.def("lower_bound_aspl", &lower_bound_aspl, py::arg("n"), py::arg("k"));
    m.def(
        "bfsst",
        [](const RegularGraph& g, int root) {
            Bfsst t = bfsst(g, root);
            py::dict d;
            d["root"] = t.root;
            d["parent"] = t.parent;
            d["depth"] = t.depth;
            d["root_aspl"] = t.root_aspl();
            return d;
        },
        py::arg("g"), py::arg("root"));
    m.def(
        "metrics_report",
        [](const RegularGraph& g, int layers, int group_size) {
            MetricsReport r = metrics_report(g, layers, group_size);
            py::dict d;
            d["n"] = r.n;
            d["k"] = r.k;
            d["aspl"] = r.aspl;
            d["gr"] = r.gr ? py::object(py::float_(*r.gr))
                           : py::object(py::float_(std::numeric_limits<double>::infinity()));
            d["aopu"] = r.aopu;
            d["lower_bound"] = r.lower_bound ? py::object(py::float_(*r.lower_bound))
                                             : py::object(py::none());
            d["theta"] = r.theta ? py::object(py::int_(*r.theta)) : py::object(py::none());
            return d;
        },
        py::arg("g"), py::arg("layers") = 15, py::arg("group_size") = 1);

    m.def(
        "partition_bounds",
        [](int width, int groups) { return partition(width, groups).bounds; },
        py::arg("width"), py::arg("groups"));

    m.def(
        "unit_masks",
        [](const RegularGraph& g, const std::string& model_path) {
            ModelFile mf = load_model_spec(model_path);
            return masks_to_arrays(model_masks(g, mf.model));
        },
        py::arg("g"), py::arg("model_path"),
        "Per-layer boolean weight masks (out_width x in_width) for a model spec JSON.");
    m.def(
        "dense_unit_masks",
        [](int n, const std::string& model_path) {
            ModelFile mf = load_model_spec(model_path);
            return masks_to_arrays(dense_model_masks(n, mf.model));
        },
        py::arg("n"), py::arg("model_path"));
    m.def(
        "reduction_stats",
        [](const RegularGraph& g, const std::string& model_path) {
            ModelFile mf = load_model_spec(model_path);
            return reduction_dict(reduction_stats(model_masks(g, mf.model), mf.model, mf.spatial));
        },
        py::arg("g"), py::arg("model_path"));
    m.def(
        "write_maskset",
        [](const RegularGraph& g, const std::string& model_path, const std::string& out_path) {
            ModelFile mf = load_model_spec(model_path);
            write_maskset(model_masks(g, mf.model), out_path);
        },
        py::arg("g"), py::arg("model_path"), py::arg("out_path"));

    m.def(
        "verify_oracle",
        [](const RegularGraph& g, int layers, int group_size, std::uint64_t seed) {
            TinyMLP mlp = build_mlp(g, layers, group_size, seed);
            const int n = g.node_count();
            std::int64_t walk_total = 0, grad_total = 0;
            bool aopu_match = true, gr_match = true;
            for (int j = 0; j < n; ++j) {
                GradReachReport r = grad_reach_count(mlp, j);
                const std::int64_t walk = aopu_node(g, j, layers, group_size);
                walk_total += walk;
                grad_total += r.reached_params;
                if (walk != r.reached_params) aopu_match = false;
                const int rounds = gr_node(g, j);
                if (rounds <= layers - 1) {
                    if (!r.gr_observed || *r.gr_observed != rounds) gr_match = false;
                } else if (r.gr_observed) {
                    gr_match = false;
                }
            }
            py::dict d;
            d["aopu_graph"] = static_cast<double>(walk_total) / n;
            d["aopu_gradient"] = static_cast<double>(grad_total) / n;
            d["aopu_match"] = aopu_match;
            d["gr_match"] = gr_match;
            return d;
        },
        py::arg("g"), py::arg("layers") = 15, py::arg("group_size") = 1, py::arg("seed") = 0);

    m.def(
        "regular_matmul",
        [](const RegularGraph& g, const py::array_t<double>& w, const py::array_t<double>& x,
           int s_in, int s_out) {
            Matrix wm = matrix_from_numpy(w);
            Matrix xm = matrix_from_numpy(x);
            BlockWeights bw = encode(wm, g, s_in, s_out);
            GatherPlan plan = make_gather_plan(g, s_in, s_out);
            return numpy_from_matrix(regular_matmul(bw, plan, xm));
        },
        py::arg("g"), py::arg("weights"), py::arg("x"), py::arg("s_in"), py::arg("s_out"),
        "Encode a mask-conforming weight matrix and run the gather-dense product.");
    m.def(
        "naive_masked_matmul",
        [](const py::array_t<double>& w, const py::array_t<bool>& mask,
           const py::array_t<double>& x) {
            Matrix wm = matrix_from_numpy(w);
            if (mask.ndim() != 2 || mask.shape(0) != w.shape(0) || mask.shape(1) != w.shape(1))
                raise(ErrorKind::ShapeMismatch, "mask shape must match weights");
            std::vector<std::uint8_t> mk(mask.size());
            auto mv = mask.unchecked<2>();
            for (py::ssize_t r = 0; r < mv.shape(0); ++r)
                for (py::ssize_t c = 0; c < mv.shape(1); ++c)
                    mk[static_cast<std::size_t>(r) * mv.shape(1) + c] = mv(r, c) ? 1 : 0;
            return numpy_from_matrix(naive_masked_matmul(wm, mk, matrix_from_numpy(x)));
        },
        py::arg("weights"), py::arg("mask"), py::arg("x"));
    m.def(
        "bench",
        [](int n, int k, int s, int batch, int repeats, std::uint64_t seed, int threads) {
            BenchReport r = bench(n, k, s, batch, repeats, seed, threads);
            py::dict d;
            d["n"] = r.n;
            d["k"] = r.k;
            d["s"] = r.s;
            d["batch"] = r.batch;
            d["t_naive_ms"] = r.t_naive_ms;
            d["t_regular_ms"] = r.t_regular_ms;
            d["flops_ratio"] = r.flops_ratio;
            d["threads"] = r.threads;
            return d;
        },
        py::arg("n"), py::arg("k"), py::arg("s") = 8, py::arg("batch") = 64,
        py::arg("repeats") = 11, py::arg("seed") = 1, py::arg("threads") = 1);

    m.def(
        "train_demo",
        [](const RegularGraph& g, int classes, int dims, int points, int epochs,
           std::uint64_t seed, int trunk_layers, int group_size) {
            Dataset data = make_blobs({classes, dims, points, seed});
            TrainDemoResult r = train_demo(g, data, epochs, seed, trunk_layers, group_size);
            py::list rows;
            for (const auto& row : r.trace)
                rows.append(py::make_tuple(row.epoch, row.train_acc, row.val_acc));
            py::dict d;
            d["trace"] = rows;
            d["max_pruned_abs"] = r.max_pruned_abs;
            return d;
        },
        py::arg("g"), py::arg("classes") = 2, py::arg("dims") = 4, py::arg("points") = 240,
        py::arg("epochs") = 20, py::arg("seed") = 0, py::arg("trunk_layers") = 4,
        py::arg("group_size") = 1);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
