"""Pruning-mask synthesis from regular graph topology.

The heavy lifting lives in the compiled `_core` module; this package simply
re-exports it.
"""

from ._core import (  # noqa: F401
    GraphPruneError,
    RegularGraph,
    aopu,
    aopu_node,
    aspl,
    bench,
    bfsst,
    dense_unit_masks,
    gr_graph,
    gr_node,
    is_bipartite,
    is_connected,
    lower_bound_aspl,
    metrics_report,
    minimize_aspl,
    naive_masked_matmul,
    partition_bounds,
    random_regular,
    read_graph,
    reduction_stats,
    regular_matmul,
    ring_lattice,
    theta,
    train_demo,
    unit_masks,
    verify_oracle,
    write_graph,
    write_maskset,
)

from ._core import __version__  # noqa: F401
