"""Rebalance-aware bin packing for consumer-group autoscaling.

Measurements are dicts of partition id to write speed (bytes/s), assignments
are dicts of partition id to consumer index.
"""

from ._core import (
    AutoscaleError,
    algorithms,
    avg_rscore,
    cbs,
    exact_pack,
    generate_stream,
    lower_bound,
    monitor_estimate,
    pack,
    pack_modified,
    pareto_front,
    rebalanced_set,
    rscore,
    run_stream,
    simulate,
)

__all__ = [
    "AutoscaleError",
    "algorithms",
    "avg_rscore",
    "cbs",
    "exact_pack",
    "generate_stream",
    "lower_bound",
    "monitor_estimate",
    "pack",
    "pack_modified",
    "pareto_front",
    "rebalanced_set",
    "rscore",
    "run_stream",
    "simulate",
]
