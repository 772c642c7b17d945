"""Monotone graph queries over many snapshots of an evolving graph.

All snapshots in a window are reached from their shared common graph by
edge additions only, scheduled to share work between snapshots.
"""
from .engine import (
    Scheduler,
    VertexValues,
    WorkStats,
    baseline_stream_step,
    evaluate_full,
    incremental_add,
    run_schedule,
)
from .errors import GraphError
from .graph import ComposedGraphView, CsrGraph, Edge, EdgeSet, build_csr, compose, edge_count
from .programs import BFS, PROGRAMS, SSNP, SSSP, SSWP, VITERBI, VertexProgram
from .store import DeltaBatch, EvolvingGraphStore, Interval, new_store
from .trigrid import (
    EvaluationSchedule,
    TriangularGrid,
    build_tg,
    bypass_merge,
    direct_hop_schedule,
    materialize_batches,
    solve_steiner,
    work_sharing_schedule,
)

__version__ = "0.1.0"
