"""Fixed-point evaluation of vertex programs.

Three ways to reach a snapshot's results:

* :func:`evaluate_full` from scratch on a (composed) graph;
* :func:`incremental_add` from a fixed point, given a batch of added edges,
  without touching the underlying graph;
* :func:`baseline_stream_step` which mutates an adjacency structure in place
  and handles deletions by dependence trimming.

:func:`run_schedule` combines the first two along an evaluation schedule.
"""
from __future__ import annotations

import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import chain
from typing import Callable, Iterable

from .errors import AddExistingEdge, DeleteMissingEdge, NonConvergence, VertexOutOfRange
from .graph import ComposedGraphView, CsrGraph, EdgeSet, build_csr, compose, extend
from .programs import VertexProgram
from .store import DeltaBatch, EvolvingGraphStore
from .trigrid import EvaluationSchedule, ScheduleNode, materialize_batches

DEFAULT_MODE_THRESHOLD = 10_000
MODE_ENV = "EVOGRAPH_MODE_THRESHOLD"


def default_threshold() -> int:
    raw = os.environ.get(MODE_ENV)
    return int(raw) if raw else DEFAULT_MODE_THRESHOLD


@dataclass
class Scheduler:
    """Worklist policy.

    ``mode`` is ``"auto"``, ``"sync"`` or ``"async"``.  In auto mode batches
    of at least ``threshold`` edges drain synchronously (updates become
    visible in the next round), smaller ones asynchronously.
    """

    mode: str = "auto"
    threshold: int = field(default_factory=default_threshold)
    max_updates: int | None = None

    def __post_init__(self):
        if self.mode not in ("auto", "sync", "async"):
            raise ValueError(f"unknown scheduler mode {self.mode!r}")

    def mode_for(self, batch_size: int) -> str:
        if self.mode != "auto":
            return self.mode
        return "sync" if batch_size >= self.threshold else "async"


@dataclass
class WorkStats:
    edge_fn: int = 0
    improvements: int = 0
    tainted: int = 0

    def __iadd__(self, other: "WorkStats"):
        self.edge_fn += other.edge_fn
        self.improvements += other.improvements
        self.tainted += other.tainted
        return self


@dataclass
class VertexValues:
    values: list
    dependence_parent: list | None = None

    def copy(self) -> "VertexValues":
        parents = None if self.dependence_parent is None else list(self.dependence_parent)
        return VertexValues(list(self.values), parents)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, v):
        return self.values[v]


# ---------------------------------------------------------------------------
# adjacency access


def _view_out(view: ComposedGraphView) -> Callable[[int], Iterable[tuple[int, float]]]:
    off, dst, wt = view.base.adjacency_lists
    extra = view._extra

    def out(v):
        lo, hi = off[v], off[v + 1]
        base = zip(dst[lo:hi], wt[lo:hi])
        more = extra.get(v)
        return chain(base, more) if more else base

    return out


def _as_view(graph) -> ComposedGraphView:
    if isinstance(graph, ComposedGraphView):
        return graph
    if isinstance(graph, CsrGraph):
        return compose(graph)
    raise TypeError(f"expected CsrGraph or ComposedGraphView, got {type(graph).__name__}")


def _check_weights(view: ComposedGraphView, prog: VertexProgram) -> None:
    if prog.min_weight <= 0:
        return
    for g in (view.base, *view.overlays):
        if g.edge_count:
            prog.check_weight(float(g.weight.min()))


def _update_limit(scheduler: Scheduler, vertex_count: int, edge_total: int) -> int:
    if scheduler.max_updates is not None:
        return scheduler.max_updates
    return max(vertex_count * max(edge_total, 1), 1_000_000)


def drain(values, frontier, out, prog: VertexProgram, mode: str, stats: WorkStats, parent=None, limit=None):
    """Push improvements from ``frontier`` until no value changes.

    Mutates ``values`` (and ``parent`` when given) in place.
    """
    f, better = prog.edge_function, prog.better
    budget = limit if limit is not None else float("inf")
    edge_fn = improvements = 0
    if mode == "async":
        queued = bytearray(len(values))
        work = deque()
        for v in frontier:
            if not queued[v]:
                queued[v] = 1
                work.append(v)
        while work:
            u = work.popleft()
            queued[u] = 0
            val = values[u]
            for d, w in out(u):
                edge_fn += 1
                c = f(val, w)
                if better(c, values[d]):
                    values[d] = c
                    if parent is not None:
                        parent[d] = u
                    improvements += 1
                    if not queued[d]:
                        queued[d] = 1
                        work.append(d)
            if improvements > budget:
                raise NonConvergence(f"{prog.name}: more than {budget} vertex updates")
    else:
        frontier = sorted(set(frontier))
        while frontier:
            marked = bytearray(len(values))
            nxt = []
            # values read at the start of the round: updates land next round
            for u, val in [(u, values[u]) for u in frontier]:
                for d, w in out(u):
                    edge_fn += 1
                    c = f(val, w)
                    if better(c, values[d]):
                        values[d] = c
                        if parent is not None:
                            parent[d] = u
                        improvements += 1
                        if not marked[d]:
                            marked[d] = 1
                            nxt.append(d)
            if improvements > budget:
                raise NonConvergence(f"{prog.name}: more than {budget} vertex updates")
            frontier = nxt
    stats.edge_fn += edge_fn
    stats.improvements += improvements


def initial_values(prog: VertexProgram, vertex_count: int, source: int, track_parents: bool = False) -> VertexValues:
    if not 0 <= source < vertex_count:
        raise VertexOutOfRange(source, vertex_count)
    values = [prog.identity_value] * vertex_count
    values[source] = prog.source_value
    return VertexValues(values, [-1] * vertex_count if track_parents else None)


def evaluate_full(graph, prog: VertexProgram, source: int, scheduler: Scheduler | None = None,
                  stats: WorkStats | None = None, track_parents: bool = False) -> VertexValues:
    """Fixed point of ``prog`` on ``graph`` from scratch."""
    view = _as_view(graph)
    scheduler = scheduler or Scheduler()
    stats = stats if stats is not None else WorkStats()
    _check_weights(view, prog)
    vv = initial_values(prog, view.vertex_count, source, track_parents)
    m = edge_total(view)
    drain(vv.values, [source], _view_out(view), prog, scheduler.mode_for(m), stats,
          vv.dependence_parent, _update_limit(scheduler, view.vertex_count, m))
    return vv


def edge_total(view: ComposedGraphView) -> int:
    return view.base.edge_count + sum(ov.edge_count for ov in view.overlays)


def _as_overlay(batch, vertex_count: int) -> CsrGraph:
    if isinstance(batch, CsrGraph):
        return batch
    return build_csr(batch, vertex_count)


def incremental_add(values: VertexValues, graph, batch, prog: VertexProgram,
                    scheduler: Scheduler | None = None, stats: WorkStats | None = None) -> VertexValues:
    """Fixed point on ``graph`` plus ``batch``, starting from a fixed point on ``graph``.

    The input values and both graphs are left untouched.  First every batch
    edge is applied once; improved destinations then seed the worklist,
    which drains over the composed adjacency.
    """
    return _incremental_add(values, _as_view(graph), batch, prog, scheduler, stats)[0]


def _incremental_add(values, view, batch, prog, scheduler, stats):
    scheduler = scheduler or Scheduler()
    stats = stats if stats is not None else WorkStats()
    overlay = _as_overlay(batch, view.vertex_count)
    new_view = extend(view, overlay)
    _check_weights(compose(overlay), prog)
    out_vals = values.copy()
    vals = out_vals.values
    parent = out_vals.dependence_parent
    f, better = prog.edge_function, prog.better
    frontier = []
    for u, d, w in overlay.edges():
        stats.edge_fn += 1
        c = f(vals[u], w)
        if better(c, vals[d]):
            vals[d] = c
            if parent is not None:
                parent[d] = u
            stats.improvements += 1
            frontier.append(d)
    if frontier:
        m = edge_total(new_view)
        drain(vals, frontier, _view_out(new_view), prog, scheduler.mode_for(overlay.edge_count), stats,
              parent, _update_limit(scheduler, view.vertex_count, m))
    return out_vals, new_view


# ---------------------------------------------------------------------------
# baseline streaming engine


class MutableGraph:
    """Adjacency maps edited in place by the baseline engine."""

    def __init__(self, edges: EdgeSet, vertex_count: int):
        self.vertex_count = vertex_count
        self.out: list[dict[int, float]] = [{} for _ in range(vertex_count)]
        self.inn: list[dict[int, float]] = [{} for _ in range(vertex_count)]
        for (s, d), w in edges.items():
            self.out[s][d] = w
            self.inn[d][s] = w

    def has_edge(self, s: int, d: int) -> bool:
        return d in self.out[s]

    def add(self, s: int, d: int, w: float) -> None:
        self.out[s][d] = w
        self.inn[d][s] = w

    def remove(self, s: int, d: int) -> None:
        del self.out[s][d]
        del self.inn[d][s]

    def edge_set(self) -> EdgeSet:
        return EdgeSet._wrap({(s, d): w for s, nb in enumerate(self.out) for d, w in nb.items()})

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.out)

    def out_fn(self):
        out = self.out
        return lambda v: out[v].items()


@dataclass
class StepReport:
    mutation_s: float = 0.0
    add_s: float = 0.0
    del_s: float = 0.0
    add_stats: WorkStats = field(default_factory=WorkStats)
    del_stats: WorkStats = field(default_factory=WorkStats)


def baseline_stream_step(graph: MutableGraph, values: VertexValues, batch: DeltaBatch, prog: VertexProgram,
                         scheduler: Scheduler | None = None, report: StepReport | None = None) -> VertexValues:
    """Advance ``graph`` and its fixed point ``values`` by one delta batch, in place.

    Deletions are applied first.  A deleted edge that produced its target's
    value taints that vertex and, transitively, every vertex whose value was
    derived from a tainted one.  Tainted vertices are reset to the identity,
    re-relaxed from untainted in-neighbours and the worklist is drained.
    Additions are then handled exactly like :func:`incremental_add`.
    """
    scheduler = scheduler or Scheduler()
    report = report if report is not None else StepReport()
    if values.dependence_parent is None:
        raise ValueError("baseline values must track dependence parents")
    for s, d in batch.deletions:
        if not graph.has_edge(s, d):
            raise DeleteMissingEdge(s, d)
    for (s, d), w in batch.additions.items():
        if max(s, d) >= graph.vertex_count:
            raise VertexOutOfRange(max(s, d), graph.vertex_count)
        if graph.has_edge(s, d):
            raise AddExistingEdge(s, d)
        prog.check_weight(w)
    vals, parent = values.values, values.dependence_parent
    f, better = prog.edge_function, prog.better
    limit = _update_limit(scheduler, graph.vertex_count, graph.edge_count() + len(batch.additions))

    t0 = time.perf_counter()
    dels = sorted(batch.deletions)
    for s, d in dels:
        graph.remove(s, d)
    report.mutation_s += time.perf_counter() - t0

    t0 = time.perf_counter()
    roots = [d for s, d in dels if parent[d] == s]
    if roots:
        children: dict[int, list[int]] = {}
        for v, p in enumerate(parent):
            if p >= 0:
                children.setdefault(p, []).append(v)
        tainted = set(roots)
        stack = list(roots)
        while stack:
            for c in children.get(stack.pop(), ()):
                if c not in tainted:
                    tainted.add(c)
                    stack.append(c)
        report.del_stats.tainted += len(tainted)
        order = sorted(tainted)
        for v in order:
            vals[v] = prog.identity_value
            parent[v] = -1
        frontier = []
        stats = report.del_stats
        for v in order:
            for u, w in graph.inn[v].items():
                if u in tainted:
                    continue
                stats.edge_fn += 1
                c = f(vals[u], w)
                if better(c, vals[v]):
                    vals[v] = c
                    parent[v] = u
                    stats.improvements += 1
            if vals[v] != prog.identity_value:
                frontier.append(v)
        drain(vals, frontier, graph.out_fn(), prog, scheduler.mode_for(len(dels)), stats, parent, limit)
    report.del_s += time.perf_counter() - t0

    t0 = time.perf_counter()
    adds = batch.additions.sorted_edges()
    for s, d, w in adds:
        graph.add(s, d, w)
    report.mutation_s += time.perf_counter() - t0

    t0 = time.perf_counter()
    stats = report.add_stats
    frontier = []
    for s, d, w in adds:
        stats.edge_fn += 1
        c = f(vals[s], w)
        if better(c, vals[d]):
            vals[d] = c
            parent[d] = s
            stats.improvements += 1
            frontier.append(d)
    if frontier:
        drain(vals, frontier, graph.out_fn(), prog, scheduler.mode_for(len(adds)), stats, parent, limit)
    report.add_s += time.perf_counter() - t0
    return values


# ---------------------------------------------------------------------------
# schedule execution


@dataclass(frozen=True)
class PlanNode:
    interval: object
    overlay: CsrGraph | None
    children: tuple = ()


@dataclass(frozen=True)
class ExecutionPlan:
    """A materialized schedule with every batch already in CSR form."""

    window: object
    root_graph: CsrGraph
    root: PlanNode

    def graphs(self) -> list[CsrGraph]:
        out = [self.root_graph]
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.overlay is not None:
                out.append(node.overlay)
            stack.extend(node.children)
        return out

    def checksums(self) -> list[str]:
        return [g.checksum() for g in self.graphs()]


def plan_schedule(store: EvolvingGraphStore, schedule: EvaluationSchedule) -> ExecutionPlan:
    if any(n.incoming_batch is None for n, p in schedule.root.walk() if p is not None):
        schedule = materialize_batches(store, schedule)
    V = store.vertex_count

    def convert(node: ScheduleNode, is_root: bool) -> PlanNode:
        overlay = None if is_root else build_csr(node.incoming_batch, V)
        return PlanNode(node.interval, overlay, tuple(convert(c, False) for c in node.children))

    root_graph = build_csr(store.common_edges(schedule.window), V)
    return ExecutionPlan(schedule.window, root_graph, convert(schedule.root, True))


@dataclass
class EdgeRecord:
    interval: object
    leaf: int  # leftmost snapshot below this edge; used for per-snapshot attribution
    seconds: float
    stats: WorkStats


@dataclass
class ScheduleReport:
    initial_s: float = 0.0
    initial_stats: WorkStats = field(default_factory=WorkStats)
    edges: list[EdgeRecord] = field(default_factory=list)


def _leftmost_leaf(node: PlanNode) -> int:
    while node.children:
        node = node.children[0]
    return node.interval.lo


def run_plan(plan: ExecutionPlan, prog: VertexProgram, source: int, scheduler: Scheduler | None = None,
             report: ScheduleReport | None = None, threads: int = 1) -> dict[int, VertexValues]:
    scheduler = scheduler or Scheduler()
    report = report if report is not None else ScheduleReport()
    t0 = time.perf_counter()
    root_view = compose(plan.root_graph)
    root_vals = evaluate_full(root_view, prog, source, scheduler, report.initial_stats)
    report.initial_s += time.perf_counter() - t0

    def descend(node: PlanNode, view: ComposedGraphView, vals: VertexValues, records: list) -> dict:
        if not node.children:
            return {node.interval.lo: vals}
        results = {}
        for child in node.children:
            stats = WorkStats()
            t = time.perf_counter()
            child_vals, child_view = _incremental_add(vals, view, child.overlay, prog, scheduler, stats)
            records.append(EdgeRecord(child.interval, _leftmost_leaf(child), time.perf_counter() - t, stats))
            results.update(descend(child, child_view, child_vals, records))
        return results

    if threads > 1 and len(plan.root.children) > 1:
        # each subtree gets its own record list; merged in tree order after
        def task(child):
            records = []
            sub = descend(PlanNode(plan.root.interval, None, (child,)), root_view, root_vals, records)
            return sub, records

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(task, plan.root.children))
        results = {}
        for sub, records in parts:
            results.update(sub)
            report.edges.extend(records)
        return results
    records: list = []
    results = descend(plan.root, root_view, root_vals, records)
    report.edges.extend(records)
    return results


def run_schedule(store: EvolvingGraphStore, schedule: EvaluationSchedule, prog: VertexProgram, source: int,
                 scheduler: Scheduler | None = None, report: ScheduleReport | None = None,
                 threads: int = 1) -> dict[int, VertexValues]:
    """Per-snapshot fixed points for every leaf of ``schedule``."""
    return run_plan(plan_schedule(store, schedule), prog, source, scheduler, report, threads)
