"""Triangular grid of interval common graphs and evaluation schedules.

Every contiguous sub-window ``[i, j]`` of a snapshot window is a grid node.
A node with ``i < j`` has a left child ``[i, j-1]`` and a right child
``[i+1, j]``; the edge to each child is labelled with the additions that turn
the node's common graph into the child's.  A schedule is a tree in this grid
rooted at the window and reaching every single-snapshot leaf; its cost is the
total number of additions on the tree edges.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterator

from .errors import GraphError, UnknownSnapshot
from .graph import EdgeSet, format_weight, parse_edge_list
from .store import EvolvingGraphStore, Interval

DEFAULT_MAX_WINDOW = 64


@dataclass(frozen=True)
class TriangularGrid:
    window: Interval
    # (i, j) -> additions on the edge to [i, j-1] / [i+1, j]
    w_left: dict = field(default_factory=dict)
    w_right: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.window)

    def nodes(self) -> Iterator[Interval]:
        lo, hi = self.window.lo, self.window.hi
        for length in range(self.m, 0, -1):
            for i in range(lo, hi - length + 2):
                yield Interval(i, i + length - 1)

    @property
    def node_count(self) -> int:
        return self.m * (self.m + 1) // 2

    @property
    def intermediate_levels(self) -> int:
        """Levels strictly between the root and the snapshot leaves."""
        return max(self.m - 2, 0)

    def edges(self) -> Iterator[tuple[Interval, Interval, int]]:
        for node in self.nodes():
            if len(node) > 1:
                key = (node.lo, node.hi)
                yield node, node.shrink_left(), self.w_left[key]
                yield node, node.shrink_right(), self.w_right[key]

    def weight(self, parent: Interval, child: Interval) -> int:
        key = (parent.lo, parent.hi)
        if child == parent.shrink_left():
            return self.w_left[key]
        if child == parent.shrink_right():
            return self.w_right[key]
        raise GraphError(f"{child} is not a child of {parent} in the grid")


def build_tg(store: EvolvingGraphStore, window: Interval) -> TriangularGrid:
    """Populate all grid edge weights by counting presence-run boundaries.

    An edge counts towards the left label of ``[i, j]`` exactly when one of
    its runs covers ``[i, j-1]`` and ends at ``j-1``; symmetrically a right
    label counts runs covering ``[i+1, j]`` that start at ``i+1``.
    """
    if not (0 <= window.lo and window.hi < store.n):
        raise UnknownSnapshot(f"window {window} outside [0, {store.n})")
    lo, hi = window.lo, window.hi
    w_left = {}
    w_right = {}
    for i in range(lo, hi + 1):
        for j in range(i + 1, hi + 1):
            w_left[(i, j)] = 0
            w_right[(i, j)] = 0
    for _, a, b, _ in store.iter_runs():
        if lo <= b < hi:
            for i in range(max(a, lo), b + 1):
                w_left[(i, b + 1)] += 1
        if lo < a <= hi:
            for j in range(a, min(b, hi) + 1):
                w_right[(a - 1, j)] += 1
    return TriangularGrid(window, w_left, w_right)


@dataclass(frozen=True)
class ScheduleNode:
    interval: Interval
    batch_size: int = 0
    children: tuple = ()
    # None until materialize_batches fills it in
    incoming_batch: EdgeSet | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self, parent: "ScheduleNode | None" = None):
        """Pre-order ``(node, parent)`` pairs."""
        yield self, parent
        for child in self.children:
            yield from child.walk(self)


@dataclass(frozen=True)
class EvaluationSchedule:
    window: Interval
    root: ScheduleNode
    mode: str = "work-sharing"

    @property
    def total_cost(self) -> int:
        return sum(node.batch_size for node, _ in self.root.walk())

    def leaves(self) -> list[int]:
        return sorted(node.interval.lo for node, _ in self.root.walk() if node.is_leaf)

    def paths(self) -> dict[int, list[ScheduleNode]]:
        """Root-to-leaf node lists, keyed by snapshot."""
        out = {}

        def rec(node, trail):
            trail = trail + [node]
            if node.is_leaf:
                out[node.interval.lo] = trail
            for child in node.children:
                rec(child, trail)

        rec(self.root, [])
        return out


def solve_steiner(tg: TriangularGrid, max_window: int = DEFAULT_MAX_WINDOW) -> EvaluationSchedule:
    """Exact minimum-cost schedule tree by dynamic programming over the grid.

    ``best[(i, j)][(a, b)]`` is the cheapest subtree rooted at grid node
    ``[i, j]`` reaching exactly the leaves ``a..b``.  A subtree either
    descends through one child or branches to both children with a split
    point ``s`` (left covers ``a..s``, right covers ``s+1..b``).  Ties prefer
    a left descent, then a right descent, then the smallest split.
    """
    m = tg.m
    if m > max_window:
        raise GraphError(f"window of {m} snapshots exceeds the exact-solver bound {max_window}")
    lo, hi = tg.window.lo, tg.window.hi
    best: dict[tuple[int, int], dict[tuple[int, int], tuple[int, tuple]]] = {}
    for t in range(lo, hi + 1):
        best[(t, t)] = {(t, t): (0, ())}
    for length in range(2, m + 1):
        for i in range(lo, hi - length + 2):
            j = i + length - 1
            wl, wr = tg.w_left[(i, j)], tg.w_right[(i, j)]
            left, right = best[(i, j - 1)], best[(i + 1, j)]
            table = {}
            for a in range(i, j + 1):
                for b in range(a, j + 1):
                    cost, how = None, None
                    if b <= j - 1:
                        cost, how = wl + left[(a, b)][0], ("L",)
                    if a >= i + 1:
                        c = wr + right[(a, b)][0]
                        if cost is None or c < cost:
                            cost, how = c, ("R",)
                    for s in range(a, b):
                        c = wl + wr + left[(a, s)][0] + right[(s + 1, b)][0]
                        if cost is None or c < cost:
                            cost, how = c, ("B", s)
                    table[(a, b)] = (cost, how)
            best[(i, j)] = table

    def build(i, j, a, b, batch_size):
        how = best[(i, j)][(a, b)][1]
        if not how:
            return ScheduleNode(Interval(i, j), batch_size)
        if how[0] == "L":
            kids = (build(i, j - 1, a, b, tg.w_left[(i, j)]),)
        elif how[0] == "R":
            kids = (build(i + 1, j, a, b, tg.w_right[(i, j)]),)
        else:
            s = how[1]
            kids = (
                build(i, j - 1, a, s, tg.w_left[(i, j)]),
                build(i + 1, j, s + 1, b, tg.w_right[(i, j)]),
            )
        return ScheduleNode(Interval(i, j), batch_size, kids)

    root = build(lo, hi, lo, hi, 0)
    return EvaluationSchedule(tg.window, root, "work-sharing")


def optimal_cost(tg: TriangularGrid) -> int:
    return solve_steiner(tg).total_cost


def _merge_batches(a: EdgeSet | None, b: EdgeSet | None) -> EdgeSet | None:
    if a is None or b is None:
        return None
    return a.union(b)


def bypass_merge(schedule: EvaluationSchedule) -> EvaluationSchedule:
    """Contract chains of single-child internal nodes into one edge each."""

    def contract(node: ScheduleNode) -> ScheduleNode:
        while len(node.children) == 1:
            (child,) = node.children
            node = replace(
                child,
                batch_size=node.batch_size + child.batch_size,
                incoming_batch=_merge_batches(node.incoming_batch, child.incoming_batch),
            )
        return replace(node, children=tuple(contract(c) for c in node.children))

    root = schedule.root
    root = replace(root, children=tuple(contract(c) for c in root.children))
    return replace(schedule, root=root)


def work_sharing_schedule(store: EvolvingGraphStore, window: Interval, max_window: int = DEFAULT_MAX_WINDOW) -> EvaluationSchedule:
    return bypass_merge(solve_steiner(build_tg(store, window), max_window))


def direct_hop_schedule(store: EvolvingGraphStore, window: Interval) -> EvaluationSchedule:
    """One-level schedule: every snapshot straight from the window's common graph."""
    if not (0 <= window.lo and window.hi < store.n):
        raise UnknownSnapshot(f"window {window} outside [0, {store.n})")
    if len(window) == 1:
        return EvaluationSchedule(window, ScheduleNode(window), "direct-hop")
    sizes = dict.fromkeys(range(window.lo, window.hi + 1), 0)
    for _, a, b, _ in store.iter_runs():
        covers_window = a <= window.lo and window.hi <= b
        if not covers_window:
            for t in range(max(a, window.lo), min(b, window.hi) + 1):
                sizes[t] += 1
    kids = tuple(ScheduleNode(Interval(t, t), sizes[t]) for t in sorted(sizes))
    return EvaluationSchedule(window, ScheduleNode(window, 0, kids), "direct-hop")


def materialize_batches(store: EvolvingGraphStore, schedule: EvaluationSchedule) -> EvaluationSchedule:
    """Fill every tree edge's batch with the concrete added edges.

    Because grid intervals nest, the batch on an edge from ``P`` to ``C`` is
    always ``common(C) - common(P)``, whether or not bypassing merged a chain.
    """

    candidates = store.changing_runs(schedule.window)

    def between(outer: Interval, inner: Interval) -> EdgeSet:
        if inner not in outer:
            raise GraphError(f"{inner} is not contained in {outer}")
        return EdgeSet._wrap({
            key: w for key, a, b, w in candidates
            if a <= inner.lo and inner.hi <= b and not (a <= outer.lo and outer.hi <= b)
        })

    def fill(node: ScheduleNode, parent: ScheduleNode | None) -> ScheduleNode:
        batch = None if parent is None else between(parent.interval, node.interval)
        if batch is not None and len(batch) != node.batch_size:
            raise GraphError(
                f"batch {parent.interval}->{node.interval} has {len(batch)} edges, schedule says {node.batch_size}"
            )
        kids = tuple(fill(c, node) for c in node.children)
        return replace(node, children=kids, incoming_batch=batch if batch is not None else EdgeSet())

    return replace(schedule, root=fill(schedule.root, None))


# ---------------------------------------------------------------------------
# schedule documents


def schedule_to_dict(schedule: EvaluationSchedule, include_edges: bool = False) -> dict:
    nodes = []
    ids = {}
    for node, parent in schedule.root.walk():
        ids[id(node)] = len(nodes)
        entry = {
            "id": len(nodes),
            "interval": str(node.interval),
            "parent": None if parent is None else ids[id(parent)],
            "batch_size": node.batch_size,
        }
        if include_edges and node.incoming_batch is not None:
            entry["batch"] = [f"{e.src} {e.dst} {format_weight(e.weight)}" for e in node.incoming_batch.sorted_edges()]
        nodes.append(entry)
    return {
        "window": str(schedule.window),
        "mode": schedule.mode,
        "total_cost": schedule.total_cost,
        "nodes": nodes,
    }


def dump_schedule(schedule: EvaluationSchedule, include_edges: bool = False) -> str:
    return json.dumps(schedule_to_dict(schedule, include_edges), indent=2, sort_keys=True) + "\n"


def load_schedule(text: str) -> EvaluationSchedule:
    doc = json.loads(text)
    entries = doc["nodes"]
    kids: dict[int, list[int]] = {e["id"]: [] for e in entries}
    for e in entries:
        if e["parent"] is not None:
            kids[e["parent"]].append(e["id"])
    by_id = {e["id"]: e for e in entries}

    def build(k):
        e = by_id[k]
        batch = parse_edge_list(e["batch"], "<schedule>") if "batch" in e else None
        return ScheduleNode(
            Interval.parse(e["interval"]),
            e["batch_size"],
            tuple(build(c) for c in kids[k]),
            batch,
        )

    (root_id,) = [e["id"] for e in entries if e["parent"] is None]
    return EvaluationSchedule(Interval.parse(doc["window"]), build(root_id), doc["mode"])
