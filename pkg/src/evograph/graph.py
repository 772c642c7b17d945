"""Immutable graph representations.

Edges are keyed by their ``(src, dst)`` pair; weights ride along.  A
:class:`CsrGraph` is the canonical compressed form (adjacency sorted by
destination) and a :class:`ComposedGraphView` overlays addition-only CSR
batches on a base graph without copying or editing either.
"""
from __future__ import annotations

import hashlib
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .errors import (
    DuplicateEdge,
    InvalidWeight,
    OverlapError,
    ParseError,
    VertexOutOfRange,
)


class Edge(NamedTuple):
    src: int
    dst: int
    weight: float = 1.0


class EdgeSet(Mapping):
    """A set of edges deduplicated by ``(src, dst)``.

    Behaves as a read-only mapping from the pair to the weight.  Set algebra
    matches on pairs only; on ``union`` the left operand's weight wins.
    """

    __slots__ = ("_w",)

    def __init__(self, edges: Iterable = ()):
        w: dict[tuple[int, int], float] = {}
        for e in edges:
            if len(e) == 2:
                src, dst = e
                weight = 1.0
            else:
                src, dst, weight = e
            src, dst, weight = int(src), int(dst), float(weight)
            if src < 0 or dst < 0:
                raise VertexOutOfRange(min(src, dst), None)
            if not weight > 0:
                raise InvalidWeight(f"edge ({src}, {dst}) has non-positive weight {weight}")
            if (src, dst) in w:
                raise DuplicateEdge(src, dst)
            w[(src, dst)] = weight
        self._w = w

    @classmethod
    def _wrap(cls, mapping: dict) -> "EdgeSet":
        out = cls.__new__(cls)
        out._w = mapping
        return out

    def __getitem__(self, key):
        return self._w[key]

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __contains__(self, key):
        return key in self._w

    def __eq__(self, other):
        if isinstance(other, EdgeSet):
            return self._w == other._w
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._w.items()))

    def __repr__(self):
        return f"EdgeSet({sorted(self.edges())!r})"

    def edges(self) -> Iterator[Edge]:
        for (s, d), w in self._w.items():
            yield Edge(s, d, w)

    def sorted_edges(self) -> list[Edge]:
        return [Edge(s, d, self._w[(s, d)]) for s, d in sorted(self._w)]

    def pairs(self) -> set[tuple[int, int]]:
        return set(self._w)

    def difference(self, other: Iterable) -> "EdgeSet":
        return EdgeSet._wrap({k: w for k, w in self._w.items() if k not in other})

    def intersection(self, other: Iterable) -> "EdgeSet":
        return EdgeSet._wrap({k: w for k, w in self._w.items() if k in other})

    def union(self, other: "EdgeSet") -> "EdgeSet":
        merged = dict(other._w)
        merged.update(self._w)
        return EdgeSet._wrap(merged)

    def isdisjoint(self, other: Iterable) -> bool:
        return not any(k in self._w for k in other)

    __sub__ = difference
    __and__ = intersection
    __or__ = union

    def max_vertex(self) -> int:
        if not self._w:
            return -1
        return max(max(s, d) for s, d in self._w)


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Compressed sparse row adjacency of a simple directed weighted graph.

    Arrays are read-only; neighbors of each vertex are sorted by destination.
    """

    vertex_count: int
    offsets: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.dst.shape[0])

    # Python lists are several times faster than numpy scalars in the
    # per-vertex traversal loops of the engine.
    @cached_property
    def adjacency_lists(self) -> tuple[list[int], list[int], list[float]]:
        return self.offsets.tolist(), self.dst.tolist(), self.weight.tolist()

    def neighbors(self, v: int) -> Iterator[tuple[int, float]]:
        off, dst, wt = self.adjacency_lists
        for k in range(off[v], off[v + 1]):
            yield dst[k], wt[k]

    def has_edge(self, src: int, dst: int) -> bool:
        if not 0 <= src < self.vertex_count:
            return False
        off, d, _ = self.adjacency_lists
        lo, hi = off[src], off[src + 1]
        k = bisect_left(d, dst, lo, hi)
        return k < hi and d[k] == dst

    def edges(self) -> Iterator[Edge]:
        src = np.repeat(np.arange(self.vertex_count), np.diff(self.offsets))
        for s, d, w in zip(src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield Edge(s, d, w)

    def to_edge_set(self) -> EdgeSet:
        return EdgeSet._wrap({(e.src, e.dst): e.weight for e in self.edges()})

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(self.vertex_count).tobytes())
        for arr in (self.offsets, self.dst, self.weight):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def build_csr(edges: EdgeSet | Iterable, vertex_count: int) -> CsrGraph:
    """Build the canonical CSR of ``edges`` over ``vertex_count`` vertices."""
    if not isinstance(edges, EdgeSet):
        edges = EdgeSet(edges)
    n = len(edges)
    src = np.fromiter((s for s, _ in edges), dtype=np.int64, count=n)
    dst = np.fromiter((d for _, d in edges), dtype=np.int64, count=n)
    wt = np.fromiter(edges.values(), dtype=np.float64, count=n)
    if n:
        hi = max(int(src.max()), int(dst.max()))
        if hi >= vertex_count:
            raise VertexOutOfRange(hi, vertex_count)
    order = np.lexsort((dst, src))
    src, dst, wt = src[order], dst[order], wt[order]
    offsets = np.zeros(vertex_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=vertex_count), out=offsets[1:])
    return CsrGraph(vertex_count, _frozen(offsets), _frozen(dst), _frozen(wt))


@dataclass(frozen=True, eq=False)
class ComposedGraphView:
    """A base CSR plus ordered addition-only overlays, read without copying."""

    base: CsrGraph
    overlays: tuple[CsrGraph, ...] = ()
    # src -> [(dst, weight), ...] gathered from all overlays; derived at
    # compose time so the hot loop touches one dict instead of k CSRs.
    _extra: dict = field(default_factory=dict, repr=False)

    @property
    def vertex_count(self) -> int:
        return self.base.vertex_count

    def neighbors(self, v: int) -> Iterator[tuple[int, float]]:
        yield from self.base.neighbors(v)
        for ov in self.overlays:
            yield from ov.neighbors(v)

    def edges(self) -> Iterator[Edge]:
        yield from self.base.edges()
        for ov in self.overlays:
            yield from ov.edges()

    def to_edge_set(self) -> EdgeSet:
        return EdgeSet._wrap({(e.src, e.dst): e.weight for e in self.edges()})

    def has_edge(self, src: int, dst: int) -> bool:
        return self.base.has_edge(src, dst) or any(ov.has_edge(src, dst) for ov in self.overlays)

    def checksums(self) -> list[str]:
        return [self.base.checksum()] + [ov.checksum() for ov in self.overlays]


def compose(base: CsrGraph, overlays: Iterable[CsrGraph] = ()) -> ComposedGraphView:
    """Overlay addition-only batches on ``base``.

    Raises :class:`OverlapError` on the first ``(src, dst)`` that appears in
    base or an earlier overlay.
    """
    overlays = tuple(overlays)
    seen: set[tuple[int, int]] = set()
    extra: dict[int, list[tuple[int, float]]] = {}
    for ov in overlays:
        if ov.vertex_count != base.vertex_count:
            raise VertexOutOfRange(ov.vertex_count - 1, base.vertex_count)
        for s, d, w in ov.edges():
            if (s, d) in seen or base.has_edge(s, d):
                raise OverlapError(s, d)
            seen.add((s, d))
            extra.setdefault(s, []).append((d, w))
    return ComposedGraphView(base, overlays, extra)


def extend(view: ComposedGraphView, overlay: CsrGraph) -> ComposedGraphView:
    """``compose(view.base, view.overlays + (overlay,))`` checking only the new overlay."""
    if overlay.vertex_count != view.vertex_count:
        raise VertexOutOfRange(overlay.vertex_count - 1, view.vertex_count)
    extra = dict(view._extra)
    touched = set()
    for s, d, w in overlay.edges():
        if view.base.has_edge(s, d) or any(d == x for x, _ in extra.get(s, ())):
            raise OverlapError(s, d)
        if s not in touched:
            extra[s] = list(extra.get(s, ()))
            touched.add(s)
        extra[s].append((d, w))
    return ComposedGraphView(view.base, view.overlays + (overlay,), extra)


def edge_count(view: ComposedGraphView | CsrGraph) -> int:
    if isinstance(view, CsrGraph):
        return view.edge_count
    return view.base.edge_count + sum(ov.edge_count for ov in view.overlays)


# ---------------------------------------------------------------------------
# edge-list text format


def format_weight(w: float) -> str:
    return repr(float(w))


def parse_edge_list(lines: Iterable[str], path: str = "<input>") -> EdgeSet:
    edges: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(path, lineno, f"expected 'src dst [weight]', got {line!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
            weight = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        if src < 0 or dst < 0:
            raise ParseError(path, lineno, "negative vertex id")
        if not weight > 0:
            raise ParseError(path, lineno, f"non-positive weight {weight}")
        if (src, dst) in edges:
            raise DuplicateEdge(src, dst)
        edges[(src, dst)] = weight
    return EdgeSet._wrap(edges)


def read_edge_list(path) -> tuple[EdgeSet, int]:
    """Read an edge-list file; returns the edges and ``V = max id + 1``."""
    path = Path(path)
    with path.open() as fh:
        edges = parse_edge_list(fh, str(path))
    return edges, edges.max_vertex() + 1


def format_edge_list(edges: EdgeSet) -> str:
    return "".join(f"{e.src} {e.dst} {format_weight(e.weight)}\n" for e in edges.sorted_edges())


def write_edge_list(path, edges: EdgeSet) -> None:
    Path(path).write_text(format_edge_list(edges))
