"""Versioned storage of an evolving graph.

The store keeps the first snapshot, the ordered delta batches, and for every
edge ever seen the maximal runs of consecutive snapshots containing it.  Any
snapshot or interval common graph is derived from those runs on demand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import (
    AddExistingEdge,
    DeleteMissingEdge,
    InvalidBatch,
    NotAdjacent,
    ParseError,
    UnknownSnapshot,
    VertexOutOfRange,
)
from .graph import EdgeSet, format_edge_list, format_weight, parse_edge_list


@dataclass(frozen=True)
class DeltaBatch:
    additions: EdgeSet = field(default_factory=EdgeSet)
    deletions: EdgeSet = field(default_factory=EdgeSet)

    def __post_init__(self):
        if not isinstance(self.additions, EdgeSet):
            object.__setattr__(self, "additions", EdgeSet(self.additions))
        if not isinstance(self.deletions, EdgeSet):
            object.__setattr__(self, "deletions", EdgeSet(self.deletions))
        both = self.additions.pairs() & self.deletions.pairs()
        if both:
            s, d = min(both)
            raise InvalidBatch(f"edge ({s}, {d}) is both added and deleted in one batch")

    def __len__(self):
        return len(self.additions) + len(self.deletions)

    def apply(self, edges: EdgeSet) -> EdgeSet:
        """Apply to ``edges`` without validation (deletions match on pairs)."""
        return edges.difference(self.deletions).union(self.additions)


@dataclass(frozen=True, order=True)
class Interval:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __len__(self):
        return self.hi - self.lo + 1

    def __contains__(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo <= other.lo and other.hi <= self.hi
        return self.lo <= other <= self.hi

    def __str__(self):
        return f"{self.lo}:{self.hi}"

    @classmethod
    def parse(cls, text: str) -> "Interval":
        lo, sep, hi = text.partition(":")
        if not sep:
            return cls(int(lo), int(lo))
        return cls(int(lo), int(hi))

    def shrink_left(self) -> "Interval":
        """``[lo, hi-1]``"""
        return Interval(self.lo, self.hi - 1)

    def shrink_right(self) -> "Interval":
        """``[lo+1, hi]``"""
        return Interval(self.lo + 1, self.hi)


class EvolvingGraphStore:
    """Base snapshot plus ordered transitions, indexed by presence runs.

    A run is ``[start, end, weight]`` with ``end=None`` while the edge is
    still present in the newest snapshot.
    """

    def __init__(self, base: EdgeSet | Iterable, vertex_count: int):
        if not isinstance(base, EdgeSet):
            base = EdgeSet(base)
        if base.max_vertex() >= vertex_count:
            raise VertexOutOfRange(base.max_vertex(), vertex_count)
        self.vertex_count = int(vertex_count)
        self.base_edges = base
        self.transitions: list[DeltaBatch] = []
        self.presence_runs: dict[tuple[int, int], list[list]] = {}
        self._current: dict[tuple[int, int], list] = {}
        for key, w in base.items():
            run = [0, None, w]
            self.presence_runs[key] = [run]
            self._current[key] = run

    @property
    def n(self) -> int:
        return len(self.transitions) + 1

    def __len__(self):
        return self.n

    def _check_snapshot(self, t: int) -> None:
        if not 0 <= t < self.n:
            raise UnknownSnapshot(f"snapshot {t} not in [0, {self.n})")

    def _check_interval(self, iv: Interval) -> None:
        self._check_snapshot(iv.lo)
        self._check_snapshot(iv.hi)

    def full_window(self) -> Interval:
        return Interval(0, self.n - 1)

    def new_version(self, batch: DeltaBatch) -> int:
        """Append the snapshot obtained by applying ``batch`` to the newest one."""
        for key in batch.deletions:
            if key not in self._current:
                raise DeleteMissingEdge(*key)
        for key in batch.additions:
            if key in self._current:
                raise AddExistingEdge(*key)
            if max(key) >= self.vertex_count:
                raise VertexOutOfRange(max(key), self.vertex_count)
        t_new = self.n
        for key in batch.deletions:
            self._current.pop(key)[1] = t_new - 1
        for key, w in batch.additions.items():
            run = [t_new, None, w]
            self.presence_runs.setdefault(key, []).append(run)
            self._current[key] = run
        self.transitions.append(batch)
        return t_new

    # -- run queries -------------------------------------------------------

    def _covering(self, runs, lo: int, hi: int):
        last = len(self.transitions)
        for run in runs:
            if run[0] <= lo and hi <= (last if run[1] is None else run[1]):
                return run
        return None

    def iter_runs(self) -> Iterator[tuple[tuple[int, int], int, int, float]]:
        """Yield ``(pair, start, end, weight)`` for every presence run."""
        last = self.n - 1
        for key, runs in self.presence_runs.items():
            for a, b, w in runs:
                yield key, a, last if b is None else b, w

    def changing_runs(self, window: Interval) -> list[tuple[tuple[int, int], int, int, float]]:
        """Runs that meet ``window`` without covering it.

        Only these edges can appear in an addition batch between two
        sub-intervals of ``window``.
        """
        self._check_interval(window)
        lo, hi = window.lo, window.hi
        return [r for r in self.iter_runs() if r[1] <= hi and r[2] >= lo and not (r[1] <= lo and hi <= r[2])]

    def get_version(self, t: int) -> EdgeSet:
        self._check_snapshot(t)
        return self.common_edges(Interval(t, t))

    def common_edges(self, iv: Interval) -> EdgeSet:
        """Edges present in every snapshot of ``iv``."""
        self._check_interval(iv)
        lo, hi = iv.lo, iv.hi
        out = {}
        for key, runs in self.presence_runs.items():
            run = self._covering(runs, lo, hi)
            if run is not None:
                out[key] = run[2]
        return EdgeSet._wrap(out)

    def addition_batch(self, outer: Interval, inner: Interval) -> EdgeSet:
        """``common_edges(inner) - common_edges(outer)`` for nested intervals."""
        self._check_interval(outer)
        if inner not in outer:
            raise NotAdjacent(f"{inner} is not contained in {outer}")
        out = {}
        for key, runs in self.presence_runs.items():
            run = self._covering(runs, inner.lo, inner.hi)
            # runs are disjoint, so only this run could also cover ``outer``
            if run is not None and not self._covering((run,), outer.lo, outer.hi):
                out[key] = run[2]
        return EdgeSet._wrap(out)

    def delta_label(self, parent: Interval, child: Interval) -> EdgeSet:
        """Additions labelling the grid edge from ``parent`` to a shrink-by-one child."""
        self._check_interval(parent)
        if len(parent) < 2 or child not in (parent.shrink_left(), parent.shrink_right()):
            raise NotAdjacent(f"{child} is not a shrink-by-one child of {parent}")
        return self.addition_batch(parent, child)

    def diff(self, a: int, b: int) -> DeltaBatch:
        ga, gb = self.get_version(a), self.get_version(b)
        return DeltaBatch(gb.difference(ga), ga.difference(gb))

    # -- persistence -------------------------------------------------------

    def save(self, directory) -> None:
        directory = Path(directory)
        (directory / "batches").mkdir(parents=True, exist_ok=True)
        (directory / "base.el").write_text(format_edge_list(self.base_edges))
        (directory / "meta").write_text(f"vertex_count {self.vertex_count}\nsnapshots {self.n}\n")
        wanted = set()
        for i, batch in enumerate(self.transitions):
            name = f"{i:04d}.delta"
            wanted.add(name)
            (directory / "batches" / name).write_text(format_delta(batch))
        for stale in (directory / "batches").glob("*.delta"):
            if stale.name not in wanted:
                stale.unlink()

    @classmethod
    def load(cls, directory) -> "EvolvingGraphStore":
        directory = Path(directory)
        meta = read_meta(directory / "meta")
        with (directory / "base.el").open() as fh:
            base = parse_edge_list(fh, str(directory / "base.el"))
        store = cls(base, meta["vertex_count"])
        for i in range(meta["snapshots"] - 1):
            path = directory / "batches" / f"{i:04d}.delta"
            if not path.exists():
                raise UnknownSnapshot(f"missing batch file {path}")
            store.new_version(parse_delta(path.read_text().splitlines(), str(path)))
        return store


def new_store(base: EdgeSet | Iterable, vertex_count: int) -> EvolvingGraphStore:
    return EvolvingGraphStore(base, vertex_count)


def format_delta(batch: DeltaBatch) -> str:
    lines = [f"+ {e.src} {e.dst} {format_weight(e.weight)}\n" for e in batch.additions.sorted_edges()]
    lines += [f"- {s} {d}\n" for s, d in sorted(batch.deletions)]
    return "".join(lines)


def parse_delta(lines: Iterable[str], path: str = "<delta>") -> DeltaBatch:
    adds, dels = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "+" and len(parts) in (3, 4):
                w = float(parts[3]) if len(parts) == 4 else 1.0
                adds.append((int(parts[1]), int(parts[2]), w))
            elif parts[0] == "-" and len(parts) in (3, 4):
                dels.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"bad delta line {line!r}")
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return DeltaBatch(EdgeSet(adds), EdgeSet(dels))


def read_meta(path) -> dict[str, int]:
    meta = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        if not raw.strip():
            continue
        key, _, value = raw.partition(" ")
        try:
            meta[key] = int(value)
        except ValueError:
            raise ParseError(str(path), lineno, f"bad meta line {raw!r}") from None
    for key in ("vertex_count", "snapshots"):
        if key not in meta:
            raise ParseError(str(path), 0, f"missing {key}")
    return meta
