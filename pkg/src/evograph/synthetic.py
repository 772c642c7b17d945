"""Seeded synthetic graphs, delta batches and the three-snapshot example."""
from __future__ import annotations

import random

from .errors import InsufficientEdges
from .graph import EdgeSet
from .store import DeltaBatch, EvolvingGraphStore

MAX_WEIGHT = 100


def random_weight(rng: random.Random, max_weight: int = MAX_WEIGHT) -> float:
    # integer-valued so sums and comparisons stay exact in floating point
    return float(rng.randint(1, max_weight))


def _absent_pairs(rng, present, vertex_count, count, max_weight, exclude=()):
    capacity = vertex_count * (vertex_count - 1) - len(present)
    if count > capacity:
        raise InsufficientEdges(f"only {capacity} absent vertex pairs, need {count}")
    out = {}
    while len(out) < count:
        s = rng.randrange(vertex_count)
        d = rng.randrange(vertex_count)
        if s == d or (s, d) in present or (s, d) in out or (s, d) in exclude:
            continue
        out[(s, d)] = random_weight(rng, max_weight)
    return out


def random_edges(vertex_count: int, edge_count: int, seed=0, max_weight: int = MAX_WEIGHT) -> EdgeSet:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return EdgeSet._wrap(_absent_pairs(rng, {}, vertex_count, edge_count, max_weight))


def random_batch(present, vertex_count: int, batch_size: int, add_fraction: float,
                 rng: random.Random, max_weight: int = MAX_WEIGHT) -> DeltaBatch:
    """Uniform batch: deletions from ``present`` without replacement, additions from absent pairs."""
    if not 0.0 <= add_fraction <= 1.0:
        raise ValueError(f"add_fraction must lie in [0, 1], got {add_fraction}")
    n_add = round(add_fraction * batch_size)
    n_del = batch_size - n_add
    if n_del > len(present):
        raise InsufficientEdges(f"cannot delete {n_del} edges from a snapshot of {len(present)}")
    deleted = rng.sample(sorted(present), n_del)
    added = _absent_pairs(rng, present, vertex_count, n_add, max_weight)
    return DeltaBatch(EdgeSet._wrap(added), EdgeSet._wrap({k: present[k] for k in deleted}))


def extend_store(store: EvolvingGraphStore, count: int, batch_size: int, add_fraction: float,
                 seed: int, max_weight: int = MAX_WEIGHT) -> list[int]:
    """Append ``count`` random transitions; returns the new snapshot ids."""
    rng = random.Random(seed)
    current = dict(store.get_version(store.n - 1).items())
    ids = []
    for _ in range(count):
        batch = random_batch(current, store.vertex_count, batch_size, add_fraction, rng, max_weight)
        ids.append(store.new_version(batch))
        for k in batch.deletions:
            del current[k]
        current.update(batch.additions.items())
    return ids


def random_store(vertex_count: int, edge_count: int, transitions: int, batch_size: int,
                 add_fraction: float = 0.5, seed: int = 0, max_weight: int = MAX_WEIGHT) -> EvolvingGraphStore:
    rng = random.Random(seed)
    store = EvolvingGraphStore(random_edges(vertex_count, edge_count, rng, max_weight), vertex_count)
    extend_store(store, transitions, batch_size, add_fraction, rng.randrange(2**31), max_weight)
    return store


# ---------------------------------------------------------------------------
# three-snapshot example with named edges e1..e30

EXAMPLE_VERTICES = 8
EXAMPLE_EDGE_NAMES = range(1, 31)

ADDED_0 = {3, 12, 15}
DELETED_0 = {9, 11, 16, 23, 29}
ADDED_1 = {9, 11, 14, 24, 29}
DELETED_1 = {3, 4, 7, 10, 26}


def _example_pairs() -> dict[int, tuple[int, int]]:
    pairs = [(s, d) for s in range(EXAMPLE_VERTICES) for d in range(EXAMPLE_VERTICES) if s != d]
    random.Random(7).shuffle(pairs)
    return {k: pairs[k - 1] for k in EXAMPLE_EDGE_NAMES}


EXAMPLE_PAIRS = _example_pairs()


def example_edge(k: int) -> tuple[int, int]:
    """Concrete vertex pair standing for edge ``e<k>``."""
    return EXAMPLE_PAIRS[k]


def example_edges(names) -> EdgeSet:
    return EdgeSet((*EXAMPLE_PAIRS[k], float(1 + k % 5)) for k in sorted(names))


def example_names(edges) -> set[int]:
    """Inverse of :func:`example_edges` on pairs."""
    by_pair = {p: k for k, p in EXAMPLE_PAIRS.items()}
    return {by_pair[p] for p in edges}


def three_snapshot_store() -> EvolvingGraphStore:
    """Store whose snapshots 0, 1, 2 realise the worked three-snapshot example.

    Edges never mentioned by a batch are common to all three snapshots;
    e4, e7, e10, e26 and the edges deleted by the first batch must be
    present in the first snapshot for the batches to be valid.
    """
    mentioned = ADDED_0 | DELETED_0 | ADDED_1 | DELETED_1
    common = set(EXAMPLE_EDGE_NAMES) - mentioned
    first = common | DELETED_0 | (DELETED_1 - ADDED_0)
    store = EvolvingGraphStore(example_edges(first), EXAMPLE_VERTICES)
    store.new_version(DeltaBatch(example_edges(ADDED_0), example_edges(DELETED_0)))
    store.new_version(DeltaBatch(example_edges(ADDED_1), example_edges(DELETED_1)))
    return store
