
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evograph.errors import AddExistingEdge, DeleteMissingEdge, InvalidBatch, NotAdjacent, UnknownSnapshot
from evograph.graph import EdgeSet
from evograph.store import DeltaBatch, EvolvingGraphStore, Interval, new_store
from evograph.synthetic import example_names, random_edges, random_store
from oracles import replay


def names(edges):
    return example_names(edges)


def test_new_store_single_snapshot():
    store = new_store(EdgeSet(), 4)
    assert store.n == 1 and len(store.get_version(0)) == 0
    base = EdgeSet([(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 2, 1)])
    store = new_store(base, 4)
    assert store.get_version(0) == base


def test_presence_runs_of_fresh_store():
    store = new_store(random_edges(200, 1000, seed=5), 200)
    assert all(store.presence_runs[k] == [[0, None, w]] for k, w in store.base_edges.items())
    assert {(a, b) for _, a, b, _ in store.iter_runs()} == {(0, 0)}


def test_empty_batch_repeats_snapshot():
    store = new_store(random_edges(20, 40, seed=1), 20)
    assert store.new_version(DeltaBatch()) == 1
    assert store.get_version(1) == store.get_version(0)


def test_example_first_step(example_store):
    g1 = names(example_store.get_version(1))
    assert 3 in g1 and 9 not in g1


def test_example_third_snapshot(example_store):
    g2 = names(example_store.get_version(2))
    assert {9, 11, 14, 24, 29} <= g2
    assert not g2 & {3, 4, 7, 10, 26}


def test_batch_validation():
    store = new_store(EdgeSet([(0, 1, 1)]), 3)
    with pytest.raises(DeleteMissingEdge) as info:
        store.new_version(DeltaBatch(deletions=EdgeSet([(1, 2)])))
    assert info.value.edge == (1, 2)
    with pytest.raises(AddExistingEdge):
        store.new_version(DeltaBatch(additions=EdgeSet([(0, 1, 4)])))
    with pytest.raises(InvalidBatch):
        DeltaBatch(EdgeSet([(1, 2, 1)]), EdgeSet([(1, 2)]))
    assert store.n == 1
    with pytest.raises(UnknownSnapshot):
        store.get_version(1)


def test_diff_on_example(example_store):
    d = example_store.diff(0, 1)
    assert names(d.additions) == {3, 12, 15}
    assert names(d.deletions) == {9, 11, 16, 23, 29}
    same = example_store.diff(2, 2)
    assert len(same.additions) == len(same.deletions) == 0
    g0, g2 = example_store.get_version(0), example_store.get_version(2)
    d02 = example_store.diff(0, 2)
    assert d02.additions.pairs() == g2.pairs() - g0.pairs()
    assert d02.deletions.pairs() == g0.pairs() - g2.pairs()


def test_common_edges_on_example(example_store):
    cg = names(example_store.common_edges(Interval(0, 2)))
    assert 3 not in cg and 9 not in cg
    assert example_store.common_edges(Interval(1, 1)) == example_store.get_version(1)


@pytest.mark.parametrize(
    "parent, child, expected",
    [
        ((0, 2), (0, 1), {4, 7, 10, 26}),
        ((0, 2), (1, 2), {12, 15}),
        ((0, 1), (0, 0), {9, 11, 16, 23, 29}),
        ((0, 1), (1, 1), {3, 12, 15}),
        ((1, 2), (1, 1), {3, 4, 7, 10, 26}),
        ((1, 2), (2, 2), {9, 11, 14, 24, 29}),
    ],
)
def test_delta_labels_on_example(example_store, parent, child, expected):
    assert names(example_store.delta_label(Interval(*parent), Interval(*child))) == expected


def test_delta_label_requires_adjacent(example_store):
    with pytest.raises(NotAdjacent):
        example_store.delta_label(Interval(0, 2), Interval(1, 1))
    with pytest.raises(NotAdjacent):
        example_store.delta_label(Interval(1, 1), Interval(1, 1))


def test_re_added_edge_splits_runs():
    store = new_store(EdgeSet([(0, 1, 1), (1, 2, 1)]), 3)
    store.new_version(DeltaBatch(deletions=EdgeSet([(0, 1)])))
    store.new_version(DeltaBatch(additions=EdgeSet([(0, 1, 7)])))
    assert store.presence_runs[(0, 1)] == [[0, 0, 1.0], [2, None, 7.0]]
    assert (0, 1) not in store.common_edges(Interval(0, 2))
    assert store.common_edges(Interval(2, 2))[(0, 1)] == 7.0


# ---------------------------------------------------------------------------
# randomized properties


@st.composite
def stores(draw):
    seed = draw(st.integers(0, 10_000))
    transitions = draw(st.integers(0, 7))
    # at most 5 deletions per batch keeps 40 base edges from running out
    add_fraction = draw(st.sampled_from([0.5, 0.7, 1.0]))
    return random_store(15, 40, transitions, draw(st.integers(0, 10)), add_fraction, seed=seed)


def materialized(store):
    base = dict(store.base_edges)
    batches = [(dict(b.additions), set(b.deletions)) for b in store.transitions]
    return replay(base, batches)


@given(stores())
def test_presence_runs_match_replay(store):
    snaps = materialized(store)
    for t, snap in enumerate(snaps):
        assert dict(store.get_version(t)) == snap
    for runs in store.presence_runs.values():
        spans = [(a, store.n - 1 if b is None else b) for a, b, _ in runs]
        assert spans == sorted(spans)
        # maximal: two runs of one edge never touch
        assert all(b1 + 1 < a2 for (_, b1), (a2, _) in zip(spans, spans[1:]))


@given(stores(), st.data())
def test_intersection_and_diff_oracles(store, data):
    snaps = materialized(store)
    lo = data.draw(st.integers(0, store.n - 1))
    hi = data.draw(st.integers(lo, store.n - 1))
    inter = set(snaps[lo])
    for t in range(lo, hi + 1):
        inter &= set(snaps[t])
    assert store.common_edges(Interval(lo, hi)).pairs() == inter
    d = store.diff(lo, hi)
    assert d.apply(store.get_version(lo)).pairs() == set(snaps[hi])


@given(stores(), st.data())
def test_nesting_and_addition_only_labels(store, data):
    lo = data.draw(st.integers(0, store.n - 1))
    hi = data.draw(st.integers(lo, store.n - 1))
    outer = Interval(lo, hi)
    outer_cg = store.common_edges(outer).pairs()
    if len(outer) > 1:
        for child in (outer.shrink_left(), outer.shrink_right()):
            child_cg = store.common_edges(child).pairs()
            assert outer_cg <= child_cg
            assert store.delta_label(outer, child).pairs() == child_cg - outer_cg


@given(stores(), st.data())
def test_monotone_path_reconstructs_snapshot(store, data):
    lo = data.draw(st.integers(0, store.n - 1))
    hi = data.draw(st.integers(lo, store.n - 1))
    t = data.draw(st.integers(lo, hi))
    node = Interval(lo, hi)
    acc = store.common_edges(node).pairs()
    while len(node) > 1:
        options = [c for c in (node.shrink_left(), node.shrink_right()) if t in c]
        child = data.draw(st.sampled_from(options))
        label = store.delta_label(node, child).pairs()
        assert not acc & label
        acc |= label
        node = child
    assert acc == store.get_version(t).pairs()


def test_save_load_save_bytes(tmp_path):
    store = random_store(50, 150, 6, 20, 0.5, seed=2)
    store.save(tmp_path / "a")
    again = EvolvingGraphStore.load(tmp_path / "a")
    again.save(tmp_path / "b")
    for rel in ["base.el", "meta", *(f"batches/{i:04d}.delta" for i in range(6))]:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    for t in range(store.n):
        assert again.get_version(t) == store.get_version(t)
