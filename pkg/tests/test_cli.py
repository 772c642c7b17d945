import csv
import json
import random

import pytest

from evograph.cli import main
from evograph.engine import evaluate_full
from evograph.graph import build_csr
from evograph.harness import TIMING_COLUMNS, ExperimentConfig, parse_results, result_path, run_query
from evograph.programs import BFS, PROGRAMS
from evograph.store import EvolvingGraphStore
from evograph.synthetic import random_store, three_snapshot_store


@pytest.fixture
def store_dir(tmp_path):
    path = tmp_path / "store"
    random_store(80, 320, 9, 40, 0.5, seed=5).save(path)
    return path


def test_ingest_small_file(tmp_path, capsys):
    el = tmp_path / "g.el"
    el.write_text("# a comment\n0 1 2\n1 2\n# another\n2 0 4.5\n")
    assert main(["ingest", str(el), "--store", str(tmp_path / "s")]) == 0
    store = EvolvingGraphStore.load(tmp_path / "s")
    assert store.n == 1 and dict(store.get_version(0)) == {(0, 1): 2.0, (1, 2): 1.0, (2, 0): 4.5}


def test_ingest_errors(tmp_path):
    el = tmp_path / "bad.el"
    el.write_text("0 1\n0 x\n")
    assert main(["ingest", str(el), "--store", str(tmp_path / "s")]) == 3
    el.write_text("0 1\n0 1\n")
    assert main(["ingest", str(el), "--store", str(tmp_path / "s")]) == 3
    assert main(["ingest", str(tmp_path / "missing.el"), "--store", str(tmp_path / "s")]) == 3


def test_ingest_large_round_trip(tmp_path):
    rng = random.Random(0)
    pairs = set()
    while len(pairs) < 100_000:
        pairs.add((rng.randrange(20_000), rng.randrange(20_000)))
    lines = [f"{s} {d} {float(rng.randint(1, 99))!r}\n" for s, d in sorted(pairs)]
    el = tmp_path / "big.el"
    el.write_text("".join(lines))
    assert main(["ingest", str(el), "--store", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "base.el").read_bytes() == el.read_bytes()


def test_gen_batches(tmp_path, store_dir):
    before = {p.name: p.read_bytes() for p in store_dir.rglob("*") if p.is_file()}
    assert main(["gen-batches", "--store", str(store_dir), "--count", "0"]) == 0
    assert {p.name: p.read_bytes() for p in store_dir.rglob("*") if p.is_file()} == before

    docs = []
    for run in ("x", "y"):
        d = tmp_path / run
        random_store(80, 320, 0, 0, seed=5).save(d)
        args = ["gen-batches", "--store", str(d), "--count", "2", "--batch-size", "10",
                "--add-fraction", "0.5", "--seed", "9"]
        assert main(args) == 0
        docs.append([(d / "batches" / f"{i:04d}.delta").read_text() for i in range(2)])
    assert docs[0] == docs[1]
    for text in docs[0]:
        assert sum(line.startswith("+") for line in text.splitlines()) == 5
        assert sum(line.startswith("-") for line in text.splitlines()) == 5


def test_generated_transitions_are_valid(store_dir):
    store = EvolvingGraphStore.load(store_dir)
    for t, batch in enumerate(store.transitions):
        snap = store.get_version(t).pairs()
        assert batch.deletions.pairs() <= snap
        assert not batch.additions.pairs() & snap
        assert not batch.additions.pairs() & batch.deletions.pairs()


def test_gen_batches_insufficient_edges(tmp_path):
    d = tmp_path / "s"
    random_store(10, 5, 0, 0, seed=1).save(d)
    assert main(["gen-batches", "--store", str(d), "--batch-size", "20", "--add-fraction", "0"]) == 2


def test_schedule_on_example(tmp_path, capsys):
    three_snapshot_store().save(tmp_path / "ex")
    out = tmp_path / "sched.json"
    assert main(["schedule", "--store", str(tmp_path / "ex"), "--window", "0:2", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "work-sharing cost: 19" in text and "direct-hop cost: 23" in text
    assert json.loads(out.read_text())["total_cost"] == 19
    assert main(["schedule", "--store", str(tmp_path / "ex"), "--window", "1:1"]) == 0
    text = capsys.readouterr().out
    assert "work-sharing cost: 0" in text and "direct-hop cost: 0" in text


def test_schedule_costs_resum(tmp_path, capsys):
    random_store(60, 200, 7, 20, 0.5, seed=3).save(tmp_path / "s")
    for engine in ("work-sharing", "direct-hop"):
        out = tmp_path / f"{engine}.json"
        assert main(["schedule", "--store", str(tmp_path / "s"), "--engine", engine, "--edges",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["total_cost"] == sum(n["batch_size"] for n in doc["nodes"])
        assert all(len(n["batch"]) == n["batch_size"] for n in doc["nodes"])
    text = capsys.readouterr().out
    ws = int(text.split("work-sharing cost: ")[1].split()[0])
    dh = int(text.split("direct-hop cost: ")[1].split()[0])
    assert ws <= dh


def test_schedule_bad_window(store_dir):
    assert main(["schedule", "--store", str(store_dir), "--window", "3:40"]) == 2


def test_query_single_snapshot(tmp_path, store_dir):
    out = tmp_path / "q"
    assert main(["query", "--store", str(store_dir), "--window", "4:4", "--algo", "bfs", "--out", str(out)]) == 0
    store = EvolvingGraphStore.load(store_dir)
    ref = evaluate_full(build_csr(store.get_version(4), 80), BFS, 0).values
    assert parse_results(result_path(out, "bfs", "work-sharing", 4).read_text()) == ref


def test_query_all_engines_agree(tmp_path, store_dir):
    out = tmp_path / "q"
    assert main(["query", "--store", str(store_dir), "--window", "0:9", "--algo", "all",
                 "--engine", "all", "--out", str(out)]) == 0
    files = sorted(out.rglob("t*.txt"))
    assert len(files) == 150
    for algo in PROGRAMS:
        for t in range(10):
            texts = {result_path(out, algo, e, t).read_text() for e in ("baseline", "direct-hop", "work-sharing")}
            assert len(texts) == 1
        with (out / algo / "timing.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert tuple(rows[0]) == TIMING_COLUMNS
        for row in rows:
            if row["engine"] != "baseline":
                assert float(row["incr_del_ms"]) == 0.0 and float(row["mutation_ms"]) == 0.0


def test_query_is_deterministic(tmp_path, store_dir):
    outs = []
    for run in ("a", "b"):
        cfg = ExperimentConfig(store=store_dir, algorithm="all", engine="all", seed=1)
        runs = run_query(cfg, tmp_path / run)
        counts = {k: [r.edge_fn_applications for r in v.timing] for k, v in runs.items()}
        files = {p.relative_to(tmp_path / run): p.read_bytes() for p in (tmp_path / run).rglob("t*.txt")}
        outs.append((counts, files))
    assert outs[0] == outs[1]


def test_verify_passes(store_dir, capsys):
    assert main(["verify", "--store", str(store_dir), "--window", "2:7"]) == 0
    assert main(["verify", "--store", str(store_dir), "--window", "5:5", "--mode", "sync"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_verify_detects_corrupted_results(tmp_path, store_dir, capsys):
    out = tmp_path / "q"
    assert main(["query", "--store", str(store_dir), "--window", "0:3", "--algo", "sssp",
                 "--engine", "direct-hop", "--out", str(out)]) == 0
    args = ["verify", "--store", str(store_dir), "--window", "0:3", "--algo", "sssp",
            "--engine", "direct-hop", "--results", str(out)]
    assert main(args) == 0
    path = result_path(out, "sssp", "direct-hop", 2)
    lines = path.read_text().splitlines()
    lines[17] = "17 12345"
    path.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(args) == 1
    assert "snapshot 2: vertex 17" in capsys.readouterr().out


def test_verify_results_checks_only_what_was_queried(tmp_path, store_dir, capsys):
    out = tmp_path / "q"
    base = ["--store", str(store_dir), "--window", "1:4"]
    assert main(["query", *base, "--algo", "bfs", "--engine", "baseline", "--out", str(out)]) == 0
    assert main(["query", *base, "--algo", "ssnp", "--engine", "work-sharing", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["verify", *base, "--results", str(out)]) == 0
    passed = sorted(line.split()[1:3] for line in capsys.readouterr().out.splitlines() if line.startswith("PASS"))
    assert passed == [["bfs", "baseline"], ["ssnp", "work-sharing"]]
    # an explicit engine that was never queried is an IO error
    assert main(["verify", *base, "--algo", "bfs", "--engine", "direct-hop", "--results", str(out)]) == 3
    assert main(["verify", *base, "--results", str(tmp_path / "empty")]) == 3


def test_usage_errors(store_dir):
    with pytest.raises(SystemExit) as info:
        main(["query", "--store", str(store_dir)])
    assert info.value.code == 2
    assert main(["verify", "--store", str(store_dir / "nope")]) == 3
