"""Experiment driver: engines over a snapshot window, result files, timing and verification."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .engine import (
    MutableGraph,
    ScheduleReport,
    Scheduler,
    StepReport,
    VertexValues,
    WorkStats,
    baseline_stream_step,
    evaluate_full,
    plan_schedule,
    run_plan,
)
from .errors import UnknownSnapshot
from .graph import build_csr
from .programs import PROGRAMS, VertexProgram, format_value, get_program
from .store import EvolvingGraphStore, Interval
from .trigrid import direct_hop_schedule, work_sharing_schedule

ENGINES = ("baseline", "direct-hop", "work-sharing")
TIMING_COLUMNS = ("engine", "snapshot", "mutation_ms", "incr_add_ms", "incr_del_ms", "initial_ms", "edge_fn_applications")
VITERBI_RTOL = 1e-9


@dataclass
class ExperimentConfig:
    store: Path
    window: Interval | None = None
    algorithm: str = "bfs"
    source: int = 0
    engine: str = "work-sharing"
    seed: int = 0
    batch_size: int = 1000
    add_fraction: float = 0.5
    threads: int = 1
    mode: str = "auto"

    def __post_init__(self):
        if not 0.0 <= self.add_fraction <= 1.0:
            raise ValueError(f"add_fraction must lie in [0, 1], got {self.add_fraction}")
        if self.engine not in ENGINES + ("all",):
            raise ValueError(f"unknown engine {self.engine!r}")

    def algorithms(self) -> list[str]:
        return list(PROGRAMS) if self.algorithm == "all" else [get_program(self.algorithm).name]

    def engines(self) -> list[str]:
        return list(ENGINES) if self.engine == "all" else [self.engine]


@dataclass
class TimingRow:
    engine: str
    snapshot: int
    mutation_ms: float = 0.0
    incr_add_ms: float = 0.0
    incr_del_ms: float = 0.0
    initial_ms: float = 0.0
    edge_fn_applications: int = 0

    def as_csv(self) -> list[str]:
        return [
            self.engine,
            str(self.snapshot),
            f"{self.mutation_ms:.3f}",
            f"{self.incr_add_ms:.3f}",
            f"{self.incr_del_ms:.3f}",
            f"{self.initial_ms:.3f}",
            str(self.edge_fn_applications),
        ]


@dataclass
class EngineRun:
    engine: str
    results: dict[int, VertexValues]
    timing: list[TimingRow]
    # baseline only: per transition (snapshot reached) addition/deletion work
    step_reports: dict[int, StepReport] = field(default_factory=dict)


def check_window(store: EvolvingGraphStore, window: Interval | None) -> Interval:
    window = window or store.full_window()
    if not (0 <= window.lo and window.hi < store.n):
        raise UnknownSnapshot(f"window {window} outside [0, {store.n})")
    return window


def run_baseline(store, window, prog, source, scheduler=None) -> EngineRun:
    """Stream through the window mutating one adjacency structure."""
    scheduler = scheduler or Scheduler()
    V = store.vertex_count
    rows = {t: TimingRow("baseline", t) for t in range(window.lo, window.hi + 1)}
    t0 = time.perf_counter()
    first = store.get_version(window.lo)
    graph = MutableGraph(first, V)
    stats = WorkStats()
    values = evaluate_full(build_csr(first, V), prog, source, scheduler, stats, track_parents=True)
    rows[window.lo].initial_ms = (time.perf_counter() - t0) * 1e3
    rows[window.lo].edge_fn_applications = stats.edge_fn
    results = {window.lo: values.copy()}
    reports = {}
    for t in range(window.lo + 1, window.hi + 1):
        rep = StepReport()
        baseline_stream_step(graph, values, store.transitions[t - 1], prog, scheduler, rep)
        results[t] = values.copy()
        reports[t] = rep
        row = rows[t]
        row.mutation_ms = rep.mutation_s * 1e3
        row.incr_add_ms = rep.add_s * 1e3
        row.incr_del_ms = rep.del_s * 1e3
        row.edge_fn_applications = rep.add_stats.edge_fn + rep.del_stats.edge_fn
    return EngineRun("baseline", results, [rows[t] for t in sorted(rows)], reports)


def run_commongraph(store, window, prog, source, engine="work-sharing", scheduler=None, threads=1,
                    plan=None) -> EngineRun:
    """Evaluate on the window's common graph, then add batches along a schedule.

    Work on a shared schedule edge is attributed to the leftmost snapshot
    below it, so per-snapshot rows sum to the run's total.
    """
    if plan is None:
        if engine == "direct-hop":
            schedule = direct_hop_schedule(store, window)
        else:
            schedule = work_sharing_schedule(store, window)
        plan = plan_schedule(store, schedule)
    report = ScheduleReport()
    results = run_plan(plan, prog, source, scheduler, report, threads)
    rows = {t: TimingRow(engine, t) for t in range(window.lo, window.hi + 1)}
    rows[window.lo].initial_ms = report.initial_s * 1e3
    rows[window.lo].edge_fn_applications += report.initial_stats.edge_fn
    for rec in report.edges:
        rows[rec.leaf].incr_add_ms += rec.seconds * 1e3
        rows[rec.leaf].edge_fn_applications += rec.stats.edge_fn
    return EngineRun(engine, results, [rows[t] for t in sorted(rows)])


def run_engine(store, window, prog, source, engine, scheduler=None, threads=1) -> EngineRun:
    if engine == "baseline":
        return run_baseline(store, window, prog, source, scheduler)
    return run_commongraph(store, window, prog, source, engine, scheduler, threads)


# ---------------------------------------------------------------------------
# result files


def format_results(values: VertexValues) -> str:
    return "".join(f"{v} {format_value(x)}\n" for v, x in enumerate(values.values))


def parse_results(text: str) -> list[float]:
    out = []
    for line in text.splitlines():
        if line.strip():
            _, val = line.split()
            out.append(float(val))
    return out


def result_path(out: Path, algorithm: str, engine: str, t: int) -> Path:
    return Path(out) / algorithm / engine / f"t{t:04d}.txt"


def write_run(out: Path, algorithm: str, run: EngineRun) -> None:
    for t, vals in run.results.items():
        path = result_path(out, algorithm, run.engine, t)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_results(vals))


def write_timing(path: Path, rows: list[TimingRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for row in rows:
            w.writerow(row.as_csv())


def run_query(config: ExperimentConfig, out: Path, store: EvolvingGraphStore | None = None) -> dict:
    """Run every requested (algorithm, engine) pair and write results and timing."""
    store = store or EvolvingGraphStore.load(config.store)
    window = check_window(store, config.window)
    scheduler = Scheduler(config.mode)
    out = Path(out)
    runs = {}
    for algo in config.algorithms():
        prog = get_program(algo)
        rows = []
        for engine in config.engines():
            run = run_engine(store, window, prog, config.source, engine, scheduler, config.threads)
            write_run(out, algo, run)
            rows.extend(run.timing)
            runs[(algo, engine)] = run
        write_timing(out / algo / "timing.csv", rows)
    return runs


# ---------------------------------------------------------------------------
# verification


def values_match(expected: float, actual: float, prog: VertexProgram) -> bool:
    if expected == actual:
        return True
    if prog.name == "viterbi":
        return math.isclose(expected, actual, rel_tol=VITERBI_RTOL, abs_tol=0.0)
    return False


def first_mismatch(expected, actual, prog: VertexProgram) -> int | None:
    """Index of the first differing vertex, ``len`` on a length mismatch, else None."""
    expected = expected.values if isinstance(expected, VertexValues) else expected
    actual = actual.values if isinstance(actual, VertexValues) else actual
    for v, (e, a) in enumerate(zip(expected, actual)):
        if not values_match(e, a, prog):
            return v
    if len(expected) != len(actual):
        return min(len(expected), len(actual))
    return None


@dataclass
class Mismatch:
    algorithm: str
    engine: str
    snapshot: int
    vertex: int
    expected: float
    actual: float

    def __str__(self):
        return (f"FAIL {self.algorithm} {self.engine} snapshot {self.snapshot}: vertex {self.vertex} "
                f"expected {format_value(self.expected)} got {format_value(self.actual)}")


def reference_results(store, window, prog, source, scheduler=None) -> dict[int, VertexValues]:
    V = store.vertex_count
    return {
        t: evaluate_full(build_csr(store.get_version(t), V), prog, source, scheduler)
        for t in range(window.lo, window.hi + 1)
    }


def verify(store, window, algorithms, source, engines=ENGINES, scheduler=None, results_dir=None,
           log=print) -> list[Mismatch]:
    """Compare every engine (or saved result files) against from-scratch evaluation."""
    window = check_window(store, window)
    failures = []
    for algo in algorithms:
        prog = get_program(algo)
        ref = reference_results(store, window, prog, source, scheduler)
        for engine in engines:
            if results_dir is not None:
                got = {}
                for t in ref:
                    path = result_path(results_dir, prog.name, engine, t)
                    got[t] = parse_results(path.read_text())
            else:
                got = run_engine(store, window, prog, source, engine, scheduler).results
            bad = None
            for t in sorted(ref):
                v = first_mismatch(ref[t], got[t], prog)
                if v is not None:
                    exp = ref[t].values[v] if v < len(ref[t]) else math.nan
                    act = got[t][v] if v < len(got[t]) else math.nan
                    bad = Mismatch(prog.name, engine, t, v, exp, act)
                    break
            if bad is None:
                log(f"PASS {prog.name} {engine} window {window}")
            else:
                log(str(bad))
                failures.append(bad)
    return failures
