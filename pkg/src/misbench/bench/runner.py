"""Batch solving with per-instance seeds, watchdogs and crash-safe results."""

from __future__ import annotations

import dataclasses
import logging
import os
import threading
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exact import exact_mwis
from ..graph import Graph, is_independent_set, set_weight
from ..treesearch import SearchConfig, tree_search
from .io import ResultsWriter, parse_graph

log = logging.getLogger(__name__)

SOLVERS = ("treesearch", "exact", "greedy-maximal")
WATCHDOG_FACTOR = 1.5
THREADS_ENV = "MISBENCH_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class InstanceResult:
    instance: str
    solver: str
    config: str
    found: bool
    best_weight: int | None
    time_to_best: float
    total_time: float
    steps: int
    seed: int
    dataset: str = ""
    solutions_found: int = 0
    best_set: list[int] = field(default_factory=list)
    optimum: int | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> InstanceResult:
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def instance_seed(seed: int, index: int) -> int:
    state = np.random.SeedSequence([seed & (2**64 - 1), index]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def greedy_maximal(G: Graph) -> list[int]:
    """Repeatedly take a minimum-degree vertex (lowest id on ties) and drop its neighbors."""
    alive = set(range(G.n))
    deg = G.degrees.tolist()
    adj = G.adj
    out = []
    while alive:
        v = min(alive, key=lambda u: (deg[u], u))
        out.append(v)
        gone = [v] + [u for u in adj[v] if u in alive]
        for u in gone:
            alive.discard(u)
        for u in gone:
            for x in adj[u]:
                if x in alive:
                    deg[x] -= 1
    return sorted(out)


def solve_graph(G: Graph, cfg: SearchConfig, solver: str = "treesearch") -> dict:
    """Run one solver on one graph; the watchdog cancels at 1.5x the time limit."""
    t0 = time.perf_counter()
    if solver == "treesearch":
        cancel = threading.Event()
        timer = threading.Timer(WATCHDOG_FACTOR * cfg.time_limit, cancel.set)
        timer.daemon = True
        timer.start()
        try:
            rec = tree_search(G, cfg, cancel)
        finally:
            timer.cancel()
        return {
            "found": rec.found,
            "best_set": rec.best_set,
            "time_to_best": rec.time_to_best,
            "total_time": rec.total_time,
            "steps": rec.steps,
            "solutions_found": rec.solutions_found,
            "termination": rec.termination.value,
        }
    if solver == "exact":
        S, w, proven = exact_mwis(G, cfg.time_limit)
        total = time.perf_counter() - t0
        return {"found": True, "best_set": sorted(S), "time_to_best": total,
                "total_time": total, "steps": 0, "solutions_found": 1, "proven_optimal": proven}
    if solver == "greedy-maximal":
        S = greedy_maximal(G)
        total = time.perf_counter() - t0
        return {"found": True, "best_set": S, "time_to_best": total,
                "total_time": total, "steps": 1, "solutions_found": 1}
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def _run_one(path, index: int, cfg: SearchConfig, solver: str, weighted: bool,
             optimum, dataset: str) -> InstanceResult:
    seed = instance_seed(cfg.seed, index)
    name = str(path)
    try:
        G = path if isinstance(path, Graph) else parse_graph(path)
        if isinstance(path, Graph):
            name = f"graph-{index}"
        if not weighted and not G.unweighted:
            G = G.with_weights(np.ones(G.n, dtype=np.int64))
        out = solve_graph(G, dataclasses.replace(cfg, seed=seed), solver)
        S = out["best_set"]
        if out["found"] and not is_independent_set(G, S):
            raise RuntimeError("solver reported a set that is not independent")
        return InstanceResult(
            instance=name, solver=solver, config=cfg.fingerprint(), found=out["found"],
            best_weight=set_weight(G, S) if out["found"] else None,
            time_to_best=out["time_to_best"], total_time=out["total_time"],
            steps=out["steps"], seed=seed, dataset=dataset,
            solutions_found=out["solutions_found"], best_set=S, optimum=optimum,
        )
    except Exception as exc:  # recorded, never aborts the batch
        log.warning("instance %s failed: %s", name, exc)
        return InstanceResult(
            instance=name, solver=solver, config=cfg.fingerprint(), found=False,
            best_weight=None, time_to_best=0.0, total_time=0.0, steps=0, seed=seed,
            dataset=dataset, optimum=optimum, error=f"{type(exc).__name__}: {exc}",
        )


def run_benchmark(
    instances,
    cfg: SearchConfig,
    solver: str = "treesearch",
    optima=None,
    results_path=None,
    dataset: str = "",
    weighted: bool = True,
    workers: int = 1,
) -> list[InstanceResult]:
    """Solve every instance independently; stream records to ``results_path``.

    ``instances`` may mix file paths and in-memory graphs. ``optima`` is a
    sequence aligned with ``instances`` or a mapping keyed by path string.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    instances = list(instances)

    def opt_for(i, inst):
        if optima is None:
            return None
        if isinstance(optima, dict):
            return optima.get(str(inst), optima.get(Path(str(inst)).name))
        return optima[i]

    jobs = [(inst, i, cfg, solver, weighted, opt_for(i, inst), dataset)
            for i, inst in enumerate(instances)]
    writer = ResultsWriter(results_path) if results_path else None
    results: list[InstanceResult] = []
    try:
        if workers <= 1:
            for job in jobs:
                res = _run_one(*job)
                results.append(res)
                if writer:
                    writer.write(res.as_dict())
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_one, *job) for job in jobs]
                for fut in futures:
                    res = fut.result()
                    results.append(res)
                    if writer:
                        writer.write(res.as_dict())
    finally:
        if writer:
            writer.close()
    return results
