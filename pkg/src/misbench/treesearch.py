"""Guided tree search over partial labelings.

The search keeps a list of partial solutions. Each step pops one, optionally
reduces it, asks a provider for ``m`` probability maps over the residual
graph, and greedily extends the labeling once per map. Complete labelings are
scored (optionally after local search), partial ones go back into the list.
"""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import (
    EXCLUDED,
    INCLUDED,
    UNLABELED,
    Graph,
    GraphError,
    VertexLabeling,
    is_independent_set,
    set_weight,
)
from .localsearch import DEFAULT_ROUNDS, improve
from .providers import make_provider
from .reduce import identity_trace, lift, reduce_graph

Provider = Callable[[Graph, int, np.random.Generator], np.ndarray]


class Termination(str, enum.Enum):
    TIME_LIMIT = "TimeLimit"
    QUEUE_EXHAUSTED = "QueueExhausted"
    CANCELLED = "Cancelled"
    STEP_LIMIT = "StepLimit"


@dataclass
class SearchConfig:
    num_prob_maps: int = 32
    use_reduction: bool = False
    use_local_search: bool = False
    queue_cap: int | None = None
    weighted_pop: bool = False
    provider: str | Provider = "random"
    threads: int = 1
    time_limit: float = 15.0
    seed: int = 0
    max_steps: int | None = None
    local_search_rounds: int = DEFAULT_ROUNDS

    def __post_init__(self):
        if self.num_prob_maps < 1:
            raise ValueError("num_prob_maps must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.queue_cap is not None and self.queue_cap < 1:
            raise ValueError("queue_cap must be >= 1 when set")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")

    def fingerprint(self) -> str:
        flags = [
            f"m{self.num_prob_maps}",
            "r" if self.use_reduction else "",
            "ls" if self.use_local_search else "",
            f"qp{self.queue_cap}" if self.queue_cap else "",
            "wp" if self.weighted_pop else "",
            f"mt{self.threads}" if self.threads > 1 else "",
            self.provider if isinstance(self.provider, str) else "custom",
        ]
        return "+".join(f for f in flags if f)


@dataclass
class SolveRecord:
    best_set: list[int]
    best_weight: int
    time_to_best: float
    total_time: float
    steps: int
    solutions_found: int
    termination: Termination
    max_queue_len: int = 0
    # (seconds since start, weight) at every strict improvement
    history: list[tuple[float, int]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.solutions_found > 0

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "best_weight": self.best_weight if self.found else None,
            "best_set": self.best_set,
            "time_to_best": self.time_to_best,
            "total_time": self.total_time,
            "steps": self.steps,
            "solutions_found": self.solutions_found,
            "termination": self.termination.value,
            "max_queue_len": self.max_queue_len,
        }


class SearchQueue:
    """List of partial labelings; the oldest entries sit at the front.

    A histogram of labeled counts is kept so weighted pops can use
    rejection sampling against the current maximum instead of an O(len) scan.
    """

    def __init__(self, capacity: int | None = None):
        self.capacity = capacity
        self.entries: list[VertexLabeling] = []
        self._hist: dict[int, int] = {}
        self._max = -1

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def push(self, L: VertexLabeling) -> None:
        self.entries.append(L)
        c = L.labeled_count
        self._hist[c] = self._hist.get(c, 0) + 1
        if c > self._max:
            self._max = c

    def _forget(self, c: int) -> None:
        left = self._hist[c] - 1
        if left:
            self._hist[c] = left
            return
        del self._hist[c]
        if c == self._max:
            self._max = max(self._hist, default=-1)

    def take(self, i: int) -> VertexLabeling:
        L = self.entries.pop(i)
        self._forget(L.labeled_count)
        return L

    def drop_oldest(self, k: int) -> None:
        for L in self.entries[:k]:
            self._forget(L.labeled_count)
        del self.entries[:k]

    @property
    def max_labeled(self) -> int:
        return self._max


def prune(queue: SearchQueue, cap: int | None = None) -> None:
    """Drop the oldest entries until at most ``cap`` remain."""
    cap = queue.capacity if cap is None else cap
    if cap is None:
        return
    if cap < 1:
        raise ValueError("cap must be >= 1")
    excess = len(queue) - cap
    if excess > 0:
        queue.drop_oldest(excess)


def pop_weights(queue: SearchQueue) -> np.ndarray:
    """Selection probabilities for weighted pop: proportional to labeled_count + 1."""
    w = np.fromiter((e.labeled_count + 1 for e in queue), dtype=float, count=len(queue))
    return w / w.sum()


def pop_entry(queue: SearchQueue, weighted: bool, rng: np.random.Generator) -> VertexLabeling:
    """Remove and return an entry, uniformly or with odds labeled_count + 1."""
    k = len(queue)
    if not k:
        raise IndexError("pop from an empty search queue")
    if k == 1:
        return queue.take(0)
    if not weighted:
        return queue.take(int(rng.integers(k)))
    # accept index i with probability (c_i + 1) / (c_max + 1)
    top = queue.max_labeled + 1
    entries = queue.entries
    while True:
        i, u = rng.integers(k), rng.random()
        if u * top < entries[i].labeled_count + 1:
            return queue.take(int(i))


def expand(G_res: Graph, L: VertexLabeling, column) -> VertexLabeling:
    """Greedy extension following one probability map (descending, ties by id).

    Stops at the first vertex that is already excluded.
    """
    column = np.asarray(column, dtype=float)
    if column.shape != (G_res.n,):
        raise GraphError(f"probability vector has shape {column.shape}, expected ({G_res.n},)")
    if len(L) != G_res.n:
        raise GraphError(f"labeling has {len(L)} entries, residual graph has {G_res.n}")
    order = np.argsort(-column, kind="stable").tolist()
    st = L.states.tolist()
    cnt = L.labeled_count
    n = G_res.n
    adj = G_res.adj
    for u in order:
        s = st[u]
        if s == EXCLUDED or cnt == n:
            break
        if s == UNLABELED:
            st[u] = INCLUDED
            cnt += 1
        for v in adj[u]:
            if st[v] == UNLABELED:
                st[v] = EXCLUDED
                cnt += 1
    return VertexLabeling(np.array(st, dtype=np.int8), cnt)


class _Best:
    """Shared incumbent; updates are compare-and-swap on weight under a lock."""

    def __init__(self, start: float):
        self.lock = threading.Lock()
        self.start = start
        self.weight = -1
        self.set: list[int] = []
        self.time = 0.0
        self.count = 0
        self.history: list[tuple[float, int]] = []

    def offer(self, S: list[int], w: int) -> bool:
        with self.lock:
            self.count += 1
            if w > self.weight:
                self.weight, self.set = w, S
                self.time = time.perf_counter() - self.start
                self.history.append((self.time, w))
                return True
            return False


class _Search:
    def __init__(self, G: Graph, cfg: SearchConfig, cancel: threading.Event | None):
        self.G = G
        self.cfg = cfg
        self.provider = make_provider(cfg.provider) if isinstance(cfg.provider, str) else cfg.provider
        self.start = time.perf_counter()
        self.deadline = self.start + cfg.time_limit
        self.cancel = cancel or threading.Event()
        self.best = _Best(self.start)
        self.steps = 0
        self.steps_lock = threading.Lock()
        self.max_queue_len = 0
        self.reason: Termination | None = None

    def stop_reason(self) -> Termination | None:
        if self.cancel.is_set():
            return Termination.CANCELLED
        if time.perf_counter() >= self.deadline:
            return Termination.TIME_LIMIT
        if self.cfg.max_steps is not None and self.steps >= self.cfg.max_steps:
            return Termination.STEP_LIMIT
        return None

    def report(self, full: VertexLabeling) -> None:
        S = full.included()
        if self.cfg.use_local_search:
            S = improve(self.G, S, self.cfg.local_search_rounds)
        assert is_independent_set(self.G, S), "tree search produced a dependent set"
        self.best.offer(S, set_weight(self.G, S))

    def step(self, queue: SearchQueue, rng: np.random.Generator) -> None:
        cfg = self.cfg
        L = pop_entry(queue, cfg.weighted_pop, rng)
        with self.steps_lock:
            self.steps += 1
        trace = reduce_graph(self.G, L)[1] if cfg.use_reduction else identity_trace(self.G, L)
        kernel = trace.kernel
        if kernel.n == 0:
            self.report(lift(trace, VertexLabeling.empty(0)))
            return
        maps = np.asarray(self.provider(kernel, cfg.num_prob_maps, rng), dtype=float)
        if maps.shape != (kernel.n, cfg.num_prob_maps):
            raise GraphError(
                f"provider returned maps of shape {maps.shape}, "
                f"expected ({kernel.n}, {cfg.num_prob_maps})"
            )
        fresh = VertexLabeling.empty(kernel.n)
        for j in range(cfg.num_prob_maps):
            if j and self.stop_reason() in (Termination.TIME_LIMIT, Termination.CANCELLED):
                break
            child = lift(trace, expand(kernel, fresh, maps[:, j]))
            if child.complete:
                self.report(child)
            else:
                queue.push(child)
        prune(queue)

    def run_queue(self, queue: SearchQueue, rng, until=None) -> Termination | None:
        while True:
            if not queue:
                return Termination.QUEUE_EXHAUSTED
            reason = self.stop_reason()
            if reason is not None:
                return reason
            if until is not None and until(queue):
                return None
            self.step(queue, rng)
            self.max_queue_len = max(self.max_queue_len, len(queue))


def _worker_rng(seed: int, worker: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), worker]))


def tree_search(
    G: Graph, cfg: SearchConfig | None = None, cancel: threading.Event | None = None
) -> SolveRecord:
    """Run the guided tree search until the deadline, a step cap or an empty queue."""
    cfg = cfg or SearchConfig()
    search = _Search(G, cfg, cancel)
    root = SearchQueue(cfg.queue_cap)
    root.push(VertexLabeling.empty(G.n))

    try:
        if cfg.threads == 1:
            reason = search.run_queue(root, _worker_rng(cfg.seed, 0))
        else:
            reason = _run_parallel(search, root, cfg)
    finally:
        # providers built here from a spec string are ours to shut down
        if isinstance(cfg.provider, str) and hasattr(search.provider, "close"):
            search.provider.close()

    total = time.perf_counter() - search.start
    best = search.best
    found = best.count > 0
    return SolveRecord(
        best_set=sorted(best.set) if found else [],
        best_weight=best.weight if found else 0,
        time_to_best=min(best.time, total) if found else 0.0,
        total_time=total,
        steps=search.steps,
        solutions_found=best.count,
        termination=reason,
        max_queue_len=search.max_queue_len,
        history=list(best.history),
    )


def _run_parallel(search: _Search, root: SearchQueue, cfg: SearchConfig) -> Termination:
    # warm-up: expand single-threaded until every worker can get a partial solution
    rng0 = _worker_rng(cfg.seed, 0)
    reason = search.run_queue(root, rng0, until=lambda q: len(q) >= cfg.threads)
    if reason is not None:
        return reason
    queues = [SearchQueue(cfg.queue_cap) for _ in range(cfg.threads)]
    for i, entry in enumerate(root.entries):
        queues[i % cfg.threads].push(entry)
    for q in queues:
        prune(q)
    reasons: list[Termination | None] = [None] * cfg.threads
    errors: list[BaseException] = []

    def work(i: int) -> None:
        try:
            reasons[i] = search.run_queue(queues[i], _worker_rng(cfg.seed, i + 1))
        except BaseException as exc:  # surfaced in the calling thread
            errors.append(exc)
            search.cancel.set()

    threads = [threading.Thread(target=work, args=(i,), daemon=True) for i in range(cfg.threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    for r in (Termination.CANCELLED, Termination.TIME_LIMIT, Termination.STEP_LIMIT):
        if r in reasons:
            return r
    return Termination.QUEUE_EXHAUSTED
