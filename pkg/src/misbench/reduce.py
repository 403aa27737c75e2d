"""Data reductions for M(W)IS with reversible vertex folds.

Both reducers work on the residual part of a labeling (its unlabeled
vertices) and return the extended labeling plus a :class:`ReductionTrace`.
The trace owns the kernel graph that remains after reduction; a labeling of
that kernel is turned back into a labeling of the input graph by
:func:`unfold` (or :func:`lift`, which also accepts partial kernel labelings).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .graph import (
    EXCLUDED,
    INCLUDED,
    UNLABELED,
    Graph,
    GraphError,
    VertexLabeling,
    build_graph,
    residual_subgraph,
)


@dataclass(frozen=True)
class Fold:
    node: int  # kernel-side id of the merged vertex (>= original n)
    center: int
    left: int
    right: int


@dataclass
class ReductionTrace:
    n: int
    base: VertexLabeling
    kernel: Graph
    kernel_nodes: np.ndarray  # kernel index -> internal node id
    folds: dict[int, Fold] = field(default_factory=dict)
    steps: list[tuple] = field(default_factory=list)
    offset: int = 0

    @property
    def fold_count(self) -> int:
        return sum(1 for s in self.steps if s[0] == "fold")


def identity_trace(G: Graph, L: VertexLabeling) -> ReductionTrace:
    """Trace that performs no reduction; the kernel is the plain residual graph."""
    kernel, mapping = residual_subgraph(G, L)
    offset = int(G.weights[L.states == INCLUDED].sum())
    return ReductionTrace(G.n, L.copy(), kernel, mapping, offset=offset)


class _Reducer:
    def __init__(self, G: Graph, L: VertexLabeling, weighted: bool):
        self.G = G
        self.n = G.n
        self.weighted = weighted
        self.lab = L.copy()
        res = L.unlabeled().tolist()
        alive = set(res)
        adj = G.adj
        self.adj: dict[int, set[int]] = {v: {u for u in adj[v] if u in alive} for v in res}
        self.w: dict[int, int] = {v: int(G.weights[v]) for v in res}
        self.folds: dict[int, Fold] = {}
        self.steps: list[tuple] = []
        self.next_id = G.n
        self.cheap: list[int] = []
        self.fold_q: list[int] = []
        self.dom_q: list[int] = []
        self.nbw_q: list[int] = []
        for v in res:
            self._touch(v)

    def _touch(self, v: int) -> None:
        heapq.heappush(self.cheap, v)
        heapq.heappush(self.fold_q, v)
        heapq.heappush(self.dom_q, v)
        heapq.heappush(self.nbw_q, v)

    def _remove(self, v: int) -> set[int]:
        nb = self.adj.pop(v)
        del self.w[v]
        for u in nb:
            self.adj[u].discard(v)
        return nb

    def _resolve(self, node: int, state: int) -> None:
        if node < self.n:
            self.lab.set(node, state)
            return
        f = self.folds.pop(node)
        inner = EXCLUDED if state == INCLUDED else INCLUDED
        self._resolve(f.center, inner)
        self._resolve(f.left, state)
        self._resolve(f.right, state)

    def include(self, v: int, rule: str) -> None:
        self.steps.append((rule, v))
        self._resolve(v, INCLUDED)
        nb = self._remove(v)
        touched = set()
        for u in nb:
            self._resolve(u, EXCLUDED)
            touched |= self._remove(u)
        for t in touched:
            self._touch(t)

    def exclude(self, v: int, rule: str) -> None:
        self.steps.append((rule, v))
        self._resolve(v, EXCLUDED)
        for u in self._remove(v):
            self._touch(u)

    def fold(self, v: int) -> None:
        a, b = sorted(self.adj[v])
        f = self.next_id
        self.next_id += 1
        self.folds[f] = Fold(f, v, a, b)
        self.steps.append(("fold", v, a, b, f))
        self._remove(v)
        merged = (self._remove(a) | self._remove(b)) - {v}
        self.adj[f] = merged
        self.w[f] = 1
        for u in merged:
            self.adj[u].add(f)
        # neighborhoods grew, so domination may now hold two hops out
        for u in merged:
            self._touch(u)
            for x in self.adj[u]:
                self._touch(x)
        self._touch(f)

    def _pop(self, q: list[int]):
        while q:
            v = heapq.heappop(q)
            if v in self.adj:
                return v
        return None

    def _dominated_neighbor(self, u: int):
        closed = self.adj[u] | {u}
        wu = self.w[u]
        for v in sorted(self.adj[u]):
            if len(self.adj[v]) < len(self.adj[u]):
                continue
            if self.weighted and wu < self.w[v]:
                continue
            if closed <= self.adj[v] | {v}:
                return v
        return None

    def step(self) -> bool:
        """Apply one rule; False at fixpoint."""
        # cheap rules: degree 0 / degree 1
        while (v := self._pop(self.cheap)) is not None:
            d = len(self.adj[v])
            if d == 0:
                self.include(v, "isolated")
                return True
            if d == 1:
                (x,) = self.adj[v]
                if not self.weighted or self.w[v] >= self.w[x]:
                    self.include(v, "pendant")
                    return True
        if self.weighted:
            while (v := self._pop(self.nbw_q)) is not None:
                if self.w[v] >= sum(self.w[u] for u in self.adj[v]):
                    self.include(v, "neighborhood-weight")
                    return True
        else:
            while (v := self._pop(self.fold_q)) is not None:
                if len(self.adj[v]) == 2:
                    a, b = self.adj[v]
                    if b not in self.adj[a]:
                        self.fold(v)
                        return True
        while (u := self._pop(self.dom_q)) is not None:
            v = self._dominated_neighbor(u)
            if v is not None:
                self.exclude(v, "domination")
                # u may dominate further neighbors
                heapq.heappush(self.dom_q, u)
                return True
        return False

    def run(self) -> ReductionTrace:
        while self.step():
            pass
        nodes = sorted(self.adj)
        index = {v: i for i, v in enumerate(nodes)}
        edges = [(index[u], index[v]) for u in nodes for v in self.adj[u] if u < v]
        kernel = build_graph(len(nodes), edges, [self.w[v] for v in nodes])
        offset = int(self.G.weights[self.lab.states == INCLUDED].sum()) + len(self.folds)
        return ReductionTrace(
            self.n,
            self.lab,
            kernel,
            np.asarray(nodes, dtype=np.int64),
            dict(self.folds),
            self.steps,
            offset,
        )


def reduce_unweighted(G: Graph, L: VertexLabeling | None = None):
    """Degree-0, degree-1, degree-2 fold and domination rules to a fixpoint.

    Returns ``(labeling, trace)``. Vertices merged by a still-open fold stay
    unlabeled in the returned labeling; ``trace.kernel`` is the reduced graph.
    """
    if not G.unweighted:
        raise GraphError("reduce_unweighted requires unit weights")
    L = VertexLabeling.empty(G.n) if L is None else L
    trace = _Reducer(G, L, weighted=False).run()
    return trace.base.copy(), trace


def reduce_weighted(G: Graph, L: VertexLabeling | None = None):
    """Isolated, pendant, neighborhood-weight and weighted domination rules."""
    L = VertexLabeling.empty(G.n) if L is None else L
    trace = _Reducer(G, L, weighted=True).run()
    return trace.base.copy(), trace


def reduce_graph(G: Graph, L: VertexLabeling | None = None):
    """Dispatch on the graph: unit weights use the fold-capable rule set."""
    if G.unweighted:
        return reduce_unweighted(G, L)
    return reduce_weighted(G, L)


def lift(trace: ReductionTrace, kernel_labeling: VertexLabeling) -> VertexLabeling:
    """Map a (possibly partial) kernel labeling onto the original graph.

    Open folds whose kernel vertex is unlabeled leave their three vertices
    unlabeled; the result is still a valid partial labeling.
    """
    if len(kernel_labeling) != trace.kernel.n:
        raise GraphError(
            f"kernel labeling has {len(kernel_labeling)} entries, kernel has {trace.kernel.n}"
        )
    out = trace.base.copy()
    ks = kernel_labeling.states
    nodes = trace.kernel_nodes
    plain = nodes < trace.n
    if not trace.folds:
        idx = nodes[plain]
        vals = ks[plain]
        out.states[idx] = vals
        out.labeled_count += int(np.count_nonzero(vals != UNLABELED))
        return out

    folds = trace.folds

    def resolve(node: int, state: int) -> None:
        if node < trace.n:
            out.set(node, state)
            return
        f = folds[node]
        resolve(f.center, EXCLUDED if state == INCLUDED else INCLUDED)
        resolve(f.left, state)
        resolve(f.right, state)

    for i, s in enumerate(ks.tolist()):
        if s != UNLABELED:
            resolve(int(nodes[i]), s)
    return out


def unfold(trace: ReductionTrace, kernel_labeling: VertexLabeling) -> VertexLabeling:
    """Reverse a reduction for a fully labeled kernel."""
    if not kernel_labeling.complete:
        raise GraphError("unfold needs a fully labeled kernel")
    return lift(trace, kernel_labeling)
