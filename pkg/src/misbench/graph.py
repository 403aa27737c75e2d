"""Immutable weighted graphs and tri-state vertex labelings."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class Label(IntEnum):
    EXCLUDED = 0
    INCLUDED = 1
    UNLABELED = -1


EXCLUDED = Label.EXCLUDED
INCLUDED = Label.INCLUDED
UNLABELED = Label.UNLABELED


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in CSR layout with positive integer vertex weights.

    ``indptr``/``indices`` hold the sorted neighbor lists; ``weights`` is int64.
    Build instances through :func:`build_graph` rather than directly.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def adj(self) -> list[list[int]]:
        """Neighbor lists as plain Python lists, for pure-Python hot loops."""
        ind = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [ind[ptr[v] : ptr[v + 1]] for v in range(self.n)]

    @cached_property
    def adj_sets(self) -> list[frozenset[int]]:
        return [frozenset(a) for a in self.adj]

    @cached_property
    def unweighted(self) -> bool:
        return bool(np.all(self.weights == 1))

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = int(np.searchsorted(nb, v))
        return i < len(nb) and int(nb[i]) == v

    def edges(self) -> list[tuple[int, int]]:
        """Each undirected edge once as ``(u, v)`` with ``u < v``, ascending."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def total_weight(self) -> int:
        return int(self.weights.sum())

    def with_weights(self, weights: Sequence[int]) -> Graph:
        w = _check_weights(self.n, weights)
        return Graph(self.n, self.indptr, self.indices, w)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.indices.tobytes(), self.weights.tobytes()))

    def __repr__(self) -> str:
        kind = "unweighted" if self.unweighted else "weighted"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def _check_weights(n: int, weights) -> np.ndarray:
    if weights is None:
        return np.ones(n, dtype=np.int64)
    w = np.asarray(weights, dtype=np.int64)
    if w.shape != (n,):
        raise GraphError(f"expected {n} weights, got {w.shape[0] if w.ndim else 0}")
    if n and w.min() < 1:
        bad = int(np.argmin(w))
        raise GraphError(f"weight of vertex {bad} is {int(w[bad])}; weights must be >= 1")
    return w


def build_graph(n: int, edges: Iterable[tuple[int, int]], weights=None) -> Graph:
    """Build a graph, dropping self-loops and duplicate edges.

    >>> build_graph(3, [(0, 1), (1, 2), (2, 0), (0, 0), (1, 0)]).m
    3
    """
    if n < 0:
        raise GraphError("vertex count must be non-negative")
    w = _check_weights(n, weights)
    e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if len(e) and (e.min() < 0 or e.max() >= n):
        bad = e[(e < 0).any(axis=1) | (e >= n).any(axis=1)][0]
        raise GraphError(f"edge ({bad[0]}, {bad[1]}) has a vertex id outside [0, {n})")
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]]) if len(e) else e
    if len(both):
        both = np.unique(both, axis=0)
    indptr = np.zeros(n + 1, dtype=np.int64)
    if len(both):
        np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
    indices = both[:, 1].copy() if len(both) else np.zeros(0, dtype=np.int64)
    return Graph(n, indptr, indices, w)


def from_adjacency(adj: Sequence[Iterable[int]], weights=None) -> Graph:
    return build_graph(len(adj), [(u, v) for u, nb in enumerate(adj) for v in nb], weights)


def _check_ids(G: Graph, S: Iterable[int]) -> list[int]:
    ids = [int(v) for v in S]
    for v in ids:
        if not 0 <= v < G.n:
            raise GraphError(f"vertex {v} out of range for graph with {G.n} vertices")
    return ids


def is_independent_set(G: Graph, S: Iterable[int]) -> bool:
    ids = _check_ids(G, S)
    members = set(ids)
    adj = G.adj
    return all(members.isdisjoint(adj[v]) for v in ids)


def set_weight(G: Graph, S: Iterable[int]) -> int:
    ids = _check_ids(G, S)
    if len(set(ids)) != len(ids):
        raise GraphError("vertex set contains duplicates")
    return int(G.weights[ids].sum()) if ids else 0


@dataclass(eq=False)
class VertexLabeling:
    """Partial solution: one of EXCLUDED / INCLUDED / UNLABELED per vertex."""

    states: np.ndarray
    labeled_count: int = field(default=-1)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int8)
        if self.labeled_count < 0:
            self.labeled_count = int(np.count_nonzero(self.states != UNLABELED))

    @classmethod
    def empty(cls, n: int) -> VertexLabeling:
        return cls(np.full(n, UNLABELED, dtype=np.int8), 0)

    @classmethod
    def from_dict(cls, n: int, labels: dict[int, int]) -> VertexLabeling:
        lab = cls.empty(n)
        for v, s in labels.items():
            lab.set(v, s)
        return lab

    def __len__(self) -> int:
        return len(self.states)

    def copy(self) -> VertexLabeling:
        return VertexLabeling(self.states.copy(), self.labeled_count)

    def set(self, v: int, state: int) -> None:
        old = self.states[v]
        if old == UNLABELED and state != UNLABELED:
            self.labeled_count += 1
        elif old != UNLABELED and state == UNLABELED:
            self.labeled_count -= 1
        self.states[v] = state

    def include(self, G: Graph, v: int) -> None:
        """Mark ``v`` included and every neighbor excluded."""
        self.set(v, INCLUDED)
        for u in G.adj[v]:
            self.set(u, EXCLUDED)

    @property
    def complete(self) -> bool:
        return self.labeled_count == len(self.states)

    def included(self) -> list[int]:
        return np.flatnonzero(self.states == INCLUDED).tolist()

    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.states == UNLABELED)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexLabeling):
            return NotImplemented
        return np.array_equal(self.states, other.states)

    def __repr__(self) -> str:
        sym = {EXCLUDED: "0", INCLUDED: "1", UNLABELED: "_"}
        return "VertexLabeling(" + "".join(sym[int(s)] for s in self.states) + ")"


@dataclass(frozen=True)
class Violation:
    kind: str  # "adjacent-included" | "neighbor-not-excluded" | "size-mismatch"
    where: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}"


def validate_labeling(G: Graph, L: VertexLabeling) -> list[Violation]:
    """Return every violated labeling constraint; empty means valid."""
    if len(L) != G.n:
        return [Violation("size-mismatch", (len(L), G.n))]
    out = []
    st = L.states
    actual = int(np.count_nonzero(st != UNLABELED))
    if actual != L.labeled_count:
        out.append(Violation("labeled-count-mismatch", (L.labeled_count, actual)))
    flagged = set()
    for u in np.flatnonzero(st == INCLUDED).tolist():
        for v in G.adj[u]:
            if st[v] == INCLUDED:
                if u < v:
                    out.append(Violation("adjacent-included", (u, v)))
            elif st[v] == UNLABELED and v not in flagged:
                flagged.add(v)
                out.append(Violation("neighbor-not-excluded", (v,)))
    return out


def residual_subgraph(G: Graph, L: VertexLabeling) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the unlabeled vertices and its residual-to-original id map."""
    keep = L.unlabeled()
    return induced_subgraph(G, keep), keep


def induced_subgraph(G: Graph, keep: np.ndarray) -> Graph:
    keep = np.asarray(keep, dtype=np.int64)
    if len(keep) == G.n:
        return G
    remap = np.full(G.n, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    counts = G.degrees[keep]
    rows = np.repeat(np.arange(len(keep)), counts)
    starts = G.indptr[keep]
    if len(rows):
        offs = np.arange(len(rows)) - np.repeat(np.cumsum(counts) - counts, counts)
        cols = remap[G.indices[np.repeat(starts, counts) + offs]]
    else:
        cols = rows
    mask = cols >= 0
    rows, cols = rows[mask], cols[mask]
    indptr = np.zeros(len(keep) + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=len(keep)), out=indptr[1:])
    # rows are grouped and original lists sorted; remap is monotone on keep
    return Graph(len(keep), indptr, cols.astype(np.int64), G.weights[keep].copy())
