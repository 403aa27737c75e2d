"""Exact M(W)IS oracles and ILP/QP exporters."""

from __future__ import annotations

import io
import time

import numpy as np

from .graph import Graph, GraphError

BRUTE_FORCE_MAX_N = 26
_LOW_BITS = 20


def brute_force_mis(G: Graph) -> tuple[list[int], int]:
    """Scan all 2**n subsets and return the heaviest independent one.

    Ties go to the numerically smallest bitmask (bit i = vertex i).
    """
    n = G.n
    if n > BRUTE_FORCE_MAX_N:
        raise GraphError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        return [], 0
    adjmask = [sum(1 << u for u in G.adj[v]) for v in range(n)]
    w = G.weights.astype(np.int64)

    k = min(n, _LOW_BITS)
    lo = np.arange(1 << k, dtype=np.int64)
    lo_ok = np.ones(1 << k, dtype=bool)
    lo_w = np.zeros(1 << k, dtype=np.int64)
    low_part = (1 << k) - 1
    for v in range(k):
        has_v = ((lo >> v) & 1).astype(bool)
        lo_ok &= ~(has_v & ((lo & (adjmask[v] & low_part)) != 0))
        lo_w += has_v * w[v]

    best_w, best_mask = -1, 0
    for hi in range(1 << (n - k)):
        hi_ok, hi_w, blocked = True, 0, 0
        for j in range(n - k):
            if hi >> j & 1:
                v = k + j
                if (adjmask[v] >> k) & hi:
                    hi_ok = False
                    break
                hi_w += int(w[v])
                blocked |= adjmask[v] & low_part
        if not hi_ok:
            continue
        ok = lo_ok & ((lo & blocked) == 0)
        cand = np.where(ok, lo_w, -1)
        i = int(np.argmax(cand))
        total = int(cand[i]) + hi_w
        if total > best_w:
            best_w, best_mask = total, (hi << k) | i
    members = [v for v in range(n) if best_mask >> v & 1]
    return members, best_w


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _BranchAndReduce:
    def __init__(self, G: Graph, deadline: float):
        self.n = G.n
        self.adj = [sum(1 << u for u in G.adj[v]) for v in range(G.n)]
        self.closed = [a | (1 << v) for v, a in enumerate(self.adj)]
        self.w = [int(x) for x in G.weights]
        self.unit = G.unweighted
        self.deadline = deadline
        self.best_w = -1
        self.best_set = 0
        self.nodes = 0
        self.timed_out = False

    def weight(self, s: int) -> int:
        if self.unit:
            return s.bit_count()
        w = self.w
        return sum(w[v] for v in _bits(s))

    def reduce(self, P: int, cur: int, chosen: int):
        adj, closed, w = self.adj, self.closed, self.w
        changed = True
        while changed and P:
            changed = False
            for v in _bits(P):
                if not P >> v & 1:
                    continue
                nb = adj[v] & P
                if nb == 0 or w[v] >= self.weight(nb):
                    cur += w[v]
                    chosen |= 1 << v
                    P &= ~closed[v]
                    changed = True
            for v in _bits(P):
                if not P >> v & 1:
                    continue
                cv = closed[v]
                for u in _bits(adj[v] & P):
                    if w[u] >= w[v] and closed[u] & P & ~cv == 0:
                        P &= ~(1 << v)
                        changed = True
                        break
        return P, cur, chosen

    def clique_cover_bound(self, P: int) -> int:
        """Greedy weighted clique cover: sum of the heaviest vertex per clique."""
        adj, w = self.adj, self.w
        order = sorted(_bits(P), key=lambda v: -w[v]) if not self.unit else list(_bits(P))
        commons: list[int] = []
        bound = 0
        for v in order:
            bit = 1 << v
            for i, c in enumerate(commons):
                if c & bit:
                    commons[i] = c & adj[v]
                    break
            else:
                commons.append(adj[v])
                bound += w[v]
        return bound

    def greedy(self) -> tuple[int, int]:
        P, chosen, total = (1 << self.n) - 1, 0, 0
        while P:
            v = min(_bits(P), key=lambda u: ((self.adj[u] & P).bit_count(), -self.w[u], u))
            chosen |= 1 << v
            total += self.w[v]
            P &= ~self.closed[v]
        return chosen, total

    def solve(self):
        self.best_set, self.best_w = self.greedy()
        stack = [((1 << self.n) - 1, 0, 0)]
        while stack:
            self.nodes += 1
            if self.nodes & 255 == 0 and time.perf_counter() > self.deadline:
                self.timed_out = True
                break
            P, cur, chosen = stack.pop()
            P, cur, chosen = self.reduce(P, cur, chosen)
            if not P:
                if cur > self.best_w:
                    self.best_w, self.best_set = cur, chosen
                continue
            if cur + self.weight(P) <= self.best_w:
                continue
            if cur + self.clique_cover_bound(P) <= self.best_w:
                continue
            adj = self.adj
            v = max(_bits(P), key=lambda u: ((adj[u] & P).bit_count(), -u))
            stack.append((P & ~(1 << v), cur, chosen))
            stack.append((P & ~self.closed[v], cur + self.w[v], chosen | 1 << v))
        return [v for v in _bits(self.best_set)], self.best_w, not self.timed_out


def exact_mwis(G: Graph, time_limit: float = float("inf")) -> tuple[list[int], int, bool]:
    """Branch-and-reduce M(W)IS solver.

    Returns ``(vertices, weight, proven_optimal)``; the flag is False only
    when ``time_limit`` (seconds) ran out before the search tree was closed.
    """
    if G.n == 0:
        return [], 0, True
    deadline = time.perf_counter() + time_limit
    return _BranchAndReduce(G, deadline).solve()


def _term(coef: int, name: str) -> str:
    return name if coef == 1 else f"{coef} {name}"


def _join(terms: list[tuple[int, str]]) -> str:
    out = ""
    for i, (coef, name) in enumerate(terms):
        if i == 0:
            out = ("- " if coef < 0 else "") + _term(abs(coef), name)
        else:
            out += (" - " if coef < 0 else " + ") + _term(abs(coef), name)
    return out


def export_lp(G: Graph, sink=None) -> str:
    """Write the edge-constraint ILP for MWIS in CPLEX LP format."""
    lines = ["\\ maximum weight independent set", "Maximize"]
    obj = _join([(int(G.weights[v]), f"x{v}") for v in range(G.n)])
    lines.append(f" obj: {obj}" if obj else " obj: 0")
    lines.append("Subject To")
    for i, (u, v) in enumerate(G.edges()):
        lines.append(f" e{i}: x{u} + x{v} <= 1")
    if G.n:
        lines.append("Binary")
        lines.append(" " + " ".join(f"x{v}" for v in range(G.n)))
    lines.append("End")
    text = "\n".join(lines) + "\n"
    _emit(text, sink)
    return text


def qp_objective(G: Graph) -> str:
    """Expanded ``x^T (I - A_G) x`` with ascending index pairs."""
    terms = [(1, f"x{v}^2") for v in range(G.n)]
    terms += [(-2, f"x{u} x{v}") for u, v in G.edges()]
    return _join(terms)


def export_qp(G: Graph, sink=None) -> str:
    """Write the quadratic MIS program ``max x^T (I - A_G) x`` in CPLEX LP format."""
    if not G.unweighted:
        raise GraphError("the quadratic formulation is defined for unit weights only")
    body = qp_objective(G)
    lines = ["\\ maximum independent set, quadratic formulation", "Maximize"]
    # LP format wants quadratic objective terms in brackets, doubled and halved
    doubled = _join([(2 * c, t) for c, t in [(1, f"x{v}^2") for v in range(G.n)]]
                    + [(-4, f"x{u} * x{v}") for u, v in G.edges()])
    lines.append(f" obj: [ {doubled} ] / 2" if G.n else " obj: 0")
    lines.append(f"\\ expanded: {body}" if body else "\\ expanded: 0")
    lines.append("Subject To")
    if G.n:
        lines.append("Binary")
        lines.append(" " + " ".join(f"x{v}" for v in range(G.n)))
    lines.append("End")
    text = "\n".join(lines) + "\n"
    _emit(text, sink)
    return text


def evaluate_qp(G: Graph, x) -> int:
    """Value of ``x^T (I - A_G) x`` for a 0/1 vector ``x``."""
    x = np.asarray(x, dtype=np.int64)
    diag = int(x @ x)
    off = sum(int(x[u] * x[v]) for u, v in G.edges())
    return diag - 2 * off


def _emit(text: str, sink) -> None:
    if sink is None:
        return
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    elif isinstance(sink, io.TextIOBase) or hasattr(sink, "write"):
        sink.write(text)
    else:
        raise TypeError(f"cannot write to {type(sink).__name__}")
