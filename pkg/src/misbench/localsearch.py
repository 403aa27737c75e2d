"""Local search polishing for complete independent sets.

Moves: free-vertex insertion and (1,2)-swaps; on weighted graphs also
(1,1)-swaps, any move being accepted only with a strictly positive gain.
"""

from __future__ import annotations

from collections.abc import Iterable

from .graph import Graph, GraphError, is_independent_set

DEFAULT_ROUNDS = 10


class _State:
    def __init__(self, G: Graph, S: Iterable[int]):
        self.adj = G.adj
        self.adj_sets = G.adj_sets
        self.w = G.weights.tolist()
        self.in_set = [False] * G.n
        # tight[v] = number of solution vertices adjacent to v
        self.tight = [0] * G.n
        for v in S:
            self.add(v)

    def add(self, v: int) -> None:
        self.in_set[v] = True
        for u in self.adj[v]:
            self.tight[u] += 1

    def remove(self, v: int) -> None:
        self.in_set[v] = False
        for u in self.adj[v]:
            self.tight[u] -= 1

    def insert_free(self) -> bool:
        changed = False
        for v in range(len(self.in_set)):
            if not self.in_set[v] and self.tight[v] == 0:
                self.add(v)
                changed = True
        return changed

    def try_swap(self, u: int) -> bool:
        """Replace ``u`` by one or two of its 1-tight neighbors if that gains weight."""
        cand = [x for x in self.adj[u] if self.tight[x] == 1]
        if not cand:
            return False
        wu = self.w[u]
        w = self.w
        for i, x in enumerate(cand):
            nx = self.adj_sets[x]
            for y in cand[i + 1 :]:
                if y not in nx and w[x] + w[y] > wu:
                    self.remove(u)
                    self.add(x)
                    self.add(y)
                    return True
        for x in cand:
            if w[x] > wu:
                self.remove(u)
                self.add(x)
                return True
        return False

    def members(self) -> list[int]:
        return [v for v, s in enumerate(self.in_set) if s]


def improve(G: Graph, S: Iterable[int], max_rounds: int = DEFAULT_ROUNDS) -> list[int]:
    """Polish an independent set; the result is maximal and never lighter.

    >>> from misbench.graph import build_graph
    >>> improve(build_graph(3, [(0, 1), (1, 2)]), [1])
    [0, 2]
    """
    S = list(S)
    if not is_independent_set(G, S):
        raise GraphError("local search needs an independent set as input")
    st = _State(G, S)
    st.insert_free()
    for _ in range(max_rounds):
        moved = False
        for u in range(G.n):
            if st.in_set[u] and st.try_swap(u):
                moved = True
                st.insert_free()
        if not moved:
            break
    st.insert_free()
    return st.members()
