import itertools

import networkx as nx
import numpy as np
import pytest

from misbench.graph import build_graph


def triangle():
    return build_graph(3, [(0, 1), (1, 2), (0, 2)])


def path(n, weights=None):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)], weights)


def cycle(n):
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves, weights=None):
    return build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], weights)


def petersen():
    g = nx.petersen_graph()
    return build_graph(10, g.edges())


def from_nx(g, weights=None):
    g = nx.convert_node_labels_to_integers(g)
    return build_graph(g.number_of_nodes(), g.edges(), weights)


def random_graph(rng, n, p, weighted=False):
    iu = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    w = rng.integers(1, 50, n) if weighted else None
    return build_graph(n, iu, w)


def naive_mwis(G):
    """Itertools oracle: best weight over every subset, for tiny graphs only."""
    best = 0
    edges = G.edges()
    w = G.weights.tolist()
    for mask in range(1 << G.n):
        if any(mask >> u & 1 and mask >> v & 1 for u, v in edges):
            continue
        best = max(best, sum(w[v] for v in range(G.n) if mask >> v & 1))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
