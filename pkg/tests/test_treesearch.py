import threading

import numpy as np
import pytest

from conftest import cycle, naive_mwis, path, petersen, random_graph, star, triangle
from misbench.exact import exact_mwis
from misbench.gen import gen_ba, gen_er, gen_weights
from misbench.graph import (
    EXCLUDED,
    INCLUDED,
    UNLABELED,
    GraphError,
    VertexLabeling,
    build_graph,
    is_independent_set,
    set_weight,
    validate_labeling,
)
from misbench.providers import degree_heuristic_maps, uniform_random_maps
from misbench.treesearch import (
    SearchConfig,
    SearchQueue,
    Termination,
    expand,
    pop_entry,
    pop_weights,
    prune,
    tree_search,
)


def naive_expand(G, states, column):
    # direct transcription: walk vertices by descending probability, ties by id
    st = list(states)
    for u in sorted(range(G.n), key=lambda v: (-column[v], v)):
        if st[u] == EXCLUDED or all(s != UNLABELED for s in st):
            break
        st[u] = INCLUDED
        for v in G.adj[u]:
            if st[v] == UNLABELED:
                st[v] = EXCLUDED
    return st


def labeling(states):
    return VertexLabeling.from_dict(len(states), dict(enumerate(states)))


# expand


def test_expand_star_center_first():
    G = star(3)
    child = expand(G, VertexLabeling.empty(4), [0.9, 0.1, 0.1, 0.1])
    assert child.states.tolist() == [INCLUDED, EXCLUDED, EXCLUDED, EXCLUDED]
    assert child.complete and child.included() == [0]


def test_expand_path_stops_at_excluded():
    G = path(3)
    child = expand(G, VertexLabeling.empty(3), [0.9, 0.8, 0.1])
    assert child.states.tolist() == [INCLUDED, EXCLUDED, UNLABELED]
    assert child.labeled_count == 2


def test_expand_isolated_includes_everything():
    G = build_graph(4, [])
    child = expand(G, VertexLabeling.empty(4), np.full(4, 0.3))
    assert child.included() == [0, 1, 2, 3]


def test_expand_ties_by_id():
    G = path(2)
    assert expand(G, VertexLabeling.empty(2), [0.5, 0.5]).included() == [0]


def test_expand_dimension_mismatch():
    with pytest.raises(GraphError):
        expand(triangle(), VertexLabeling.empty(3), [0.5, 0.5])


def test_expand_matches_naive(rng):
    for _ in range(300):
        G = random_graph(rng, int(rng.integers(1, 12)), float(rng.random()))
        # a valid starting labeling: include a random independent set, exclude its neighborhood
        L = VertexLabeling.empty(G.n)
        for v in rng.permutation(G.n)[: int(rng.integers(0, 3))]:
            if L.states[v] == UNLABELED:
                L.include(G, int(v))
        col = np.round(rng.random(G.n), 1)  # coarse values force ties
        child = expand(G, L, col)
        assert child.states.tolist() == naive_expand(G, L.states.tolist(), col)
        assert validate_labeling(G, child) == []
        # never unlabels, never decreases labeled_count
        was = L.states != UNLABELED
        assert np.array_equal(child.states[was], L.states[was])
        assert child.labeled_count >= L.labeled_count
        first = sorted(range(G.n), key=lambda v: (-col[v], v))[0]
        if L.states[first] == UNLABELED:
            assert child.labeled_count > L.labeled_count


# queue handling


def test_prune_examples():
    q = SearchQueue()
    a, b, c, d = (labeling([UNLABELED] * 2) for _ in range(4))
    for e in (a, b, c):
        q.push(e)
    prune(q, 2)
    assert q.entries == [b, c]

    q = SearchQueue()
    q.push(a)
    prune(q, 5)
    assert q.entries == [a]

    q = SearchQueue()
    for e in (a, b, c, d):
        q.push(e)
    prune(q, 1)
    assert q.entries == [d]


def test_pop_single_entry():
    q = SearchQueue()
    a = labeling([INCLUDED, UNLABELED])
    q.push(a)
    assert pop_entry(q, True, np.random.default_rng(0)) is a
    assert len(q) == 0
    with pytest.raises(IndexError):
        pop_entry(q, False, np.random.default_rng(0))


def _pop_frequencies(entries, weighted, draws, seed):
    q = SearchQueue()
    for e in entries:
        q.push(e)
    rng = np.random.default_rng(seed)
    hits = {id(e): 0 for e in entries}
    for _ in range(draws):
        e = pop_entry(q, weighted, rng)
        hits[id(e)] += 1
        q.push(e)
    return [hits[id(e)] / draws for e in entries]


def test_weighted_pop_probabilities():
    lo = labeling([UNLABELED] * 10)
    hi = labeling([INCLUDED] + [EXCLUDED] * 8 + [UNLABELED])
    assert lo.labeled_count == 0 and hi.labeled_count == 9
    q = SearchQueue()
    q.push(lo)
    q.push(hi)
    assert np.allclose(pop_weights(q), [1 / 11, 10 / 11])
    f_lo, f_hi = _pop_frequencies([lo, hi], True, 100_000, 1)
    assert abs(f_lo - 1 / 11) < 0.01 and abs(f_hi - 10 / 11) < 0.01


def test_uniform_pop_probabilities():
    entries = [labeling([INCLUDED] * i + [UNLABELED] * (6 - i)) for i in range(5)]
    freqs = _pop_frequencies(entries, False, 100_000, 2)
    assert all(abs(f - 0.2) < 0.01 for f in freqs)


def test_queue_tracks_max_labeled():
    q = SearchQueue()
    entries = [labeling([INCLUDED] * c + [UNLABELED] * (5 - c)) for c in (2, 5, 1)]
    for e in entries:
        q.push(e)
    assert q.max_labeled == 5
    q.take(1)
    assert q.max_labeled == 2
    q.drop_oldest(1)
    assert q.max_labeled == 1


# built-in providers


def test_uniform_maps():
    rng = np.random.default_rng(3)
    assert uniform_random_maps(0, 4, rng).shape == (0, 4)
    M = uniform_random_maps(1000, 100, rng)
    assert M.shape == (1000, 100)
    assert 0.497 <= M.mean() <= 0.503
    assert M.min() >= 0.0 and M.max() < 1.0
    a = uniform_random_maps(5, 3, np.random.default_rng(9))
    b = uniform_random_maps(5, 3, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_degree_maps():
    rng = np.random.default_rng(4)
    M = degree_heuristic_maps(build_graph(3, []), 5, rng)
    assert np.all(M == 1.0)

    M = degree_heuristic_maps(star(3), 8, rng)
    assert np.all((M[0] >= 0.0) & (M[0] <= 0.05))
    assert np.all((M[1:] >= 2 / 3) & (M[1:] <= 2 / 3 + 0.05))
    assert np.all(np.abs(M[:, :1] - M) <= 0.05)

    G = gen_er(40, 0.2, seed=1)
    M = degree_heuristic_maps(G, 6, rng)
    assert M.shape == (40, 6) and M.min() >= 0 and M.max() <= 1


# the search itself


def cfg(**kw):
    base = dict(time_limit=5.0, max_steps=200, seed=0, num_prob_maps=8)
    base.update(kw)
    return SearchConfig(**base)


@pytest.mark.parametrize("reduction,ls", [(False, False), (True, False), (False, True), (True, True)])
def test_triangle(reduction, ls):
    rec = tree_search(triangle(), cfg(use_reduction=reduction, use_local_search=ls))
    assert rec.found and rec.best_weight == 1
    assert len(rec.best_set) == 1


def test_empty_graph_one_step():
    rec = tree_search(build_graph(5, []), cfg(max_steps=1))
    assert rec.best_set == [0, 1, 2, 3, 4]
    assert rec.steps == 1


def test_zero_vertices():
    rec = tree_search(build_graph(0, []), cfg())
    assert rec.found and rec.best_weight == 0 and rec.best_set == []


def test_small_graphs_reach_optimum():
    for G in (petersen(), cycle(7), path(6), star(5)):
        rec = tree_search(G, cfg(use_reduction=True, use_local_search=True))
        assert rec.best_weight == naive_mwis(G)


def test_queue_exhaustion():
    # a path of length 2 has only a handful of reachable labelings
    rec = tree_search(path(2), SearchConfig(time_limit=5.0, num_prob_maps=2))
    assert rec.termination is Termination.QUEUE_EXHAUSTED
    assert rec.best_weight == 1


@pytest.mark.parametrize("weighted_pop", [False, True])
def test_invariants_random_graphs(rng, weighted_pop):
    for i in range(6):
        G = random_graph(rng, int(rng.integers(10, 40)), 0.2, weighted=bool(i % 2))
        rec = tree_search(G, cfg(weighted_pop=weighted_pop, queue_cap=16,
                                 use_reduction=bool(i % 3 == 0), seed=i))
        assert rec.found
        assert is_independent_set(G, rec.best_set)
        assert set_weight(G, rec.best_set) == rec.best_weight
        assert rec.max_queue_len <= 16
        assert 0 <= rec.time_to_best <= rec.total_time
        ws = [w for _, w in rec.history]
        ts = [t for t, _ in rec.history]
        assert ws == sorted(set(ws)) and ts == sorted(ts)
        assert ws[-1] == rec.best_weight
        assert rec.best_weight <= exact_mwis(G)[1]


def test_deterministic_single_thread():
    G = gen_weights(gen_ba(60, 2, seed=5), seed=6)
    c = cfg(use_reduction=True, use_local_search=True, weighted_pop=True, max_steps=50, seed=11)
    a, b = tree_search(G, c), tree_search(G, c)
    assert (a.best_set, a.best_weight, a.steps, a.solutions_found) == (
        b.best_set, b.best_weight, b.steps, b.solutions_found)
    assert a.termination is Termination.STEP_LIMIT


def test_seed_changes_trajectory():
    G = gen_er(60, 0.2, seed=2)
    a = tree_search(G, cfg(seed=1, max_steps=30))
    b = tree_search(G, cfg(seed=2, max_steps=30))
    assert (a.best_set, a.solutions_found) != (b.best_set, b.solutions_found)


def test_time_limit_returns_best_so_far():
    G = gen_er(150, 0.1, seed=3)
    rec = tree_search(G, SearchConfig(time_limit=0.5, seed=0))
    assert rec.termination is Termination.TIME_LIMIT
    assert rec.found and is_independent_set(G, rec.best_set)
    assert rec.total_time < 2.0


def test_cancel():
    ev = threading.Event()
    ev.set()
    rec = tree_search(gen_er(50, 0.1, seed=1), SearchConfig(time_limit=10), cancel=ev)
    assert rec.termination is Termination.CANCELLED
    assert rec.steps == 0 and not rec.found


def test_threads():
    G = gen_weights(gen_er(80, 0.15, seed=7), seed=8)
    rec = tree_search(G, cfg(threads=3, max_steps=150, use_local_search=True, queue_cap=20))
    assert rec.found and is_independent_set(G, rec.best_set)
    assert set_weight(G, rec.best_set) == rec.best_weight
    assert rec.max_queue_len <= 20
    assert rec.steps >= 150


def test_custom_provider_and_shape_check():
    G = gen_er(20, 0.2, seed=1)

    def ones(G_res, m, rng):
        return np.ones((G_res.n, m))

    rec = tree_search(G, cfg(provider=ones, max_steps=5))
    assert rec.found

    def short(G_res, m, rng):
        return np.ones((G_res.n, m + 1))

    with pytest.raises(GraphError):
        tree_search(G, cfg(provider=short))


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(num_prob_maps=0)
    with pytest.raises(ValueError):
        SearchConfig(queue_cap=0)
    with pytest.raises(ValueError):
        SearchConfig(threads=0)
    assert SearchConfig(use_reduction=True, use_local_search=True).fingerprint() == "m32+r+ls+random"
