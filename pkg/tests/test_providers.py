import socket
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import path, triangle
from misbench.gen import gen_er
from misbench.graph import build_graph, is_independent_set
from misbench.providers import (
    ExternalProvider,
    ProviderError,
    decode_request,
    encode_request,
    external_maps,
    make_provider,
    parse_response,
)
from misbench.treesearch import SearchConfig, tree_search

CONST = f"{sys.executable} -m misbench.constant_provider"


def test_encode_request():
    G = build_graph(3, [(1, 0), (1, 2)], [4, 5, 6])
    text = encode_request(G, 7)
    assert text == "3 2 7\n0 1\n1 2\n4 5 6\n"
    assert decode_request(text.splitlines()) == (3, [(0, 1), (1, 2)], [4, 5, 6], 7)


def test_parse_response():
    M = parse_response(["0.5 1.7\n", "-2 0.25\n"], 2, 2)
    assert M.tolist() == [[0.5, 1.0], [0.0, 0.25]]
    with pytest.raises(ProviderError):
        parse_response(["0.5 0.5"], 2, 2)
    with pytest.raises(ProviderError):
        parse_response(["0.5"], 1, 2)
    with pytest.raises(ProviderError):
        parse_response(["0.5 abc"], 1, 2)
    with pytest.raises(ProviderError):
        parse_response(["nan 0.5"], 1, 2)


def test_echo_provider_round_trip():
    M = external_maps(path(4), CONST, 3)
    assert M.shape == (4, 3) and np.all(M == 0.5)


def test_persistent_process_serves_many_requests():
    prov = ExternalProvider(CONST + " --value 0.25")
    try:
        for n in (1, 5, 2):
            M = prov(build_graph(n, []), 2)
            assert M.shape == (n, 2) and np.all(M == 0.25)
    finally:
        prov.close()


def test_wrong_row_count():
    with pytest.raises(ProviderError, match="rows"):
        external_maps(triangle(), CONST + " --extra-rows 1", 2)
    # too few rows: the helper keeps waiting for the next request, so only the timeout fires
    short = ExternalProvider(CONST + " --extra-rows -1", timeout=1.0)
    try:
        with pytest.raises(ProviderError, match="timed out"):
            external_maps(triangle(), short, 2)
    finally:
        short.close()


def test_clipping():
    M = external_maps(triangle(), CONST + " --value 1.7", 2)
    assert np.all(M == 1.0)


def test_unreachable():
    with pytest.raises(ProviderError):
        external_maps(triangle(), "/nonexistent/provider-binary", 2)
    with FreePort() as port:
        pass
    with pytest.raises(ProviderError):
        external_maps(triangle(), f"tcp://127.0.0.1:{port}", 2)


class FreePort:
    def __enter__(self):
        self.sock = socket.socket()
        self.sock.bind(("127.0.0.1", 0))
        return self.sock.getsockname()[1]

    def __exit__(self, *exc):
        self.sock.close()


@pytest.fixture
def tcp_provider():
    with FreePort() as port:
        pass
    proc = subprocess.Popen([sys.executable, "-m", "misbench.constant_provider",
                             "--port", str(port), "--value", "0.75"])
    deadline = time.time() + 10
    while time.time() < deadline:
        try:
            socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
            break
        except OSError:
            time.sleep(0.05)
    yield f"tcp://127.0.0.1:{port}"
    proc.terminate()
    proc.wait()


def test_tcp_round_trip(tcp_provider):
    M = external_maps(path(5), tcp_provider, 4)
    assert M.shape == (5, 4) and np.all(M == 0.75)


def test_tree_search_with_external_provider():
    G = gen_er(30, 0.2, seed=3)
    rec = tree_search(G, SearchConfig(provider="external:" + CONST, max_steps=20,
                                      num_prob_maps=4, time_limit=30))
    assert rec.found and is_independent_set(G, rec.best_set)


def test_tree_search_aborts_on_provider_failure():
    G = gen_er(30, 0.2, seed=3)
    with pytest.raises(ProviderError):
        tree_search(G, SearchConfig(provider="external:" + CONST + " --extra-rows 2",
                                    max_steps=5, time_limit=30))


def test_make_provider():
    rng = np.random.default_rng(0)
    G = path(3)
    assert make_provider("random")(G, 2, rng).shape == (3, 2)
    assert make_provider("degree")(G, 2, rng).shape == (3, 2)
    assert isinstance(make_provider("external:foo"), ExternalProvider)
    with pytest.raises(ValueError):
        make_provider("gcn")
