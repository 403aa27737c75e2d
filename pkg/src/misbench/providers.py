"""Probability-map providers consumed by the tree search.

A provider is any callable ``(G_res, m, rng) -> ndarray`` returning an
``(G_res.n, m)`` array with entries in [0, 1].
"""

from __future__ import annotations

import io
import os
import select
import shlex
import socket
import subprocess
import threading

import numpy as np

from .graph import Graph


class ProviderError(RuntimeError):
    pass


def uniform_random_maps(n_res: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((n_res, m))


def degree_heuristic_maps(G_res: Graph, m: int, rng: np.random.Generator, noise: float = 0.05):
    """Low-degree-first scores ``1 - deg/max_deg`` plus per-column noise in [0, noise]."""
    deg = G_res.degrees.astype(float)
    top = max(float(deg.max()) if G_res.n else 0.0, 1.0)
    base = 1.0 - deg / top
    maps = base[:, None] + rng.uniform(0.0, noise, size=(G_res.n, m))
    return np.clip(maps, 0.0, 1.0)


def encode_request(G_res: Graph, m: int) -> str:
    edges = G_res.edges()
    out = io.StringIO()
    out.write(f"{G_res.n} {len(edges)} {m}\n")
    for u, v in edges:
        out.write(f"{u} {v}\n")
    out.write(" ".join(str(int(w)) for w in G_res.weights) + "\n")
    return out.getvalue()


def decode_request(lines) -> tuple[int, list[tuple[int, int]], list[int], int]:
    """Inverse of :func:`encode_request`, for writing providers in Python."""
    it = iter(lines)
    n, m_edges, m_maps = (int(x) for x in next(it).split())
    edges = [tuple(int(x) for x in next(it).split()) for _ in range(m_edges)]
    weights = [int(x) for x in next(it).split()]
    return n, edges, weights, m_maps


def parse_response(rows: list[str], n: int, m: int) -> np.ndarray:
    if len(rows) != n:
        raise ProviderError(f"provider returned {len(rows)} rows, expected {n}")
    out = np.empty((n, m))
    for i, line in enumerate(rows):
        parts = line.split()
        if len(parts) != m:
            raise ProviderError(f"row {i} has {len(parts)} values, expected {m}")
        try:
            vals = [float(x) for x in parts]
        except ValueError as exc:
            raise ProviderError(f"row {i} is not numeric: {line.strip()!r}") from exc
        out[i] = vals
    if not np.all(np.isfinite(out)):
        raise ProviderError("provider returned non-finite values")
    return np.clip(out, 0.0, 1.0)


class ExternalProvider:
    """Talks the line protocol to a helper process or a TCP service.

    ``endpoint`` is either ``tcp://host:port`` (one connection per request)
    or a command line; the command is spawned once and serves requests
    sequentially over stdin/stdout.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()

    def __call__(self, G_res: Graph, m: int, rng=None) -> np.ndarray:
        return external_maps(G_res, self, m)

    def _exchange_process(self, request: str, n: int) -> list[str]:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.endpoint),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    bufsize=0,
                )
            except OSError as exc:
                raise ProviderError(f"cannot start provider {self.endpoint!r}: {exc}") from exc
        proc = self._proc
        fd = proc.stdout.fileno()
        buf = b""
        try:
            proc.stdin.write(request.encode())
            proc.stdin.flush()
            while buf.count(b"\n") < n:
                ready, _, _ = select.select([fd], [], [], self.timeout)
                if not ready:
                    raise ProviderError(f"provider {self.endpoint!r} timed out")
                chunk = os.read(fd, 65536)
                if not chunk:
                    got = buf.count(b"\n")
                    raise ProviderError(
                        f"provider {self.endpoint!r} closed its output after {got} of {n} rows"
                    )
                buf += chunk
            # anything beyond n rows, already sent or arriving right behind, is a protocol error
            rows = buf.decode().splitlines(keepends=True)
            extra = len(rows) - n
            if not extra and select.select([fd], [], [], 0.005)[0]:
                extra = os.read(fd, 65536).count(b"\n") or 1
        except (BrokenPipeError, OSError) as exc:
            raise ProviderError(f"provider {self.endpoint!r} failed: {exc}") from exc
        if extra:
            self.close()
            raise ProviderError(f"provider returned at least {n + extra} rows, expected {n}")
        return rows

    def _exchange_socket(self, request: str) -> list[str]:
        host, _, port = self.endpoint[len("tcp://") :].rpartition(":")
        try:
            with socket.create_connection((host, int(port)), timeout=self.timeout) as sock:
                sock.sendall(request.encode())
                sock.shutdown(socket.SHUT_WR)
                chunks = []
                while data := sock.recv(65536):
                    chunks.append(data)
        except (OSError, ValueError) as exc:
            raise ProviderError(f"provider {self.endpoint!r} unreachable: {exc}") from exc
        return [ln for ln in b"".join(chunks).decode().splitlines() if ln.strip()]

    def request(self, G_res: Graph, m: int) -> list[str]:
        payload = encode_request(G_res, m)
        with self._lock:
            if self.endpoint.startswith("tcp://"):
                return self._exchange_socket(payload)
            return self._exchange_process(payload, G_res.n)

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None


def external_maps(G_res: Graph, endpoint, m: int) -> np.ndarray:
    """Fetch maps for ``G_res`` from an external provider, clipped to [0, 1]."""
    prov = endpoint if isinstance(endpoint, ExternalProvider) else ExternalProvider(endpoint)
    try:
        rows = prov.request(G_res, m)
    finally:
        if prov is not endpoint:
            prov.close()
    return parse_response(rows, G_res.n, m)


def make_provider(spec: str):
    """``random`` | ``degree`` | ``external:<endpoint>`` -> provider callable."""
    if spec in ("random", "uniform"):
        return lambda G_res, m, rng: uniform_random_maps(G_res.n, m, rng)
    if spec == "degree":
        return degree_heuristic_maps
    if spec.startswith("external:"):
        return ExternalProvider(spec[len("external:") :])
    raise ValueError(f"unknown provider {spec!r}")
