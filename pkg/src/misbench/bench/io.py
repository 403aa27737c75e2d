"""Graph, solution and results-file I/O (METIS, DIMACS, edge lists, JSON lines)."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

from ..graph import Graph, GraphError, build_graph

log = logging.getLogger(__name__)

FORMATS = ("metis", "dimacs", "edgelist")
_SUFFIXES = {".metis": "metis", ".graph": "metis", ".dimacs": "dimacs", ".col": "dimacs",
             ".clq": "dimacs", ".edges": "edgelist", ".txt": "edgelist", ".el": "edgelist"}


class ParseError(GraphError):
    pass


def guess_format(path) -> str:
    fmt = _SUFFIXES.get(Path(path).suffix.lower())
    if fmt is None:
        raise ParseError(f"cannot infer graph format from {path!s}; pass one of {FORMATS}")
    return fmt


def parse_graph(path, format: str | None = None) -> Graph:
    fmt = format or guess_format(path)
    text = Path(path).read_text()
    return parse_graph_text(text, fmt, source=str(path))


def parse_graph_text(text: str, format: str, source: str = "<string>") -> Graph:
    if format == "metis":
        return _parse_metis(text, source)
    if format == "dimacs":
        return _parse_dimacs(text, source)
    if format == "edgelist":
        return _parse_edgelist(text, source)
    raise ParseError(f"unknown graph format {format!r}; expected one of {FORMATS}")


def _ints(tokens, source, lineno) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"{source}:{lineno}: non-integer token ({exc})") from None


def _parse_metis(text: str, source: str) -> Graph:
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if not ln.startswith("%")]
    if not lines or not lines[0][1].split():
        raise ParseError(f"{source}: missing METIS header")
    lineno, header = lines[0]
    head = _ints(header.split(), source, lineno)
    if len(head) not in (2, 3, 4):
        raise ParseError(f"{source}:{lineno}: malformed METIS header {header!r}")
    n, m = head[0], head[1]
    fmt = f"{head[2]:03d}" if len(head) > 2 else "000"
    vertex_w, edge_w = fmt[1] == "1", fmt[2] == "1"
    if fmt[0] == "1" or (len(head) == 4 and head[3] != 1):
        raise ParseError(f"{source}: vertex sizes / multiple vertex weights are not supported")
    if edge_w:
        log.warning("%s: edge weights present and ignored", source)
    body = lines[1:]
    # trailing blank lines are not vertices
    while len(body) > n and not body[-1][1].strip():
        body.pop()
    if len(body) != n:
        raise ParseError(f"{source}: header announces {n} vertices, found {len(body)} lines")
    edges, weights, entries = [], [], 0
    for v, (lineno, ln) in enumerate(body):
        toks = _ints(ln.split(), source, lineno)
        if vertex_w:
            if not toks:
                raise ParseError(f"{source}:{lineno}: missing vertex weight")
            weights.append(toks[0])
            toks = toks[1:]
        nbrs = toks[::2] if edge_w else toks
        for u in nbrs:
            if not 1 <= u <= n:
                raise ParseError(f"{source}:{lineno}: neighbor {u} outside 1..{n}")
            edges.append((v, u - 1))
        entries += len(nbrs)
    G = build_graph(n, edges, weights if vertex_w else None)
    if G.m != m or entries != 2 * m:
        if G.m == m:
            log.warning("%s: adjacency lists are not symmetric; symmetrized", source)
        else:
            raise ParseError(
                f"{source}: header announces {m} edges, adjacency describes {G.m}"
            )
    return G


def _parse_dimacs(text: str, source: str) -> Graph:
    n = m = None
    edges, weights = [], {}
    for lineno, ln in enumerate(text.splitlines(), 1):
        toks = ln.split()
        if not toks or toks[0] == "c":
            continue
        kind = toks[0]
        if kind == "p":
            if len(toks) != 4:
                raise ParseError(f"{source}:{lineno}: malformed problem line {ln!r}")
            n, m = _ints(toks[2:], source, lineno)
        elif kind in ("e", "a"):
            if n is None:
                raise ParseError(f"{source}:{lineno}: edge before problem line")
            if len(toks) < 3:
                raise ParseError(f"{source}:{lineno}: malformed edge line {ln!r}")
            u, v = _ints(toks[1:3], source, lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"{source}:{lineno}: vertex outside 1..{n}")
            edges.append((u - 1, v - 1))
        elif kind == "n":
            v, w = _ints(toks[1:3], source, lineno)
            if not 1 <= v <= (n or 0):
                raise ParseError(f"{source}:{lineno}: vertex outside 1..{n}")
            weights[v - 1] = w
        else:
            raise ParseError(f"{source}:{lineno}: unknown line type {kind!r}")
    if n is None:
        raise ParseError(f"{source}: missing 'p edge n m' line")
    w = [weights.get(v, 1) for v in range(n)] if weights else None
    G = build_graph(n, edges, w)
    if len(edges) != m and G.m != m:
        raise ParseError(f"{source}: header announces {m} edges, found {len(edges)}")
    return G


def _parse_edgelist(text: str, source: str) -> Graph:
    edges, weights = [], {}
    n = None
    for lineno, ln in enumerate(text.splitlines(), 1):
        toks = ln.split()
        if not toks:
            continue
        if toks[0].startswith("#"):
            toks = ln.lstrip("#").split()
            if len(toks) == 3 and toks[0] == "weight":
                v, w = _ints(toks[1:], source, lineno)
                weights[v] = w
            elif len(toks) == 2 and toks[0] in ("nodes", "n"):
                n = _ints(toks[1:], source, lineno)[0]
            continue
        if len(toks) < 2:
            raise ParseError(f"{source}:{lineno}: expected 'u v', got {ln!r}")
        u, v = _ints(toks[:2], source, lineno)
        if u < 0 or v < 0:
            raise ParseError(f"{source}:{lineno}: negative vertex id")
        edges.append((u, v))
    top = max([max(e) for e in edges] + list(weights), default=-1) + 1
    if n is None:
        n = top
    elif top > n:
        raise ParseError(f"{source}: vertex id {top - 1} exceeds declared count {n}")
    w = [weights.get(v, 1) for v in range(n)] if weights else None
    return build_graph(n, edges, w)


def metis_text(G: Graph, include_weights: bool = False) -> str:
    head = f"{G.n} {G.m}" + (" 10" if include_weights else "")
    out = [head]
    for v in range(G.n):
        nb = " ".join(str(u + 1) for u in G.adj[v])
        if include_weights:
            nb = f"{int(G.weights[v])} {nb}" if nb else str(int(G.weights[v]))
        out.append(nb)
    return "\n".join(out) + "\n"


def _write(text: str, sink) -> None:
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def write_metis(G: Graph, sink, include_weights: bool = False) -> None:
    _write(metis_text(G, include_weights), sink)


def write_graph(G: Graph, sink, format: str = "metis", include_weights: bool | None = None) -> None:
    weighted = (not G.unweighted) if include_weights is None else include_weights
    if format == "metis":
        text = metis_text(G, weighted)
    elif format == "dimacs":
        lines = [f"p edge {G.n} {G.m}"]
        if weighted:
            lines += [f"n {v + 1} {int(G.weights[v])}" for v in range(G.n)]
        lines += [f"e {u + 1} {v + 1}" for u, v in G.edges()]
        text = "\n".join(lines) + "\n"
    elif format == "edgelist":
        lines = [f"# nodes {G.n}"]
        if weighted:
            lines += [f"# weight {v} {int(G.weights[v])}" for v in range(G.n)]
        lines += [f"{u} {v}" for u, v in G.edges()]
        text = "\n".join(lines) + "\n"
    else:
        raise ParseError(f"unknown graph format {format!r}")
    _write(text, sink)


def read_solution(path) -> list[int]:
    """Vertex ids (0-based, whitespace separated, '#' comments)."""
    ids = []
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), 1):
        ln = ln.split("#", 1)[0]
        ids.extend(_ints(ln.split(), str(path), lineno))
    return ids


def write_solution(S, sink) -> None:
    _write("".join(f"{v}\n" for v in sorted(S)), sink)


class ResultsWriter:
    """Append-only JSON-lines sink; each record is flushed and fsynced."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def write(self, record: dict) -> None:
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_results(path) -> list[dict]:
    """Load a results file, skipping a torn final line from an interrupted run."""
    out = []
    lines = Path(path).read_text().splitlines()
    for i, ln in enumerate(lines):
        if not ln.strip():
            continue
        try:
            out.append(json.loads(ln))
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                log.warning("%s: ignoring incomplete last record", path)
                continue
            raise
    return out
