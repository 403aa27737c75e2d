"""Reference provider: answers every request with a constant probability.

Run as ``python -m misbench.constant_provider [--value 0.5]``; it serves
requests on stdin/stdout until EOF, or on a TCP port with ``--port``.
Useful as a template for hooking a trained model to the tree search.
"""

from __future__ import annotations

import argparse
import socketserver
import sys

from .providers import decode_request


def _read_request(readline):
    header = readline()
    if not header:
        return None
    n, m_edges, m_maps = (int(x) for x in header.split())
    lines = [header] + [readline() for _ in range(m_edges + 1)]
    return decode_request(lines)


def answer(n: int, m: int, value: float, extra_rows: int = 0) -> str:
    row = " ".join([repr(value)] * m)
    return "".join(row + "\n" for _ in range(max(n + extra_rows, 0)))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--value", type=float, default=0.5)
    ap.add_argument("--extra-rows", type=int, default=0, help="misbehave: send n+k rows")
    ap.add_argument("--port", type=int, help="serve TCP on 127.0.0.1:PORT instead of stdio")
    args = ap.parse_args(argv)

    if args.port is None:
        while (req := _read_request(sys.stdin.readline)) is not None:
            n, _, _, m = req
            sys.stdout.write(answer(n, m, args.value, args.extra_rows))
            sys.stdout.flush()
        return 0

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            req = _read_request(lambda: self.rfile.readline().decode())
            if req is not None:
                n, _, _, m = req
                self.wfile.write(answer(n, m, args.value, args.extra_rows).encode())

    with socketserver.TCPServer(("127.0.0.1", args.port), Handler) as srv:
        srv.serve_forever()
    return 0


if __name__ == "__main__":
    sys.exit(main())
