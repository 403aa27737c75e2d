"""Command-line interface: ``misbench <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from .. import exact
from ..gen import DEFAULT_PARAMS, GenSpec, gen_weights
from ..graph import is_independent_set, set_weight
from ..treesearch import SearchConfig
from .io import FORMATS, guess_format, parse_graph, read_results, read_solution, write_graph, write_solution
from .report import aggregate, group_results, render_table
from .runner import SOLVERS, default_threads, instance_seed, run_benchmark, solve_graph

log = logging.getLogger("misbench")

_DURATION = re.compile(r"^\s*(\d+(?:\.\d*)?|\.\d+)\s*(ms|s|m|min|h)?\s*$")
_UNITS = {None: 1.0, "s": 1.0, "ms": 1e-3, "m": 60.0, "min": 60.0, "h": 3600.0}


def parse_duration(text: str) -> float:
    """'15', '15s', '500ms', '2m' -> seconds."""
    m = _DURATION.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid duration {text!r}")
    value = float(m.group(1)) * _UNITS[m.group(2)]
    if value <= 0:
        raise argparse.ArgumentTypeError("duration must be positive")
    return value


def _search_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search configuration")
    g.add_argument("--time-limit", type=parse_duration, default=15.0, metavar="DUR")
    g.add_argument("--reduction", action="store_true", help="kernelize each popped labeling")
    g.add_argument("--local-search", action="store_true", help="polish complete solutions")
    g.add_argument("--queue-cap", type=int, default=None, metavar="K")
    g.add_argument("--weighted-pop", action="store_true")
    g.add_argument("--prob-maps", type=int, default=32, metavar="M")
    g.add_argument("--provider", default="random",
                   help="random | degree | external:<command or tcp://host:port>")
    g.add_argument("--threads", type=int, default=None,
                   help="search threads (default: $MISBENCH_THREADS or 1)")
    g.add_argument("--max-steps", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weighted", action="store_true",
                   help="solve MWIS with the file's vertex weights (default: unit weights)")
    g.add_argument("--solver", choices=SOLVERS, default="treesearch")
    g.add_argument("--format", choices=FORMATS, default=None, help="input format (default: by suffix)")


def _config(args) -> SearchConfig:
    return SearchConfig(
        num_prob_maps=args.prob_maps,
        use_reduction=args.reduction,
        use_local_search=args.local_search,
        queue_cap=args.queue_cap,
        weighted_pop=args.weighted_pop,
        provider=args.provider,
        threads=args.threads or default_threads(),
        time_limit=args.time_limit,
        seed=args.seed,
        max_steps=args.max_steps,
    )


def _load(path, fmt, weighted: bool):
    G = parse_graph(path, fmt)
    if not weighted and not G.unweighted:
        G = G.with_weights(np.ones(G.n, dtype=np.int64))
    return G


def cmd_gen(args) -> int:
    params = {}
    for key, attr in (("p", "p"), ("m", "m"), ("p_triangle", "p_triangle"), ("k", "k"),
                      ("p_rewire", "p_rewire"), ("alpha", "alpha"), ("temperature", "temperature"),
                      ("target_avg_degree", "deg")):
        val = getattr(args, attr)
        if val is not None:
            if key not in DEFAULT_PARAMS[args.model]:
                raise SystemExit(f"--{attr.replace('_', '-')} does not apply to model {args.model}")
            params[key] = val
    n_min = args.n_min if args.n_min is not None else args.n
    n_max = args.n_max if args.n_max is not None else args.n
    if n_min is None or n_max is None:
        raise SystemExit("give --n or --n-min/--n-max")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = {"metis": ".metis", "dimacs": ".dimacs", "edgelist": ".edges"}[args.format]
    for i in range(args.count):
        s = instance_seed(args.seed, i)
        n = int(np.random.default_rng(s).integers(n_min, n_max + 1))
        G = GenSpec(args.model, n, params, s).generate()
        if args.weighted:
            G = gen_weights(G, args.mu, args.sigma, seed=s + 1)
        path = out / f"{args.model}_{i:04d}{suffix}"
        write_graph(G, path, args.format, include_weights=args.weighted)
        print(path)
    return 0


def cmd_solve(args) -> int:
    G = _load(args.graph, args.format, args.weighted)
    cfg = _config(args)
    out = solve_graph(G, cfg, args.solver)
    S = out["best_set"]
    record = {
        "instance": str(args.graph),
        "solver": args.solver,
        "config": cfg.fingerprint(),
        **out,
        "best_weight": set_weight(G, S) if out["found"] else None,
        "valid": is_independent_set(G, S),
    }
    if args.solution_out and out["found"]:
        write_solution(S, args.solution_out)
    print(json.dumps(record, sort_keys=True))
    return 0 if record["valid"] else 1


def _instances(paths) -> list[Path]:
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            for f in sorted(p.iterdir()):
                try:
                    guess_format(f)
                except ValueError:
                    continue
                files.append(f)
        else:
            files.append(p)
    return files


def _load_optima(path):
    if path is None:
        return None
    return json.loads(Path(path).read_text())


def cmd_benchmark(args) -> int:
    files = _instances(args.instances)
    if not files:
        print("no instances found", file=sys.stderr)
        return 1
    cfg = _config(args)
    optima = _load_optima(args.optima)
    label = args.label or Path(args.instances[0]).name
    results = run_benchmark(files, cfg, args.solver, optima, args.results, label,
                            weighted=args.weighted, workers=args.workers)
    print(render_table([aggregate(results)], args.style), end="")
    failed = sum(r.error is not None for r in results)
    if failed:
        print(f"{failed} of {len(results)} instances failed", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    G = _load(args.graph, args.format, weighted=True)
    S = read_solution(args.solution)
    problems = []
    bad = [v for v in S if not 0 <= v < G.n]
    if bad:
        problems.append(f"vertex ids out of range: {bad}")
    if len(set(S)) != len(S):
        problems.append("duplicate vertex ids")
    if not bad:
        members = set(S)
        for v in sorted(members):
            for u in G.adj[v]:
                if v < u and u in members:
                    problems.append(f"adjacent-included: edge ({v}, {u})")
    if problems:
        print("INVALID")
        for p in problems:
            print(f"  {p}")
        return 1
    print(f"VALID size={len(S)} weight={set_weight(G, S)}")
    return 0


def cmd_export(args) -> int:
    G = _load(args.graph, args.format, weighted=args.cmd == "export-lp")
    fn = exact.export_lp if args.cmd == "export-lp" else exact.export_qp
    text = fn(G)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_table(args) -> int:
    records = []
    for path in args.results:
        records += read_results(path)
    optima = _load_optima(args.optima)
    rows = []
    for (dataset, _config_name), group in group_results(records).items():
        opts = None
        if optima is not None:
            opts = [optima.get(r.instance, optima.get(Path(r.instance).name)) for r in group]
        rows.append(aggregate(group, opts, dataset or args.label))
    print(render_table(rows, args.style), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="misbench", description="Maximum (weighted) independent set benchmark")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate random graph files")
    p.add_argument("--model", choices=sorted(DEFAULT_PARAMS), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--p-triangle", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--p-rewire", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--deg", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--weighted", action="store_true", help="draw weights from N(mu, sigma)")
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--sigma", type=float, default=30.0)
    p.add_argument("--format", choices=FORMATS, default="metis")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one instance and print the record as JSON")
    p.add_argument("graph")
    p.add_argument("--solution-out")
    _search_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="solve a set of instances and print a table")
    p.add_argument("instances", nargs="+", help="files or directories")
    p.add_argument("--results", default="results.jsonl")
    p.add_argument("--optima", help="JSON object mapping instance name to optimum weight")
    p.add_argument("--label")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--style", choices=("text", "csv"), default="text")
    _search_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("verify", help="check a solution file against a graph")
    p.add_argument("graph")
    p.add_argument("solution")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.set_defaults(func=cmd_verify)

    for name in ("export-lp", "export-qp"):
        p = sub.add_parser(name, help=f"write the {'linear' if name == 'export-lp' else 'quadratic'} program")
        p.add_argument("graph")
        p.add_argument("-o", "--output")
        p.add_argument("--format", choices=FORMATS, default=None)
        p.set_defaults(func=cmd_export)

    p = sub.add_parser("table", help="aggregate results files into a table")
    p.add_argument("results", nargs="+")
    p.add_argument("--optima")
    p.add_argument("--label", default="")
    p.add_argument("--style", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_table)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"misbench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
