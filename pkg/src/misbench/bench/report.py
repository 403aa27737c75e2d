"""Aggregation of per-instance results and table rendering.

Cells follow the two-line layout ``mean_best (mean_ratio)`` over
``mean_time_to_best (solved_count)``; dashes mark absent values.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .runner import InstanceResult


@dataclass
class AggregateRow:
    dataset: str
    mean_best: float | None
    mean_ratio: float | None
    mean_time_to_best: float | None
    solved_count: int
    total_count: int
    config: str = ""


def _as_result(r) -> InstanceResult:
    return r if isinstance(r, InstanceResult) else InstanceResult.from_dict(r)


def aggregate(results: Iterable, optima=None, dataset: str | None = None) -> AggregateRow:
    """Average over instances that found a solution.

    ``optima`` (sequence aligned with ``results``, or mapping by instance)
    enables ratios; otherwise each result's own ``optimum`` field is used if
    every found instance has one.
    """
    results = [_as_result(r) for r in results]
    if isinstance(optima, dict):
        opts = [optima.get(r.instance) for r in results]
    elif optima is not None:
        opts = list(optima)
        if len(opts) != len(results):
            raise ValueError(f"{len(opts)} optima for {len(results)} results")
    else:
        opts = [r.optimum for r in results]
    found = [(r, o) for r, o in zip(results, opts) if r.found]
    want_ratio = optima is not None or (found and all(o is not None for _, o in found))
    ratios = None
    if want_ratio and found:
        ratios = []
        for r, o in found:
            if not o:
                raise ValueError(f"missing or zero optimum for found instance {r.instance}")
            ratios.append(r.best_weight / o)
    label = dataset if dataset is not None else (results[0].dataset if results else "")
    k = len(found)
    return AggregateRow(
        dataset=label,
        mean_best=sum(r.best_weight for r, _ in found) / k if k else None,
        mean_ratio=sum(ratios) / k if ratios else None,
        mean_time_to_best=sum(r.time_to_best for r, _ in found) / k if k else None,
        solved_count=k,
        total_count=len(results),
        config=results[0].config if results else "",
    )


def render_cell(row: AggregateRow) -> tuple[str, str]:
    if not row.solved_count:
        return "- (-)", "-"
    best = f"{row.mean_best:.2f}"
    ratio = f"{row.mean_ratio:.2f}" if row.mean_ratio is not None else "-"
    return f"{best} ({ratio})", f"{row.mean_time_to_best:.2f} ({row.solved_count})"


_CSV_FIELDS = ["dataset", "config", "mean_best", "mean_ratio", "mean_time_to_best",
               "solved_count", "total_count"]


def render_table(rows: Sequence[AggregateRow], style: str = "text") -> str:
    """Render rows as a dataset x config grid of two-line cells, or as CSV."""
    if style == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_CSV_FIELDS)
        for r in rows:
            w.writerow(["" if getattr(r, f) is None else getattr(r, f) for f in _CSV_FIELDS])
        return buf.getvalue()
    if style != "text":
        raise ValueError(f"unknown table style {style!r}")

    datasets = list(dict.fromkeys(r.dataset for r in rows))
    configs = list(dict.fromkeys(r.config for r in rows))
    cells = {(r.dataset, r.config): render_cell(r) for r in rows}
    header = ["dataset"] + [c or "result" for c in configs]
    grid = [header]
    for d in datasets:
        top, bottom = [d], [""]
        for c in configs:
            a, b = cells.get((d, c), ("", ""))
            top.append(a)
            bottom.append(b)
        grid += [top, bottom]
    widths = [max(len(row[i]) for row in grid) for i in range(len(header))]
    lines = []
    for i, row in enumerate(grid):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def group_results(records: Iterable) -> dict[tuple[str, str], list[InstanceResult]]:
    groups: dict[tuple[str, str], list[InstanceResult]] = {}
    for rec in records:
        r = _as_result(rec)
        groups.setdefault((r.dataset, r.config), []).append(r)
    return groups
