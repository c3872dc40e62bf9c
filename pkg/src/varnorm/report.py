"""Persisting run records: CSV, JSON and SVG charts."""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
from typing import Sequence

import numpy as np

from .experiments import CSV_COLUMNS, RunRecord


class Format(str, enum.Enum):
    CSV = "CSV"
    JSON = "JSON"
    SVG = "SVG"


def _require(records: Sequence[RunRecord]) -> None:
    if not records:
        raise ValueError("no records to emit")


def _write_text(path: str | os.PathLike, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def csv_text(records: Sequence[RunRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = r.row()
        if not timing:
            row[CSV_COLUMNS.index("seconds")] = "0"
        w.writerow(row)
    return buf.getvalue()


def read_records(path: str | os.PathLike) -> list[RunRecord]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ValueError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
            out = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(CSV_COLUMNS):
                    raise ValueError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
                try:
                    out.append(
                        RunRecord(
                            row[0], row[1], row[2], int(row[3]), int(row[4]), row[5],
                            float(row[6]), float(row[7]), float(row[8]), int(row[9]),
                        )
                    )
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    return out


def series(records: Sequence[RunRecord]) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per ordering (and kind, when several are present): log2 N, mean, stderr of the mean."""
    kinds = {r.kind for r in records}
    groups: dict[str, dict[int, list[RunRecord]]] = {}
    for r in records:
        label = r.ordering if len(kinds) == 1 else f"{r.ordering} {r.kind}"
        groups.setdefault(label, {}).setdefault(r.N, []).append(r)
    out = {}
    for label, by_n in groups.items():
        ns = sorted(by_n)
        means, errs = [], []
        for n in ns:
            vals = np.array([r.value for r in by_n[n]])
            means.append(float(vals.mean()))
            if vals.size > 1:
                errs.append(float(vals.std(ddof=1) / math.sqrt(vals.size)))
            else:
                errs.append(by_n[n][0].stderr)
        out[label] = (np.log2(np.array(ns, dtype=float)), np.array(means), np.array(errs))
    return out


def svg_text(records: Sequence[RunRecord], title: str | None = None) -> str:
    """Line chart of mean value against log2 N with error bars, one line per ordering.

    Each polyline carries the SVG id ``series-<label>`` so it can be located.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    _require(records)
    kinds = sorted({r.kind for r in records})
    with matplotlib.rc_context({"svg.hashsalt": "varnorm", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for label, (x, y, e) in sorted(series(records).items()):
            bars = ax.errorbar(x, y, yerr=e, marker="o", capsize=3, label=label)
            bars.lines[0].set_gid("series-" + label.replace(" ", "-"))
        ax.set_xlabel("log2 N")
        ax.set_ylabel(", ".join(kinds))
        ax.set_title(title or records[0].experiment)
        ax.grid(True, alpha=0.3)
        ax.legend()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit(
    records: Sequence[RunRecord],
    fmt: Format | str,
    path: str | os.PathLike,
    summary: dict | None = None,
    timing: bool = True,
) -> None:
    """Write records in one format.  Nothing is created when ``records`` is empty."""
    _require(records)
    fmt = Format(fmt)
    if fmt is Format.CSV:
        text = csv_text(records, timing)
    elif fmt is Format.JSON:
        rows = [dataclasses.asdict(r) for r in records]
        if not timing:
            for d in rows:
                d["seconds"] = 0.0
        text = json.dumps({"records": rows, "summary": summary}, indent=2, allow_nan=True) + "\n"
    else:
        text = svg_text(records)
    _write_text(path, text)
