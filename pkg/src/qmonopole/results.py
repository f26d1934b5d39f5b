"""Tabular results and their CSV/JSON serialization.

Floats are written with 17 significant digits so every double round-trips,
metadata keys are sorted, and nothing time-dependent is written, so equal
inputs give byte-identical files.
"""
from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import OutputError

FORMATS = ("csv", "json")


@dataclass
class SweepResult:
    """Tabular result: column names, rows, per-row error notes and metadata."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} values for {len(self.columns)} columns")

    def column(self, name):
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _plain(v):
    """JSON-ready copy; NaN/inf become None."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _meta(result: SweepResult) -> dict:
    meta = dict(result.metadata)
    if result.notes:
        meta["notes"] = {format_value(k): v for k, v in result.notes.items()}
    return _plain(meta)


def to_csv(result: SweepResult) -> str:
    lines = []
    for key, value in sorted(_meta(result).items()):
        lines.append(f"# {key}: {json.dumps(value, sort_keys=True)}")
    lines.append(",".join(result.columns))
    lines.extend(",".join(format_value(v) for v in row) for row in result.rows)
    return "\n".join(lines) + "\n"


def to_json(result: SweepResult) -> str:
    doc = {"metadata": _meta(result), "columns": list(result.columns), "rows": _plain(result.rows)}
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def read_csv(path) -> SweepResult:
    """Inverse of the CSV writer (metadata values are JSON-decoded)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        elif line:
            body.append(line.split(","))
    columns, rows = body[0], [[_parse(v) for v in row] for row in body[1:]]
    return SweepResult(columns, rows, meta)


def _parse(v: str):
    try:
        return float(v)
    except ValueError:
        return v


def write_output(result: SweepResult, path: Optional[str] = None, fmt: str = "csv") -> None:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    text = to_csv(result) if fmt == "csv" else to_json(result)
    if path is None or path == "-":
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head); silence the interpreter's flush at exit
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
        return
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None
