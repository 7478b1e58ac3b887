"""Plain-text series and table formats."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .spectral import TimeSeries


def write_series(path, ts: TimeSeries | np.ndarray) -> None:
    """One sample per line, shortest round-trip decimal representation."""
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=np.float64)
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in values))


def read_series(path) -> TimeSeries:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    values = []
    for i, ln in enumerate(lines, 1):
        if not ln or ln.startswith("#"):
            continue
        try:
            values.append(float(ln))
        except ValueError:
            raise ValueError(f"{path}:{i}: not a decimal number: {ln!r}") from None
    return TimeSeries(np.array(values))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def format_table(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    """Comma-separated table with a header row."""
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_matrix(path, matrix: np.ndarray, labels: Sequence[str] | None = None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    labels = list(labels) if labels is not None else [f"c{j}" for j in range(matrix.shape[1])]
    rows = [dict(zip(labels, row)) for row in matrix]
    Path(path).write_text(format_table(rows, labels))


def read_matrix(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) for x in row] for row in reader if row]
    return header, np.array(data).reshape(len(data), len(header))


def _jsonable(v):
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def format_structured(record: Mapping) -> str:
    """Deterministic JSON (sorted keys, non-finite floats as strings)."""
    return json.dumps(_jsonable(record), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
