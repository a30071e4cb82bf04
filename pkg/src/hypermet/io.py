"""Reading spaces, charts and pair lists; writing JSON reports and scatter CSVs."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .boundary import BoundaryChart
from .metric import FiniteMetricSpace, InputError

TIMESTAMP_KEY = "timestamp"


def _read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_space(path) -> FiniteMetricSpace:
    """A space from JSON, or from CSV: header row of labels over a square matrix."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        try:
            rows = list(csv.reader(path.read_text().splitlines()))
        except FileNotFoundError:
            raise InputError(f"{path}: no such file") from None
        rows = [r for r in rows if r]
        if not rows:
            raise InputError(f"{path}: empty file")
        labels = [s.strip() for s in rows[0]]
        try:
            dist = [[float(v) for v in r] for r in rows[1:]]
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
        return FiniteMetricSpace(labels, dist)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return FiniteMetricSpace.from_dict(data)


def load_chart(path) -> BoundaryChart:
    """Either an explicit chart (points, gp, delta, base) or a space with base and proxies."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    if "space" in data:
        try:
            space = FiniteMetricSpace.from_dict(data["space"])
            return BoundaryChart.from_space(space, data["base"], data["proxies"], data.get("delta"))
        except KeyError as exc:
            raise InputError(f"{path}: chart is missing field {exc}") from None
    return BoundaryChart.from_dict(data)


def load_pairs(path, dimension: int = 2) -> list[tuple[tuple, tuple]]:
    """Pair CSV with rows ``x1,y1,x2,y2`` (six columns in 3D); a non-numeric first row is a header."""
    text = Path(path).read_text() if Path(path).exists() else None
    if text is None:
        raise InputError(f"{path}: no such file")
    out = []
    for k, row in enumerate(csv.reader(text.splitlines())):
        if not row:
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError:
            if k == 0:
                continue
            raise InputError(f"{path}: row {k + 1} is not numeric") from None
        if len(vals) != 2 * dimension:
            raise InputError(f"{path}: row {k + 1} needs {2 * dimension} numbers")
        out.append((tuple(vals[:dimension]), tuple(vals[dimension:])))
    return out


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def config_hash(config: Mapping) -> str:
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def make_report(command: str, config: Mapping, tolerances: Mapping, result: Mapping, passed: Optional[bool]) -> dict:
    return {
        "tool": "hypermet",
        "version": __version__,
        "command": command,
        "config": _plain(config),
        "config_hash": config_hash(config),
        "tolerances": _plain(tolerances),
        "passed": passed,
        "result": _plain(result),
        TIMESTAMP_KEY: _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def dumps_report(report: Mapping) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"


def write_report(report: Mapping, path) -> None:
    Path(path).write_text(dumps_report(report))


def strip_timestamp(report: Mapping) -> dict:
    return {k: v for k, v in report.items() if k != TIMESTAMP_KEY}


def _find_scatter(report: Mapping):
    for node in (report, report.get("result", {})):
        if isinstance(node, Mapping) and "scatter" in node:
            cols = node.get("scatter_columns", ["t", "t_image"])
            return list(cols), node["scatter"]
    raise InputError("report has no scatter data")


def scatter_csv(columns: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def export_scatter(report: Mapping, path) -> list[str]:
    """Write the report's scatter as CSV; returns the column names."""
    cols, rows = _find_scatter(report)
    Path(path).write_text(scatter_csv(cols, rows))
    return cols


def read_scatter(path) -> tuple[list[str], list[tuple[float, ...]]]:
    rows = list(csv.reader(Path(path).read_text().splitlines()))
    if not rows:
        raise InputError(f"{path}: empty scatter file")
    return rows[0], [tuple(float(v) for v in r) for r in rows[1:] if r]
