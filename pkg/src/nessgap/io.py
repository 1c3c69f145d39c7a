"""CSV/JSON persistence for matrices and flat records."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = format(float(v), ".17g")
        if s.lstrip("-").isdigit():
            s += ".0"
        return s
    return str(v)


def _parse(s: str):
    if s in ("True", "False"):
        return s == "True"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_matrix_csv(path, A: np.ndarray) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    path = Path(path)
    try:
        with path.open("w", newline="\n") as fh:
            fh.write(f"# {A.shape[0]},{A.shape[1]}\n")
            for row in A:
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write matrix to {path}: {exc}") from exc


def read_matrix_csv(path) -> np.ndarray:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read matrix from {path}: {exc}") from exc
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# rows,cols' header")
    rows, cols = (int(t) for t in lines[0][1:].split(","))
    data = [[float(t) for t in ln.split(",")] for ln in lines[1:] if ln.strip()]
    A = np.array(data, dtype=float).reshape(rows, cols)
    return A


def save_solution(base, sol, params) -> tuple[Path, Path]:
    """Write ``base.csv`` with the matrix and ``base.json`` with the metadata sidecar."""
    base = Path(base)
    csv_path = base.with_suffix(".csv")
    meta_path = base.with_suffix(".json")
    write_matrix_csv(csv_path, sol.b)
    meta = {"method": sol.method, "residual_fro": float(sol.residual_fro),
            "params": params.as_dict()}
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def emit(records, format: str, path, fields=None) -> None:
    """Write flat records as CSV (header row, 17 significant digits) or a JSON array."""
    records = [dict(r) for r in records]
    if fields is None:
        fields = list(records[0].keys()) if records else []
    path = Path(path)
    try:
        if format == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(fields)
                for r in records:
                    w.writerow([format_value(r[k]) for k in fields])
        elif format == "json":
            rows = [{k: _jsonable(r[k]) for k in fields} for r in records]
            path.write_text(json.dumps(rows, indent=2) + "\n")
        else:
            raise ValueError(f"unknown format {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def load_records(path, format: str | None = None) -> list[dict]:
    path = Path(path)
    format = format or path.suffix.lstrip(".")
    if format == "csv":
        with path.open(newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd, [])
            return [{k: _parse(v) for k, v in zip(header, row)} for row in rd]
    if format == "json":
        rows = json.loads(path.read_text())
        return [{k: (float(v) if v in ("nan", "inf", "-inf") else v) for k, v in r.items()} for r in rows]
    raise ValueError(f"unknown format {format!r}")
