"""Deterministic JSON / CSV / plot-data writers.

Reports carry the configuration hash, RNG seed and tool version; wall time
goes into a separate ``timing.json`` so that a report depends only on its
configuration and seed.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from importlib import metadata
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "silab-report/1"


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "0+unknown"


def jsonable(obj):
    """Convert numpy scalars/arrays, complex numbers and dataclasses to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return jsonable(float(obj))
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return str(obj)
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)
                         if f.repr})
    return obj


def dumps(payload) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"


def config_hash(config: dict) -> str:
    canon = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def envelope(kind: str, config: dict, seed, body: dict) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "tool_version": tool_version(),
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "result": body,
    }


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    return path


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(jsonable(list(r)))
    return path


def write_plot_data(path: Path, columns: dict) -> Path:
    """Whitespace separated columns with a ``#`` header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [list(columns[k]) for k in names]
    lines = ["# " + " ".join(names)]
    for row in zip(*data):
        lines.append(" ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path
