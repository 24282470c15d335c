"""CSV and JSON writers.  Every file carries the format version and resolved config."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .config import FORMAT_VERSION


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats (not valid JSON) by strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(payload) -> str:
    return json.dumps(_clean(json.loads(json.dumps(payload, default=_jsonable))), indent=2, sort_keys=True)


def write_json(path: Path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"format_version": FORMAT_VERSION, "config": config, **payload}
    path.write_text(dumps(body) + "\n")
    return path


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows, config: dict) -> Path:
    """Comment lines ``# format_version`` and ``# config`` precede the header.

    Floats are written with ``repr`` so that identical runs give identical bytes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# format_version: {FORMAT_VERSION}\n")
        fh.write(f"# config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    """Inverse of :func:`write_csv`: (metadata, header, rows as strings)."""
    meta = {}
    with Path(path).open() as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# format_version:"):
            meta["format_version"] = line.split(":", 1)[1].strip()
        elif line.startswith("# config:"):
            meta["config"] = json.loads(line.split(":", 1)[1])
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def axis_names(prefix: str, d: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(d)]
