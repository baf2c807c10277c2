"""CSV tables with JSON sidecars.

Every table ``name.csv`` is written next to ``name.json``, which records
the configuration that produced it, the package build and a UTC
timestamp.  Floats are written with 17 significant digits so values
round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

SCHEMAS = {
    "diffusion": ["K", "eps", "t", "msd_mean", "msd_stderr"],
    "diffusion_rates": ["K", "eps", "rate", "rate_stderr", "rate_theory"],
    "fidelity": ["t", "f_mean", "f_stderr", "f_unfolded"],
    "rates": [
        "sigma",
        "gamma0",
        "gamma_at_t2",
        "gamma_fit",
        "fit_points",
        "lambda_K",
        "golden_rule",
        "underconstrained",
    ],
    "regime": [
        "n",
        "K_loc",
        "lambda_loc_exact",
        "lambda_loc_series3",
        "lambda_star",
        "gamma0_max_at_corner",
        "region_area",
        "nonempty",
    ],
    "hardware": [
        "profile",
        "n",
        "a_best",
        "a_worst",
        "b_best",
        "b_worst",
        "c_best",
        "c_worst",
        "r_best",
        "r_worst",
    ],
}


def build_id() -> str:
    from . import __version__

    return f"qsawtooth-{__version__}+numpy-{np.__version__}"


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        obj = float(obj)
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_table(path, schema: str, rows, config: dict | None = None) -> tuple[Path, Path]:
    """Write ``rows`` (dicts keyed by the schema columns) and the sidecar."""
    columns = SCHEMAS[schema]
    path = Path(path)
    if path.suffix != ".csv":
        path = path.with_suffix(".csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            missing = [c for c in columns if c not in row]
            if missing:
                raise KeyError(f"row lacks columns {missing} for schema {schema!r}")
            writer.writerow([_cell(row[c]) for c in columns])
    sidecar = path.with_suffix(".json")
    meta = {
        "schema": schema,
        "columns": columns,
        "rows": len(rows),
        "config": _jsonable(config or {}),
        "build": build_id(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path, sidecar


def read_table(path) -> list[dict]:
    """Read a table back; numeric cells become floats."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, val in row.items():
                if val in ("true", "false"):
                    parsed[key] = val == "true"
                    continue
                try:
                    parsed[key] = float(val)
                except ValueError:
                    parsed[key] = val
            out.append(parsed)
    return out
