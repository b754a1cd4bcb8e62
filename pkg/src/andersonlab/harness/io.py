"""CSV / JSON-lines persistence of result rows.

Floats are rendered with 17 significant digits so they parse back to the same
double.  CSV files hold only deterministic columns; timing and provenance go
to a ``<out>.meta.json`` sidecar so the CSV itself is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from pathlib import Path

BASE_COLUMNS = ["experiment", "dist", "E", "L", "trials", "seed", "estimate", "ci_low", "ci_high"]

EXTRA_COLUMNS = {
    "lyapunov": ["steps", "stderr"],
    "lde-tail": ["hits", "eps", "lambda_ref", "lambda_source", "mode"],
    "wegner": ["hits", "beta", "log_threshold"],
    "regularity": ["hits", "m", "m_source"],
    "eigenmodes": ["stderr", "median", "failures"],
    "ids": ["stderr"],
    "msa-params": ["p", "beta", "kappa", "q1", "q2", "eta", "p_prime", "m0", "constraints", "violations"],
}


def format_number(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "%.17g" % x
    return "" if x is None else str(x)


def columns_for(experiment: str | None) -> list[str]:
    return BASE_COLUMNS + EXTRA_COLUMNS.get(experiment, [])


def preflight(path: str | os.PathLike) -> None:
    """Fail before any computation if ``path`` cannot be written."""
    if str(path) == "-":
        return
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if not parent.is_dir():
        raise OSError(f"output directory {parent} does not exist")
    if p.exists() and (p.is_dir() or not os.access(p, os.W_OK)):
        raise OSError(f"output path {p} is not writable")
    if not p.exists() and not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent} is not writable")


def render(records, fmt: str = "csv") -> str:
    rows = [row for rec in records for row in rec.rows]
    experiment = records[0].experiment if records else None
    cols = columns_for(experiment)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([format_number(row.get(c)) for c in cols])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps({c: _json_value(row.get(c)) for c in cols}) + "\n" for row in rows)
    raise ValueError(f"unknown format {fmt!r}")


def _json_value(x):
    if isinstance(x, float):
        return None if math.isnan(x) else float(format_number(x))
    return x


def write_results(records, path: str | os.PathLike | None, fmt: str = "csv") -> None:
    text = render(records, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    preflight(path)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_meta(record, path) -> None:
    if path is None or str(path) == "-":
        return
    meta = {
        "experiment": record.experiment,
        "complete": record.complete,
        "rows": len(record.rows),
        "wall_clock_s": record.wall_clock,
        "version": record.version,
        "seeds": record.seeds,
        "config": record.config,
    }
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def _parse_cell(text: str):
    if text == "":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_results(path, fmt: str = "csv") -> list[dict]:
    with open(path, newline="") as fh:
        if fmt == "csv":
            return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]
        return [json.loads(line) for line in fh if line.strip()]
