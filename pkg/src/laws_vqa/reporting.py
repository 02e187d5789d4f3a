"""Trace CSV and metadata sidecar output.

Floats are written with shortest-roundtrip repr so reruns with the same seed
are byte-identical; wall_ms is the one nondeterministic column and is
excluded from reproducibility comparisons.  All files are written atomically
(temp file + rename) so concurrent sweep cells never interleave.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .differentiation import BpScanRow
from .experiments import ExperimentResult

TRACE_BASE_COLUMNS = ("iteration", "cost", "grad_norm", "wall_ms")
BP_COLUMNS = ("n_qubits", "n_samples", "grad_mean", "grad_variance", "stderr")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_columns(result: ExperimentResult) -> list[str]:
    extra_keys: list[str] = []
    for record in result.trace:
        for key in record.extra:
            if key not in extra_keys:
                extra_keys.append(key)
    return list(TRACE_BASE_COLUMNS) + extra_keys


def write_trace_csv(result: ExperimentResult, path: str | Path) -> Path:
    path = Path(path)
    columns = trace_columns(result)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for record in result.trace:
        row = [record.iteration, _fmt(record.cost), _fmt(record.grad_norm), f"{record.wall_ms:.3f}"]
        row += [_fmt(record.extra.get(key, "")) for key in columns[4:]]
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())
    return path


def write_metadata(result: ExperimentResult, path: str | Path) -> Path:
    path = Path(path)
    payload = dict(result.metadata)
    payload["final_theta"] = [float(v) for v in np.asarray(result.final_theta).ravel()]
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_bp_csv(rows: list[BpScanRow], path: str | Path) -> Path:
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BP_COLUMNS)
    for row in rows:
        writer.writerow(
            [row.n_qubits, row.n_samples, _fmt(row.grad_mean), _fmt(row.grad_variance), _fmt(row.stderr)]
        )
    atomic_write_text(path, buf.getvalue())
    return path


def write_summary_csv(rows: list[dict], path: str | Path) -> Path:
    """Comparison summary: optimizer,seed,final_cost,iters_to_threshold."""
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("optimizer", "seed", "final_cost", "iters_to_threshold"))
    for row in rows:
        reached = row.get("iters_to_threshold")
        writer.writerow(
            [row["optimizer"], row["seed"], _fmt(row["final_cost"]), "" if reached is None else reached]
        )
    atomic_write_text(path, buf.getvalue())
    return path


def read_trace_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [dict(row) for row in csv.DictReader(fh)]
