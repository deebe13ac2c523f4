"""CSV / JSONL / JSON serialization of trajectories and reports.

The trajectory CSV schema is fixed: one row per grid point with columns
step (or time for continuous records), datum, true_loglr, test_loglr, p,
p_check, pi, err, bias, diffusive.  The datum cell is empty at the initial
grid point, which carries no observation.  Floats are written with repr
(shortest round-trip form) so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .discrete import PathRecord, classify_outcome

__all__ = [
    "TRAJECTORY_COLUMNS",
    "trajectory_header",
    "write_path_csv",
    "path_summary",
    "write_summaries_jsonl",
    "write_asset_csv",
    "write_power_law_csv",
    "write_json",
    "sha256_file",
]

TRAJECTORY_COLUMNS = [
    "datum",
    "true_loglr",
    "test_loglr",
    "p",
    "p_check",
    "pi",
    "err",
    "bias",
    "diffusive",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def trajectory_header(record: PathRecord) -> list[str]:
    axis = "step" if record.dt is None else "time"
    return [axis] + TRAJECTORY_COLUMNS


def write_path_csv(path: Path, record: PathRecord) -> None:
    """One trajectory, one row per grid point (including the prior row 0)."""
    n = record.horizon
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trajectory_header(record))
        for k in range(n + 1):
            axis = k if record.dt is None else _fmt(k * record.dt)
            writer.writerow(
                [
                    axis,
                    "" if k == 0 else _fmt(record.data[k - 1]),
                    _fmt(record.true_loglr[k]),
                    _fmt(record.test_loglr[k]),
                    _fmt(record.p[k]),
                    _fmt(record.p_check[k]),
                    _fmt(record.pi[k]),
                    _fmt(record.err[k]),
                    _fmt(record.bias[k]),
                    _fmt(record.diffusive[k]),
                ]
            )


def path_summary(record: PathRecord, log_threshold: Optional[float] = None) -> dict:
    out = {
        "path": record.path_index,
        "outcome": record.outcome,
        "final_true_loglr": float(record.true_loglr[-1]),
        "final_test_loglr": float(record.test_loglr[-1]),
        "final_p": float(record.p[-1]),
        "final_p_check": float(record.p_check[-1]),
        "final_pi": float(record.pi[-1]),
        "max_abs_err": float(np.max(np.abs(record.err))),
    }
    if log_threshold is not None:
        out["decision"] = classify_outcome(record, log_threshold)
    return out


def write_summaries_jsonl(
    path: Path, records: Sequence[PathRecord], log_threshold: Optional[float] = None
) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(path_summary(record, log_threshold)) + "\n")


def write_asset_csv(path: Path, record: PathRecord, scenario) -> None:
    axis_name = "step" if record.dt is None else "time"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis_name, "x", "y", "z"])
        for k in range(len(scenario.x)):
            axis = k if record.dt is None else _fmt(k * record.dt)
            writer.writerow([axis, _fmt(scenario.x[k]), _fmt(scenario.y[k]), _fmt(scenario.z[k])])


def write_power_law_csv(path: Path, report) -> None:
    """Per-time power-law series (gamma_n, c_n, residual_n) from a redundancy report."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "gamma", "c", "residual"])
        for k in range(len(report.gamma_by_time)):
            writer.writerow(
                [
                    k + 1,
                    _fmt(report.gamma_by_time[k]),
                    _fmt(report.c_by_time[k]),
                    _fmt(report.residual_by_time[k]),
                ]
            )


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
