"""CSV, manifest and status-file writers and readers."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = ("t", "x", "rho", "theta", "u")
DIAGNOSTICS_COLUMNS = ("t", "mass", "ballistic", "dissipation", "rhs", "margin",
                       "min_theta", "bound", "V_min")
MINPRINCIPLE_COLUMNS = ("t", "min_theta", "bound", "V_min", "violations")
SWEEP_COLUMNS = ("eps", "delta", "n_cells", "V_min", "min_margin_theta", "final_margin",
                 "steps", "status")

TRAJECTORY_FILE = "trajectory.csv"
DIAGNOSTICS_FILE = "diagnostics.csv"
MINPRINCIPLE_FILE = "minprinciple.csv"
MANIFEST_FILE = "manifest.json"
STATUS_FILE = "status.json"
ORACLE_FILE = "oracle.csv"
SWEEP_FILE = "sweep_summary.csv"


def fmt(value) -> str:
    """17 significant digits; integers and strings pass through."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_rows(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])
    return path


def trajectory_rows(traj):
    for snap in traj.snapshots:
        xc = snap.grid.centers
        uc = snap.u_centers()
        for j in range(snap.grid.n_cells):
            yield {"t": snap.t, "x": xc[j], "rho": snap.rho[j], "theta": snap.theta[j],
                   "u": uc[j]}


def write_trajectory(path, traj):
    return write_rows(path, TRAJECTORY_COLUMNS, trajectory_rows(traj))


def read_csv(path) -> dict:
    """Columns of a CSV file as float arrays (non-numeric columns as strings)."""
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, data):
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def inventory(directory, names) -> dict:
    d = Path(directory)
    return {n: {"sha256": file_digest(d / n), "bytes": (d / n).stat().st_size}
            for n in sorted(names) if (d / n).is_file()}
