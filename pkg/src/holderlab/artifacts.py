"""CSV artifacts and provenance files.

CSV bodies never carry timestamps, so identical runs give identical bytes.
The timestamp lives on the first line of the separate provenance file.
"""
from __future__ import annotations

import csv
import datetime
import os
import subprocess

import numpy as np

from . import __version__
from .elliptic import DiscreteField


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def write_csv(path, header, rows) -> None:
    """Write ``rows`` (sequences or dicts keyed by ``header``) with fixed formatting."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(k) for k in header]
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_field_csv(u: DiscreteField, path) -> None:
    """Nodal values as ``x, y, value, kind`` with kind ``interior`` or ``boundary``."""
    g = u.grid
    kinds = ["interior"] * g.n_interior + ["boundary"] * g.n_boundary
    pts = g.all_points
    write_csv(path, ["x", "y", "value", "kind"],
              ([p[0], p[1], v, k] for p, v, k in zip(pts, u.all_values, kinds)))


def read_field_csv(path):
    """Return ``(points, values, kinds)`` from a field CSV."""
    rows = read_csv(path)
    if not rows or not {"x", "y", "value"} <= set(rows[0]):
        raise ValueError(f"{path}: expected columns x, y, value")
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    vals = np.array([float(r["value"]) for r in rows])
    kinds = [r.get("kind", "interior") for r in rows]
    return pts, vals, kinds


def write_lattice_csv(u: DiscreteField, path) -> None:
    """Structured layout: one row per lattice node, ``i, j, x, y, value`` (empty off the domain)."""
    g = u.grid
    lat = u.lattice()
    rows = []
    for j, y in enumerate(g.y):
        for i, x in enumerate(g.x):
            v = lat[j, i]
            rows.append([i, j, x, y, None if np.isnan(v) else v])
    write_csv(path, ["i", "j", "x", "y", "value"], rows)


def version_string() -> str:
    """Package version with the short commit hash when run from a git checkout."""
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=os.path.dirname(__file__), timeout=5).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else f"{__version__}+unknown"


def write_provenance(prefix, command: str, echo: dict, h=None, q=None) -> str:
    path = f"{prefix}_provenance.txt"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    with open(path, "w") as fh:
        fh.write(f"# written {stamp}\n")
        fh.write(f"command = {command}\n")
        fh.write(f"version = {version_string()}\n")
        if h is not None:
            fh.write(f"h = {fmt(float(h))}\n")
        if q is not None:
            fh.write(f"q = {fmt(float(q))}\n")
        fh.write("[config]\n")
        for k in sorted(echo):
            fh.write(f"{k} = {echo[k]}\n")
    return path
