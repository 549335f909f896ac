"""CSV tables and VTK snapshots of study results."""
from __future__ import annotations

import csv
import math
import os

import numpy as np

from ..mesh.io import write_vtk


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.12g}"
    return str(v)


def export_csv(path, header, rows) -> None:
    """Comma-separated file with a header row and 12 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
    except OSError as exc:
        raise OSError(f"cannot write CSV file {path}: {exc}") from exc


def export_table(path, table) -> None:
    export_csv(path, table.columns(), table.as_rows())


RECORD_COLUMNS = ["j", "ndof", "nt", "estimate", "marked", "seconds"]


def export_records(path, records, label=None) -> None:
    header = (["estimator"] if label else []) + RECORD_COLUMNS
    rows = []
    for rec in records:
        row = [getattr(rec, c) for c in RECORD_COLUMNS]
        rows.append(([label] if label else []) + row)
    export_csv(path, header, rows)


def export_vtk(path, mesh, solution=None, indicators=None) -> None:
    """Mesh with optional nodal solution values and per-element indicators."""
    pdata, cdata = {}, {"generation": mesh.generation.astype(float)}
    if solution is not None:
        pdata["u"] = solution.coeffs[:mesh.nv]
    if indicators is not None:
        cdata[indicators.kind] = indicators.values
    write_vtk(path, mesh, pdata, cdata)


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
