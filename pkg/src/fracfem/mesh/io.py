"""Plain-text mesh files and legacy ASCII VTK.

Text format::

    NV NT NE
    x y                 (NV lines)
    v0 v1 v2            (NT lines, counter-clockwise)
    v0 v1 class         (NE lines, class is B, I or F<l> with l >= 1)

Blank lines and lines starting with ``#`` are ignored.  Fracture segments
are recovered from the chains of ``F<l>`` edges.
"""
from __future__ import annotations

import os
from typing import Optional

import numpy as np

from ..geometry import make_segment
from .core import BOUNDARY, INTERIOR, Mesh


def _class_token(c: int) -> str:
    if c == BOUNDARY:
        return "B"
    if c == INTERIOR:
        return "I"
    return f"F{c}"


def _parse_class(tok: str) -> int:
    if tok == "B":
        return BOUNDARY
    if tok == "I":
        return INTERIOR
    if tok.startswith("F") and tok[1:].isdigit() and int(tok[1:]) >= 1:
        return int(tok[1:])
    raise ValueError(f"bad edge class {tok!r}")


def write_mesh_text(mesh: Mesh, path) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(f"{mesh.nv} {mesh.nt} {mesh.ne}\n")
            for x, y in mesh.vertices:
                fh.write(f"{x:.17g} {y:.17g}\n")
            for a, b, c in mesh.triangles:
                fh.write(f"{a} {b} {c}\n")
            for (a, b), c in zip(mesh.edges, mesh.edge_class):
                fh.write(f"{a} {b} {_class_token(int(c))}\n")
    except OSError as exc:
        raise OSError(f"cannot write mesh file {path}: {exc}") from exc


def _fractures_from_edges(vertices, edges, classes):
    segs = []
    nfrac = int(classes.max()) if len(classes) else 0
    for l in range(1, nfrac + 1):
        sel = edges[classes == l]
        if len(sel) == 0:
            raise ValueError(f"fracture indices must be contiguous; F{l} has no edges")
        pts = vertices[np.unique(sel)]
        d = pts[-1] - pts[0]
        centred = pts - pts.mean(axis=0)
        # principal direction; the points must be collinear
        _, s, vt = np.linalg.svd(centred, full_matrices=False)
        if len(s) > 1 and s[1] > 1e-9 * max(1.0, s[0]):
            raise ValueError(f"edges tagged F{l} are not collinear")
        t = centred @ vt[0]
        a, b = pts[np.argmin(t)], pts[np.argmax(t)]
        if d @ vt[0] < 0:
            a, b = b, a
        segs.append(make_segment(a, b))
    return segs


def read_mesh_text(path) -> Mesh:
    try:
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise OSError(f"cannot read mesh file {path}: {exc}") from exc
    try:
        nv, nt, ne = (int(v) for v in lines[0])
        body = lines[1:]
        if len(body) != nv + nt + ne:
            raise ValueError(f"expected {nv + nt + ne} records, found {len(body)}")
        verts = np.array([[float(v) for v in r] for r in body[:nv]], dtype=float).reshape(nv, 2)
        tris = np.array([[int(v) for v in r] for r in body[nv:nv + nt]], dtype=np.int64).reshape(nt, 3)
        erec = body[nv + nt:]
        edges = np.array([[int(r[0]), int(r[1])] for r in erec], dtype=np.int64).reshape(ne, 2)
        classes = np.array([_parse_class(r[2]) for r in erec], dtype=np.int32)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed mesh file {path}: {exc}") from exc

    fractures = _fractures_from_edges(verts, edges, classes)
    mesh = Mesh.from_triangles(verts, tris, fractures)
    # the edge classes in the file must agree with what the geometry implies
    key = np.sort(edges, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    if len(key) != mesh.ne or not np.array_equal(key[order], mesh.edges):
        raise ValueError(f"edge list in {path} does not match the triangles")
    if not np.array_equal(classes[order], mesh.edge_class):
        raise ValueError(f"edge classes in {path} disagree with the geometry")
    return mesh


# -- VTK --------------------------------------------------------------------

def write_vtk(path, mesh: Mesh, point_data: Optional[dict] = None,
              cell_data: Optional[dict] = None, title: str = "fracfem") -> None:
    """Legacy ASCII unstructured grid with scalar point and cell fields."""
    try:
        with open(path, "w") as fh:
            fh.write("# vtk DataFile Version 3.0\n")
            fh.write(title.replace("\n", " ")[:255] + "\n")
            fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
            fh.write(f"POINTS {mesh.nv} double\n")
            for x, y in mesh.vertices:
                fh.write(f"{x:.17g} {y:.17g} 0\n")
            fh.write(f"CELLS {mesh.nt} {4 * mesh.nt}\n")
            for a, b, c in mesh.triangles:
                fh.write(f"3 {a} {b} {c}\n")
            fh.write(f"CELL_TYPES {mesh.nt}\n")
            fh.write("5\n" * mesh.nt)
            for header, n, data in (("POINT_DATA", mesh.nv, point_data),
                                    ("CELL_DATA", mesh.nt, cell_data)):
                if not data:
                    continue
                fh.write(f"{header} {n}\n")
                for name, values in data.items():
                    values = np.asarray(values, dtype=float).ravel()
                    if len(values) != n:
                        raise ValueError(f"{name}: expected {n} values, got {len(values)}")
                    fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                    fh.write("\n".join(f"{v:.17g}" for v in values))
                    fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write VTK file {path}: {exc}") from exc


def read_vtk(path):
    """Read a file written by :func:`write_vtk`.

    Returns ``(vertices, triangles, point_data, cell_data)``.
    """
    if not os.path.exists(path):
        raise OSError(f"no such VTK file: {path}")
    with open(path) as fh:
        tok = fh.read().split("\n")
    words = []
    for ln in tok[2:]:
        words.extend(ln.split())
    it = iter(words)
    verts = tris = None
    pdata, cdata = {}, {}
    section = None
    for w in it:
        if w == "POINTS":
            n = int(next(it))
            next(it)
            verts = np.array([float(next(it)) for _ in range(3 * n)]).reshape(n, 3)[:, :2]
        elif w == "CELLS":
            n = int(next(it))
            next(it)
            rows = []
            for _ in range(n):
                k = int(next(it))
                rows.append([int(next(it)) for _ in range(k)])
            tris = np.array(rows, dtype=np.int64)
        elif w == "CELL_TYPES":
            n = int(next(it))
            for _ in range(n):
                if next(it) != "5":
                    raise ValueError("only triangle cells are supported")
        elif w in ("POINT_DATA", "CELL_DATA"):
            section = pdata if w == "POINT_DATA" else cdata
            section["__n__"] = int(next(it))
        elif w == "SCALARS":
            name = next(it)
            next(it)
            ncomp = next(it)
            if ncomp != "1":
                raise ValueError("only single-component scalars are supported")
            if next(it) != "LOOKUP_TABLE":
                raise ValueError("expected LOOKUP_TABLE")
            next(it)
            n = section["__n__"]
            section[name] = np.array([float(next(it)) for _ in range(n)])
    pdata.pop("__n__", None)
    cdata.pop("__n__", None)
    return verts, tris, pdata, cdata
