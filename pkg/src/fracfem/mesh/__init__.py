from .core import BOUNDARY, INTERIOR, Mesh, MeshReport, build_topology, validate
from .build import (DomainSpec, PATTERNS, build_fracture_conforming,
                    build_unit_square_unionjack, lshape, unit_square)
from .refine import bisect, red_refine
from .io import read_mesh_text, read_vtk, write_mesh_text, write_vtk

__all__ = [
    "BOUNDARY", "INTERIOR", "Mesh", "MeshReport", "build_topology", "validate",
    "DomainSpec", "PATTERNS", "build_fracture_conforming", "build_unit_square_unionjack",
    "lshape", "unit_square", "bisect", "red_refine",
    "read_mesh_text", "read_vtk", "write_mesh_text", "write_vtk",
]
