"""Quadrature along straight pieces of a fracture."""
from __future__ import annotations

import numpy as np

from ..quadrature import gauss_interval, graded_interval
from .problem import Coefficient

LINE_POINTS = 16


def piece_rules(g: Coefficient, A: np.ndarray, B: np.ndarray, npts: int = LINE_POINTS):
    """Group pieces ``A[i] -> B[i]`` by the rule needed to integrate ``g``.

    Pieces that end on a singular point of ``g`` get a composite rule graded
    toward that end.  Yields ``(indices, t, w)`` with ``t, w`` on [0, 1].
    """
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    left = g.singular_at(A)
    right = g.singular_at(B)
    code = left.astype(int) + 2 * right.astype(int)
    for c in np.unique(code):
        idx = np.flatnonzero(code == c)
        if c == 0:
            r = gauss_interval(npts)
            t, w = r.points, r.weights
        else:
            t, w = graded_interval(npts, left=bool(c & 1), right=bool(c & 2))
        yield idx, t, w
