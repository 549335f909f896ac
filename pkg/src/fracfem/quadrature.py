"""Gauss rules on [0, 1] and on the reference triangle.

Triangle rules are stored in barycentric coordinates with weights summing to
the reference area 1/2.  The tabulated symmetric rules are polished against
the exact monomial moments the first time they are requested, so the stored
seeds only need to be close.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import factorial, sqrt

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import least_squares


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n,) on [0, 1] or (n, 3) barycentric
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def gauss_interval(npts: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1], exact to degree ``2 npts - 1``."""
    if not 1 <= npts <= 32:
        raise ValueError(f"npts must lie in [1, 32], got {npts}")
    x, w = leggauss(npts)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.flags.writeable = False
    wts.flags.writeable = False
    return QuadratureRule(pts, wts, 2 * npts - 1)


def interval_rule_for_degree(degree: int) -> QuadratureRule:
    return gauss_interval(max(1, (degree + 2) // 2))


@lru_cache(maxsize=None)
def graded_interval(npts: int = 16, left: bool = True, right: bool = False,
                    levels: int = 8, ratio: float = 0.5):
    """Composite Gauss rule on [0, 1] graded geometrically toward the ends.

    With ``left`` the breakpoints are ``0, ratio**(levels-1), ..., ratio, 1``.
    With both ends requested the interval is halved first.
    """
    base = gauss_interval(npts)
    if left and right:
        lp, lw = graded_interval(npts, True, False, levels, ratio)
        pts = np.concatenate([0.5 * lp, 1.0 - 0.5 * lp[::-1]])
        wts = np.concatenate([0.5 * lw, 0.5 * lw[::-1]])
        return pts, wts
    if not left and not right:
        return base.points.copy(), base.weights.copy()
    brk = np.concatenate([[0.0], ratio ** np.arange(levels - 1, -1, -1)])
    pts, wts = [], []
    for lo, hi in zip(brk[:-1], brk[1:]):
        pts.append(lo + (hi - lo) * base.points)
        wts.append((hi - lo) * base.weights)
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    if right:
        pts, wts = 1.0 - pts[::-1], wts[::-1]
    return pts, wts


# -- triangle rules ---------------------------------------------------------

def _monomial_moment(i: int, j: int) -> float:
    return factorial(i) * factorial(j) / factorial(i + j + 2)


def _expand(orbits):
    """Orbit list -> (barycentric points, weights summing to 1)."""
    pts, wts = [], []
    for kind, coords, w in orbits:
        if kind == "s3":
            pts.append((1 / 3, 1 / 3, 1 / 3))
            wts.append(w)
        elif kind == "s21":
            a = coords[0]
            b = 1.0 - 2.0 * a
            for p in ((a, a, b), (a, b, a), (b, a, a)):
                pts.append(p)
                wts.append(w)
        else:
            a, b = coords
            c = 1.0 - a - b
            for p in sorted(set(permutations((a, b, c)))):
                pts.append(p)
                wts.append(w)
    return np.array(pts), np.array(wts)


def _flatten(orbits):
    x = []
    for _, coords, w in orbits:
        x.extend(coords)
        x.append(w)
    return np.array(x)


def _unflatten(orbits, x):
    out, k = [], 0
    for kind, coords, _ in orbits:
        n = len(coords)
        out.append((kind, tuple(x[k:k + n]), x[k + n]))
        k += n + 1
    return out


def _moment_residual(pts, wts, degree):
    res = []
    x, y = pts[:, 1], pts[:, 2]
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            res.append(0.5 * np.dot(wts, x ** i * y ** j) - _monomial_moment(i, j))
    return np.array(res)


def _polish(orbits, degree):
    def fun(x):
        p, w = _expand(_unflatten(orbits, x))
        return _moment_residual(p, w, degree)

    sol = least_squares(fun, _flatten(orbits), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return _expand(_unflatten(orbits, sol.x))


_R15 = sqrt(15.0)

# orbit seeds, weights normalised to sum 1
_TABLE = {
    1: [("s3", (), 1.0)],
    2: [("s21", (1 / 6,), 1 / 3)],
    4: [("s21", (0.445948490915965,), 0.223381589678011),
        ("s21", (0.091576213509771,), 0.109951743655322)],
    5: [("s3", (), 9 / 40),
        ("s21", ((6 - _R15) / 21,), (155 - _R15) / 1200),
        ("s21", ((6 + _R15) / 21,), (155 + _R15) / 1200)],
    6: [("s21", (0.063089014491502,), 0.050844906370207),
        ("s21", (0.249286745170910,), 0.116786275726379),
        ("s111", (0.053145049844817, 0.310352451033784), 0.082851075618374)],
    8: [("s3", (), 0.144315607677787),
        ("s21", (0.459292588292723,), 0.095091634267285),
        ("s21", (0.170569307751760,), 0.103217370534718),
        ("s21", (0.050547228317031,), 0.032458497623198),
        ("s111", (0.008394777409958, 0.263112829634638), 0.027230314174435)],
}


def _conical_symmetric(degree):
    """Collapsed Gauss product rule, averaged over the six vertex permutations."""
    n = degree // 2 + 2
    x, w = leggauss(n)
    u, wu = 0.5 * (x + 1), 0.5 * w
    pts, wts = [], []
    for ui, wi in zip(u, wu):
        for vj, wj in zip(u, wu):
            px, py = ui, vj * (1 - ui)
            pts.append((1 - px - py, px, py))
            wts.append(2.0 * wi * wj * (1 - ui))
    sym_p, sym_w = [], []
    for perm in permutations(range(3)):
        for p, wt in zip(pts, wts):
            sym_p.append(tuple(p[k] for k in perm))
            sym_w.append(wt / 6)
    return np.array(sym_p), np.array(sym_w)


@lru_cache(maxsize=None)
def gauss_triangle(degree: int) -> QuadratureRule:
    """Symmetric positive rule on the reference triangle exact to ``degree``."""
    if not 1 <= degree <= 10:
        raise ValueError(f"unsupported triangle quadrature degree {degree}")
    key = min(k for k in list(_TABLE) + [99] if k >= degree)
    if key in _TABLE:
        if key <= 2:
            pts, wts = _expand(_TABLE[key])
        else:
            pts, wts = _polish(_TABLE[key], key)
        exact = key
    else:
        pts, wts = _conical_symmetric(degree)
        exact = degree
    pts, wts = np.ascontiguousarray(pts), 0.5 * wts
    pts.flags.writeable = False
    wts.flags.writeable = False
    return QuadratureRule(pts, wts, exact)
