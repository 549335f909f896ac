"""Problem data: domain, fractures with their source densities, area source."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..geometry import Segment
from ..mesh.build import DomainSpec

_AXES = {"x": 0, "y": 1}


@dataclass(frozen=True)
class Coefficient:
    """Source density along a fracture.

    ``constant``: ``value``.
    ``powerlaw``: ``((s - a)(b - s))**r0 + r1`` with ``s`` the ``axis``
    coordinate.  ``r0`` is kept as the decimal the caller supplied.
    ``tabulated``: piecewise-linear interpolation of ``values`` at ``knots``
    along the ``axis`` coordinate.
    """
    kind: str
    value: float = 0.0
    axis: str = "x"
    a: float = 0.0
    b: float = 1.0
    r0: float = 0.0
    r1: float = 0.0
    knots: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "powerlaw", "tabulated"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.axis not in _AXES:
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        if self.kind == "powerlaw":
            if not self.a < self.b:
                raise ValueError("powerlaw needs a < b")
            if self.r0 <= -0.5:
                raise ValueError(f"powerlaw exponent r0={self.r0} is not square-integrable")
        if self.kind == "tabulated":
            k = np.asarray(self.knots, dtype=float)
            if len(k) < 2 or len(k) != len(self.values) or np.any(np.diff(k) <= 0):
                raise ValueError("tabulated coefficient needs >= 2 increasing knots and matching values")

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.full(np.broadcast(x, y).shape, float(self.value))
        s = x if self.axis == "x" else y
        if self.kind == "powerlaw":
            w = np.maximum((s - self.a) * (self.b - s), 0.0)
            with np.errstate(divide="ignore"):
                return w ** self.r0 + self.r1
        return np.interp(s, self.knots, self.values)

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        return self.kind == "powerlaw" and self.r0 == 0.0

    def singular_at(self, pts) -> np.ndarray:
        """True where a point sits on a non-smooth root of a power law."""
        pts = np.atleast_2d(pts)
        if self.kind != "powerlaw" or float(self.r0).is_integer():
            return np.zeros(len(pts), dtype=bool)
        s = pts[:, _AXES[self.axis]]
        return (np.abs(s - self.a) <= 1e-12) | (np.abs(s - self.b) <= 1e-12)


def constant(c: float) -> Coefficient:
    return Coefficient("constant", value=float(c))


def powerlaw(axis: str, a: float, b: float, r0: float, r1: float) -> Coefficient:
    return Coefficient("powerlaw", axis=axis, a=float(a), b=float(b), r0=float(r0), r1=float(r1))


def tabulated(axis: str, knots, values) -> Coefficient:
    return Coefficient("tabulated", axis=axis, knots=tuple(map(float, knots)),
                       values=tuple(map(float, values)))


@dataclass(frozen=True)
class Fracture:
    segment: Segment
    g: Coefficient


@dataclass(frozen=True)
class ProblemSpec:
    """Poisson problem with line sources on fractures and an optional area source.

    ``exact`` and ``exact_grad`` are filled in for manufactured problems only.
    """
    domain: DomainSpec
    fractures: tuple = ()
    area_source: Optional[Callable] = None
    exact: Optional[Callable] = None
    exact_grad: Optional[Callable] = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        fr = tuple(self.fractures)
        object.__setattr__(self, "fractures", fr)
        segs = [f.segment for f in fr]
        if segs and not np.all(self.domain.contains(np.array([p for s in segs for p in s]))):
            raise ValueError("fractures must lie strictly inside the domain")

    @property
    def segments(self) -> tuple:
        return tuple(f.segment for f in self.fractures)

    @property
    def coefficients(self) -> tuple:
        return tuple(f.g for f in self.fractures)


# manufactured smooth solution u = sin(pi x) sin(pi y)

def sin_exact(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def sin_exact_grad(x, y):
    return np.stack([np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
                     np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)], axis=-1)


def sin_source(x, y):
    return 2.0 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)
