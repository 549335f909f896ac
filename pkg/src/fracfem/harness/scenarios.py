"""Named problem setups and their default initial meshes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..fem.problem import (Fracture, ProblemSpec, constant, powerlaw, sin_exact,
                           sin_exact_grad, sin_source)
from ..geometry import make_segment
from ..mesh.build import (build_fracture_conforming, build_unit_square_unionjack, lshape,
                          unit_square)
from ..mesh.core import Mesh


@dataclass(frozen=True)
class Scenario:
    name: str
    spec: ProblemSpec
    seed: str = "conforming"        # "conforming" or "unionjack"
    n: int = 4
    pattern: str = "diagonal"
    study: str = "afem"             # "uniform", "afem" or "compare"
    description: str = ""


Q = (0.5, 0.5)
Q1, Q2, Q3, Q4 = (0.25, 0.5), (0.75, 0.5), (0.5, 0.25), (0.5, 0.75)

# (r0, r1) of g = ((x - 0.25)(0.75 - x))^r0 + r1 for the single-fracture cases
CASES = {
    1: (-0.249, 1.0),
    2: (0.251, 1.0),
    3: (0.0, 1.0),
    4: (0.251, 0.0),
    5: (0.501, 0.0),
    6: (1.001, 0.0),
}

LOOP = [(-0.8, -0.8), (-0.2, -0.8), (-0.2, -0.5), (-0.5, -0.5), (-0.5, -0.2), (-0.8, -0.2)]


def _case(i: int) -> Scenario:
    r0, r1 = CASES[i]
    seg = make_segment(Q1, Q2)
    g = powerlaw("x", 0.25, 0.75, r0, r1)
    spec = ProblemSpec(unit_square(), (Fracture(seg, g),), name=f"case{i}")
    return Scenario(f"case{i}", spec, study="uniform",
                    description=f"unit square, fracture (0.25,0.5)-(0.75,0.5), "
                                f"g = ((x-0.25)(0.75-x))^{r0:g} + {r1:g}")


def _geometry(i: int) -> Scenario:
    ends = {1: Q1, 2: Q2, 3: Q3, 4: Q4}
    gval = {1: -1.0, 2: 1.0, 3: 1.0, 4: -1.0}
    which = {1: (2, 4), 2: (2, 3, 4), 3: (1, 2, 3, 4)}[i]
    frs = tuple(Fracture(make_segment(Q, ends[l]), constant(gval[l])) for l in which)
    spec = ProblemSpec(unit_square(), frs, name=f"geometry{i}")
    return Scenario(f"geometry{i}", spec,
                    description=f"unit square, fractures from (0.5,0.5) to Q{which}, g = +-1")


def _lshape() -> Scenario:
    segs = [make_segment(LOOP[i], LOOP[(i + 1) % 6]) for i in range(6)]
    spec = ProblemSpec(lshape(), tuple(Fracture(s, constant(5.0)) for s in segs),
                       name="lshape_loop")
    return Scenario("lshape_loop", spec, n=20, study="compare",
                    description="L-shaped domain, closed six-segment fracture loop, g = 5")


def _manufactured() -> Scenario:
    spec = ProblemSpec(unit_square(), (), area_source=sin_source, exact=sin_exact,
                       exact_grad=sin_exact_grad, name="manufactured_sin")
    return Scenario("manufactured_sin", spec, study="uniform",
                    description="no fracture, q = 2 pi^2 sin(pi x) sin(pi y)")


def _registry():
    reg = {}
    for s in [_case(i) for i in CASES] + [_lshape()] + [_geometry(i) for i in (1, 2, 3)] \
            + [_manufactured()]:
        if s.name in reg:
            raise RuntimeError(f"duplicate scenario {s.name}")
        reg[s.name] = s
    return reg


SCENARIOS = _registry()


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


def initial_mesh(sc: Scenario, seed: Optional[str] = None, n: Optional[int] = None,
                 pattern: Optional[str] = None) -> Mesh:
    """Initial mesh for ``sc``; ``seed``, ``n`` and ``pattern`` override its defaults.

    The Union-Jack seed defaults to a single cell (``n = 1``).
    """
    seed = seed or sc.seed
    segs = sc.spec.segments
    if seed == "unionjack":
        if sc.spec.domain != unit_square():
            raise ValueError("the Union-Jack seed mesh exists for the unit square only")
        return build_unit_square_unionjack(1 if n is None else n, segs)
    if seed == "conforming":
        return build_fracture_conforming(sc.spec.domain, segs, sc.n if n is None else n,
                                         pattern or sc.pattern)
    raise ValueError(f"unknown seed mesh {seed!r}; use 'unionjack' or 'conforming'")
