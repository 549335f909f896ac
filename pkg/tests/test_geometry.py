import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracfem.geometry import (Segment, Triangle2, barycentric, clip_params_boxes,
                              clip_params_triangles, clip_segment_to_box,
                              clip_segment_to_triangle, distance_to_segment, make_segment,
                              point_in_polygon, polygon_area, signed_area)

UNIT = Triangle2((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
coord = st.floats(-2, 2, allow_nan=False)


def close(p, q, tol=1e-14):
    return math.hypot(p[0] - q[0], p[1] - q[1]) <= tol


def test_make_segment_rejects_degenerate():
    with pytest.raises(ValueError):
        make_segment((0.3, 0.3), (0.3, 0.3))
    with pytest.raises(ValueError):
        make_segment((0.0, math.nan), (1.0, 0.0))


def test_signed_area_examples():
    assert signed_area(UNIT) == 0.5
    assert signed_area(Triangle2((0, 0), (0, 1), (1, 0))) == -0.5
    assert signed_area(Triangle2((0, 0), (2, 0), (0, 3))) == 3.0


def test_clip_triangle_examples():
    inside = make_segment((0.1, 0.1), (0.3, 0.2))
    assert clip_segment_to_triangle(inside, UNIT) == inside
    assert clip_segment_to_triangle(make_segment((2, 2), (3, 3)), UNIT) is None
    c = clip_segment_to_triangle(make_segment((0, 0.5), (1, 0.5)), UNIT)
    assert close(c.a, (0, 0.5)) and close(c.b, (0.5, 0.5))


def test_clip_touching_vertex_is_none():
    assert clip_segment_to_triangle(make_segment((1, 0), (2, 1)), UNIT) is None


def test_clip_box_examples():
    r = 0.05
    c = clip_segment_to_box(make_segment((-1, 0), (1, 0)), (0, 0), r)
    assert abs(c.length - 2 * r) < 1e-15
    assert clip_segment_to_box(make_segment((-1, 0.2), (1, 0.2)), (0, 0), r) is None
    c = clip_segment_to_box(make_segment((0, 0), (0.08, 0)), (0, 0), 0.05)
    assert close(c.a, (0, 0)) and close(c.b, (0.05, 0)) and abs(c.length - 0.05) < 1e-15


def test_clip_box_rejects_bad_halfwidth():
    with pytest.raises(ValueError):
        clip_segment_to_box(make_segment((0, 0), (1, 0)), (0, 0), 0.0)


@given(coord, coord, coord, coord)
def test_clip_triangle_properties(x0, y0, x1, y1):
    if math.hypot(x1 - x0, y1 - y0) < 1e-6:
        return
    seg = make_segment((x0, y0), (x1, y1))
    c = clip_segment_to_triangle(seg, UNIT)
    if c is None:
        return
    assert c.length <= seg.length + 1e-14
    tri = np.array([UNIT], dtype=float)
    lam = barycentric(tri, np.array([[c.a, c.b]]))
    assert lam.min() >= -1e-12
    # endpoints lie on the original segment
    d = distance_to_segment(np.array([c.a, c.b]), seg)
    assert d.max() <= 1e-12
    again = clip_segment_to_triangle(c, UNIT)
    assert again is not None
    assert close(again.a, c.a) and close(again.b, c.b)


@given(coord, coord, coord, coord, st.floats(0.01, 1.0))
def test_clip_box_properties(x0, y0, x1, y1, r):
    if math.hypot(x1 - x0, y1 - y0) < 1e-6:
        return
    seg = make_segment((x0, y0), (x1, y1))
    c = clip_segment_to_box(seg, (0.1, -0.2), r)
    if c is None:
        return
    assert c.length <= seg.length + 1e-14
    for p in (c.a, c.b):
        assert abs(p[0] - 0.1) <= r + 1e-12 and abs(p[1] + 0.2) <= r + 1e-12
    again = clip_segment_to_box(c, (0.1, -0.2), r)
    assert close(again.a, c.a) and close(again.b, c.b)


@given(coord, coord, coord, coord)
def test_vectorised_clip_matches_scalar(x0, y0, x1, y1):
    if math.hypot(x1 - x0, y1 - y0) < 1e-6:
        return
    seg = make_segment((x0, y0), (x1, y1))
    tris = np.array([UNIT, [(0, 0), (1, 1), (-1, 1)], [(1, 0), (1, 1), (0, 0)]], dtype=float)
    t0, t1 = clip_params_triangles(np.array(seg.a), np.array(seg.b), tris)
    for i, tri in enumerate(tris):
        c = clip_segment_to_triangle(seg, Triangle2(*map(tuple, tri)))
        span = max(t1[i] - t0[i], 0.0) * seg.length
        assert abs(span - (c.length if c else 0.0)) < 1e-11
    centers = np.array([[0.0, 0.0], [0.5, 0.5]])
    s0, s1 = clip_params_boxes(np.array(seg.a), np.array(seg.b), centers, 0.3)
    for i, cen in enumerate(centers):
        c = clip_segment_to_box(seg, tuple(cen), 0.3)
        span = max(s1[i] - s0[i], 0.0) * seg.length
        assert abs(span - (c.length if c else 0.0)) < 1e-11


def test_polygon_helpers():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert polygon_area(sq) == 1.0
    inside = point_in_polygon(np.array([[0.5, 0.5], [1.5, 0.5]]), sq)
    assert inside.tolist() == [True, False]
    assert Segment((0, 0), (3, 4)).length == 5.0
