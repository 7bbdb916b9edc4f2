import math

import pytest
from flint import fmpq
from hypothesis import given, strategies as st

from carext.exact import OnBoundary, RationalPoint, q
from carext.geometry import (RationalPolygonalPath, Segment, dist_to_path_exceeds, is_simple,
                             path_eval, point_segment_dist2, segments_intersect, sup_dist,
                             winding_number)

P = RationalPoint.of
coords = st.fractions(min_value=-4, max_value=4, max_denominator=32).map(q)
points = st.builds(RationalPoint, coords, coords)

SQUARE = RationalPolygonalPath.polygon([P(1, 0), P(0, 1), P(-1, 0), P(0, -1)])


def test_path_eval_examples():
    seg = RationalPolygonalPath.uniform([P(0), P(1)])
    assert path_eval(seg, fmpq(1, 2)) == P(fmpq(1, 2))
    path = RationalPolygonalPath([fmpq(0), fmpq(1, 2), fmpq(1)], [P(0), P(0, 1), P(1, 1)])
    assert path_eval(path, fmpq(3, 4)) == P(fmpq(1, 2), 1)


@given(st.lists(points, min_size=2, max_size=8), st.data())
def test_path_eval_at_breakpoints_returns_vertices(vs, data):
    path = RationalPolygonalPath.uniform(vs)
    j = data.draw(st.integers(0, len(vs) - 1))
    assert path_eval(path, path.breakpoints[j]) == vs[j]


def test_sup_dist_examples():
    assert sup_dist(SQUARE, SQUARE) == 0
    c0 = RationalPolygonalPath.uniform([P(0), P(0)])
    c1 = RationalPolygonalPath.uniform([P(1), P(1)])
    d = sup_dist(c0, c1)
    assert 1 <= d < 1 + fmpq(1, 1 << 40)


@given(st.lists(points, min_size=2, max_size=6), points)
def test_sup_dist_of_translate(vs, c):
    a = RationalPolygonalPath.uniform(vs)
    b = RationalPolygonalPath.uniform([v + c for v in vs])
    d = sup_dist(a, b)
    norm = math.hypot(float(c.re), float(c.im))
    assert norm - 1e-9 <= float(d) <= 2 * norm + 1e-9


def test_winding_examples():
    square = RationalPolygonalPath.polygon([P(1, 1), P(-1, 1), P(-1, -1), P(1, -1)])
    assert winding_number(square, P(0)) == 1
    tri = RationalPolygonalPath.polygon([P(5, 5), P(6, 5), P(5, 6)])
    assert winding_number(tri, P(0)) == 0
    twice = RationalPolygonalPath.uniform(
        [P(1, 1), P(-1, 1), P(-1, -1), P(1, -1), P(1, 1), P(-1, 1), P(-1, -1), P(1, -1), P(1, 1)],
        closed=True)
    assert winding_number(twice, P(0)) == 2
    with pytest.raises(OnBoundary):
        winding_number(square, P(1, 0))


def _angle_winding(vs, z):
    total = 0.0
    for a, b in zip(vs, vs[1:]):
        ta = math.atan2(float(a.im - z.im), float(a.re - z.re))
        tb = math.atan2(float(b.im - z.im), float(b.re - z.re))
        d = tb - ta
        while d > math.pi:
            d -= 2 * math.pi
        while d < -math.pi:
            d += 2 * math.pi
        total += d
    return total / (2 * math.pi)


@given(st.lists(points, min_size=3, max_size=7), points)
def test_winding_matches_angle_sum(vs, z):
    path = RationalPolygonalPath.polygon(vs)
    if any(point_segment_dist2(z, s.p, s.q) < fmpq(1, 10**6) for s in path.segments()):
        return
    assert abs(winding_number(path, z) - _angle_winding(path.vertices, z)) < 1e-9


def test_dist_to_path_examples():
    assert dist_to_path_exceeds(P(2), SQUARE, fmpq(1, 2))
    assert not dist_to_path_exceeds(P(0), SQUARE, 1)
    assert not dist_to_path_exceeds(P(fmpq(1, 2), fmpq(1, 2)), SQUARE, 0)


@given(points, st.fractions(min_value=0, max_value=3, max_denominator=16).map(q))
def test_dist_to_path_agrees_with_sampling(z, d):
    exceeds = dist_to_path_exceeds(z, SQUARE, d)
    samples = [path_eval(SQUARE, fmpq(j, 400)) for j in range(401)]
    nearest = min((v - z).norm2() for v in samples)
    if exceeds:
        assert nearest > d * d


def test_segment_intersection_examples():
    assert segments_intersect(Segment(P(0), P(1, 1)), Segment(P(1), P(0, 1)))
    assert not segments_intersect(Segment(P(0), P(1)), Segment(P(0, 1), P(1, 1)))
    assert segments_intersect(Segment(P(0), P(1)), Segment(P(1), P(2, 3)))


def test_simple_polygon_detection():
    assert is_simple(SQUARE)
    bow = RationalPolygonalPath.polygon([P(0), P(1, 1), P(1, 0), P(0, 1)])
    assert not is_simple(bow)
