import random

from flint import fmpq
from hypothesis import given, settings, strategies as st

from carext.curves import (JordanCurve, curve_sup_bound, inverse_modulus, lc_witness, polygonal_approx,
                           sample_witness_property)
from carext.exact import MapName, Modulus, pow2, sqrt_lower
from carext.instances import ellipse, translated_circle, unit_circle


def _chord_implies_arc(J, k, m1, n=4096):
    """On an n-point grid: |f(s) - f(t)| <= 2^-m1 only when circle distance <= 2^-k."""
    pts = [J.point(fmpq(i, n), 40).center for i in range(n)]
    thr = pow2(-m1)
    step = max(1, (n >> k) // 2)
    for i in range(0, n, 7):
        for j in range(0, n, step):
            d = abs(i - j) % n
            d = min(d, n - d)
            if fmpq(d, n) <= pow2(-k):
                continue
            if (pts[i] - pts[j]).norm2() <= thr * thr:
                return False
    return True


def test_circle_inverse_modulus_is_k_plus_one():
    C = unit_circle()
    assert [inverse_modulus(C, k) for k in range(6)] == [k + 1 for k in range(6)]
    assert all(_chord_implies_arc(C, k, k + 1, 1024) for k in range(4))


def test_inverse_modulus_is_rotation_invariant():
    a = [inverse_modulus(unit_circle(), k) for k in range(5)]
    b = [inverse_modulus(translated_circle(0, 0, 1), k) for k in range(5)]
    assert a == b


def test_ellipse_inverse_modulus_certifies_on_grid():
    E = ellipse(1, fmpq(1, 2))
    for k in range(4):
        assert _chord_implies_arc(E, k, inverse_modulus(E, k))


def test_circle_witness_is_k_plus_four():
    W = lc_witness(unit_circle())
    assert [W.h(k) for k in range(8)] == [k + 4 for k in range(8)]


def test_identity_modulus_stub_gives_h_equal_m1():
    C = unit_circle()
    stub = JordanCurve(MapName(C.param.eval, Modulus.shift(0), "unit-circle-params"), key=("stub",))
    m1 = Modulus.shift(2)
    W = lc_witness(stub, m1)
    assert [W.h(k) for k in range(6)] == [m1(k) for k in range(6)]


def test_witness_property_on_ellipse_random_pairs():
    E = ellipse(1, fmpq(1, 2))
    W = lc_witness(E)
    rng = random.Random(8)
    for _ in range(16):
        k = rng.randrange(9)
        s1 = fmpq(rng.randrange(1 << 12), 1 << 12)
        assert sample_witness_property(E, W, k, s1)


def test_circle_polygon_t1():
    C = unit_circle()
    P = polygonal_approx(C, 1)
    assert curve_sup_bound(C, P) < fmpq(1, 2)


def test_ellipse_polygon_t8():
    E = ellipse(1, fmpq(1, 2))
    assert curve_sup_bound(E, polygonal_approx(E, 8)) < pow2(-8)


@settings(max_examples=6)
@given(st.integers(0, 5))
def test_polygon_bounds_shrink(t):
    E = ellipse(1, fmpq(1, 2))
    a, b = curve_sup_bound(E, polygonal_approx(E, t)), curve_sup_bound(E, polygonal_approx(E, t + 1))
    assert a < pow2(-t) and b < pow2(-(t + 1))


def test_polygon_vertices_lie_near_curve():
    C = unit_circle()
    P = polygonal_approx(C, 4)
    for v in P.vertices:
        r = sqrt_lower(v.norm2())
        assert abs(r - 1) < pow2(-4)
