from flint import fmpq
from hypothesis import given, settings, strategies as st

from carext.access import (AccessArcBuilder, AccessArcName, audit_stage, cauchy_bound_holds,
                           find_interior_point, tube_free)
from carext.curves import lc_witness
from carext.exact import PointName, RationalPoint, pow2
from carext.geometry import dist_to_path_exceeds, point_on_segment, winding_number
from carext.instances import ellipse, translated_circle, unit_circle


def _builder(J, zeta):
    return AccessArcBuilder(J, zeta, lc_witness(J))


def test_circle_interior_point_is_origin():
    cert = find_interior_point(unit_circle())
    assert cert.z0 == RationalPoint.of(0) and cert.t == 2


def test_translated_circle_interior_point():
    J = translated_circle(3, 4)
    z0 = find_interior_point(J).z0
    assert z0 != RationalPoint.of(0)
    assert (z0 - RationalPoint.of(3, 4)).norm2() < fmpq(1, 4)


def test_interior_point_satisfies_predicates():
    for J in (unit_circle(), ellipse(1, fmpq(1, 2)), translated_circle(3, 4)):
        cert = find_interior_point(J)
        P = J.polygon(cert.t)
        assert dist_to_path_exceeds(cert.z0, P, 2 * pow2(-cert.t))
        assert winding_number(P, cert.z0) in (1, -1)


def test_first_endpoints_toward_one():
    b = _builder(unit_circle(), PointName.exact(RationalPoint.of(1)))
    e1 = b.stage(1).e
    assert e1.im == 0 and e1.norm2() < 1
    assert (e1 - RationalPoint.of(1)).norm2() < pow2(-12)
    assert b.near_zeta(e1, 1)


def test_new_endpoint_not_on_previous_stage():
    b = _builder(unit_circle(), PointName.exact(RationalPoint.of(1)))
    for t in range(5):
        prev, nxt = b.stage(t), b.stage(t + 1)
        assert all(not point_on_segment(nxt.e, s) for s in prev.segments())


def test_tube_indices_stay_valid_when_increased():
    J = unit_circle()
    b = _builder(J, PointName.exact(RationalPoint.of(1)))
    st0 = b.stage(2)
    for seg, s in zip(st0.segments(), st0.tubes):
        assert tube_free(J, seg, s) and tube_free(J, seg, s + 1)


def test_stage_audits_circle():
    b = _builder(unit_circle(), PointName.exact(RationalPoint.of(1)))
    for t in range(7):
        assert audit_stage(b, t).ok
    assert cauchy_bound_holds(b, 0, 6)


def test_access_arc_name_endpoints():
    A = AccessArcName(_builder(unit_circle(), PointName.exact(RationalPoint.of(1))))
    for k in range(2, 10):
        b = A.eval(0, k)
        assert b.center == RationalPoint.of(0)
    end = A.eval(1, 10)
    assert (end.center - RationalPoint.of(1)).norm2() <= pow2(-20)


@settings(max_examples=8)
@given(st.sampled_from([fmpq(1, 3), fmpq(2, 3), fmpq(1)]), st.integers(4, 11))
def test_access_arc_name_nested(x, k):
    A = AccessArcName(_builder(unit_circle(), PointName.exact(RationalPoint.of(1))))
    a, b = A.eval(x, k), A.eval(x, k + 1)
    gap = a.radius + b.radius
    assert (a.center - b.center).norm2() <= gap * gap


def test_ellipse_access_arc_audits():
    J = ellipse(1, fmpq(1, 2))
    b = _builder(J, J.name_at(fmpq(1, 8)))
    for t in range(4):
        assert audit_stage(b, t).ok
