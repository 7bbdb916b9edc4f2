from flint import acb, arb, fmpq
from hypothesis import given, settings, strategies as st

from carext.enclose import arb_lower_q, ball_from_acb, exp2pi_i, precision
from carext.exact import Ball, MapName, Modulus, PointName, RationalPoint, pow2, sqrt_upper, wrap01
from carext.instances import rotation_instance, unit_circle
from carext.inversion import (DiskSearchTrace, UniqueZeroProblem, caratheodory_extension,
                              curve_bound, extend_inverse, invert_boundary, unique_zero_on_circle)


def circle_point(t, r=1):
    def approx(k):
        with precision(k + 40):
            return ball_from_acb(exp2pi_i(arb(t)) * arb(r))
    return PointName(approx, key=("test-disk", r, t))


def turn_dist(a, b):
    d = wrap01(a - b)
    return min(d, 1 - d)


def dist(b, z):
    return float(sqrt_upper((b.center - z).norm2()))


def _eval_true(fn, z):
    with precision(120):
        return ball_from_acb(fn(acb(arb(z.re), arb(z.im)))).center


def test_unique_zero_identity_circle():
    J = unit_circle()
    name = unique_zero_on_circle(UniqueZeroProblem(J.param, circle_point(fmpq(1, 8))))
    b = name.approx(12)
    assert turn_dist(b.center.re, fmpq(1, 8)) <= pow2(-12)


@settings(max_examples=8)
@given(st.integers(0, 15), st.integers(1, 7))
def test_unique_zero_rotation(j, bnum):
    beta = fmpq(bnum, 8)
    J = unit_circle()
    rot = rotation_instance(beta)
    g = MapName(lambda b, k: rot.phi.eval(J.param.eval(b, k + 4), k + 2), J.modulus, "unit-circle-params",
                key=("rotated-circle", beta))
    t = fmpq(j, 16)
    s = unique_zero_on_circle(UniqueZeroProblem(g, circle_point(t))).approx(10).center.re
    assert turn_dist(s, t - beta) <= pow2(-10)


def test_unique_zero_on_mobius_boundary_map(mobius_setup):
    s = mobius_setup
    bm = s.bm
    g = MapName(lambda b, k: bm.eval(s.J.name_at(b.center.re), k) if b.radius == 0 else None,
                None, "unit-circle-params", key=("mobius-boundary",))
    for j in range(0, 16, 5):
        th = fmpq(j, 16)
        target = PointName(lambda k, th=th: bm.eval(s.J.name_at(th), k), key=("mob-target", th))
        prob = UniqueZeroProblem(g, target, exclusion_modulus=Modulus.shift(4))
        got = unique_zero_on_circle(prob).approx(8).center.re
        assert turn_dist(got, th) <= pow2(-8)


def test_invert_boundary_identity(identity_setup):
    s = identity_setup
    inv = invert_boundary(s.bm, s.J)
    for j in range(32):
        b = inv.eval(Ball(RationalPoint(fmpq(j, 32))), 10)
        assert b.radius <= pow2(-10)
        assert dist(b, circle_point(fmpq(j, 32)).approx(50).center) <= 2 ** -10


def test_invert_boundary_mobius_and_round_trip(mobius_setup):
    s = mobius_setup
    inv = invert_boundary(s.bm, s.J)
    for j in range(32):
        w = circle_point(fmpq(j, 32)).approx(50).center
        b = inv.eval(Ball(RationalPoint(fmpq(j, 32))), 8)
        assert dist(b, _eval_true(s.inst.phi_inv_true, w)) <= 2 ** -8
    # phi^-1(phi(zeta)) encloses zeta, zeta = J(t)
    for j in range(16):
        t = fmpq(j, 16)
        img = s.bm.eval(s.J.name_at(t), 12)
        with precision(100):
            ang = acb(arb(img.center.re), arb(img.center.im)).arg() / (2 * arb.pi())
            th = wrap01(arb_lower_q(ang))
        back = inv.eval(Ball(RationalPoint(th), img.radius), 10)
        zeta = s.J.name_at(t).approx(40)
        gap = back.radius + zeta.radius
        assert (back.center - zeta.center).norm2() <= gap * gap


def test_extend_inverse_identity_origin(identity_setup):
    s = identity_setup
    ext = extend_inverse(invert_boundary(s.bm, s.J), curve_bound(s.J))
    b = ext.eval_point(PointName.exact(RationalPoint.of(0)), 6)
    assert b.contains(RationalPoint.of(0)) and b.radius <= pow2(-6)


def test_extend_inverse_affine_boundary_data():
    # boundary data c + e^{2 pi i beta} w extends to the same affine map
    c, beta = RationalPoint.of(fmpq(1, 3), fmpq(-1, 5)), fmpq(1, 8)

    def evaluate(b, k):
        with precision(k + 60):
            t = arb(b.center.re) + arb(0, b.radius) if b.radius else arb(b.center.re)
            return ball_from_acb(acb(arb(c.re), arb(c.im)) + exp2pi_i(arb(beta)) * exp2pi_i(t))

    data = MapName(evaluate, Modulus.shift(3), "unit-circle-params", key=("affine",))
    from carext.inversion import ExtendedInverse
    ext = ExtendedInverse(data, fmpq(2))
    for j in range(10):
        r, t = fmpq(j % 3 + 1, 4), fmpq(j, 10)
        z = circle_point(t, r)
        b = ext.eval_point(z, 10)
        zc = z.approx(60).center
        truth = _eval_true(lambda w: acb(arb(c.re), arb(c.im)) + exp2pi_i(arb(beta)) * w, zc)
        assert dist(b, truth) <= 2 ** -10


def test_extend_inverse_boundary_consistency(mobius_setup):
    s = mobius_setup
    inv = invert_boundary(s.bm, s.J)
    ext = extend_inverse(inv, curve_bound(s.J))
    for j in range(16):
        t = fmpq(2 * j + 1, 32)
        a = ext.eval_point(circle_point(t), 8)
        b = inv.eval(Ball(RationalPoint(t)), 8)
        gap = a.radius + b.radius
        assert (a.center - b.center).norm2() <= gap * gap


def test_extension_interior_uses_oracle(mobius_setup):
    s = mobius_setup
    ext = caratheodory_extension(s.inst.phi, s.J, s.bm, k_bm=12)
    z = RationalPoint.of(fmpq(1, 3), fmpq(1, 5))
    b, tier = ext.evaluate(PointName.exact(z), 10)
    assert b.radius <= pow2(-10)
    assert dist(b, _eval_true(s.inst.phi_true, z)) <= 2 ** -10


def test_extension_curve_point(polynomial_setup):
    s = polynomial_setup
    ext = caratheodory_extension(s.inst.phi, s.J, s.bm, k_bm=12)
    tr = DiskSearchTrace(0, [], [])
    b, _ = ext.evaluate(s.J.name_at(fmpq(3, 16)), 6, trace=tr)
    assert b.radius <= pow2(-6)
    assert dist(b, circle_point(fmpq(3, 16)).approx(40).center) <= 2 ** -6
    assert tr.excluded


def test_extension_unnamed_boundary_point_square_search(identity_setup):
    # 3/5 + 4/5 i lies on the circle but is not given as a curve point,
    # so the search uses the square enclosures
    s = identity_setup
    ext = caratheodory_extension(s.inst.phi, s.J, s.bm, k_bm=10)
    z = RationalPoint.of(fmpq(3, 5), fmpq(4, 5))
    b, _ = ext.evaluate(PointName.exact(z), 3)
    assert b.radius <= pow2(-3)
    assert dist(b, z) <= 2 ** -3
