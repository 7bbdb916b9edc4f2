import math

import pytest
from flint import fmpq
from hypothesis import given, settings, strategies as st

from carext.dirichlet import (delta_for, enclose_on_closure, enclose_square,
                              extend_to_closure, full_circle_data, kernel_integral, poisson_integral,
                              poisson_kernel, rho_for, staggered_systems)
from carext.enclose import ball_from_acb, exp2pi_i, precision
from carext.exact import (Ball, EndpointExcluded, MapName, Modulus, PointName, RationalPoint, pow2)
from carext.instances import trig_data
from flint import arb

COS = trig_data("cos")


def const_data(c):
    b = Ball(RationalPoint(fmpq(c)), fmpq(0))
    return MapName(lambda ball, k: b, Modulus.constant(0), "unit-circle-params", key=("const", c))


def circle_name(r, t):
    def approx(k):
        with precision(k + 40):
            return ball_from_acb(exp2pi_i(arb(t)) * arb(r))
    return PointName(approx, key=("test-disk", r, t))


def test_kernel_examples():
    assert poisson_kernel(0, fmpq(1, 5), 30).contains(RationalPoint.of(1))
    assert poisson_kernel(fmpq(1, 2), 0, 30).contains(RationalPoint.of(3))
    assert poisson_kernel(fmpq(1, 2), fmpq(1, 2), 30).contains(RationalPoint.of(fmpq(1, 3)))


@pytest.mark.parametrize("r", [fmpq(0), fmpq(1, 2), fmpq(9, 10)])
def test_kernel_normalization(r):
    b = kernel_integral(r, 20)
    assert b.contains(RationalPoint.of(1)) and b.radius <= pow2(-20)


def test_poisson_integral_examples():
    one = full_circle_data(const_data(1), 2)
    for z in (RationalPoint.of(0), RationalPoint.of(fmpq(1, 3), fmpq(-1, 2))):
        assert poisson_integral(one, Ball(z), 12).contains(RationalPoint.of(1))
    cos = full_circle_data(COS, fmpq(9, 8))
    assert poisson_integral(cos, Ball.point(fmpq(1, 2)), 12).contains(RationalPoint.of(fmpq(1, 2)))
    assert poisson_integral(cos, Ball.point(0, fmpq(1, 2)), 12).contains(RationalPoint.of(0))


@settings(max_examples=10)
@given(st.fractions(0, "9/10", max_denominator=16), st.integers(0, 15))
def test_poisson_integral_of_cos_is_r_cos(r, j):
    r = fmpq(r.numerator, r.denominator)
    t = fmpq(j, 16)
    z = circle_name(r, t).approx(40)
    cos = full_circle_data(COS, fmpq(9, 8))
    b = poisson_integral(cos, Ball(z.center), 10)
    assert abs(float(b.center.re) - float(r) * math.cos(2 * math.pi * float(t))) <= 2 ** -10 + 1e-12


def test_delta_for_constant_is_half_endpoint_distance():
    data = full_circle_data(const_data(2), 3)
    assert delta_for(data, fmpq(1, 8), fmpq(1, 4)) == fmpq(1, 16)


def test_delta_for_cos_window_oscillation():
    data = full_circle_data(COS, fmpq(9, 8))
    for alpha in (fmpq(1, 8), fmpq(1, 3), fmpq(5, 7)):
        d = delta_for(data, alpha, fmpq(3, 8))
        win = COS.eval(Ball(RationalPoint(alpha), d), 30)
        assert 2 * win.radius < fmpq(1, 8)


@given(st.integers(1, 6), st.integers(1, 15))
def test_delta_for_monotone_in_epsilon(e, j):
    data = full_circle_data(COS, fmpq(9, 8))
    alpha = fmpq(2 * j + 1, 32)
    eps = pow2(-e)
    assert delta_for(data, alpha, eps / 2) <= delta_for(data, alpha, eps)


def test_delta_for_rejects_endpoints():
    with pytest.raises(EndpointExcluded):
        delta_for(full_circle_data(COS, 2), fmpq(1, 2), fmpq(1, 4))


def test_rho_for_half_turn_example():
    rho = rho_for(fmpq(1, 2), 1, 1)
    assert rho * rho > fmpq(1, 2) and rho < 1


@given(st.integers(1, 8), st.integers(2, 12))
def test_rho_for_monotone_in_epsilon(e, dd):
    delta, eps = pow2(-dd), pow2(-e)
    assert rho_for(delta, 2 * eps, 2) <= rho_for(delta, eps, 2)


def test_rho_for_kernel_sweep():
    import random
    rng = random.Random(3)
    delta, eps, M = fmpq(1, 16), fmpq(1, 64), fmpq(9, 8)
    rho = rho_for(delta, eps, M)
    for _ in range(100):
        r = rho + (1 - rho) * fmpq(rng.randrange(1000), 1000)
        th = delta / 2 + (1 - delta) * fmpq(rng.randrange(1000), 1000)
        p = poisson_kernel(r, th, 40)
        assert p.center.re + p.radius < eps / (3 * M)


def test_extend_to_closure_examples():
    systems = staggered_systems(COS, fmpq(9, 8))
    b = extend_to_closure(systems, circle_name(1, fmpq(1, 6)), 8)
    assert b.radius <= pow2(-8) and b.contains(RationalPoint.of(fmpq(1, 2)))
    near = PointName.exact(RationalPoint.of(1 - pow2(-20)))
    b = extend_to_closure(systems, near, 8)
    assert abs(float(b.center.re) - (1 - 2 ** -20)) <= 2 ** -8
    const = staggered_systems(const_data(3), 4)
    for z in (PointName.exact(RationalPoint.of(0)), circle_name(1, fmpq(3, 8))):
        assert abs(float(extend_to_closure(const, z, 8).center.re) - 3) <= 2 ** -8


def test_enclosure_on_touching_ball_contains_values():
    data = full_circle_data(COS, fmpq(9, 8))
    zb = Ball.of(fmpq(7, 8), fmpq(1, 4), fmpq(1, 8))
    enc = enclose_on_closure(data, zb, pow2(-6))
    for j in range(16):
        a = 2 * math.pi * j / 16
        x, y = 7 / 8 + math.cos(a) / 8, 1 / 4 + math.sin(a) / 8
        if x * x + y * y <= 1:
            assert abs(complex(x, 0) - complex(float(enc.center.re), float(enc.center.im))) <= float(enc.radius) + 1e-12


@settings(max_examples=8)
@given(st.integers(-4, 3), st.integers(-4, 3))
def test_square_enclosure_contains_sampled_values(i, j):
    # u(z) = Re z for cos data; sample the square cut to the disk
    data = full_circle_data(COS, fmpq(9, 8))
    x0, y0, size = fmpq(i, 4), fmpq(j, 4), fmpq(1, 4)
    if min(abs(float(x0)), abs(float(x0 + size))) ** 2 + min(abs(float(y0)), abs(float(y0 + size))) ** 2 > 1:
        return
    enc = enclose_square(data, x0, y0, size, size)
    for a in range(5):
        for b in range(5):
            x, y = float(x0) + a / 16, float(y0) + b / 16
            if x * x + y * y <= 1:
                d = abs(complex(x - float(enc.center.re), -float(enc.center.im)))
                assert d <= float(enc.radius) + 1e-12
