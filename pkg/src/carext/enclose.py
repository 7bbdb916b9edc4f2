"""Bridges between exact rational balls and flint ``arb``/``acb`` enclosures.

Transcendental work (exp, cos, arg, log) happens in arb ball arithmetic,
whose results are rigorous enclosures.  Results are turned back into exact
rational :class:`~carext.exact.Ball` values with outward rounding.
"""

from __future__ import annotations

from contextlib import contextmanager

from flint import acb, arb, ctx, fmpq, fmpz

from .exact import Ball, RationalPoint, ZERO


@contextmanager
def precision(bits: int):
    """Temporarily raise the global arb working precision to at least ``bits``."""
    old = ctx.prec
    ctx.prec = max(int(bits), 53)
    try:
        yield
    finally:
        ctx.prec = old


def arb_exact(x: fmpq) -> fmpq:
    """Exact rational value of an exact (radius-0) arb."""
    m, e = x.man_exp()
    e = int(e)
    return fmpq(m) * (fmpq(1 << e) if e >= 0 else fmpq(1, 1 << -e))


def arb_mid_q(x: arb) -> fmpq:
    return arb_exact(x.mid())


def arb_rad_q(x: arb) -> fmpq:
    r = x.rad()
    if r == 0:
        return ZERO
    return arb_exact(r)


def arb_lower_q(x: arb) -> fmpq:
    if not x.is_finite():
        raise ArithmeticError("non-finite enclosure")
    return arb_exact(x.lower())


def arb_upper_q(x: arb) -> fmpq:
    if not x.is_finite():
        raise ArithmeticError("non-finite enclosure")
    return arb_exact(x.upper())


def arb_interval(lo: fmpq, hi: fmpq) -> arb:
    """An arb ball containing the rational interval [lo, hi]."""
    mid = (lo + hi) / 2
    return arb(mid) + arb(0, (hi - lo) / 2)


def arb_q(x: fmpq) -> arb:
    return arb(x)


def acb_point(p: RationalPoint) -> acb:
    return acb(arb(p.re), arb(p.im))


def acb_ball(b: Ball) -> acb:
    """acb box containing the disc ``b``."""
    z = acb(arb(b.center.re), arb(b.center.im))
    if b.radius:
        r = arb(0, b.radius)
        z = z + acb(r, r)
    return z


def ball_from_acb(z: acb) -> Ball:
    """Rational ball enclosing the acb box ``z`` (radius = rad_re + rad_im)."""
    re, im = z.real, z.imag
    if not (re.is_finite() and im.is_finite()):
        raise ArithmeticError("non-finite enclosure")
    c = RationalPoint(arb_mid_q(re), arb_mid_q(im))
    return Ball(c, arb_rad_q(re) + arb_rad_q(im))


def ball_from_arb(x: arb) -> Ball:
    if not x.is_finite():
        raise ArithmeticError("non-finite enclosure")
    return Ball(RationalPoint(arb_mid_q(x), ZERO), arb_rad_q(x))


def exp2pi_i(t: arb) -> acb:
    """e^{2 pi i t} for a real enclosure t (t in turns)."""
    s, c = (2 * t).sin_cos_pi()
    return acb(c, s)


def turns_of(z: acb) -> arb:
    """arg(z) / 2pi in (-1/2, 1/2]."""
    return z.arg() / (2 * arb.pi())


def pi_bounds(bits: int = 128) -> tuple[fmpq, fmpq]:
    """Directed rational enclosure [pi_lo, pi_hi]."""
    with precision(bits):
        p = arb.pi()
        return arb_lower_q(p), arb_upper_q(p)


def log2_floor(x: fmpq) -> int:
    """floor(log2 x) for positive rational x, exactly."""
    if x <= 0:
        raise ValueError("log2 of non-positive value")
    p, q = int(x.p), int(x.q)
    e = p.bit_length() - q.bit_length()
    # 2^e <= p/q < 2^(e+1) up to one step of correction
    if e >= 0:
        if p < (q << e):
            e -= 1
    else:
        if (p << -e) < q:
            e -= 1
    return e


def log2_ceil(x: fmpq) -> int:
    e = log2_floor(x)
    if e >= 0:
        return e if fmpq(1 << e) == x else e + 1
    return e if fmpq(1, 1 << -e) == x else e + 1


def fmpz_bits(x: fmpz) -> int:
    return int(x).bit_length()
