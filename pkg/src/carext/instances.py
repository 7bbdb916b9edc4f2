"""Built-in analytic instances: curves, conformal maps and their oracles.

Each instance bundles a curve name, the map phi (interior -> disk) with its
inverse, and independent analytic formulas used only by audits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from flint import acb, arb, fmpq

from .curves import JordanCurve
from .enclose import (acb_ball, arb_interval, arb_upper_q, ball_from_acb, exp2pi_i, log2_ceil,
                      precision)
from .exact import Ball, DomainError, MapName, Modulus, RationalPoint, q, sqrt_upper


def _prec_for(k: int, b: Ball) -> int:
    return max(k, 0) + 60


def _param_arb(b: Ball) -> arb:
    c = b.center.re
    return arb_interval(c - b.radius, c + b.radius)


def curve_from_fn(fn: Callable[[arb], acb], modulus: Modulus, m1: Optional[Modulus], key) -> JordanCurve:
    """Curve whose parameterization t -> fn(t) is given on arb enclosures."""

    def evaluate(b: Ball, k: int) -> Ball:
        with precision(_prec_for(k, b)):
            return ball_from_acb(fn(_param_arb(b)))

    param = MapName(evaluate, modulus, "unit-circle-params", key=key)
    return JordanCurve(param, acb_fn=fn, declared_inverse_modulus=m1, key=key)


def unit_circle() -> JordanCurve:
    # |f(s) - f(t)| <= 2 pi d < 8 d; chord 2 sin(pi d) >= 4 d for d <= 1/2
    return curve_from_fn(exp2pi_i, Modulus.shift(3), Modulus.shift(1), key=("circle",))


def translated_circle(cx, cy, radius=1) -> JordanCurve:
    c = RationalPoint.of(cx, cy)
    r = q(radius)
    shift_up = max(0, log2_ceil(r * 8)) if r > 0 else 0

    def fn(t: arb) -> acb:
        return acb(arb(c.re), arb(c.im)) + exp2pi_i(t) * arb(r)

    # chord of radius r is >= 4 r d; we only need m1 for r >= 1/2
    m1 = Modulus.shift(1) if r >= 1 else None
    return curve_from_fn(fn, Modulus.shift(shift_up), m1, key=("circle", c.re, c.im, r))


def ellipse(a, b) -> JordanCurve:
    a, b = q(a), q(b)
    big, small = max(a, b), min(a, b)
    m = Modulus.shift(max(0, log2_ceil(big * 8)))  # 2 pi big < 8 big
    # |f(s) - f(t)| >= small * chord >= 4 small d
    m1 = Modulus.shift(max(1, log2_ceil(1 / (4 * small)) + 1))

    def fn(t: arb) -> acb:
        s, c = (2 * t).sin_cos_pi()
        return acb(c * arb(a), s * arb(b))

    return curve_from_fn(fn, m, m1, key=("ellipse", a, b))


def polynomial_curve(c: RationalPoint) -> JordanCurve:
    """J = f(unit circle) for f(w) = w + c w^2, |c| <= 1/4."""
    _check_univalent(c)
    def fn(t: arb) -> acb:
        w = exp2pi_i(t)
        return w + acb(arb(c.re), arb(c.im)) * w * w

    # |d/dt f(e^{2 pi i t})| <= 2 pi (1 + 2|c|) <= 3 pi < 16;
    # |f(w1) - f(w2)| >= |w1 - w2| (1 - 2|c|) >= chord / 2 >= 2 d
    return curve_from_fn(fn, Modulus.shift(4), Modulus.shift(1), key=("polynomial", c.re, c.im))


def _check_univalent(c: RationalPoint) -> None:
    if c.norm2() > fmpq(1, 16):
        raise DomainError("polynomial coefficient must satisfy |c| <= 1/4")


# -- maps --------------------------------------------------------------------

def map_from_fn(fn: Callable[[acb], acb], modulus: Optional[Modulus], domain: str, key,
                inverse: Optional[MapName] = None) -> MapName:
    def evaluate(b: Ball, k: int) -> Ball:
        with precision(_prec_for(k, b)):
            return ball_from_acb(fn(acb_ball(b)))

    return MapName(evaluate, modulus, domain, inverse=inverse, key=key)


def identity_map(domain: str = "plane-region") -> MapName:
    m = MapName(lambda b, k: b, Modulus.shift(0), domain, key=("identity",))
    m.inverse = MapName(lambda b, k: b, Modulus.shift(0), "closed-disk", key=("identity",))
    return m


def rotation_map(beta) -> MapName:
    beta = q(beta)

    def rot(angle: fmpq) -> Callable[[acb], acb]:
        def fn(z: acb) -> acb:
            return exp2pi_i(arb(angle)) * z
        return fn

    inv = map_from_fn(rot(-beta), Modulus.shift(0), "closed-disk", ("rotation", -beta))
    return map_from_fn(rot(beta), Modulus.shift(0), "plane-region", ("rotation", beta), inverse=inv)


def mobius_map(a: RationalPoint) -> MapName:
    """phi(z) = (z - a) / (1 - conj(a) z), |a| < 1."""
    if a.norm2() >= 1:
        raise DomainError("Mobius parameter must satisfy |a| < 1")
    # |phi'| <= (1 + |a|)/(1 - |a|) on the disk
    au = sqrt_upper(a.norm2())
    lip = (1 + au) / (1 - au)
    shift = max(0, log2_ceil(lip))
    def fwd(z: acb) -> acb:
        aa = acb(arb(a.re), arb(a.im))
        return (z - aa) / (1 - aa.conjugate() * z)

    def back(w: acb) -> acb:
        aa = acb(arb(a.re), arb(a.im))
        return (w + aa) / (1 + aa.conjugate() * w)

    inv = map_from_fn(back, Modulus.shift(shift), "closed-disk", ("mobius-inverse", a.re, a.im))
    return map_from_fn(fwd, Modulus.shift(shift), "plane-region", ("mobius", a.re, a.im), inverse=inv)


def newton_inverse_map(c: RationalPoint, iterations: int = 60) -> MapName:
    """phi = f^{-1} for f(w) = w + c w^2, evaluated by Newton's method.

    Certification: on the disc |w| <= 3/2, Re f'(w) >= 1 - 3|c| =: kappa > 0,
    so |f(w1) - f(w2)| >= kappa |w1 - w2|.  If the residual at the Newton
    point w~ is at most res, every preimage of the input ball lies within
    (res + r_z) / kappa of w~.
    """
    _check_univalent(c)
    cu = sqrt_upper(c.norm2())
    kappa = 1 - 3 * cu

    def f(w: acb) -> acb:
        return w + acb(arb(c.re), arb(c.im)) * w * w

    def evaluate(b: Ball, k: int) -> Ball:
        prec = _prec_for(k, b) + 20
        with precision(prec):
            z = acb(arb(b.center.re), arb(b.center.im))
            w = z
            for _ in range(iterations):
                step = (f(w) - z) / (1 + 2 * acb(arb(c.re), arb(c.im)) * w)
                w = (w - step).mid()
                if step.abs_upper() < arb(2) ** (-prec + 8):
                    break
            wb = ball_from_acb(w)
            res = (f(acb(arb(wb.center.re), arb(wb.center.im))) - z).abs_upper()
            rad = (arb_upper_q(res) + b.radius) / kappa
            if wb.center.norm2() > fmpq(25, 16):
                raise DomainError("Newton point left the univalence disc")
            return Ball(wb.center, rad)

    inv = map_from_fn(lambda w: f(w), Modulus.shift(1), "closed-disk", ("polynomial", c.re, c.im))
    # |(f^{-1})'| = 1/|f'| <= 1/(1 - 2|c|) <= 2
    return MapName(evaluate, Modulus.shift(1), "plane-region", inverse=inv,
                   key=("polynomial-inverse", c.re, c.im))


# -- instances ----------------------------------------------------------------

@dataclass
class Instance:
    """A curve, its Riemann map and analytic reference formulas for audits."""

    name: str
    curve: JordanCurve
    phi: MapName
    phi_true: Callable[[acb], acb] = field(repr=False)
    phi_inv_true: Callable[[acb], acb] = field(repr=False)

    @property
    def phi_inv(self) -> MapName:
        return self.phi.inverse


def identity_instance() -> Instance:
    return Instance("identity", unit_circle(), identity_map(), lambda z: z, lambda w: w)


def rotation_instance(beta) -> Instance:
    b = q(beta)
    return Instance(f"rotation({b})", unit_circle(), rotation_map(b),
                    lambda z: exp2pi_i(arb(b)) * z, lambda w: exp2pi_i(arb(-b)) * w)


def mobius_instance(a: RationalPoint) -> Instance:
    def aa():
        return acb(arb(a.re), arb(a.im))

    return Instance(f"mobius({a.re},{a.im})", unit_circle(), mobius_map(a),
                    lambda z: (z - aa()) / (1 - aa().conjugate() * z),
                    lambda w: (w + aa()) / (1 + aa().conjugate() * w))


def polynomial_instance(c: RationalPoint) -> Instance:
    def cc():
        return acb(arb(c.re), arb(c.im))

    def quad_inverse(z: acb) -> acb:
        # principal branch: 1 + 4cz = (1 + 2cw)^2 with Re(1 + 2cw) >= 1/2
        return ((1 + 4 * cc() * z).sqrt() - 1) / (2 * cc())

    return Instance(f"polynomial({c.re},{c.im})", polynomial_curve(c), newton_inverse_map(c),
                    quad_inverse, lambda w: w + cc() * w * w)


# -- boundary data --------------------------------------------------------------

def trig_data(kind: str = "cos") -> MapName:
    """t -> cos(2 pi t) or sin(2 pi t) on circle parameters (turns)."""
    if kind not in ("cos", "sin"):
        raise DomainError(f"unknown trigonometric data {kind!r}")

    def evaluate(b: Ball, k: int) -> Ball:
        with precision(_prec_for(k, b)):
            s, c = (2 * _param_arb(b)).sin_cos_pi()
            return ball_from_acb(acb(c if kind == "cos" else s))

    # |d/dt cos(2 pi t)| <= 2 pi < 8
    return MapName(evaluate, Modulus.shift(3), "unit-circle-params", key=(kind,))
