"""Exact rational arithmetic, rational-centred complex balls, and names.

Everything here works on :class:`flint.fmpq` values.  No floating point is
used for any predicate; irrational quantities (moduli, square roots) are
replaced by rational upper or lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Optional

from flint import fmpq, fmpz

Rational = fmpq

ZERO = fmpq(0)
ONE = fmpq(1)
HALF = fmpq(1, 2)


class CarextError(Exception):
    """Base error.  ``code`` is a stable machine-readable tag."""

    code = "error"

    def __init__(self, message: str = "", code: Optional[str] = None):
        super().__init__(message or (code or self.code))
        if code is not None:
            self.code = code


class DomainError(CarextError, ValueError):
    code = "domain"


class NotInterior(CarextError):
    code = "not-interior"


class EndpointExcluded(CarextError):
    code = "endpoint-excluded"


class OnBoundary(CarextError):
    code = "on-boundary"


class CapExceeded(CarextError):
    """A search ran into its configured budget without an answer."""

    code = "cap-exceeded"


class ShrinkR(CarextError):
    code = "shrink-r"


def q(x) -> fmpq:
    """Coerce ints, Fractions, fmpq and ``"p/q"`` strings to fmpq.

    Floats are rejected on purpose.
    """
    if isinstance(x, fmpq):
        return x
    if isinstance(x, (int, fmpz)):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            a, b = s.split("/")
            return fmpq(int(a), int(b))
        return fmpq(int(s))
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return fmpq(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot make an exact rational from {x!r}")


def qstr(x: fmpq) -> str:
    return f"{x.p}/{x.q}"


def pow2(k: int) -> fmpq:
    """2**k as an exact rational (k may be negative)."""
    return fmpq(1 << k) if k >= 0 else fmpq(1, 1 << -k)


def floor_q(x: fmpq) -> int:
    return int(x.p) // int(x.q)


def ceil_q(x: fmpq) -> int:
    return -((-int(x.p)) // int(x.q))


def round_down(x: fmpq, bits: int) -> fmpq:
    """Largest multiple of 2**-bits that is <= x."""
    return fmpq((int(x.p) << bits) // int(x.q), 1 << bits)


def round_up(x: fmpq, bits: int) -> fmpq:
    return fmpq(-((-(int(x.p) << bits)) // int(x.q)), 1 << bits)


def sqrt_upper(x: fmpq, bits: int = 64) -> fmpq:
    """Rational s >= sqrt(x), within about 2**-bits relative slack."""
    if x < 0:
        raise DomainError("sqrt of a negative rational")
    if x == 0:
        return ZERO
    shift = bits + max(0, (int(x.q).bit_length() - int(x.p).bit_length()) // 2 + 2)
    scaled = -((-(int(x.p) << (2 * shift))) // int(x.q))  # ceil(x * 4**shift)
    r = int(fmpz(scaled).isqrt())
    if r * r < scaled:
        r += 1
    return fmpq(r, 1 << shift)


def sqrt_lower(x: fmpq, bits: int = 64) -> fmpq:
    if x <= 0:
        if x < 0:
            raise DomainError("sqrt of a negative rational")
        return ZERO
    shift = bits + max(0, (int(x.q).bit_length() - int(x.p).bit_length()) // 2 + 2)
    scaled = (int(x.p) << (2 * shift)) // int(x.q)
    return fmpq(int(fmpz(scaled).isqrt()), 1 << shift)


@dataclass(frozen=True, slots=True)
class RationalPoint:
    re: fmpq
    im: fmpq = ZERO

    @staticmethod
    def of(re, im=0) -> "RationalPoint":
        return RationalPoint(q(re), q(im))

    def __add__(self, o: "RationalPoint") -> "RationalPoint":
        return RationalPoint(self.re + o.re, self.im + o.im)

    def __sub__(self, o: "RationalPoint") -> "RationalPoint":
        return RationalPoint(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "RationalPoint":
        return RationalPoint(-self.re, -self.im)

    def __mul__(self, o) -> "RationalPoint":
        if isinstance(o, RationalPoint):
            return RationalPoint(self.re * o.re - self.im * o.im,
                                 self.re * o.im + self.im * o.re)
        o = q(o)
        return RationalPoint(self.re * o, self.im * o)

    __rmul__ = __mul__

    def conj(self) -> "RationalPoint":
        return RationalPoint(self.re, -self.im)

    def norm2(self) -> fmpq:
        return self.re * self.re + self.im * self.im

    def abs_upper(self, bits: int = 64) -> fmpq:
        return sqrt_upper(self.norm2(), bits)

    def abs_lower(self, bits: int = 64) -> fmpq:
        return sqrt_lower(self.norm2(), bits)

    def __complex__(self) -> complex:
        return complex(float(self.re.p) / float(self.re.q), float(self.im.p) / float(self.im.q))

    def __repr__(self) -> str:
        return f"RationalPoint({self.re}, {self.im})"


ORIGIN = RationalPoint(ZERO, ZERO)


@dataclass(frozen=True, slots=True)
class Ball:
    """Closed disc ``{z : |z - center| <= radius}``."""

    center: RationalPoint
    radius: fmpq = ZERO

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError("negative ball radius")

    @staticmethod
    def point(re, im=0) -> "Ball":
        return Ball(RationalPoint.of(re, im), ZERO)

    @staticmethod
    def of(re, im, radius) -> "Ball":
        return Ball(RationalPoint.of(re, im), q(radius))

    def contains(self, z: RationalPoint) -> bool:
        return (z - self.center).norm2() <= self.radius * self.radius

    def contains_ball(self, other: "Ball") -> bool:
        if other.radius > self.radius:
            return False
        gap = self.radius - other.radius
        return (other.center - self.center).norm2() <= gap * gap

    def abs_upper(self) -> fmpq:
        return self.center.abs_upper() + self.radius

    def abs_lower(self) -> fmpq:
        return max(ZERO, self.center.abs_lower() - self.radius)

    def widen(self, r: fmpq) -> "Ball":
        return Ball(self.center, self.radius + r)

    def rounded(self, bits: int) -> "Ball":
        """Dyadic centre on the 2**-bits grid, radius grown to compensate."""
        c = self.center
        re, im = round_down(c.re, bits), round_down(c.im, bits)
        err = (c.re - re) + (c.im - im)
        return Ball(RationalPoint(re, im), round_up(self.radius + err, bits))

    def real_bounds(self) -> tuple[fmpq, fmpq]:
        return self.center.re - self.radius, self.center.re + self.radius

    def __repr__(self) -> str:
        return f"Ball({self.center.re}{'+' if self.center.im >= 0 else ''}{self.center.im}i, r={self.radius})"


def ball_add(a: Ball, b: Ball) -> Ball:
    return Ball(a.center + b.center, a.radius + b.radius)


def ball_sub(a: Ball, b: Ball) -> Ball:
    return Ball(a.center - b.center, a.radius + b.radius)


def ball_mul(a: Ball, b: Ball) -> Ball:
    """Product enclosure: radius |c1| r2 + |c2| r1 + r1 r2 with rational |.| bounds."""
    c = a.center * b.center
    if a.radius == 0 and b.radius == 0:
        return Ball(c, ZERO)
    r = ZERO
    if b.radius:
        r += a.center.abs_upper() * b.radius
    if a.radius:
        r += b.center.abs_upper() * a.radius
    return Ball(c, r + a.radius * b.radius)


def ball_scale(a: Ball, s: fmpq) -> Ball:
    return Ball(a.center * s, a.radius * abs(s))


def ball_sep(a: Ball, b: Ball):
    """Positive rational lower bound on ``inf |x - y|``, or ``"overlap"``.

    Decided exactly on squared distances; the returned bound is
    ``sqrt_lower(d^2) - r_a - r_b`` when that is positive, otherwise the
    exact squared-gap test still certifies separation and a smaller dyadic
    bound is returned.
    """
    d2 = (a.center - b.center).norm2()
    rs = a.radius + b.radius
    if d2 <= rs * rs:
        return "overlap"
    bits = 64
    while True:
        lb = sqrt_lower(d2, bits) - rs
        if lb > 0:
            return lb
        bits *= 2


@dataclass(frozen=True)
class Modulus:
    """Monotone map k -> m(k); monotonicity is enforced by running maxima."""

    fn: Callable[[int], int]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, k: int) -> int:
        if k < 0:
            k = 0
        c = self._cache
        if k in c:
            return c[k]
        v = int(self.fn(k))
        if k > 0:
            v = max(v, self(k - 1))
        c[k] = v
        return v

    @staticmethod
    def shift(s: int) -> "Modulus":
        return Modulus(lambda k, s=s: k + s)

    @staticmethod
    def constant(c: int = 0) -> "Modulus":
        return Modulus(lambda k, c=c: c)


IDENTITY_MODULUS = Modulus.shift(0)


def compose_moduli(m1: Modulus, m: Modulus) -> Modulus:
    """k -> m1(m(k)), the witness construction h = m1 o m."""
    return Modulus(lambda k: m1(m(k)))


class PointName:
    """Precision-indexed oracle: ``approx(k)`` is a Ball of radius <= 2**-k."""

    def __init__(self, approx: Callable[[int], Ball], key: Hashable = None):
        self._approx = approx
        self._cache: dict[int, Ball] = {}
        self.key = key

    def approx(self, k: int) -> Ball:
        b = self._cache.get(k)
        if b is None:
            b = self._approx(k)
            if b.radius > pow2(-k):
                raise CarextError(f"name returned radius {b.radius} > 2^-{k}", "oracle-inconsistent")
            self._cache[k] = b
        return b

    @staticmethod
    def exact(z: RationalPoint | Ball) -> "PointName":
        if isinstance(z, Ball):
            z = z.center
        b = Ball(z, ZERO)
        return PointName(lambda k: b, key=("exact", z.re, z.im))

    def __repr__(self) -> str:
        return f"PointName(key={self.key!r})"


DOMAINS = ("unit-interval", "unit-circle-params", "open-disk", "closed-disk", "plane-region")


class MapName:
    """Oracle for a continuous map.

    ``eval(ball, k)`` encloses the image of ``ball``.  For a radius-0 ball the
    result has radius <= 2**-k; for wider balls it is an enclosure of the
    image set with no promise on its size.
    """

    def __init__(self, evaluate: Callable[[Ball, int], Ball], modulus: Optional[Modulus],
                 domain: str, inverse: Optional["MapName"] = None, key: Hashable = None,
                 tier: str = "certified"):
        if domain not in DOMAINS:
            raise DomainError(f"unknown domain tag {domain!r}")
        self._evaluate = evaluate
        self.modulus = modulus
        self.domain = domain
        self.inverse = inverse
        self.key = key
        self.tier = tier

    def eval(self, ball: Ball, k: int) -> Ball:
        return self._evaluate(ball, k)

    def at(self, z: RationalPoint, k: int) -> Ball:
        return self._evaluate(Ball(z, ZERO), k)

    def name_of(self, z: PointName, extra: int = 2) -> PointName:
        """Compose with a point name, using the modulus to budget input precision."""
        if self.modulus is None:
            raise CarextError("map has no modulus", "no-modulus")

        def approx(k):
            zb = z.approx(self.modulus(k + extra))
            out = self.eval(Ball(zb.center, ZERO), k + extra)
            return out.widen(pow2(-(k + extra)))

        return PointName(approx, key=("image", self.key, z.key))

    def __repr__(self) -> str:
        return f"MapName({self.key!r}, {self.domain})"


def circle_distance(s: fmpq, t: fmpq) -> fmpq:
    """Wraparound distance on [0, 1): min(|s-t| mod 1, 1 - ...)."""
    d = s - t
    d = d - floor_q(d)
    return min(d, ONE - d)


def wrap01(s: fmpq) -> fmpq:
    return s - floor_q(s)
