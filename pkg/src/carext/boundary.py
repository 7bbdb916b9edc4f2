"""Boundary values of the Riemann map by the length-area bound.

For a boundary point zeta0 we pick an access-arc vertex w1 whose whole
tail lies in D_r(zeta0) and a strip half-width m with
m^2 > (2 pi)^2 / log(R/r).  After rotating phi(w1) onto the positive
imaginary axis, p1 = (m, sqrt(1 - m^2)) lies on the unit circle and
|phi(zeta0) - phi(w1)| < 2M with M = |p1 - rotated phi(w1)|.  M only
depends on rho = |phi(w1)|, so no rotation is ever computed:

    M^2 = m^2 + (sqrt(1 - m^2) - rho)^2.

This certified route needs log(R/r) of order 16 pi^2 4^k for radius 2^-k,
so it is practical only for k <= 1.  Above that the map falls back to a
sampled tier that reads phi along the access arc and flags its output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from flint import arb, fmpq

from .access import AccessArcBuilder, AccessArcName, InteriorCertificate, find_interior_point
from .curves import JordanCurve, Witness
from .enclose import arb_lower_q, arb_upper_q, log2_ceil, log2_floor, precision
from .exact import (Ball, CarextError, HALF, MapName, ONE, PointName, RationalPoint, ShrinkR, ZERO,
                    ball_sep, pow2, sqrt_lower, sqrt_upper)

CERTIFIED = "certified"
SAMPLED = "sampled"


# -- safe radius -----------------------------------------------------------------

def _circle_cover(n: int, radius: fmpq) -> list[Ball]:
    """n balls covering the circle |w| = radius."""
    balls = []
    with precision(96):
        for j in range(n):
            t = arb(fmpq(2 * j + 1, 2 * n))
            s, c = (2 * t).sin_cos_pi()
            cx, cy = arb_lower_q(c * arb(radius)), arb_lower_q(s * arb(radius))
            balls.append(Ball(RationalPoint(cx, cy), ZERO))
    # half-arc length pi r / n bounds the distance to the centres; add rounding slack
    half = radius * fmpq(22, 7) / n + pow2(-60)
    return [Ball(b.center, half) for b in balls]


def safe_radius(phi: MapName, zeta0: PointName, pieces: int = 64, max_doublings: int = 4,
                k: int = 24) -> fmpq:
    """Power of two R < dist(zeta0, phi^{-1}[A]), A the circle of radius 1/2."""
    inv = phi.inverse
    if inv is None:
        raise CarextError("map has no inverse oracle", "safe-radius-failed")
    z = zeta0.approx(k)
    n = pieces
    for _ in range(max_doublings + 1):
        best = None
        for b in _circle_cover(n, HALF):
            img = inv.eval(b, k)
            sep = ball_sep(z, img)
            if sep == "overlap":
                best = None
                break
            best = sep if best is None or sep < best else best
        if best is not None:
            e = log2_floor(best)
            R = pow2(e)
            return R / 2 if R == best else R
        n *= 2
    raise CarextError("inverse enclosures too coarse to separate zeta0 from the circle", "safe-radius-failed")


# -- strip width -----------------------------------------------------------------

def strip_width_for_log(L: arb) -> fmpq:
    """Least dyadic m with m^2 > (2 pi)^2 / L, grid 2^-(ceil(-log2 thr) + 3).

    Raises ShrinkR unless m < 1/2.
    """
    if not L > 0:
        raise ShrinkR("log(R/r) not certified positive")
    thr = arb_upper_q((2 * arb.pi()) / L.sqrt())
    g = log2_ceil(1 / thr) + 3 if thr < 1 else 3
    step = pow2(-g)
    m = (fmpq(int((thr / step).p) // int((thr / step).q)) + 1) * step
    if not m < HALF:
        raise ShrinkR(f"strip width {m} not below 1/2")
    return m


def strip_width(R, r) -> fmpq:
    R, r = fmpq(R), fmpq(r)
    if not (0 < r < R):
        raise CarextError("strip width needs 0 < r < R", "domain")
    with precision(128):
        return strip_width_for_log((arb(R) / arb(r)).log())


def strip_inequality_holds(m: fmpq, R: fmpq, r: fmpq) -> bool:
    """Directed check of m^2 > (2 pi)^2 / log(R/r): pi rounded up, log rounded down."""
    with precision(128):
        pi_hi = arb_upper_q(arb.pi())
        log_lo = arb_lower_q((arb(R) / arb(r)).log())
    return log_lo > 0 and m * m * log_lo > 4 * pi_hi * pi_hi


# -- frames --------------------------------------------------------------------------

@dataclass(frozen=True)
class LengthAreaFrame:
    R: fmpq
    r: fmpq
    T: int                 # stage whose endpoint is w1
    w1: RationalPoint
    m: fmpq
    phi_w1: Ball
    rho_lo: fmpq
    rho_hi: fmpq
    p1: RationalPoint      # (m, s_lo) in the normalized frame
    M: fmpq

    @property
    def radius(self) -> fmpq:
        return 2 * self.M + self.phi_w1.radius

    def recheck(self) -> bool:
        """Independent re-verification of every frame inequality."""
        if not strip_inequality_holds(self.m, self.R, self.r):
            return False
        if not self.m < HALF or not self.rho_lo > HALF + self.m:
            return False
        s_lo, s_hi = sqrt_lower(1 - self.m * self.m), sqrt_upper(1 - self.m * self.m)
        # the segment from p1 to (0, rho) lies above y = min(s, rho) > 1/2
        if not min(s_lo, self.rho_lo) > HALF:
            return False
        worst = max((s_hi - self.rho_lo) ** 2, (s_lo - self.rho_hi) ** 2)
        return self.M * self.M >= self.m * self.m + worst


def _modulus_bounds(b: Ball) -> tuple[fmpq, fmpq]:
    n2 = b.center.norm2()
    lo = sqrt_lower(n2, 80) - b.radius
    return max(lo, ZERO), sqrt_upper(n2, 80) + b.radius


def tail_stage(h, r: fmpq) -> int:
    """Least T with 2^-T+1 + 2^-h(T)-1 < r: the arc beyond e_T stays in D_r(zeta0)."""
    T = max(0, -log2_floor(r) + 1)
    while not pow2(-(T - 1)) + pow2(-(h(T) + 1)) < r:
        T += 1
    return T


def make_frame(phi: MapName, arc: AccessArcName, R: fmpq, r: fmpq, k_eval: int) -> Optional[LengthAreaFrame]:
    """Frame for inner radius r, or None when r is still too large."""
    try:
        m = strip_width(R, r)
    except ShrinkR:
        return None
    b = arc.builder
    T = tail_stage(b.h, r)
    w1 = b.stage(T).e
    img = phi.at(w1, k_eval)
    rho_lo, rho_hi = _modulus_bounds(img)
    if not rho_lo > HALF + m:
        return None
    s_lo, s_hi = sqrt_lower(1 - m * m), sqrt_upper(1 - m * m)
    if not min(s_lo, rho_lo) > HALF:
        return None
    worst = max((s_hi - rho_lo) ** 2, (s_lo - rho_hi) ** 2)
    M = sqrt_upper(m * m + worst, 64)
    return LengthAreaFrame(R, r, T, w1, m, img, rho_lo, rho_hi, RationalPoint(m, s_lo), M)


@dataclass
class BoundaryResult:
    ball: Ball
    tier: str
    frames: list[LengthAreaFrame] = field(default_factory=list)


def boundary_value(phi: MapName, J: JordanCurve, Q: AccessArcName, zeta0: PointName, k: int,
                   R: Optional[fmpq] = None, j_cap: int = 600) -> BoundaryResult:
    """Certified enclosure of phi(zeta0) by the 2M bound (radius <= 2^-k).

    Loops over r_j = min(R, 1) / 2^(j+1); every frame that passes its
    checks is recorded, the first one with 2M + eval radius <= 2^-k wins.
    """
    if R is None:
        R = safe_radius(phi, zeta0)
    base = min(R, ONE)
    frames = []
    for j in range(j_cap):
        r = base / (1 << (j + 1))
        fr = make_frame(phi, Q, R, r, k + 8)
        if fr is None:
            continue
        frames.append(fr)
        if fr.radius <= pow2(-k):
            return BoundaryResult(Ball(fr.phi_w1.center, fr.radius), CERTIFIED, frames)
    raise CarextError(f"no frame reached radius 2^-{k} within {j_cap} radii", "boundary-value-stalled")


def boundary_value_sampled(phi: MapName, Q: AccessArcName, k: int, t_cap: int = 400) -> BoundaryResult:
    """phi read along the access arc: phi(e_t) +- 2|phi(e_t) - phi(e_{t-1})| + radii.

    The radius is a convergence estimate, not a proof; results carry the
    sampled tier.
    """
    b = Q.builder
    kk = k + 6
    prev = phi.at(b.stage(0).e, kk)
    for t in range(1, t_cap):
        cur = phi.at(b.stage(t).e, kk)
        step = sqrt_upper((cur.center - prev.center).norm2(), 64)
        rad = 2 * step + cur.radius + prev.radius
        if rad <= pow2(-k) and t >= 2:
            return BoundaryResult(Ball(cur.center, rad), SAMPLED)
        prev = cur
    raise CarextError(f"sampled boundary value did not settle by stage {t_cap}", "boundary-value-stalled")


class BoundaryMapName:
    """phi restricted to J, evaluated at named points of J.

    Precisions up to ``certified_max_k`` use the length-area certificate;
    finer requests use the sampled tier.  Access arcs are memoized per point.
    """

    def __init__(self, phi: MapName, J: JordanCurve, h: Witness, certified_max_k: int = 0,
                 interior: Optional[InteriorCertificate] = None):
        self.phi = phi
        self.J = J
        self.h = h
        self.certified_max_k = certified_max_k
        self.interior = interior or find_interior_point(J)
        self._arcs: dict = {}
        self._R: dict = {}
        self._values: dict = {}

    @property
    def rigor_tier(self) -> str:
        return CERTIFIED if self.certified_max_k >= 30 else SAMPLED

    def _key(self, zeta: PointName):
        if zeta.key is not None:
            return zeta.key
        c = zeta.approx(40).center
        return ("ball", c.re, c.im)

    def arc(self, zeta: PointName) -> AccessArcName:
        key = self._key(zeta)
        a = self._arcs.get(key)
        if a is None:
            a = AccessArcName(AccessArcBuilder(self.J, zeta, self.h, interior=self.interior))
            self._arcs[key] = a
        return a

    def evaluate(self, zeta: PointName, k: int) -> BoundaryResult:
        key = (self._key(zeta), k)
        v = self._values.get(key)
        if v is None:
            Q = self.arc(zeta)
            if k <= self.certified_max_k:
                zk = self._key(zeta)
                if zk not in self._R:
                    self._R[zk] = safe_radius(self.phi, zeta)
                v = boundary_value(self.phi, self.J, Q, zeta, k, R=self._R[zk])
            else:
                v = boundary_value_sampled(self.phi, Q, k)
            self._values[key] = v
        return v

    def eval(self, zeta: PointName, k: int) -> Ball:
        return self.evaluate(zeta, k).ball

    def tier_for(self, k: int) -> str:
        return CERTIFIED if k <= self.certified_max_k else SAMPLED


def boundary_map(phi: MapName, J: JordanCurve, h: Witness, **kw) -> BoundaryMapName:
    return BoundaryMapName(phi, J, h, **kw)
