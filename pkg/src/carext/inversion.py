"""Inverting the boundary map and extending both maps to the closures.

The boundary map composed with the curve parameterization is an
orientation-preserving homeomorphism of the circle.  Its lifted angle
sigma(s) = arg(phi(f(s))) / 2pi is therefore monotone, and a table of
enclosures of sigma at dyadic parameters brackets sigma^{-1} of any angle
interval.  That bracket is the exclusion test behind the inverse
boundary map: parameters outside it certainly miss the target.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Optional, Union

from flint import acb, arb, fmpq

from .access import InteriorCertificate, certify_segment, find_interior_point
from .boundary import CERTIFIED, BoundaryMapName
from .curves import JordanCurve
from .dirichlet import (_arc_in_ball, data_on_range, enclose_on_closure, enclose_square, extend_to_closure,
                        staggered_systems)
from .enclose import acb_ball, arb_lower_q, arb_upper_q, precision
from .exact import (Ball, CarextError, HALF, MapName, Modulus, NotInterior, ONE, PointName, RationalPoint,
                    ZERO, ball_sep, floor_q, pow2, round_up, sqrt_upper, wrap01)
from .geometry import Segment, segment_segment_dist2


# -- generic unique zero on the circle --------------------------------------------

@dataclass
class UniqueZeroProblem:
    """g on circle parameters (turns) with exactly one s where g(s) = target."""

    g: MapName
    target: PointName
    exclusion_modulus: Optional[Modulus] = None


def _arc_image(p: UniqueZeroProblem, lo: fmpq, hi: fmpq, k: int) -> Ball:
    mid = (lo + hi) / 2
    half = (hi - lo) / 2
    m = p.exclusion_modulus
    if m is not None:
        # largest j with 2^-m(j) >= half: then g varies by <= 2^-j on the arc
        j = 0
        while j < k and pow2(-m(j + 1)) >= half:
            j += 1
        c = p.g.at(RationalPoint(mid, ZERO), k)
        return c.widen(pow2(-j))
    return p.g.eval(Ball(RationalPoint(mid, ZERO), half), k)


def unique_zero_on_circle(p: UniqueZeroProblem, max_rounds: int = 64, max_arcs: int = 64) -> PointName:
    """PointName (real part = parameter in turns) of the unique zero of g - target.

    Dyadic arcs are discarded when the enclosure of g over them is
    separated from the target ball; survivors are halved every round.
    """
    state = {"arcs": [(fmpq(i, 8), fmpq(i + 1, 8)) for i in range(8)], "round": 0}

    def approx(k: int) -> Ball:
        while True:
            arcs = state["arcs"]
            lo, hi = _cluster(arcs)
            if hi - lo <= pow2(-k):
                c = (lo + hi) / 2
                return Ball(RationalPoint(wrap01(c), ZERO), (hi - lo) / 2)
            if state["round"] >= max_rounds:
                raise CarextError("zero not isolated within the round cap", "multiplicity-suspected")
            state["round"] += 1
            n = state["round"] + 3
            tb = p.target.approx(n + 2)
            keep = []
            for lo_, hi_ in arcs:
                mid = (lo_ + hi_) / 2
                for a, b in ((lo_, mid), (mid, hi_)):
                    img = _arc_image(p, a, b, n + 2)
                    if ball_sep(img, tb) == "overlap":
                        keep.append((a, b))
            if not keep:
                raise CarextError("every arc excluded", "no-zero")
            if len(keep) > max_arcs:
                raise CarextError("too many surviving arcs", "multiplicity-suspected")
            state["arcs"] = keep

    return PointName(approx, key=("circle-zero", p.g.key, p.target.key))


def _cluster(arcs) -> tuple[fmpq, fmpq]:
    """Smallest lifted interval [lo, hi] containing all arcs (arcs live on the circle)."""
    pts = sorted(arcs)
    if len(pts) == 1:
        return pts[0]
    # the cluster spans the circle minus its largest gap
    best_gap, best_i = ZERO, 0
    n = len(pts)
    for i in range(n):
        a_end = pts[i][1]
        b_start = pts[(i + 1) % n][0] + (1 if i == n - 1 else 0)
        gap = b_start - a_end
        if gap > best_gap:
            best_gap, best_i = gap, i
    start = pts[(best_i + 1) % n][0]
    end = pts[best_i][1]
    if end <= start:
        end += 1
    return start, end


# -- monotone lifted angle table -------------------------------------------------------

class SigmaTable:
    """Enclosures of the lifted angle sigma(s) of bm(f(s)) at dyadic parameters.

    sigma is oriented to increase with s and lifted so that
    sigma(s + 1) = sigma(s) + 1.  Entries are refined on demand by
    inserting midpoints.
    """

    def __init__(self, bm: BoundaryMapName, J: JordanCurve, k_bm: int = 14, initial: int = 32,
                 orientation: Optional[int] = None, min_spacing_bits: Optional[int] = None):
        self.bm = bm
        self.J = J
        self.k_bm = k_bm
        self.orientation = orientation if orientation is not None else bm.interior.winding
        # angles are only known to 2^-k_bm, finer spacing cannot tighten a bracket
        self.min_spacing_bits = min_spacing_bits if min_spacing_bits is not None else k_bm + 1
        self.tier = bm.tier_for(k_bm)
        self.s: list[fmpq] = []
        self.lo: list[fmpq] = []
        self.hi: list[fmpq] = []
        raw = [self._raw(fmpq(i, initial)) for i in range(initial)]
        lifted = []
        prev_mid = None
        for lo, hi in raw:
            mid = (lo + hi) / 2
            shift = 0 if prev_mid is None else _nearest_int(prev_mid + fmpq(1, 4) - mid)
            lifted.append((lo + shift, hi + shift))
            prev_mid = mid + shift
        first_mid = (lifted[0][0] + lifted[0][1]) / 2
        if not prev_mid < first_mid + 1:
            raise CarextError("angle table does not wind once", "injectivity-resolution-exceeded")
        for i, (lo, hi) in enumerate(lifted):
            self.s.append(fmpq(i, initial))
            self.lo.append(lo)
            self.hi.append(hi)
        self._check_monotone()

    def _raw(self, s: fmpq) -> tuple[fmpq, fmpq]:
        """Turns of bm(f(s)), oriented, as a rational interval in (-1/2 - eps, 1/2 + eps)."""
        ball = self.bm.eval(self.J.name_at(s), self.k_bm)
        with precision(96):
            c = acb(arb(ball.center.re), arb(ball.center.im))
            # arg relative to the centre's direction avoids the branch cut
            t = (c.arg() + (acb_ball(ball) * c.conjugate()).arg()) / (2 * arb.pi())
            if not t.is_finite() or t.rad() > 0.25:
                raise CarextError("boundary value too close to 0 for an angle", "oracle-inconsistent")
            lo, hi = arb_lower_q(t), arb_upper_q(t)
        if self.orientation < 0:
            lo, hi = -hi, -lo
        return lo, hi

    def _check_monotone(self) -> None:
        for i in range(len(self.s) - 1):
            if self.lo[i + 1] < self.lo[i] - fmpq(1, 8):
                raise CarextError("angle table not monotone", "multiplicity-suspected")

    def __len__(self) -> int:
        return len(self.s)

    def _entry(self, i: int) -> tuple[fmpq, fmpq, fmpq]:
        """Periodic view: entry i + qN is entry i shifted by q."""
        n = len(self.s)
        q, r = divmod(i, n)
        return self.s[r] + q, self.lo[r] + q, self.hi[r] + q

    def insert(self, i: int) -> None:
        """Insert the midpoint between periodic entries i and i + 1."""
        s0, lo0, hi0 = self._entry(i)
        s1, lo1, hi1 = self._entry(i + 1)
        sm = (s0 + s1) / 2
        lo, hi = self._raw(wrap01(sm))
        target = ((lo0 + hi0) / 2 + (lo1 + hi1) / 2) / 2
        shift = _nearest_int(target - (lo + hi) / 2)
        lo, hi = lo + shift, hi + shift
        q = floor_q(sm)
        sm, lo, hi = sm - q, lo - q, hi - q
        j = bisect.bisect_left(self.s, sm)
        if j < len(self.s) and self.s[j] == sm:
            return
        self.s.insert(j, sm)
        self.lo.insert(j, lo)
        self.hi.insert(j, hi)

    def _index_below(self, theta: fmpq) -> int:
        """Largest periodic index i with hi_i <= theta (sigma(s_i) certainly <= theta)."""
        n = len(self.s)
        q = floor_q(theta - self.lo[0])
        base = q * n
        t = theta - q
        j = bisect.bisect_right(self.hi, t) - 1
        # hi is non-decreasing up to enclosure overlap; walk to be safe
        while j >= 0 and self.hi[j] > t:
            j -= 1
        return base + j

    def _index_above(self, theta: fmpq) -> int:
        """Smallest periodic index i with lo_i >= theta."""
        n = len(self.s)
        q = floor_q(theta - self.lo[0])
        base = q * n
        t = theta - q
        j = bisect.bisect_left(self.lo, t)
        while j < n and self.lo[j] < t:
            j += 1
        return base + j

    def bracket(self, theta0: fmpq, theta1: fmpq, slack: fmpq, max_inserts: int = 64) -> tuple[fmpq, fmpq]:
        """[s_a, s_b] (lifted) containing sigma^{-1}([theta0, theta1]).

        Refines the table next to both ends until each end's table spacing
        is at most ``slack`` or the spacing floor is reached.
        """
        floor_sp = pow2(-self.min_spacing_bits)
        for _ in range(max_inserts):
            a = self._index_below(theta0)
            b = self._index_above(theta1)
            sa = self._entry(a)[0]
            sb = self._entry(b)[0]
            refined = False
            # spacing at the ends: between a and a+1, and between b-1 and b
            if self._entry(a + 1)[0] - sa > max(slack, floor_sp):
                self.insert(a)
                refined = True
            if sb - self._entry(b - 1)[0] > max(slack, floor_sp) and not refined:
                self.insert(b - 1)
                refined = True
            if not refined:
                return sa, sb
        a = self._index_below(theta0)
        b = self._index_above(theta1)
        return self._entry(a)[0], self._entry(b)[0]


def _nearest_int(x: fmpq) -> int:
    return floor_q(x + HALF)


# -- inverse boundary map ------------------------------------------------------------

def invert_boundary(bm: BoundaryMapName, f: JordanCurve, k_bm: int = 14, initial: int = 32) -> MapName:
    """phi^{-1} on the circle, as a map of angles (turns) to points of J.

    An angle interval is bracketed in parameter space through the sigma
    table, then f's enclosure over the bracket is returned.
    """
    table = SigmaTable(bm, f, k_bm=k_bm, initial=initial)
    orient = table.orientation

    def evaluate(ball: Ball, k: int) -> Ball:
        c, r = ball.center.re, ball.radius
        th0, th1 = c - r, c + r
        if orient < 0:
            th0, th1 = -th1, -th0
        if r == 0:
            slack = pow2(-f.modulus(k + 1))
        else:
            slack = max((th1 - th0) / 2, pow2(-f.modulus(k + 1)))
        sa, sb = table.bracket(th0, th1, slack)
        return f.image_ball(sa, sb, max(k, 0) + 60)

    m = MapName(evaluate, None, "unit-circle-params", key=("inverse-boundary", bm.phi.key),
                tier=table.tier)
    m.table = table
    return m


# -- extension of the inverse to the closed disk ------------------------------------

class ExtendedInverse:
    """Harmonic extension of phi^{-1}|circle to the closed disk.

    Complex data are carried jointly: real and imaginary parts share one
    product-integration sum.  Two arc systems a quarter turn apart make
    every boundary point interior to some arc.
    """

    def __init__(self, inv_boundary: MapName, M_f: fmpq):
        self.inv_boundary = inv_boundary
        self.systems = staggered_systems(inv_boundary, M_f)
        self.tier = inv_boundary.tier

    def eval_point(self, z: Union[PointName, Ball], k: int) -> Ball:
        return extend_to_closure(self.systems, z, k, max_rounds=6, alpha_depth=k + 12)

    def enclose(self, box: Ball, target: fmpq, stop: Optional[Callable[[Ball], bool]] = None,
                max_panels: int = 2048) -> Ball:
        return enclose_on_closure(self.systems[0], box, target, max_panels=max_panels, stop=stop,
                                  k_data=24)

    def enclose_square(self, x0: fmpq, y0: fmpq, size: fmpq, tol: fmpq,
                       pieces: Optional[list] = None, stop=None, stop_key=None) -> Ball:
        return enclose_square(self.systems[0], x0, y0, size, tol, pieces=pieces, stop=stop,
                              stop_key=stop_key)

    def enclose_arc(self, x0: fmpq, y0: fmpq, size: fmpq, k_data: int = 24) -> list[Ball]:
        """Enclosures of u on the circle points of the square (empty if there are none)."""
        h = size / 2
        rng = _arc_in_ball(RationalPoint(x0 + h, y0 + h), sqrt_upper(2 * h * h, 60))
        if rng is None:
            return []
        return data_on_range(self.systems[0], rng[0], rng[1], k_data)

    def as_map(self) -> MapName:
        def evaluate(ball: Ball, k: int) -> Ball:
            if ball.radius == 0:
                return self.eval_point(ball, k)
            return self.enclose(ball, pow2(-k))

        return MapName(evaluate, None, "closed-disk", key=("extended-inverse", self.inv_boundary.key),
                       tier=self.tier)


def curve_bound(J: JordanCurve, pieces: int = 64) -> fmpq:
    """Rational M > max |f| on J."""
    best = ZERO
    for i in range(pieces):
        b = J.image_ball(fmpq(i, pieces), fmpq(i + 1, pieces))
        best = max(best, sqrt_upper(b.center.norm2()) + b.radius)
    return best + fmpq(1, 8)


def extend_inverse(inv_boundary: MapName, M_f: fmpq) -> ExtendedInverse:
    return ExtendedInverse(inv_boundary, M_f)


# -- 2-D search in the closed disk ------------------------------------------------------

@dataclass(frozen=True, order=True)
class _Box:
    x: fmpq
    y: fmpq
    size: fmpq

    def ball(self) -> Ball:
        h = self.size / 2
        return Ball(RationalPoint(self.x + h, self.y + h), sqrt_upper(2 * h * h, 40))

    def meets_disk(self) -> bool:
        def nearest(lo: fmpq) -> fmpq:
            hi = lo + self.size
            return ZERO if lo <= 0 <= hi else (lo if lo > 0 else hi)

        nx, ny = nearest(self.x), nearest(self.y)
        return nx * nx + ny * ny <= 1

    def children(self) -> list["_Box"]:
        h = self.size / 2
        return [_Box(self.x + dx, self.y + dy, h) for dx in (ZERO, h) for dy in (ZERO, h)]


@dataclass
class DiskSearchTrace:
    rounds: int
    survivors: list[int]
    excluded: list[Ball]


def _beyond(b: Ball, tb: Ball, dx: fmpq, dy: fmpq, norm: fmpq) -> bool:
    """b lies strictly on the far side of tb along (dx, dy); norm >= |(dx, dy)|."""
    z = tb.center
    return (b.center.re - z.re) * dx + (b.center.im - z.im) * dy > (b.radius + tb.radius) * norm


def _centroid_dir(pieces: list[Ball], tb: Ball) -> tuple[fmpq, fmpq]:
    n = len(pieces)
    gx = sum((b.center.re for b in pieces), ZERO) / n - tb.center.re
    gy = sum((b.center.im for b in pieces), ZERO) / n - tb.center.im
    return round_up(gx, 40), round_up(gy, 40)


def _separated(pieces: list[Ball], tb: Ball) -> bool:
    """True when a line separates tb from every piece (so from their convex hull)."""
    dirs = [_centroid_dir(pieces, tb)] + [(fmpq(a), fmpq(b)) for a, b in
                                          ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))]
    for dx, dy in dirs:
        if dx == 0 and dy == 0:
            continue
        norm = sqrt_upper(dx * dx + dy * dy, 60)
        if all(_beyond(b, tb, dx, dy, norm) for b in pieces):
            return True
    return False


def unique_zero_in_disk(enclose_square: Callable[..., Ball], target: PointName, k: int,
                        max_rounds: int = 40, max_boxes: int = 256,
                        trace: Optional[DiskSearchTrace] = None,
                        enclose_arc: Optional[Callable[[fmpq, fmpq, fmpq], list[Ball]]] = None) -> Ball:
    """Ball of radius <= 2^-k around the unique w in the closed disk with u(w) = target.

    Quad-boxes over [-1, 1]^2 are dropped when they miss the closed disk or
    when a line separates the target from the pieces that enclose u on the
    box boundary; by the maximum principle the hull of those pieces holds
    u over the whole box.  ``enclose_square(x0, y0, size, tol, pieces)``
    must fill ``pieces`` with such enclosures.

    ``enclose_arc`` is for targets known to lie on the curve: u maps the
    open disk into the open domain, so the zero is on the circle and a box
    is dropped when a line separates the target from u on its circle points.
    """
    boxes = [_Box(fmpq(x), fmpq(y), ONE) for x in (-1, 0) for y in (-1, 0)]
    for rnd in range(max_rounds):
        size = boxes[0].size
        tb = target.approx(k + 6)
        keep = []
        for bx in boxes:
            if not bx.meets_disk():
                continue
            if enclose_arc is not None:
                pieces = enclose_arc(bx.x, bx.y, bx.size)
                if not pieces or _separated(pieces, tb):
                    if trace is not None:
                        trace.excluded.append(bx.ball())
                else:
                    keep.append(bx)
                continue
            # a coarse pass, then a finer one that stops each piece once it is
            # beyond the target along the coarse centroid direction
            pieces: list[Ball] = []
            enclose_square(bx.x, bx.y, bx.size, bx.size, pieces)
            sep = _separated(pieces, tb)
            if not sep:
                dx, dy = _centroid_dir(pieces, tb)
                stop = None
                if dx != 0 or dy != 0:
                    norm = sqrt_upper(dx * dx + dy * dy, 60)
                    stop = lambda b, dx=dx, dy=dy, norm=norm: _beyond(b, tb, dx, dy, norm)
                pieces = []
                enclose_square(bx.x, bx.y, bx.size, bx.size / 4, pieces, stop=stop,
                               stop_key=(dx, dy, tb.center.re, tb.center.im, tb.radius))
                sep = _separated(pieces, tb)
            if sep:
                if trace is not None:
                    trace.excluded.append(bx.ball())
            else:
                keep.append(bx)
        if trace is not None:
            trace.rounds = rnd + 1
            trace.survivors.append(len(keep))
        if not keep:
            raise CarextError("every box excluded", "no-zero")
        x0 = min(b.x for b in keep)
        y0 = min(b.y for b in keep)
        x1 = max(b.x + b.size for b in keep)
        y1 = max(b.y + b.size for b in keep)
        half_diag = sqrt_upper(((x1 - x0) ** 2 + (y1 - y0) ** 2) / 4, 40)
        if half_diag <= pow2(-k):
            return Ball(RationalPoint((x0 + x1) / 2, (y0 + y1) / 2), half_diag)
        if len(keep) * 4 > max_boxes:
            raise CarextError(f"{len(keep)} boxes survive at size {size}", "multiplicity-suspected")
        boxes = sorted(c for b in keep for c in b.children())
    raise CarextError("disk search round cap", "injectivity-resolution-exceeded")


# -- Caratheodory extension ------------------------------------------------------------

class CaratheodoryExtension:
    """phi on the closed domain.

    Points certified interior (a tube-free segment from z0 plus clearance
    around the ball) use phi's oracle directly.  Other points are located
    as the unique zero of (extended inverse) - z in the closed disk.
    """

    def __init__(self, phi: MapName, J: JordanCurve, inverse: ExtendedInverse,
                 interior: Optional[InteriorCertificate] = None):
        self.phi = phi
        self.J = J
        self.inverse = inverse
        self.interior = interior or find_interior_point(J)
        self.last_tier = CERTIFIED

    def certified_interior(self, zb: Ball, s_max: int) -> bool:
        c = zb.center
        z0 = self.interior.z0
        for s in range(3, s_max + 1):
            d = pow2(-s) + zb.radius
            if self._clear(c, s, d):
                if c == z0:
                    return True
                return certify_segment(self.J, z0, c, 2, s_max, depth=32) is not None
        return False

    def _clear(self, c: RationalPoint, s: int, d: fmpq) -> bool:
        seg = Segment(c, c)
        d2 = d * d
        for i in self.J.near_pieces(s, c, d + pow2(-(s + 8))):
            piece = Segment(self.J.vertex(s, i), self.J.vertex(s, i + 1))
            if segment_segment_dist2(seg, piece) <= d2:
                return False
        return True

    def evaluate(self, z: PointName, k: int, trace: Optional[DiskSearchTrace] = None) -> tuple[Ball, str]:
        zb = z.approx(k + 6)
        if self.certified_interior(zb, k + 14):
            out = self.phi.eval(zb, k + 2) if zb.radius else self.phi.at(zb.center, k + 2)
            return out, self.phi.tier
        inv = self.inverse
        arc = inv.enclose_arc if self.on_curve(z) else None
        ball = unique_zero_in_disk(inv.enclose_square, z, k, trace=trace, enclose_arc=arc)
        return ball, inv.tier

    def on_curve(self, z: PointName) -> bool:
        """True for names made by ``J.name_at``, which are points of J by construction."""
        key = z.key
        return isinstance(key, tuple) and len(key) == 3 and key[0] == "curve-point" and key[1] == self.J.key

    def eval(self, ball: Ball, k: int) -> Ball:
        """Enclosure of the image of ``ball``; wide balls must be certified interior."""
        if ball.radius == 0:
            return self.evaluate(PointName.exact(ball), k)[0]
        if not self.certified_interior(ball, k + 14):
            raise NotInterior("wide balls are only mapped away from the curve")
        return self.phi.eval(ball, k + 2)

    def as_map(self) -> MapName:
        return MapName(self.eval, None, "plane-region", key=("caratheodory", self.phi.key))


def caratheodory_extension(phi: MapName, J: JordanCurve, bm: BoundaryMapName, k_bm: int = 16) -> CaratheodoryExtension:
    inv_b = invert_boundary(bm, J, k_bm=k_bm)
    ext = extend_inverse(inv_b, curve_bound(J))
    return CaratheodoryExtension(phi, J, ext, interior=bm.interior)
