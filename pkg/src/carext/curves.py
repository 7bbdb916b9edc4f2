"""Jordan curve oracles, polygonal approximants and connectivity witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from flint import acb, arb, fmpq

from .enclose import acb_ball, arb_interval, ball_from_acb, precision
from .exact import (Ball, CarextError, DomainError, MapName, Modulus, PointName,
                    RationalPoint, ZERO, ball_sep, compose_moduli, pow2, round_down, sqrt_upper)
from .geometry import RationalPolygonalPath, crossing_pairs


class JordanCurve:
    """A Jordan curve named by a parameterization on [0, 1) (turns).

    ``acb_fn`` optionally maps an arb parameter enclosure to an acb
    enclosure of the image; it is a fast path for the built-in families.
    ``declared_inverse_modulus`` is an analytically derived m1 (see
    :func:`inverse_modulus`); external curves leave it unset.
    """

    def __init__(self, param: MapName, acb_fn: Optional[Callable[[arb], acb]] = None,
                 declared_inverse_modulus: Optional[Modulus] = None, key=None):
        if param.domain != "unit-circle-params":
            raise DomainError("curve parameterization must live on unit-circle-params")
        if param.modulus is None:
            raise DomainError("curve parameterization needs a modulus")
        self.param = param
        self._acb_fn = acb_fn
        self.declared_inverse_modulus = declared_inverse_modulus
        self.key = key if key is not None else param.key
        self._nodes: dict[tuple[int, int], acb] = {}
        self._vertices: dict[tuple[int, int], RationalPoint] = {}
        self._polys: dict[int, RationalPolygonalPath] = {}

    @property
    def modulus(self) -> Modulus:
        return self.param.modulus

    def __repr__(self) -> str:
        return f"JordanCurve({self.key!r})"

    # -- evaluation -------------------------------------------------------

    def point(self, t: fmpq, k: int) -> Ball:
        return self.param.eval(Ball(RationalPoint(t, ZERO), ZERO), k)

    def name_at(self, t: fmpq) -> PointName:
        """PointName of f(t)."""
        return PointName(lambda k: self.point(t, k), key=("curve-point", self.key, t))

    def image_acb(self, lo: fmpq, hi: fmpq, prec: int) -> acb:
        """acb enclosure of f([lo, hi])."""
        with precision(prec):
            if self._acb_fn is not None:
                return self._acb_fn(arb_interval(lo, hi))
            b = self.param.eval(Ball(RationalPoint((lo + hi) / 2, ZERO), (hi - lo) / 2), prec - 20)
            return acb_ball(b)

    def image_ball(self, lo: fmpq, hi: fmpq, prec: int = 80) -> Ball:
        return ball_from_acb(self.image_acb(lo, hi, prec))

    # -- polygonal approximants -------------------------------------------

    def poly_level(self, s: int) -> int:
        """log2 of the number of pieces of P_s."""
        return self.modulus(s + 2)

    def vertex(self, s: int, i: int) -> RationalPoint:
        """Vertex i of P_s: f(i/N) rounded to the 2^-(s+6) grid."""
        L = self.poly_level(s)
        i %= 1 << L
        key = (s, i)
        v = self._vertices.get(key)
        if v is None:
            b = self.point(fmpq(i, 1 << L), s + 6)
            v = RationalPoint(round_down(b.center.re, s + 6), round_down(b.center.im, s + 6))
            self._vertices[key] = v
        return v

    @staticmethod
    def tube_slack(s: int) -> fmpq:
        """Certified bound on |P_s(x) - f(x)|: vertex error 2^-(s+4) plus modulus 2^-(s+2)."""
        return pow2(-(s + 4)) + pow2(-(s + 2))

    def _node(self, level: int, j: int) -> acb:
        key = (level, j)
        n = self._nodes.get(key)
        if n is None:
            n = self.image_acb(fmpq(j, 1 << level), fmpq(j + 1, 1 << level), level + 48)
            self._nodes[key] = n
        return n

    def near_pieces(self, s: int, center: RationalPoint, radius: fmpq) -> list[int]:
        """Indices of the pieces of P_s that may come within ``radius`` of ``center``.

        Dyadic parameter intervals are discarded when the enclosure of their
        image stays farther than radius + tube_slack(s) from the centre.
        """
        L = self.poly_level(s)
        start = min(3, L)
        prec = L + 48
        thr = radius + self.tube_slack(s)
        with precision(prec):
            c = acb(arb(center.re), arb(center.im))
            t = arb(thr)
            alive = list(range(1 << start))
            for level in range(start, L + 1):
                keep = []
                for j in alive:
                    n = self._node(level, j)
                    if not ((n - c).abs_lower() > t):
                        keep.append(j)
                if level == L:
                    return keep
                alive = [2 * j + b for j in keep for b in (0, 1)]
        return []

    def polygon(self, t: int) -> RationalPolygonalPath:
        """Materialized P_t (all vertices); see :func:`polygonal_approx`."""
        P = self._polys.get(t)
        if P is None:
            P = polygonal_approx(self, t)
            self._polys[t] = P
        return P


@dataclass(frozen=True)
class Witness:
    """Local connectivity witness h with the inverse modulus m1 used to build it."""

    h: Modulus
    m1: Modulus


# -- inverse modulus ----------------------------------------------------------

def _circ_index_gap(i: int, j: int, n: int) -> int:
    d = abs(i - j) % n
    return min(d, n - d)


def inverse_modulus(J: JordanCurve, k: int, cap: int = 24, grid_cap: int = 18) -> int:
    """m1(k): |f(s) - f(t)| <= 2^-m1 implies circle-distance(s, t) <= 2^-k.

    The circle is cut into 2^g intervals with g = m(k) + 2.  Any pair at
    circle distance >= 2^-k lies in two intervals whose index gap is at
    least 2^(g-k) - 1; every such pair of image enclosures must be separated
    by more than 2^-M.  Candidates M = k+1, k+2, ... are tried up to ``cap``
    extra bits; nearby pairs are found with a dyadic spatial hash.
    """
    g = J.modulus(k) + 2
    if g > grid_cap:
        raise CarextError(f"inverse modulus grid 2^{g} beyond cap", "injectivity-resolution-exceeded")
    n = 1 << g
    gap = max((1 << (g - k)) - 1, 1) if g >= k else 1
    balls = [J.image_ball(fmpq(i, n), fmpq(i + 1, n), g + 40) for i in range(n)]
    for M in range(k + 1, k + 1 + cap):
        if _separated(balls, n, gap, M, min(M, g - 2)):
            return M
    raise CarextError("separation did not certify within the cap", "injectivity-resolution-exceeded")


def _separated(balls: list[Ball], n: int, gap: int, M: int, cell: int) -> bool:
    """Every far pair of balls is more than 2^-M apart (hash cells of side 2^-cell)."""
    half = pow2(-(M + 1))
    thr = pow2(-M)

    def fl(x: fmpq) -> int:
        return (int(x.p) << cell) // int(x.q)

    buckets: dict[tuple[int, int], list[int]] = {}
    for i, b in enumerate(balls):
        e = b.radius + half
        x0, x1 = fl(b.center.re - e), fl(b.center.re + e)
        y0, y1 = fl(b.center.im - e), fl(b.center.im + e)
        for x in range(x0, x1 + 1):
            for y in range(y0, y1 + 1):
                buckets.setdefault((x, y), []).append(i)
    checked = set()
    for members in buckets.values():
        for a in range(len(members)):
            i = members[a]
            for b in range(a + 1, len(members)):
                j = members[b]
                if _circ_index_gap(i, j, n) < gap:
                    continue
                key = (i, j) if i < j else (j, i)
                if key in checked:
                    continue
                checked.add(key)
                sep = ball_sep(balls[i], balls[j])
                if sep == "overlap" or sep <= thr:
                    return False
    return True


def computed_inverse_modulus(J: JordanCurve, **kw) -> Modulus:
    return Modulus(lambda k: inverse_modulus(J, k, **kw))


def lc_witness(J: JordanCurve, m1: Optional[Modulus] = None) -> Witness:
    """h = m1 o m.  Uses the curve's declared m1 when present, else the grid search."""
    if m1 is None:
        m1 = J.declared_inverse_modulus or computed_inverse_modulus(J)
    return Witness(compose_moduli(m1, J.modulus), m1)


# -- polygonal approximation ------------------------------------------------

def curve_sup_bound(J: JordanCurve, P: RationalPolygonalPath) -> fmpq:
    """Certified upper bound on sup_x |P(x) - f(x)| (same parameter convention).

    On each piece, P(x) lies on the segment between its two vertices, so
    |P(x) - f(x)| <= max over the vertices v of |v - c| + r for any ball
    (c, r) containing f over the piece.
    """
    bound = ZERO
    bp = P.breakpoints
    for a, b, v, w in zip(bp, bp[1:], P.vertices, P.vertices[1:]):
        B = J.image_ball(a, b, 64 + int(b.q).bit_length())
        d2 = max((v - B.center).norm2(), (w - B.center).norm2())
        u = sqrt_upper(d2) + B.radius
        if u > bound:
            bound = u
    return bound


def polygonal_approx(J: JordanCurve, t: int, repair_budget: int = 64) -> RationalPolygonalPath:
    """Closed simple P_t with certified sup distance to J below 2^-t."""
    L = J.poly_level(t)
    N = 1 << L
    verts = [J.vertex(t, i) for i in range(N)]
    P = RationalPolygonalPath.polygon(verts)
    budget = repair_budget
    while True:
        bad = crossing_pairs(list(P.segments()), closed=True, stop_at_first=True)
        if not bad and all(a != b for a, b in zip(P.vertices, P.vertices[1:])):
            break
        if budget <= 0:
            raise CarextError(f"P_{t} could not be made simple", "approximation-too-coarse")
        budget -= 1
        i = bad[0][0] if bad else next(j for j, (a, b) in enumerate(zip(P.vertices, P.vertices[1:])) if a == b)
        verts = _perturb(verts, i % N, t, budget)
        P = RationalPolygonalPath.polygon(verts)
    if not curve_sup_bound(J, P) < pow2(-t):
        raise CarextError(f"P_{t} sup bound not below 2^-{t}", "approximation-too-coarse")
    return P


def _perturb(verts: list[RationalPoint], i: int, t: int, salt: int) -> list[RationalPoint]:
    """Move vertex i by at most 2^-(t+4) along a deterministic direction."""
    step = pow2(-(t + 5))
    dirs = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)]
    dx, dy = dirs[salt % len(dirs)]
    out = list(verts)
    v = out[i]
    out[i] = RationalPoint(v.re + dx * step, v.im + dy * step)
    return out


class PolygonalApproxSequence:
    """t -> P_t, cached."""

    def __init__(self, J: JordanCurve):
        self.J = J

    def at(self, t: int) -> RationalPolygonalPath:
        return self.J.polygon(t)


def sample_witness_property(J: JordanCurve, W: Witness, k: int, s1: fmpq, grid: int = 12) -> bool:
    """Check J n D(w1, 2^-h(k)) in C in D(w1, 2^-k) on a parameter grid.

    C = f[I] with I the parameter interval of half-width 2^-m(k) around s1.
    Inclusion tests are exact comparisons on ball enclosures: a grid point
    is certainly inside a disc when its ball is, certainly outside when its
    ball is disjoint.  The first inclusion fails only if some parameter
    outside I has its image certainly inside D(w1, 2^-h(k)).
    """
    hk, mk = W.h(k), J.modulus(k)
    w1 = J.point(s1, hk + 8)
    outer_r = pow2(-k)
    # C inside the outer disc: cover I by small intervals and enclose each
    n = 1 << grid
    half = pow2(-mk)
    steps = 64
    for j in range(steps):
        lo = s1 - half + 2 * half * fmpq(j, steps)
        hi = s1 - half + 2 * half * fmpq(j + 1, steps)
        B = J.image_ball(lo, hi, hk + 40)
        d = sqrt_upper((B.center - w1.center).norm2()) + B.radius + w1.radius
        if not d < outer_r:
            return False
    # every grid point outside I is certified outside the inner disc
    r_in = pow2(-hk)
    for i in range(n):
        s = fmpq(i, n)
        dd = s - s1
        dd = dd - fmpq(int(dd.p) // int(dd.q))
        if min(dd, 1 - dd) <= half:
            continue
        B = J.point(s, hk + 8)
        gap = r_in + B.radius + w1.radius
        if (B.center - w1.center).norm2() < gap * gap:
            return False
    return True
