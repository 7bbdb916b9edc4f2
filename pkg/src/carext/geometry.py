"""Exact predicates on rational polygonal paths.

Every predicate here is decided with rational arithmetic on squared
quantities; nothing is rounded.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from flint import fmpq

from .exact import ZERO, DomainError, OnBoundary, RationalPoint, sqrt_upper


@dataclass(frozen=True, slots=True)
class Segment:
    p: RationalPoint
    q: RationalPoint

    def midpoint(self) -> RationalPoint:
        return RationalPoint((self.p.re + self.q.re) / 2, (self.p.im + self.q.im) / 2)

    def length2(self) -> fmpq:
        return (self.q - self.p).norm2()


def cross(o: RationalPoint, a: RationalPoint, b: RationalPoint) -> fmpq:
    """z-component of (a - o) x (b - o)."""
    return (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)


def _sign(x: fmpq) -> int:
    return (x > 0) - (x < 0)


def _on_segment_collinear(p: RationalPoint, q: RationalPoint, z: RationalPoint) -> bool:
    return (min(p.re, q.re) <= z.re <= max(p.re, q.re)
            and min(p.im, q.im) <= z.im <= max(p.im, q.im))


def point_on_segment(z: RationalPoint, s: Segment) -> bool:
    return cross(s.p, s.q, z) == 0 and _on_segment_collinear(s.p, s.q, z)


def segments_intersect(s1: Segment, s2: Segment) -> bool:
    """Closed-segment intersection test, including touching and collinear overlap."""
    p1, q1, p2, q2 = s1.p, s1.q, s2.p, s2.q
    # bounding boxes first: cheap rejection
    if max(p1.re, q1.re) < min(p2.re, q2.re) or max(p2.re, q2.re) < min(p1.re, q1.re):
        return False
    if max(p1.im, q1.im) < min(p2.im, q2.im) or max(p2.im, q2.im) < min(p1.im, q1.im):
        return False
    d1 = _sign(cross(p2, q2, p1))
    d2 = _sign(cross(p2, q2, q1))
    d3 = _sign(cross(p1, q1, p2))
    d4 = _sign(cross(p1, q1, q2))
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment_collinear(p2, q2, p1):
        return True
    if d2 == 0 and _on_segment_collinear(p2, q2, q1):
        return True
    if d3 == 0 and _on_segment_collinear(p1, q1, p2):
        return True
    if d4 == 0 and _on_segment_collinear(p1, q1, q2):
        return True
    return False


def point_segment_dist2(z: RationalPoint, p: RationalPoint, q: RationalPoint) -> fmpq:
    """Exact squared Euclidean distance from z to the closed segment [p, q]."""
    dx, dy = q.re - p.re, q.im - p.im
    wx, wy = z.re - p.re, z.im - p.im
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return wx * wx + wy * wy
    t = wx * dx + wy * dy
    if t <= 0:
        return wx * wx + wy * wy
    if t >= L2:
        ex, ey = z.re - q.re, z.im - q.im
        return ex * ex + ey * ey
    c = wx * dy - wy * dx
    return c * c / L2


def segment_segment_dist2(s1: Segment, s2: Segment) -> fmpq:
    if segments_intersect(s1, s2):
        return ZERO
    return min(point_segment_dist2(s1.p, s2.p, s2.q), point_segment_dist2(s1.q, s2.p, s2.q),
               point_segment_dist2(s2.p, s1.p, s1.q), point_segment_dist2(s2.q, s1.p, s1.q))


class RationalPolygonalPath:
    """Piecewise-linear path on [0, 1] given by breakpoints and vertices.

    A repeated vertex encodes a constant piece.  Closed paths repeat the first
    vertex at the end.
    """

    __slots__ = ("breakpoints", "vertices", "closed")

    def __init__(self, breakpoints: Sequence[fmpq], vertices: Sequence[RationalPoint], closed: bool = False):
        bp = list(breakpoints)
        vs = list(vertices)
        if len(bp) != len(vs) or len(bp) < 2:
            raise DomainError("breakpoints and vertices must have equal length >= 2")
        if bp[0] != 0 or bp[-1] != 1:
            raise DomainError("breakpoints must start at 0 and end at 1")
        for a, b in zip(bp, bp[1:]):
            if not a < b:
                raise DomainError("breakpoints must be strictly ascending")
        if closed and vs[0] != vs[-1]:
            raise DomainError("closed path must end at its first vertex")
        self.breakpoints = bp
        self.vertices = vs
        self.closed = closed

    @classmethod
    def uniform(cls, vertices: Sequence[RationalPoint], closed: bool = False) -> "RationalPolygonalPath":
        """Vertices at breakpoints j/n."""
        n = len(vertices) - 1
        return cls([fmpq(j, n) for j in range(n + 1)], vertices, closed)

    @classmethod
    def polygon(cls, vertices: Sequence[RationalPoint]) -> "RationalPolygonalPath":
        """Closed path through the given cycle (the first vertex is appended at the end)."""
        vs = list(vertices) + [vertices[0]]
        return cls.uniform(vs, closed=True)

    def segments(self) -> Iterator[Segment]:
        vs = self.vertices
        for a, b in zip(vs, vs[1:]):
            yield Segment(a, b)

    def nondegenerate_segments(self) -> list[Segment]:
        return [s for s in self.segments() if s.p != s.q]

    def __len__(self) -> int:
        return len(self.vertices) - 1

    def __repr__(self) -> str:
        return f"RationalPolygonalPath({len(self)} pieces, closed={self.closed})"


def path_eval(P: RationalPolygonalPath, t) -> RationalPoint:
    """Exact value of the path at parameter t in [0, 1]."""
    t = fmpq(t) if not isinstance(t, fmpq) else t
    if t < 0 or t > 1:
        raise DomainError(f"parameter {t} outside [0, 1]")
    bp = P.breakpoints
    i = bisect.bisect_right(bp, t) - 1
    if i >= len(bp) - 1:
        return P.vertices[-1]
    a, b = bp[i], bp[i + 1]
    if t == a:
        return P.vertices[i]
    lam = (t - a) / (b - a)
    p, q = P.vertices[i], P.vertices[i + 1]
    return RationalPoint(p.re + lam * (q.re - p.re), p.im + lam * (q.im - p.im))


def sup_dist2(P: RationalPolygonalPath, Q: RationalPolygonalPath) -> fmpq:
    """Exact squared sup distance, attained at a merged breakpoint."""
    ts = sorted(set(P.breakpoints) | set(Q.breakpoints))
    best = ZERO
    for t in ts:
        d = (path_eval(P, t) - path_eval(Q, t)).norm2()
        if d > best:
            best = d
    return best


def sup_dist(P: RationalPolygonalPath, Q: RationalPolygonalPath) -> fmpq:
    """Rational U with U >= sup_t |P(t) - Q(t)| >= U/2.

    The squared sup is exact on the merged breakpoints (the distance is a
    convex function on each common piece); only the final square root is
    rounded upward.
    """
    return sqrt_upper(sup_dist2(P, Q))


def winding_number(P: RationalPolygonalPath, z: RationalPoint) -> int:
    """Exact winding number of a closed path around z (signed crossings)."""
    if not P.closed:
        raise DomainError("winding number needs a closed path")
    wn = 0
    for s in P.segments():
        a, b = s.p, s.q
        if a == b:
            continue
        c = cross(a, b, z)
        if c == 0 and _on_segment_collinear(a, b, z):
            raise OnBoundary("point lies on the path")
        if a.im <= z.im:
            if b.im > z.im and c > 0:
                wn += 1
        elif b.im <= z.im and c < 0:
            wn -= 1
    return wn


def dist_to_path_exceeds(z: RationalPoint, P: RationalPolygonalPath, d) -> bool:
    """True iff every point of P is at distance > d from z."""
    d = fmpq(d) if not isinstance(d, fmpq) else d
    if d < 0:
        raise DomainError("negative distance")
    d2 = d * d
    for s in P.segments():
        if point_segment_dist2(z, s.p, s.q) <= d2:
            return False
    return True


def segments_clear(segs: Iterable[Segment], s: Segment, d: fmpq) -> bool:
    """True iff s stays at distance > d from every segment in ``segs``."""
    d2 = d * d
    for t in segs:
        if segment_segment_dist2(s, t) <= d2:
            return False
    return True


def _cells(s: Segment, g: int) -> Iterator[tuple[int, int]]:
    """Grid cells of side 2^-g touched by the bounding box of s (inclusive)."""
    def fl(x: fmpq) -> int:
        return (int(x.p) << g) // int(x.q) if g >= 0 else int(x.p) // (int(x.q) << -g)
    x0, x1 = sorted((fl(s.p.re), fl(s.q.re)))
    y0, y1 = sorted((fl(s.p.im), fl(s.q.im)))
    for i in range(x0, x1 + 1):
        for j in range(y0, y1 + 1):
            yield i, j


def crossing_pairs(segs: Sequence[Segment], closed: bool, g: int | None = None,
                   stop_at_first: bool = True) -> list[tuple[int, int]]:
    """Index pairs of segments that intersect illegitimately.

    Consecutive segments may share their common vertex (and, for closed
    paths, the last and the first).  Uses a dyadic spatial hash with cell
    side 2^-g so only nearby pairs are compared.
    """
    n = len(segs)
    if n == 0:
        return []
    if g is None:
        # cell side comparable to the longest segment
        from .enclose import log2_floor
        longest = max((s.length2() for s in segs), default=ZERO)
        g = 0 if longest == 0 else -(log2_floor(longest) // 2) - 1
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, s in enumerate(segs):
        for c in _cells(s, g):
            buckets.setdefault(c, []).append(i)
    seen = set()
    bad = []
    for members in buckets.values():
        m = len(members)
        for x in range(m):
            i = members[x]
            for y in range(x + 1, m):
                j = members[y]
                a, b = (i, j) if i < j else (j, i)
                if (a, b) in seen:
                    continue
                seen.add((a, b))
                if _pair_bad(segs, a, b, n, closed):
                    bad.append((a, b))
                    if stop_at_first:
                        return bad
    return sorted(bad)


def _pair_bad(segs, a: int, b: int, n: int, closed: bool) -> bool:
    s, t = segs[a], segs[b]
    adjacent = b == a + 1 or (closed and a == 0 and b == n - 1)
    if not adjacent:
        return segments_intersect(s, t)
    # shared vertex is allowed; collinear backtracking is not
    if b == a + 1:
        shared, far_s, far_t = s.q, s.p, t.q
    else:
        shared, far_s, far_t = s.p, s.q, t.p
    if cross(shared, far_s, far_t) != 0:
        return False
    return point_on_segment(far_t, s) or point_on_segment(far_s, t)


def is_simple(P: RationalPolygonalPath) -> bool:
    segs = list(P.segments())
    if any(s.p == s.q for s in segs):
        return False
    return not crossing_pairs(segs, P.closed)
