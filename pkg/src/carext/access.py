"""Access arcs: rational polygonal arcs from an interior point to a boundary point.

Q_t is stored as a growing list of vertices.  Parameter layout (nested
dyadic): stage 0 occupies [0, 1/2], the extension built at stage i >= 1
occupies [1 - 2^-i, 1 - 2^-(i+1)], and Q_t is constant e_t on
[1 - 2^-(t+1), 1].  Every segment carries a tube index s with
dist(segment, P_s) > 2^-s, certified exactly against the pieces of P_s
that can come near it.  Since |P_s - J| < 2^-s such a segment misses J, so
a chain of them starting at the certified interior point z0 stays inside.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from flint import fmpq

from .curves import JordanCurve, Witness
from .enclose import log2_floor
from .exact import (Ball, CarextError, ONE, PointName, RationalPoint, ZERO, pow2, round_down,
                    sqrt_upper)
from .geometry import (RationalPolygonalPath, Segment, cross, path_eval, point_on_segment,
                       segment_segment_dist2, segments_intersect, winding_number,
                       dist_to_path_exceeds, sup_dist2)


# -- interior point -------------------------------------------------------------

@dataclass(frozen=True)
class InteriorCertificate:
    z0: RationalPoint
    t: int
    winding: int


def find_interior_point(J: JordanCurve, t_min: int = 2, t_max: int = 10, grid: int = 4) -> InteriorCertificate:
    """z0 with winding(P_t, z0) = +-1 and dist(z0, P_t) > 2 * 2^-t.

    Candidates: the rounded vertex centroid of P_t, then dyadic grid points
    of its bounding box, nearest to the centroid first.
    """
    for t in range(t_min, t_max + 1):
        P = J.polygon(t)
        vs = P.vertices[:-1]
        n = len(vs)
        bits = t + 2
        half_ulp = pow2(-(bits + 1))
        cx = round_down(sum((v.re for v in vs), ZERO) / n + half_ulp, bits)
        cy = round_down(sum((v.im for v in vs), ZERO) / n + half_ulp, bits)
        centroid = RationalPoint(cx, cy)
        cands = [centroid]
        lo_x, hi_x = min(v.re for v in vs), max(v.re for v in vs)
        lo_y, hi_y = min(v.im for v in vs), max(v.im for v in vs)
        steps = 1 << grid
        for i in range(1, steps):
            for j in range(1, steps):
                x = round_down(lo_x + (hi_x - lo_x) * fmpq(i, steps), bits)
                y = round_down(lo_y + (hi_y - lo_y) * fmpq(j, steps), bits)
                cands.append(RationalPoint(x, y))
        cands[1:] = sorted(set(cands[1:]), key=lambda p: ((p - centroid).norm2(), p.re, p.im))
        for z in cands:
            if not dist_to_path_exceeds(z, P, 2 * pow2(-t)):
                continue
            w = winding_number(P, z)
            if w in (1, -1):
                return InteriorCertificate(z, t, w)
    raise CarextError("no certified interior point found", "interior-not-found")


def interior_point(J: JordanCurve, **kw) -> RationalPoint:
    return find_interior_point(J, **kw).z0


# -- tube certificates ------------------------------------------------------------

def _piece_segments(J: JordanCurve, s: int, center: RationalPoint, radius: fmpq) -> list[Segment]:
    out = []
    for i in J.near_pieces(s, center, radius):
        a, b = J.vertex(s, i), J.vertex(s, i + 1)
        out.append(Segment(a, b))
    return out


def tube_free(J: JordanCurve, seg: Segment, s: int) -> bool:
    """Exact check that dist(seg, P_s) > 2^-s."""
    mid = seg.midpoint()
    half = sqrt_upper(seg.length2()) / 2
    d = pow2(-s)
    d2 = d * d
    for piece in _piece_segments(J, s, mid, half + d + pow2(-(s + 8))):
        if segment_segment_dist2(seg, piece) <= d2:
            return False
    return True


def certify_segment(J: JordanCurve, p: RationalPoint, q: RationalPoint, s_min: int, s_max: int,
                    depth: int = 6) -> Optional[list[tuple[RationalPoint, int]]]:
    """Split [p, q] into tube-free pieces; returns [(end vertex, s)] or None.

    A segment only tries tube indices with 2^-s >= length/64, which keeps
    the number of nearby pieces of P_s small; longer segments are halved.
    """
    seg = Segment(p, q)
    n2 = seg.length2()
    s_top = s_max if n2 == 0 else min(s_max, log2_floor(64 / sqrt_upper(n2)))
    for s in range(s_min, s_top + 1):
        if tube_free(J, seg, s):
            return [(q, s)]
    if depth == 0 or (s_top == s_max and n2 == 0):
        return None
    m = seg.midpoint()
    left = certify_segment(J, p, m, s_min, s_max, depth - 1)
    if left is None:
        return None
    right = certify_segment(J, m, q, s_min, s_max, depth - 1)
    if right is None:
        return None
    return left + right


# -- stages -------------------------------------------------------------------------

@dataclass
class AccessState:
    """Q_t: vertices[:count] on breakpoints[:count], then constant e_t up to 1."""

    t: int
    vertices: list[RationalPoint]
    breakpoints: list[fmpq]
    tubes: list[int]          # tube index of segment i (vertices i -> i+1)
    stage_starts: list[int]   # index of the first vertex of each stage's extension

    @property
    def e(self) -> RationalPoint:
        return self.vertices[-1]

    @property
    def s(self) -> int:
        return max(self.tubes)

    @property
    def path(self) -> RationalPolygonalPath:
        bp = list(self.breakpoints)
        vs = list(self.vertices)
        if bp[-1] < 1:
            bp.append(ONE)
            vs.append(vs[-1])
        return RationalPolygonalPath(bp, vs)

    def segments(self) -> list[Segment]:
        return [Segment(a, b) for a, b in zip(self.vertices, self.vertices[1:])]


def _stage_interval(t: int) -> tuple[fmpq, fmpq]:
    if t == 0:
        return ZERO, fmpq(1, 2)
    return ONE - pow2(-t), ONE - pow2(-(t + 1))


def _crosses(prev: list[Segment], new: list[Segment]) -> bool:
    """Would appending ``new`` (starting at prev's end) break simplicity?"""
    allsegs = prev + new
    n0 = len(prev)
    for j in range(n0, len(allsegs)):
        sj = allsegs[j]
        for i in range(j):
            si = allsegs[i]
            if i == j - 1:
                # shared vertex allowed; no collinear backtracking
                if cross(si.q, si.p, sj.q) == 0 and (point_on_segment(sj.q, si) or point_on_segment(si.p, sj)):
                    return True
                continue
            if segments_intersect(si, sj):
                return True
    return False


class AccessArcBuilder:
    """Builds Q_0, Q_1, ... toward zeta0 and caches every stage."""

    def __init__(self, J: JordanCurve, zeta0: PointName, h: Witness,
                 interior: Optional[InteriorCertificate] = None, s_cap: int = 4096,
                 bfs_nodes: int = 4096):
        self.J = J
        self.zeta0 = zeta0
        self.h = h.h
        self.interior = interior or find_interior_point(J)
        self.z0 = self.interior.z0
        self.s_cap = s_cap
        self.bfs_nodes = bfs_nodes
        self._stages: list[AccessState] = []

    # endpoint proximity, exact: |e - zeta0| < 2^-h(t)-1 using zeta0 at precision h(t)+3
    def near_zeta(self, e: RationalPoint, t: int) -> bool:
        c = self.zeta0.approx(self.h(t) + 3)
        lim = pow2(-(self.h(t) + 1)) - c.radius
        return lim > 0 and (e - c.center).norm2() < lim * lim

    def stage(self, t: int) -> AccessState:
        while len(self._stages) <= t:
            self._build_next()
        return self._stages[t]

    def _build_next(self) -> None:
        t = len(self._stages)
        if t == 0:
            st = self._build_initial()
        else:
            st = self._extend(self._stages[-1])
        self._stages.append(st)

    def next_endpoint(self, state: Optional[AccessState], t: int) -> tuple[RationalPoint, int]:
        """Candidate e_t on the line from the previous endpoint toward zeta0."""
        ht = self.h(t)
        c = self.zeta0.approx(ht + 3).center
        start = self.z0 if state is None else state.e
        v = start - c
        n2 = v.norm2()
        if n2 == 0:
            raise CarextError("endpoint coincides with zeta0's centre", "endpoint-search-failed")
        d = pow2(-(ht + 2))
        lam = d / sqrt_upper(n2, ht + 40)
        bits = ht + 10
        e = RationalPoint(round_down(c.re + v.re * lam, bits), round_down(c.im + v.im * lam, bits))
        return e, ht + 4

    def _admissible(self, state: Optional[AccessState], e: RationalPoint, t: int) -> bool:
        if not self.near_zeta(e, t):
            return False
        if state is not None:
            lim = pow2(-(self.h(t - 1) + 1))
            if not (e - state.e).norm2() < lim * lim:
                return False
            if e == state.e:
                return False
        return True

    def _build_initial(self) -> AccessState:
        e, s_hint = self.next_endpoint(None, 0)
        if not self._admissible(None, e, 0):
            raise CarextError("initial endpoint not admissible", "endpoint-search-failed")
        pieces = certify_segment(self.J, self.z0, e, 2, min(s_hint + 8, self.s_cap), depth=24)
        if pieces is None:
            pieces = self._bfs(None, 0, s_hint)
        verts = [self.z0] + [p for p, _ in pieces]
        tubes = [s for _, s in pieces]
        a, b = _stage_interval(0)
        n = len(pieces)
        bps = [a + (b - a) * fmpq(j, n) for j in range(n + 1)]
        st = AccessState(0, verts, bps, tubes, [0])
        if _crosses([], st.segments()):
            raise CarextError("initial arc not simple", "arc-extension-failed")
        return st

    def _extend(self, prev: AccessState) -> AccessState:
        t = prev.t + 1
        e, s_hint = self.next_endpoint(prev, t)
        pieces = None
        if self._admissible(prev, e, t):
            s_lo = max(2, min(prev.tubes[-1] - 1, s_hint))
            pieces = certify_segment(self.J, prev.e, e, s_lo, min(s_hint + 8, self.s_cap), depth=3)
            if pieces is not None and _crosses(prev.segments(), self._segs(prev.e, pieces)):
                pieces = None
        if pieces is None:
            pieces = self._bfs(prev, t, s_hint)
        a, b = _stage_interval(t)
        n = len(pieces)
        start = len(prev.vertices)
        verts = prev.vertices + [p for p, _ in pieces]
        # stage t starts where stage t-1 ended, at 1 - 2^-t
        bps = prev.breakpoints + [a + (b - a) * fmpq(j, n) for j in range(1, n + 1)]
        tubes = prev.tubes + [s for _, s in pieces]
        return AccessState(t, verts, bps, tubes, prev.stage_starts + [start])

    @staticmethod
    def _segs(start: RationalPoint, pieces) -> list[Segment]:
        out = []
        p = start
        for q, _ in pieces:
            out.append(Segment(p, q))
            p = q
        return out

    def _bfs(self, prev: Optional[AccessState], t: int, s: int) -> list[tuple[RationalPoint, int]]:
        """Shortest grid polyline from e_{t-1} to an admissible e_t.

        Nodes are dyadic grid points of spacing 2^-(h(t)+3) inside
        D(e_{t-1}, 2^-(t-1) + 2^-h(t-1)-1); edges are tube-free segments
        at index s that do not cross Q_{t-1}.
        """
        ht = self.h(t)
        start = self.z0 if prev is None else prev.e
        step = pow2(-(ht + 3))
        if prev is None:
            radius = sqrt_upper((start - self.zeta0.approx(ht + 3).center).norm2()) + pow2(-ht)
        else:
            radius = pow2(-(t - 1)) + pow2(-(self.h(t - 1) + 1))
        prev_segs = prev.segments() if prev is not None else []

        def snap(x: fmpq) -> int:
            return int((x / step).p) // int((x / step).q)

        origin = (snap(start.re), snap(start.im))

        def point(ij) -> RationalPoint:
            return RationalPoint(ij[0] * step, ij[1] * step)

        r2 = radius * radius
        parent: dict = {None: None}
        queue = deque()
        first = [(origin[0] + dx, origin[1] + dy) for dx in (0, 1) for dy in (0, 1)]
        for g in first:
            p = point(g)
            if p != start and (p - start).norm2() < r2 and self._edge_ok(prev_segs, [], start, p, s):
                parent[g] = None
                queue.append(g)
        visited = set(queue)
        while queue and len(visited) < self.bfs_nodes:
            g = queue.popleft()
            p = point(g)
            if self._admissible(prev, p, t):
                chain = []
                cur = g
                while cur is not None:
                    chain.append(point(cur))
                    cur = parent[cur]
                chain.reverse()
                return [(c, s) for c in chain]
            for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)):
                ng = (g[0] + dx, g[1] + dy)
                if ng in visited:
                    continue
                q = point(ng)
                if not (q - start).norm2() < r2:
                    continue
                visited.add(ng)
                path_so_far = self._chain_segments(start, parent, g, point)
                if self._edge_ok(prev_segs, path_so_far, p, q, s):
                    parent[ng] = g
                    queue.append(ng)
        raise CarextError(f"no admissible extension at stage {t}", "arc-extension-failed")

    def _chain_segments(self, start, parent, g, point) -> list[Segment]:
        pts = []
        cur = g
        while cur is not None:
            pts.append(point(cur))
            cur = parent[cur]
        pts.append(start)
        pts.reverse()
        return [Segment(a, b) for a, b in zip(pts, pts[1:])]

    def _edge_ok(self, prev_segs, chain, p, q, s) -> bool:
        seg = Segment(p, q)
        if not tube_free(self.J, seg, s):
            return False
        return not _crosses(prev_segs + chain, [seg])


# -- audits -------------------------------------------------------------------------

@dataclass
class StageAudit:
    t: int
    interior: bool
    extends: bool
    near_zeta: bool
    local: bool
    simple: bool
    cauchy: Optional[bool]

    @property
    def ok(self) -> bool:
        return all([self.interior, self.extends, self.near_zeta, self.local, self.simple,
                    self.cauchy is not False])


def audit_stage(builder: AccessArcBuilder, t: int) -> StageAudit:
    """Re-verify stage t independently of the search that produced it.

    (1) every segment is tube-free at its stored index and the chain starts
    at the certified z0; (2) Q_t's vertices and breakpoints are a prefix of
    Q_{t+1}'s; (3) |e_t - zeta0| < 2^-h(t)-1; (4) the stage-(t+1) extension
    stays in D(e_t, 2^-t+1).  Also: Q_{t+1} is simple and
    sup|Q_t - Q_{t+1}| <= 2^-t + 2^-h(t).
    """
    J = builder.J
    st, nx = builder.stage(t), builder.stage(t + 1)
    interior = st.vertices[0] == builder.z0 and all(
        tube_free(J, seg, s) for seg, s in zip(st.segments(), st.tubes))
    n = len(st.vertices)
    extends = nx.vertices[:n] == st.vertices and nx.breakpoints[:n] == st.breakpoints
    near = builder.near_zeta(st.e, t)
    rad = pow2(-(t - 1))
    local = all((v - st.e).norm2() < rad * rad for v in nx.vertices[n:])
    segs = nx.segments()
    simple = not _crosses([], segs)
    bound = pow2(-t) + pow2(-builder.h(t))
    cauchy = sup_dist2(st.path, nx.path) <= bound * bound
    return StageAudit(t, interior, extends, near, local, simple, cauchy)


def cauchy_bound_holds(builder: AccessArcBuilder, t: int, t2: int) -> bool:
    """sup|Q_t - Q_t2| <= sum_{j=t}^{t2-1} (2^-j + 2^-h(j))."""
    bound = sum((pow2(-j) + pow2(-builder.h(j)) for j in range(t, t2)), ZERO)
    return sup_dist2(builder.stage(t).path, builder.stage(t2).path) <= bound * bound


# -- the limit arc ------------------------------------------------------------------

class AccessArcName:
    """Q = union of the Q_t, named by eval(x, k) = Q_{k+3}(x) +- 2^-k."""

    def __init__(self, builder: AccessArcBuilder):
        self.builder = builder

    def stages(self, t: int) -> AccessState:
        return self.builder.stage(t)

    def eval(self, x, k: int) -> Ball:
        x = fmpq(x) if not isinstance(x, fmpq) else x
        st = self.builder.stage(max(k, 0) + 3)
        return Ball(path_eval(st.path, x), pow2(-k))

    def name_at(self, x) -> PointName:
        return PointName(lambda k: self.eval(x, k), key=("access", self.builder.zeta0.key, x))


def access_arc(J: JordanCurve, zeta0: PointName, h: Witness, **kw) -> AccessArcName:
    return AccessArcName(AccessArcBuilder(J, zeta0, h, **kw))
