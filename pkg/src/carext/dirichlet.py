"""Validated Dirichlet solver on the unit disk.

Angles are measured in turns: a boundary point is e^{2 pi i t} with t in
[0, 1).  The Poisson integral is evaluated by product integration: the
circle is cut into panels, each panel contributes its exact harmonic
measure times an enclosure of the data on it.  Harmonic measures come
from the angle formula

    omega_z([a, b]) = arg(q) / pi + 1/2,
    q = (e^{2 pi i b} - z) conj(e^{2 pi i a} - z) e^{-i pi (1/2 + b - a)},

which keeps arg(q) inside [-pi/2, pi/2] for every z in the closed disk.
It is evaluated as q = (1 + (Eb - Ea)/(Ea - z)) e^{...}: the same argument
with a single occurrence of z, which keeps enclosures over balls tight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from flint import acb, arb, fmpq

from .enclose import (acb_ball, arb_interval, arb_lower_q, arb_rad_q, arb_upper_q, ball_from_acb,
                      exp2pi_i, log2_ceil, log2_floor, precision)
from .exact import (Ball, CapExceeded, DomainError, EndpointExcluded, MapName,
                    NotInterior, ONE, PointName, RationalPoint, ZERO, floor_q, pow2, q,
                    round_up, sqrt_upper)

Number = Union[int, fmpq]


# -- kernel ------------------------------------------------------------------

def _kernel_arb(r: arb, theta: arb) -> arb:
    c = (2 * theta).cos_pi()
    return (1 - r * r) / (1 - 2 * r * c + r * r)


def poisson_kernel(r, theta, k: int) -> Ball:
    """P_r at angle ``theta`` (turns), as a real Ball of radius <= 2^-k."""
    r, theta = q(r), q(theta)
    if r < 0 or r >= 1:
        raise DomainError("Poisson kernel needs 0 <= r < 1")
    prec = k + 40
    while True:
        with precision(prec):
            v = _kernel_arb(arb(r), arb(theta))
            b = ball_from_acb(acb(v))
        if b.radius <= pow2(-k):
            return b
        prec *= 2


def _kernel_d2_bound(r: arb, x: arb) -> fmpq:
    """Upper bound of |d^2/dx^2 P_r(2 pi x)| over the enclosure x."""
    s, c = (2 * x).sin_cos_pi()
    N = 1 - r * r
    D = 1 - 2 * r * c + r * r
    D1 = 2 * r * s
    D2 = 2 * r * c
    d_lo = arb_lower_q(D)
    if d_lo <= 0:
        d_lo = arb_lower_q(N * N / 4)  # D >= (1 - r)^2 >= (1 - r^2)^2 / 4
    num = N * (D2.abs_upper() * D.abs_upper() + 2 * D1 * D1)
    top = arb_upper_q(num * (2 * arb.pi()) ** 2)
    return top / (d_lo * d_lo * d_lo)


def kernel_integral(r, k: int, initial_panels: int = 64, max_panels: int = 1 << 18) -> Ball:
    """Validated enclosure of int_0^1 P_r(2 pi x) dx (which equals 1).

    Composite midpoint rule; each panel of width w carries the remainder
    bound w^3/24 sup|g''| with the sup enclosed by ball arithmetic on the
    panel.  Panels whose error density exceeds the budget are halved.
    """
    r = q(r)
    if r < 0 or r >= 1:
        raise DomainError("kernel integral needs 0 <= r < 1")
    target = pow2(-(k + 1))
    with precision(k + 60):
        R = arb(r)

        def panel(a: fmpq, b: fmpq):
            w = b - a
            val = _kernel_arb(R, arb((a + b) / 2)) * arb(w)
            return a, b, val, round_up(w * w * w / 24 * _kernel_d2_bound(R, arb_interval(a, b)), k + 40)

        panels = [panel(fmpq(i, initial_panels), fmpq(i + 1, initial_panels))
                  for i in range(initial_panels)]
        while True:
            total = arb(0)
            err = ZERO
            for _, _, val, e in panels:
                total += val
                err += e
            rad = arb_rad_q(total)
            if err + rad <= target:
                c = ball_from_acb(acb(total))
                return Ball(c.center, c.radius + err)
            if len(panels) * 2 > max_panels:
                raise CapExceeded("kernel quadrature panel cap reached")
            dens = target / 2
            nxt = []
            for p in panels:
                a, b, _, e = p
                if e > dens * (b - a):
                    m = (a + b) / 2
                    nxt.append(panel(a, m))
                    nxt.append(panel(m, b))
                else:
                    nxt.append(p)
            panels = nxt


# -- boundary data -------------------------------------------------------------

@dataclass
class Arc:
    """Parameter arc [a, b] (turns, b - a <= 1) with its data map."""

    a: fmpq
    b: fmpq
    fn: MapName

    def contains_interior(self, t: fmpq) -> bool:
        u = self.a + _wrap(t - self.a)
        return self.a < u < self.b


def _wrap(t: fmpq) -> fmpq:
    return t - floor_q(t)


@dataclass
class BoundaryData:
    """Data f_j on arcs gamma_j covering the circle; M_f bounds |f|."""

    arcs: list[Arc]
    M_f: fmpq
    _cache: dict = field(default_factory=dict, repr=False)
    _exp_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.arcs:
            raise DomainError("boundary data needs at least one arc")
        total = ZERO
        for j, arc in enumerate(self.arcs):
            if not arc.a < arc.b or arc.b - arc.a > 1:
                raise DomainError("arc endpoints must satisfy a < b <= a + 1")
            nxt = self.arcs[(j + 1) % len(self.arcs)]
            if _wrap(arc.b - nxt.a) != 0:
                raise DomainError("arcs must be listed consecutively around the circle")
            total += arc.b - arc.a
        if total != 1:
            raise DomainError("arcs must cover the circle exactly once")
        self.M_f = q(self.M_f)
        if self.M_f <= 0:
            raise DomainError("M_f must be positive")

    def arc_of(self, t: fmpq) -> Optional[int]:
        """Index of the arc whose interior contains t, or None at an endpoint."""
        for j, arc in enumerate(self.arcs):
            if arc.contains_interior(t):
                return j
        return None

    def panel_bounds(self, j: int, level: int, i: int) -> tuple[fmpq, fmpq]:
        arc = self.arcs[j]
        w = (arc.b - arc.a) / (1 << level)
        return arc.a + w * i, arc.a + w * (i + 1)

    def panel_data(self, j: int, level: int, i: int, k: int) -> Ball:
        """Enclosure of f_j on the i-th of 2^level equal pieces of arc j."""
        key = (j, level, i, k)
        v = self._cache.get(key)
        if v is None:
            lo, hi = self.panel_bounds(j, level, i)
            v = self.arcs[j].fn.eval(Ball(RationalPoint((lo + hi) / 2, ZERO), (hi - lo) / 2), k)
            self._cache[key] = v
        return v


def full_circle_data(fn: MapName, M_f, offset=0) -> BoundaryData:
    """Continuous data on the whole circle split into two half-turn arcs."""
    o = q(offset)
    h = fmpq(1, 2)
    return BoundaryData([Arc(o, o + h, fn), Arc(o + h, o + 1, fn)], q(M_f))


def staggered_systems(fn: MapName, M_f) -> list[BoundaryData]:
    """Two arc systems offset by a quarter turn; every point is interior to an arc of one."""
    return [full_circle_data(fn, M_f, 0), full_circle_data(fn, M_f, fmpq(1, 4))]


def data_bound(fn: MapName, panels: int = 64, slack=fmpq(1, 8)) -> fmpq:
    """Certified M_f > max |f| from enclosures over a cover of the circle."""
    best = ZERO
    for i in range(panels):
        b = fn.eval(Ball(RationalPoint(fmpq(2 * i + 1, 2 * panels), ZERO), fmpq(1, 2 * panels)), 20)
        best = max(best, b.abs_upper())
    return best + slack


# -- harmonic measure sums ---------------------------------------------------------

class _Panel:
    __slots__ = ("j", "level", "i", "data", "omega", "stuck")

    def __init__(self, j, level, i, data, omega):
        self.j, self.level, self.i, self.data, self.omega = j, level, i, data, omega
        self.stuck = False


def _omega(z: acb, Ea: acb, Eb: acb, width: fmpq) -> arb:
    rot = exp2pi_i(arb(-(fmpq(1, 4) + width / 2)))
    # (Eb - z) / (Ea - z) has the argument of (Eb - z) conj(Ea - z) and a single z
    qq = (1 + (Eb - Ea) / (Ea - z)) * rot
    w = qq.arg() / arb.pi() + arb(fmpq(1, 2))
    return w


def _clip01(w: arb) -> arb:
    if not w.is_finite():
        return arb_interval(ZERO, ONE)
    lo, hi = arb_lower_q(w), arb_upper_q(w)
    lo, hi = max(lo, ZERO), min(hi, ONE)
    if lo > hi:
        raise _EmptyOmega()
    return arb_interval(lo, hi)


class _EmptyOmega(Exception):
    pass


class HarmonicSum:
    """Adaptive product integration of boundary data against harmonic measure at z.

    ``clip`` clips each measure to [0, 1]; this is what makes enclosures over
    balls that reach the circle valid.
    """

    def __init__(self, data: BoundaryData, zb: Ball, k_data: int, clip: bool, prec: int,
                 linear: Optional[tuple[RationalPoint, RationalPoint]] = None):
        self.data = data
        self.zb = zb
        self.kd = k_data
        self.clip = clip
        self.prec = prec
        # u = L + P[f - L] for harmonic L(w) = a + b w; the residual is small near the fit point
        self.linear = linear
        self._E = data._exp_cache.setdefault(prec, {})

    def _e(self, j: int, level: int, i: int) -> acb:
        # breakpoint i of 2^level pieces of arc j, reduced to the coarsest level
        while level > 0 and i % 2 == 0:
            level, i = level - 1, i // 2
        key = (j, level, i)
        v = self._E.get(key)
        if v is None:
            arc = self.data.arcs[j]
            v = exp2pi_i(arb(arc.a + (arc.b - arc.a) * fmpq(i, 1 << level)))
            self._E[key] = v
        return v

    def _panel(self, z: acb, j: int, level: int, i: int) -> _Panel:
        d = self.data.panel_data(j, level, i, self.kd)
        arc = self.data.arcs[j]
        width = (arc.b - arc.a) / (1 << level)
        w = _omega(z, self._e(j, level, i), self._e(j, level, i + 1), width)
        if self.clip:
            w = _clip01(w)
        if self.linear is not None:
            a, b = self.linear
            lo, hi = self.data.panel_bounds(j, level, i)
            L = acb(arb(a.re), arb(a.im)) + acb(arb(b.re), arb(b.im)) * exp2pi_i(arb_interval(lo, hi))
            d = ball_from_acb(acb_ball(d) - L)
        return _Panel(j, level, i, d, w)

    def _linear_at(self, val: RationalPoint, rad: fmpq) -> tuple[RationalPoint, fmpq]:
        if self.linear is None:
            return val, rad
        a, b = self.linear
        c = self.zb.center
        lc = a + RationalPoint(b.re * c.re - b.im * c.im, b.re * c.im + b.im * c.re)
        return val + lc, rad + sqrt_upper(b.norm2(), 60) * self.zb.radius

    def run(self, target: fmpq, initial: int = 16, max_panels: int = 1 << 16,
            stop: Optional[Callable[[Ball], bool]] = None, strict: bool = True) -> Ball:
        """Refine until the radius is <= target or ``stop`` accepts the ball.

        At the panel cap: raise when ``strict``, else return the last ball.
        """
        with precision(self.prec):
            z = acb_ball(self.zb)
            panels = []
            lvl0 = max(initial.bit_length() - 1, 0)
            for j in range(len(self.data.arcs)):
                for i in range(1 << lvl0):
                    panels.append(self._panel(z, j, lvl0, i))
            best, stale = None, 0
            while True:
                val, rad, contrib, floor = self._combine(panels)
                val, rad = self._linear_at(val, rad)
                if rad <= target or (stop is not None and stop(Ball(val, rad))):
                    return Ball(val, rad)
                # stop once the removable part is small next to the part that stays
                if not strict and (rad - floor) * 4 <= rad:
                    return Ball(val, rad)
                if best is None or rad < best.radius * fmpq(7, 8):
                    stale = 0
                else:
                    stale += 1
                if best is None or rad < best.radius:
                    best = Ball(val, rad)
                # near panels of a ball touching the circle stop improving
                if not strict and stale >= 2:
                    return best
                if len(panels) >= max_panels:
                    if not strict:
                        return best
                    raise CapExceeded(f"harmonic sum did not reach 2^{log2_floor(target)} "
                                      f"(radius {float(rad):.3g})")
                # split the panels carrying the largest error share
                contrib = [ZERO if p.stuck else c for p, c in zip(panels, contrib)]
                order = sorted(range(len(panels)), key=lambda i: contrib[i], reverse=True)
                if contrib[order[0]] == 0:
                    if not strict:
                        return best
                    raise CapExceeded("harmonic sum data at oracle resolution")
                budget = target / (2 * len(panels))
                split = set()
                mass = ZERO
                excess = rad - target / 2
                for i in order:
                    if contrib[i] <= budget or mass >= excess:
                        break
                    split.add(i)
                    mass += contrib[i]
                # the closed-disk bound is set by maxima, so split every near-top panel together
                top = contrib[order[0]] / 4
                for i in order:
                    if contrib[i] < top:
                        break
                    split.add(i)
                nxt = []
                for i, p in enumerate(panels):
                    if i in split:
                        kids = [self._panel(z, p.j, p.level + 1, 2 * p.i + e) for e in (0, 1)]
                        # data that stops shrinking has hit the resolution of its oracle
                        if max(c.data.radius for c in kids) * 4 > p.data.radius * 3:
                            for c in kids:
                                c.stuck = True
                        nxt.extend(kids)
                    else:
                        nxt.append(p)
                panels = nxt

    def _combine_taylor(self, panels: Sequence[_Panel], ref: RationalPoint):
        """Centred form for a ball at distance >= its radius from the circle.

        With d_j = f_j - ref, U(w) = sum omega_j(w) d_j = (A(w) - conj B(w)) / 2i
        for the holomorphic sums A = sum d_j H_j, B = sum conj(d_j) H_j,
        H_j = (1/pi) log((Eb - w) / (Ea - w)).  Over the ball
        U = U(c) + first order +- r^2/4 (sup|A''| + sup|B''|); data radii add
        the knapsack bound of sum omega_j r_j.  Second derivatives are
        summed by parts over the breakpoints, so wide enclosures of single
        kernel terms are weighted by data differences only.
        """
        zb = self.zb
        c = acb(arb(zb.center.re), arb(zb.center.im))
        ball = acb_ball(zb)
        S0 = acb(0)
        A1 = acb(0)
        B1 = acb(0)
        A2 = acb(0)
        B2 = acb(0)
        lo, hi, radii, contrib = [], [], [], []
        ds = [acb(arb(p.data.center.re - ref.re), arb(p.data.center.im - ref.im)) for p in panels]
        pi = arb.pi()
        for n, p in enumerate(panels):
            arc = self.data.arcs[p.j]
            width = (arc.b - arc.a) / (1 << p.level)
            Ea, Eb = self._e(p.j, p.level, p.i), self._e(p.j, p.level, p.i + 1)
            d = ds[n]
            S0 += _omega(c, Ea, Eb, width) * d
            h1 = _log_ratio_d1(c, Ea, Eb)
            A1 += d * h1
            B1 += d.conjugate() * h1
            ia = 1 / (Ea - ball)
            dd = d - ds[n - 1]
            g = ia * ia / pi
            A2 += g * dd
            B2 += g * dd.conjugate()
            a, b = arb_lower_q(p.omega), arb_upper_q(p.omega)
            lo.append(a)
            hi.append(b)
            radii.append(p.data.radius)
            contrib.append(b * p.data.radius)
        if sum(lo, ZERO) > 1 or sum(hi, ZERO) < 1:
            raise _EmptyOmega()
        r = zb.radius
        first = (arb_upper_q(A1.abs_upper()) + arb_upper_q(B1.abs_upper())) / 2 * r
        second = (arb_upper_q(A2.abs_upper()) + arb_upper_q(B2.abs_upper())) / 4 * r * r
        data_err = _knapsack(lo, hi, radii, True)
        sb = ball_from_acb(S0)
        val = RationalPoint(ref.re + sb.center.re, ref.im + sb.center.im)
        floor = sb.radius + first + second
        return val, floor + data_err, contrib, floor

    def _combine(self, panels: Sequence[_Panel]):
        # reference value: data centre of the heaviest panel
        ref = max(panels, key=lambda p: p.omega.mid()).data.center
        if self.clip:
            zb = self.zb
            clear = ONE - 2 * zb.radius
            if zb.radius > 0 and clear > 0 and zb.center.norm2() < clear * clear:
                return self._combine_taylor(panels, ref)
            return _combine_lp(panels, ref)
        ref_acb = acb(arb(ref.re), arb(ref.im))
        S = acb(0)
        R = ZERO
        contrib = []
        for p in panels:
            c = acb(arb(p.data.center.re), arb(p.data.center.im))
            term = (c - ref_acb) * p.omega
            S += term
            wu = arb_upper_q(p.omega)
            e = p.data.radius * wu
            R += e
            rr = term.real.rad() + term.imag.rad()
            contrib.append(e + (arb_upper_q(rr) if rr != 0 else ZERO))
        sb = ball_from_acb(S)
        val = RationalPoint(ref.re + sb.center.re, ref.im + sb.center.im)
        return val, sb.radius + R, contrib, ZERO


def _log_ratio_d1(w: acb, Ea: acb, Eb: acb) -> acb:
    """d/dw of (1/pi) log((Eb - w) / (Ea - w))."""
    return (1 / (Ea - w) - 1 / (Eb - w)) / arb.pi()


def _log_ratio_d2(w: acb, Ea: acb, Eb: acb) -> acb:
    # square the reciprocals: the square of a box around a small value can contain 0
    ia, ib = 1 / (Ea - w), 1 / (Eb - w)
    return (ia * ia - ib * ib) / arb.pi()


def _knapsack(lo: list[fmpq], hi: list[fmpq], x: list[fmpq], largest: bool) -> fmpq:
    """Extreme of sum w_j x_j over lo <= w <= hi, sum w = 1 (fractional knapsack)."""
    m = 1 - sum(lo, ZERO)
    total = sum((a * b for a, b in zip(lo, x)), ZERO)
    for j in sorted(range(len(x)), key=lambda j: x[j], reverse=largest):
        if m <= 0:
            break
        g = min(hi[j] - lo[j], m)
        total += g * x[j]
        m -= g
    return total


def _combine_lp(panels: Sequence[_Panel], ref: RationalPoint):
    """Rectangle enclosure using that the true measures sum to one.

    Each coordinate of sum w_j (f_j - ref) is bounded by a linear program
    over the measure intervals, so panels next to a ball on the circle
    cost their spread, not their number.
    """
    lo, hi, xr, yr, xi, yi, contrib = [], [], [], [], [], [], []
    for p in panels:
        a, b = arb_lower_q(p.omega), arb_upper_q(p.omega)
        lo.append(a)
        hi.append(b)
        d = p.data.center - ref
        r = p.data.radius
        xr.append(d.re + r)
        yr.append(d.re - r)
        xi.append(d.im + r)
        yi.append(d.im - r)
        # the measure range over the ball is real variation; only data radii shrink by splitting
        contrib.append(b * r)
    if sum(lo, ZERO) > 1 or sum(hi, ZERO) < 1:
        raise _EmptyOmega()
    re0, re1 = _knapsack(lo, hi, yr, False), _knapsack(lo, hi, xr, True)
    im0, im1 = _knapsack(lo, hi, yi, False), _knapsack(lo, hi, xi, True)
    dx, dy = (re1 - re0) / 2, (im1 - im0) / 2
    val = RationalPoint(ref.re + (re0 + re1) / 2, ref.im + (im0 + im1) / 2)
    # the same programme without data radii: what refinement cannot remove
    cr = [x - r for x, r in zip(xr, (p.data.radius for p in panels))]
    ci = [x - r for x, r in zip(xi, (p.data.radius for p in panels))]
    fx = (_knapsack(lo, hi, cr, True) - _knapsack(lo, hi, cr, False)) / 2
    fy = (_knapsack(lo, hi, ci, True) - _knapsack(lo, hi, ci, False)) / 2
    return val, sqrt_upper(dx * dx + dy * dy, 60), contrib, sqrt_upper(fx * fx + fy * fy, 60)


def _certified_interior(zb: Ball) -> bool:
    s = ONE - zb.radius
    return s > 0 and zb.center.norm2() < s * s


def poisson_integral(data: BoundaryData, z: Ball, k: int, max_panels: int = 1 << 16) -> Ball:
    """Ball of radius <= 2^-k containing u(w) for every w in the ball z.

    z must be certified inside the open disk.
    """
    if not _certified_interior(z):
        raise NotInterior("ball not certified inside the unit disk")
    hs = HarmonicSum(data, z, k + 6, clip=False, prec=k + 64)
    return hs.run(pow2(-k), max_panels=max_panels)


def _linear_fit(data: BoundaryData, z: Ball, k: int = 16) -> Optional[tuple[RationalPoint, RationalPoint]]:
    """Secant fit a + b w of the data around the boundary point nearest z.

    Any fit is sound; a good one removes the first-order part of f so far
    panels contribute at the scale of z's radius.  None for central balls.
    """
    c = z.center
    if c.norm2() < fmpq(1, 4) or z.radius >= fmpq(1, 4):
        return None
    with precision(80):
        t = acb(arb(c.re), arb(c.im)).arg() / (2 * arb.pi())
        theta = round_up(arb_upper_q(t), 24)
    h = pow2(max(log2_ceil(z.radius), -12)) if z.radius > 0 else pow2(-12)
    fn = data.arcs[0].fn
    fp = fn.eval(Ball(RationalPoint(theta + h, ZERO), ZERO), k).center
    fm = fn.eval(Ball(RationalPoint(theta - h, ZERO), ZERO), k).center
    with precision(80):
        Ep, Em = exp2pi_i(arb(theta + h)), exp2pi_i(arb(theta - h))
        b = (acb(arb(fp.re), arb(fp.im)) - acb(arb(fm.re), arb(fm.im))) / (Ep - Em)
        a = acb(arb(fp.re), arb(fp.im)) - b * Ep
        a, b = ball_from_acb(a).center, ball_from_acb(b).center
    bits = 40
    return (RationalPoint(round_up(a.re, bits), round_up(a.im, bits)),
            RationalPoint(round_up(b.re, bits), round_up(b.im, bits)))


def enclose_on_closure(data: BoundaryData, z: Ball, target: fmpq, max_panels: int = 4096,
                       k_data: int = 30, stop: Optional[Callable[[Ball], bool]] = None) -> Ball:
    """Enclosure of u over z intersected with the closed disk.

    Valid up to the circle: measures are clipped to [0, 1], and the
    representation u = ref + sum omega_j (f_j - ref) holds on the closed
    disk.  ``target`` is a wish, not a promise; the best enclosure found
    within the panel budget is returned.
    """
    hs = HarmonicSum(data, z, k_data, clip=True, prec=k_data + 64, linear=_linear_fit(data, z))
    try:
        return hs.run(target, max_panels=max_panels, stop=stop, strict=False)
    except _EmptyOmega:
        raise DomainError("ball does not meet the closed disk")


# -- squares by the maximum principle ---------------------------------------------------

def _hull_ball(balls: Sequence[Ball]) -> Ball:
    """A ball containing every ball of the list (hence their convex hull)."""
    x0 = min(b.center.re - b.radius for b in balls)
    x1 = max(b.center.re + b.radius for b in balls)
    y0 = min(b.center.im - b.radius for b in balls)
    y1 = max(b.center.im + b.radius for b in balls)
    c = RationalPoint(round_up((x0 + x1) / 2, 60), round_up((y0 + y1) / 2, 60))
    rad = max(sqrt_upper((b.center - c).norm2(), 60) + b.radius for b in balls)
    return Ball(c, rad)


def _clip_to_disk(p: RationalPoint, q: RationalPoint) -> Optional[tuple[RationalPoint, RationalPoint]]:
    """Rational segment containing [p, q] intersected with the closed disk (None if empty).

    Solves |p + t (q - p)|^2 = 1 for t with outward-rounded square roots.
    """
    d = q - p
    a = d.norm2()
    b = p.re * d.re + p.im * d.im
    c = p.norm2() - 1
    disc = b * b - a * c
    if a == 0 or disc < 0:
        return None if a != 0 or c > 0 else (p, q)
    root = sqrt_upper(disc, 60)
    t0 = max(ZERO, (-b - root) / a)
    t1 = min(ONE, (-b + root) / a)
    if t0 > t1:
        return None
    t0, t1 = _round_param(t0, False), _round_param(t1, True)
    return (RationalPoint(p.re + d.re * t0, p.im + d.im * t0),
            RationalPoint(p.re + d.re * t1, p.im + d.im * t1))


def _round_param(t: fmpq, up: bool) -> fmpq:
    bits = 40
    v = round_up(t, bits) if up else -round_up(-t, bits)
    return min(max(v, ZERO), ONE)


def _whitney(p: RationalPoint, q: RationalPoint, rho_min: fmpq, rho_max: fmpq) -> list[Ball]:
    """Balls covering [p, q] of radius <= rho_max: clear of the circle by their radius,
    or smaller than rho_min."""
    c = RationalPoint((p.re + q.re) / 2, (p.im + q.im) / 2)
    rho = sqrt_upper((q - p).norm2(), 60) / 2
    if rho <= rho_max:
        clear = ONE - 2 * rho
        if clear > 0 and c.norm2() < clear * clear:
            return [Ball(c, rho)]
        if rho <= rho_min:
            return [Ball(c, rho)]
    return _whitney(p, c, rho_min, rho_max) + _whitney(c, q, rho_min, rho_max)


def _arc_in_ball(c: RationalPoint, R: fmpq) -> Optional[tuple[fmpq, fmpq]]:
    """Turns [t0, t1] (t1 - t0 <= 1) covering the circle points inside the disc D_R(c)."""
    n2 = c.norm2()
    if n2 == 0:
        return (ZERO, ONE) if R >= 1 else None
    with precision(96):
        m = arb(n2).sqrt()
        thr = (1 + arb(n2) - arb(R) ** 2) / (2 * m)
        if thr > 1:
            return None
        if not thr > -1:
            return ZERO, ONE
        alpha = acb(arb(c.re), arb(c.im)).arg() / (2 * arb.pi())
        half = thr.acos() / (2 * arb.pi())
        t0, t1 = arb_lower_q(alpha - half), arb_upper_q(alpha + half)
    if t1 - t0 >= 1:
        return ZERO, ONE
    return t0, t1


def data_on_range(data: BoundaryData, t0: fmpq, t1: fmpq, k: int) -> list[Ball]:
    """Enclosures of the data over the turns [t0, t1], one per arc met."""
    out = []
    for arc in data.arcs:
        # shift the range next to the arc and intersect
        for shift in (-1, 0, 1):
            a = max(arc.a, t0 + shift)
            b = min(arc.b, t1 + shift)
            if a <= b:
                out.append(arc.fn.eval(Ball(RationalPoint((a + b) / 2, ZERO), (b - a) / 2), k))
    return out


def enclose_square(data: BoundaryData, x0: fmpq, y0: fmpq, size: fmpq, tol: fmpq,
                   k_data: int = 24, max_panels: int = 2048,
                   pieces: Optional[list] = None, stop: Optional[Callable[[Ball], bool]] = None,
                   stop_key=None) -> Ball:
    """Enclosure of u over the closed square [x0, x0+size] x [y0, y0+size] cut to the disk.

    Every real part Re(e^{-ia} u) is harmonic, so the image lies in the
    convex hull of u on the boundary of the region: the clipped edges and
    the circle arc inside the square.  Edges are covered by balls clear of
    the circle (plus tiny balls at the circle); the arc costs one data
    enclosure.  Edge enclosures are cached on ``data``; a ``stop`` predicate
    ends each edge refinement early and must come with a hashable ``stop_key``.
    """
    cache = data._cache.setdefault("edges", {})
    corners = [RationalPoint(x0, y0), RationalPoint(x0 + size, y0),
               RationalPoint(x0 + size, y0 + size), RationalPoint(x0, y0 + size)]
    balls = []
    rho_min = size / 32
    for i in range(4):
        p, q = corners[i], corners[(i + 1) % 4]
        if (q.re, q.im) < (p.re, p.im):
            p, q = q, p
        key = (p.re, p.im, q.re, q.im, tol, stop_key)
        got = cache.get(key)
        if got is None:
            got = []
            seg = _clip_to_disk(p, q)
            if seg is not None:
                for b in _whitney(seg[0], seg[1], rho_min, tol):
                    got.append(enclose_on_closure(data, b, tol, max_panels=max_panels, k_data=k_data,
                                                  stop=stop))
            cache[key] = got
        balls.extend(got)
    half = size / 2
    c = RationalPoint(x0 + half, y0 + half)
    rng = _arc_in_ball(c, sqrt_upper(2 * half * half, 60))
    if rng is not None:
        balls.extend(data_on_range(data, rng[0], rng[1], k_data))
    if not balls:
        raise DomainError("square does not meet the closed disk")
    if pieces is not None:
        pieces.extend(balls)
    return _hull_ball(balls)


# -- boundary certificates ----------------------------------------------------------

@dataclass(frozen=True)
class Sector:
    """S(rho, delta, alpha) = {r e^{2 pi i t}: rho < r <= 1, |t - alpha| < delta/2}."""

    rho: fmpq
    delta: fmpq
    alpha: fmpq

    def __post_init__(self):
        if not (0 < self.rho < 1) or not self.delta > 0:
            raise DomainError("sector needs 0 < rho < 1 and delta > 0")

    def contains_ball(self, zb: Ball) -> bool:
        # radial condition, exact: |c| - r > rho
        need = zb.radius + self.rho
        if not zb.center.norm2() > need * need:
            return False
        with precision(80):
            t = _turns_of_ball(zb)
            d = t - arb(self.alpha)
            shift = round(float(d.mid()))
            d = d - shift
            return bool(d.abs_upper() < arb(self.delta / 2))


def _turns_of_ball(zb: Ball) -> arb:
    z = acb_ball(zb)
    return z.arg() / (2 * arb.pi())


@dataclass(frozen=True)
class BoundaryCertificate:
    alpha: fmpq
    epsilon: fmpq
    delta: fmpq
    rho: fmpq
    value: Ball

    @property
    def sector(self) -> Sector:
        return Sector(self.rho, self.delta, self.alpha)


def delta_for(data: BoundaryData, alpha, epsilon, max_halvings: int = 80) -> fmpq:
    """delta with the window |t - alpha| <= delta inside one arc and oscillation < eps/3."""
    alpha, epsilon = q(alpha), q(epsilon)
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    j = data.arc_of(alpha)
    if j is None:
        raise EndpointExcluded(f"alpha {alpha} is an arc endpoint")
    arc = data.arcs[j]
    u = arc.a + _wrap(alpha - arc.a)
    half_end = min(u - arc.a, arc.b - u) / 2
    fn = arc.fn
    if fn.modulus is not None:
        k0 = log2_floor(3 / epsilon) + 1  # 2^-k0 < eps/3
        return min(pow2(-fn.modulus(k0)), half_end)
    d = half_end
    for _ in range(max_halvings):
        b = fn.eval(Ball(RationalPoint(u, ZERO), d), log2_floor(3 / epsilon) + 4)
        if 2 * b.radius < epsilon / 3:
            return d
        d /= 2
    raise CapExceeded("oscillation window did not shrink below eps/3")


def rho_for(delta, epsilon, M_f) -> fmpq:
    """rho < 1 with P_r(delta/2) < eps/(3 M_f) for all r in [rho, 1).

    With T = eps/(3M) and x = delta/2, P_r(x) < T is equivalent to
    q(r) = (1+T) r^2 - 2T cos(x) r + T - 1 > 0.  The larger root of q is
    r+ = [T cos x + sqrt(1 - T^2 sin^2 x)]/(1+T); rho is a rational just
    above it, and q(rho) > 0 with rho past the vertex is checked exactly.
    """
    delta, epsilon, M_f = q(delta), q(epsilon), q(M_f)
    if not (delta > 0 and epsilon > 0 and M_f > 0):
        raise DomainError("rho_for needs positive inputs")
    x = delta / 2
    T = epsilon / (3 * M_f)
    bits = 24
    while True:
        with precision(bits + 64):
            cx = (2 * arb(x)).cos_pi()
            sx = (2 * arb(x)).sin_pi()
            Ta = arb(T)
            disc = 1 - Ta * Ta * sx * sx
            rplus = (Ta * cx + disc.sqrt()) / (1 + Ta)
            c_hi = arb_upper_q(cx)
            rp = arb_upper_q(rplus)
        rho = max(round_up(rp, bits), fmpq(1, 2))
        if rho < 1 and _rho_certified(rho, T, c_hi):
            return rho
        bits *= 2
        if bits > 1 << 14:
            raise CapExceeded("rho certification precision cap")


def _rho_certified(rho: fmpq, T: fmpq, c_hi: fmpq) -> bool:
    # worst case over the cos enclosure is the largest cosine
    val = (1 + T) * rho * rho - 2 * T * c_hi * rho + T - 1
    vertex = T * max(c_hi, ZERO) / (1 + T)
    return val > 0 and rho > vertex


def certificate(data: BoundaryData, alpha, epsilon, k_value: Optional[int] = None) -> BoundaryCertificate:
    alpha, epsilon = q(alpha), q(epsilon)
    delta = delta_for(data, alpha, epsilon)
    rho = rho_for(delta, epsilon, data.M_f)
    j = data.arc_of(alpha)
    arc = data.arcs[j]
    u = arc.a + _wrap(alpha - arc.a)
    kv = k_value if k_value is not None else log2_floor(1 / epsilon) + 4
    value = arc.fn.eval(Ball(RationalPoint(u, ZERO), ZERO), kv)
    return BoundaryCertificate(alpha, epsilon, delta, rho, value)


def _alpha_candidates(zb: Ball, depth: int):
    """Dyadic angles near arg(center), by increasing denominator."""
    with precision(64):
        t = _turns_of_ball(Ball(zb.center, ZERO)) if zb.center.norm2() > 0 else arb(0)
        tm = fmpq(arb_lower_q(t.mid()) if t.is_finite() else ZERO)
    tm = _wrap(tm)
    seen = set()
    for n in range(2, depth + 1):
        base = fmpq(int((tm * (1 << n)).p) // int((tm * (1 << n)).q), 1 << n)
        for cand in (base, base + pow2(-n)):
            c = _wrap(cand)
            if c not in seen:
                seen.add(c)
                yield c


def extend_to_closure(data: Union[BoundaryData, Sequence[BoundaryData]], z: Union[PointName, Ball],
                      k: int, max_rounds: int = 24, alpha_depth: Optional[int] = None) -> Ball:
    """Ball of radius <= 2^-k containing the continuous extension u(z), z in the closed disk.

    Rounds alternate two strategies on ever better approximations of z:
    a certified-interior ball goes to :func:`poisson_integral`; otherwise
    sector certificates (alpha, eps = 2^-(k+1)) are tried.  Several
    boundary-data systems may be given; certificates may come from any.
    """
    systems = [data] if isinstance(data, BoundaryData) else list(data)
    eps = pow2(-(k + 1))
    depth = alpha_depth if alpha_depth is not None else k + 24
    certs: dict[tuple[int, fmpq], Optional[BoundaryCertificate]] = {}
    for rnd in range(max_rounds):
        zb = z if isinstance(z, Ball) else z.approx(k + 4 + 4 * rnd)
        if _certified_interior(zb):
            return poisson_integral(systems[0], zb, k)
        if zb.abs_lower() > 1:
            raise DomainError("point lies outside the closed disk")
        for alpha in _alpha_candidates(zb, depth):
            for si, sysd in enumerate(systems):
                key = (si, alpha)
                if key not in certs:
                    try:
                        certs[key] = certificate(sysd, alpha, eps, k + 4)
                    except EndpointExcluded:
                        certs[key] = None
                cert = certs[key]
                if cert is not None and cert.sector.contains_ball(zb):
                    v = cert.value
                    return Ball(v.center, v.radius + eps)
        if isinstance(z, Ball):
            break
    raise EndpointExcluded("no certificate fired and the point never certified interior")
