"""The ten acceptance checks as plain functions.

Each case builds its own objects (no shared caches, so timings are honest)
and returns a ``Case`` whose ``report`` is a deterministic text of every
computed enclosure; criterion 10 compares reports across processes.
"""
from __future__ import annotations

import json
import random
import sys
import time
from dataclasses import dataclass
from typing import Callable

from flint import acb, arb, fmpq

from carext.boundary import boundary_map, boundary_value, make_frame, safe_radius
from carext.access import AccessArcBuilder, audit_stage, cauchy_bound_holds
from carext.cli import disk_point
from carext.curves import lc_witness, sample_witness_property
from carext.dirichlet import extend_to_closure, kernel_integral, staggered_systems
from carext.enclose import acb_ball, arb_mid_q, arb_rad_q, ball_from_acb, exp2pi_i, precision, turns_of
from carext.exact import Ball, PointName, RationalPoint, pow2, qstr, sqrt_upper, wrap01
from carext.instances import (ellipse, identity_instance, mobius_instance, polynomial_instance, trig_data,
                              unit_circle)
from carext.inversion import caratheodory_extension, curve_bound, extend_inverse, invert_boundary

QUARTER = RationalPoint(fmpq(1, 4))


@dataclass
class Case:
    ok: bool
    detail: str
    report: str
    seconds: float = 0.0


class _Log:
    """Collects rows for the report and counts failures."""

    def __init__(self):
        self.rows: list[list[str]] = []
        self.bad = 0
        self.worst = fmpq(0)

    def ball(self, tag: str, b: Ball, ok: bool, err: fmpq = fmpq(0)) -> None:
        self.rows.append([tag, qstr(b.center.re), qstr(b.center.im), qstr(b.radius)])
        self.bad += not ok
        self.worst = max(self.worst, err)

    def flag(self, tag: str, ok: bool) -> None:
        self.rows.append([tag, str(bool(ok))])
        self.bad += not ok

    def case(self, detail: str) -> Case:
        n = len(self.rows)
        text = json.dumps(self.rows, separators=(",", ":"))
        return Case(self.bad == 0, f"{n - self.bad}/{n} ok, {detail}", text)


def _truth(fn: Callable[[acb], acb], z: RationalPoint) -> RationalPoint:
    with precision(160):
        return ball_from_acb(fn(acb(arb(z.re), arb(z.im)))).center


def _dist(a: RationalPoint, b: RationalPoint) -> fmpq:
    return sqrt_upper((a - b).norm2(), 64)


def _circle(t: fmpq) -> RationalPoint:
    with precision(160):
        return ball_from_acb(exp2pi_i(arb(t))).center


def _within(log: _Log, tag: str, b: Ball, truth: RationalPoint, tol: fmpq) -> None:
    err = _dist(b.center, truth)
    log.ball(tag, b, b.radius <= tol and err <= tol, err)


def _ring_grid() -> list[tuple[fmpq, fmpq]]:
    pts = [(fmpq(0), fmpq(0))]
    for r in (fmpq(1, 3), fmpq(2, 3)):
        pts += [(r, fmpq(j, 8)) for j in range(8)]
    return pts


# -- criteria -----------------------------------------------------------------------

def c1_kernel_normalization() -> Case:
    log = _Log()
    for r in (fmpq(0), fmpq(1, 2), fmpq(9, 10)):
        b = kernel_integral(r, 20)
        log.ball(f"r={r}", b, b.radius <= pow2(-20) and b.contains(RationalPoint(fmpq(1))))
    return log.case("radius <= 2^-20")


def c2_dirichlet_cos() -> Case:
    log = _Log()
    systems = staggered_systems(trig_data("cos"), fmpq(9, 8))
    for i in range(5):
        for j in range(5):
            z = RationalPoint(fmpq(i - 2, 4), fmpq(j - 2, 4))
            b = extend_to_closure(systems, PointName.exact(z), 12)
            _within(log, f"in {i},{j}", b, RationalPoint(z.re), pow2(-12))
    for j in range(8):
        t = fmpq(j, 8)
        b = extend_to_closure(systems, disk_point(fmpq(1), t), 8)
        _within(log, f"bd {t}", b, RationalPoint(_circle(t).re), pow2(-8))
    return log.case(f"worst error {float(log.worst):.2e}")


def c3_identity_grid() -> Case:
    log = _Log()
    inst = identity_instance()
    J = inst.curve
    bm = boundary_map(inst.phi, J, lc_witness(J))
    ext = caratheodory_extension(inst.phi, J, bm, k_bm=16)
    k = 10
    for r, t in _ring_grid():
        z = disk_point(r, t)
        b, _ = ext.evaluate(z, k)
        _within(log, f"r={r} t={t}", b, z.approx(k + 40).center, pow2(-k))
    for j in range(8):
        t = fmpq(j, 8)
        b, _ = ext.evaluate(J.name_at(t), k)
        _within(log, f"bd {t}", b, _circle(t), pow2(-k))
    return log.case(f"{len(log.rows)} grid points, worst error {float(log.worst):.2e}")


def c4_mobius() -> Case:
    log = _Log()
    inst = mobius_instance(QUARTER)
    J = inst.curve
    bm = boundary_map(inst.phi, J, lc_witness(J))
    ext = caratheodory_extension(inst.phi, J, bm, k_bm=14)
    k = 8
    for j in range(32):
        t = fmpq(j, 32)
        truth = _truth(inst.phi_true, _circle(t))
        _within(log, f"bm {t}", bm.eval(J.name_at(t), k), truth, pow2(-k))
        b, _ = ext.evaluate(J.name_at(t), k)
        _within(log, f"ext {t}", b, truth, pow2(-k))
    for r in (fmpq(1, 4), fmpq(3, 4)):
        for j in range(8):
            z = disk_point(r, fmpq(j, 8))
            b, _ = ext.evaluate(z, k)
            _within(log, f"in r={r} {j}", b, _truth(inst.phi_true, z.approx(k + 60).center), pow2(-k))
    return log.case(f"worst error {float(log.worst):.2e}")


def c5_polynomial() -> Case:
    log = _Log()
    inst = polynomial_instance(QUARTER)
    J = inst.curve
    # Newton oracle residual |f(phi(w)) - w| on points inside J
    for j in range(16):
        w = J.point(fmpq(j, 16), 80).center
        w = RationalPoint(w.re * fmpq(9, 10), w.im * fmpq(9, 10))
        z = inst.phi.at(w, 80)
        with precision(200):
            res = ball_from_acb(inst.phi_inv_true(acb_ball(z)) - acb(arb(w.re), arb(w.im)))
        err = _dist(res.center, RationalPoint(fmpq(0))) + res.radius
        log.ball(f"newton {j}", res, err <= fmpq(1, 10**15))
    bm = boundary_map(inst.phi, J, lc_witness(J))
    ext = caratheodory_extension(inst.phi, J, bm, k_bm=16)
    tol = fmpq(1, 1000)
    for j in range(16):
        t = fmpq(j, 16)
        b, _ = ext.evaluate(J.name_at(t), 10)
        _within(log, f"ext {t}", b, _circle(t), tol)
    return log.case(f"worst extension error {float(log.worst):.2e}")


def c6_length_area_audit() -> Case:
    log = _Log()
    frames = 0
    for inst in (identity_instance(), mobius_instance(QUARTER), polynomial_instance(QUARTER)):
        J = inst.curve
        bm = boundary_map(inst.phi, J, lc_witness(J))
        for j in range(4):
            t = fmpq(j, 4)
            zeta = J.name_at(t)
            arc = bm.arc(zeta)
            R = safe_radius(inst.phi, zeta)
            found = boundary_value(inst.phi, J, arc, zeta, 0).frames
            found += [fr for i in range(0, 320, 16)
                      if (fr := make_frame(inst.phi, arc, R, R / fmpq(2) ** (i + 1), 12)) is not None]
            # phi(zeta) in closed form: phi(f(e^{2 pi i t})) = e^{2 pi i t} for the polynomial instance
            at_zeta = _circle(t) if inst.name.startswith("polynomial") else _truth(inst.phi_true, _circle(t))
            for fr in found:
                gap = _dist(at_zeta, _truth(inst.phi_true, fr.w1))
                log.flag(f"{inst.name} {t} r={fr.r}", fr.recheck() and gap < 2 * fr.M)
                frames += 1
    return log.case(f"{frames} frames")


def c7_access_audit() -> Case:
    log = _Log()
    J = unit_circle()
    b = AccessArcBuilder(J, PointName.exact(RationalPoint(fmpq(1))), lc_witness(J))
    for t in range(7):
        a = audit_stage(b, t)
        log.flag(f"stage {t}", a.ok and a.cauchy is True)
    log.flag("cauchy 0..6", cauchy_bound_holds(b, 0, 6))
    return log.case("properties (1)-(4) and Cauchy bounds")


def c8_witness() -> Case:
    log = _Log()
    rng = random.Random(20)
    for J in (unit_circle(), ellipse(1, fmpq(1, 2))):
        W = lc_witness(J)
        for _ in range(64):
            k = rng.randrange(9)
            s1 = fmpq(rng.randrange(1 << 16), 1 << 16)
            log.flag(f"{J.key} k={k} s1={s1}", sample_witness_property(J, W, k, s1))
    return log.case("64 pairs per curve")


def _round_trip(inst, log: _Log, k: int) -> None:
    J = inst.curve
    bm = boundary_map(inst.phi, J, lc_witness(J))
    inv_b = invert_boundary(bm, J, k_bm=k + 6)
    back = extend_inverse(inv_b, curve_bound(J))
    fwd = caratheodory_extension(inst.phi, J, bm, k_bm=k + 6)
    for j in range(4):
        w = disk_point(fmpq(1, 2), fmpq(2 * j + 1, 8))
        wc = w.approx(k + 40)
        z = back.eval_point(w, k)
        again = fwd.eval(z, k)
        log.flag(f"{inst.name} ext(inv) {j}", _dist(again.center, wc.center) <= again.radius + wc.radius)
        zz = disk_point(fmpq(1, 3), fmpq(j, 4))
        zc = zz.approx(k + 40)
        img, _ = fwd.evaluate(zz, k)
        again = back.eval_point(img, k)
        log.flag(f"{inst.name} inv(ext) {j}", _dist(again.center, zc.center) <= again.radius + zc.radius)
    # boundary: inverse table after the boundary map
    for j in range(8):
        t = fmpq(j, 8)
        img = bm.eval(J.name_at(t), k + 4)
        with precision(120):
            ang = turns_of(acb_ball(img))
        # |d turns| <= |d w| / 2 pi on the unit circle
        again = inv_b.eval(Ball(RationalPoint(wrap01(arb_mid_q(ang))), arb_rad_q(ang) + img.radius), k)
        zc = J.name_at(t).approx(k + 40)
        log.flag(f"{inst.name} bd {t}", _dist(again.center, zc.center) <= again.radius + zc.radius)


def c9_round_trips() -> Case:
    log = _Log()
    for inst in (identity_instance(), mobius_instance(QUARTER)):
        _round_trip(inst, log, 6)
    return log.case("interior both ways plus boundary")


CASES: dict[int, Callable[[], Case]] = {
    1: c1_kernel_normalization, 2: c2_dirichlet_cos, 3: c3_identity_grid, 4: c4_mobius,
    5: c5_polynomial, 6: c6_length_area_audit, 7: c7_access_audit, 8: c8_witness, 9: c9_round_trips,
}
LIMITS = {1: 5, 2: 30, 3: 60, 4: 120, 5: 300, 7: 60, 8: 60}


def timed(n: int) -> Case:
    t = time.monotonic()
    c = CASES[n]()
    c.seconds = time.monotonic() - t
    return c


if __name__ == "__main__":
    # rerun for the determinism check: one report per line
    for n in map(int, sys.argv[1:]):
        print(n, CASES[n]().report, flush=True)
