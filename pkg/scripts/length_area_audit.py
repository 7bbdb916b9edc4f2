"""Re-check length-area frames and compare 2M with the true displacement.

For every accepted frame: the strip inequality and the frame geometry are
re-verified with directed rounding, and |phi(zeta0) - phi(w1)| is computed
from the closed-form map.

    python3 scripts/length_area_audit.py --points 8 --sweep 400 --step 8
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from flint import acb, arb, fmpq

from carext.boundary import boundary_map, make_frame, safe_radius
from carext.curves import lc_witness
from carext.enclose import ball_from_acb, exp2pi_i, precision
from carext.exact import RationalPoint, sqrt_upper
from carext.instances import identity_instance, mobius_instance, polynomial_instance


@dataclass
class Config:
    points: int = 4       # curve parameters j/points per instance
    sweep: int = 320      # inner radii R / 2^(j+1), j < sweep
    step: int = 16


def _image(fn, z: RationalPoint) -> RationalPoint:
    with precision(160):
        return ball_from_acb(fn(acb(arb(z.re), arb(z.im)))).center


def audit(cfg: Config) -> list[tuple[str, int, int, float]]:
    quarter = RationalPoint(fmpq(1, 4))
    out = []
    for inst in (identity_instance(), mobius_instance(quarter), polynomial_instance(quarter)):
        J = inst.curve
        bm = boundary_map(inst.phi, J, lc_witness(J))
        total = passed = 0
        worst = 0.0
        for j in range(cfg.points):
            t = fmpq(j, cfg.points)
            zeta = J.name_at(t)
            arc = bm.arc(zeta)
            R = safe_radius(inst.phi, zeta)
            with precision(160):
                e = exp2pi_i(arb(t))
                at_zeta = ball_from_acb(e if inst.name.startswith("polynomial") else inst.phi_true(acb(e))).center
            for i in range(0, cfg.sweep, cfg.step):
                fr = make_frame(inst.phi, arc, R, R / fmpq(2) ** (i + 1), 12)
                if fr is None:
                    continue
                gap = sqrt_upper((at_zeta - _image(inst.phi_true, fr.w1)).norm2())
                total += 1
                passed += fr.recheck() and gap < 2 * fr.M
                worst = max(worst, float(gap / (2 * fr.M)))
        out.append((inst.name, total, passed, worst))
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--points", type=int, default=Config.points)
    ap.add_argument("--sweep", type=int, default=Config.sweep)
    ap.add_argument("--step", type=int, default=Config.step)
    cfg = Config(**vars(ap.parse_args()))
    print(f"{'instance':<22} {'frames':>6} {'passed':>6} {'max gap/2M':>11}")
    for name, total, passed, worst in audit(cfg):
        print(f"{name:<22} {total:>6} {passed:>6} {worst:11.3e}")


if __name__ == "__main__":
    main()
