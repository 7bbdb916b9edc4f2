"""Boundary-map radii and true errors as the requested precision grows.

    python3 scripts/convergence_table.py --instance polynomial --point 1/8 --precisions 4 6 8 10 12
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from flint import acb, arb, fmpq

from carext.boundary import boundary_map
from carext.curves import lc_witness
from carext.enclose import ball_from_acb, exp2pi_i, precision
from carext.exact import RationalPoint, q, sqrt_upper
from carext.instances import identity_instance, mobius_instance, polynomial_instance


@dataclass
class Config:
    instance: str = "polynomial"
    param: str = "1/4"          # Mobius a or polynomial c (real)
    point: str = "1/8"          # curve parameter, turns
    precisions: list[int] = field(default_factory=lambda: [4, 6, 8, 10, 12])


def build(cfg: Config):
    p = RationalPoint(q(cfg.param))
    return {"identity": identity_instance, "mobius": lambda: mobius_instance(p),
            "polynomial": lambda: polynomial_instance(p)}[cfg.instance]()


def truth(inst, t: fmpq) -> RationalPoint:
    with precision(160):
        e = exp2pi_i(arb(t))
        # phi(J(t)) is e^{2 pi i t} on the polynomial curve, phi(e^{2 pi i t}) on the circle
        w = e if inst.name.startswith("polynomial") else inst.phi_true(acb(e))
        return ball_from_acb(w).center


def run(cfg: Config) -> list[tuple[int, float, float, str, float]]:
    inst = build(cfg)
    J = inst.curve
    bm = boundary_map(inst.phi, J, lc_witness(J))
    t = q(cfg.point)
    z = J.name_at(t)
    ref = truth(inst, t)
    rows = []
    for k in cfg.precisions:
        t0 = time.monotonic()
        r = bm.evaluate(z, k)
        err = sqrt_upper((r.ball.center - ref).norm2())
        rows.append((k, float(r.ball.radius), float(err), r.tier, time.monotonic() - t0))
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--instance", choices=["identity", "mobius", "polynomial"], default=Config.instance)
    ap.add_argument("--param", default=Config.param)
    ap.add_argument("--point", default=Config.point)
    ap.add_argument("--precisions", type=int, nargs="+", default=Config().precisions)
    cfg = Config(**vars(ap.parse_args()))
    print(f"{'k':>3} {'radius':>10} {'error':>10} {'tier':>9} {'s':>7}")
    for k, rad, err, tier, s in run(cfg):
        print(f"{k:>3} {rad:10.3e} {err:10.3e} {tier:>9} {s:7.2f}")


if __name__ == "__main__":
    main()
