"""Stage-by-stage re-verification of an access arc.

    python3 scripts/access_audit.py --curve circle --point 0 --stages 7
    python3 scripts/access_audit.py --curve ellipse --point 1/8 --stages 5
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from flint import fmpq

from carext.access import AccessArcBuilder, audit_stage, cauchy_bound_holds
from carext.curves import lc_witness
from carext.exact import q
from carext.instances import ellipse, unit_circle


@dataclass
class Config:
    curve: str = "circle"
    point: str = "0"      # curve parameter, turns
    stages: int = 7


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--curve", choices=["circle", "ellipse"], default=Config.curve)
    ap.add_argument("--point", default=Config.point)
    ap.add_argument("--stages", type=int, default=Config.stages)
    cfg = Config(**vars(ap.parse_args()))
    J = unit_circle() if cfg.curve == "circle" else ellipse(1, fmpq(1, 2))
    b = AccessArcBuilder(J, J.name_at(q(cfg.point)), lc_witness(J))
    cols = ("interior", "extends", "near_zeta", "local", "simple", "cauchy")
    print(f"{'t':>2} {'vertices':>8} " + " ".join(f"{c:>9}" for c in cols))
    for t in range(cfg.stages):
        a = audit_stage(b, t)
        n = len(b.stage(t).vertices)
        print(f"{t:>2} {n:>8} " + " ".join(f"{str(getattr(a, c)):>9}" for c in cols))
    print(f"cumulative Cauchy bound 0..{cfg.stages - 1}:", cauchy_bound_holds(b, 0, cfg.stages - 1))


if __name__ == "__main__":
    main()
