"""Scenario-driven front end: ``carext run <scenario.json>``.

A scenario is one JSON document; every number is an exact string such as
``"1/4"`` (floats are refused).  Reports list one row per evaluated point
with exact ``p/q`` strings for the input, the enclosure centre and radius.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import select
import subprocess
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from flint import arb, fmpq

from . import __version__
from .boundary import CERTIFIED, SAMPLED, boundary_map
from .curves import JordanCurve, lc_witness
from .dirichlet import extend_to_closure, staggered_systems
from .enclose import ball_from_acb, exp2pi_i, precision
from .exact import (Ball, CapExceeded, CarextError, DomainError, MapName, Modulus, PointName,
                    RationalPoint, pow2, q, qstr)
from .instances import (mobius_map, newton_inverse_map, polynomial_curve,
                        rotation_map, trig_data, unit_circle)
from .inversion import caratheodory_extension, curve_bound, extend_inverse, invert_boundary

EXIT_OK, EXIT_PARSE, EXIT_CERT, EXIT_ORACLE, EXIT_CAP = 0, 2, 3, 4, 5
TASKS = ("boundary-map", "extension-grid", "inverse-grid", "dirichlet-demo", "convergence-table")
MAX_PRECISION = 30


class ScenarioError(CarextError):
    code = "scenario-parse"


class OracleProtocolError(CarextError):
    code = "oracle-protocol"


# -- scenarios ---------------------------------------------------------------------

def _rational(v: Any, what: str) -> fmpq:
    if isinstance(v, bool) or isinstance(v, float):
        raise ScenarioError(f"{what}: numbers must be exact strings like \"1/4\"")
    try:
        return q(v)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ScenarioError(f"{what}: cannot read {v!r} as a rational")


def _natural(v: Any, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ScenarioError(f"{what}: expected a natural number")
    try:
        n = int(v)
    except ValueError:
        raise ScenarioError(f"{what}: expected a natural number")
    if n < 0:
        raise ScenarioError(f"{what}: expected a natural number")
    return n


def _complex(v: Any, what: str) -> RationalPoint:
    if isinstance(v, dict):
        return RationalPoint(_rational(v.get("re", "0"), what), _rational(v.get("im", "0"), what))
    if isinstance(v, list) and len(v) == 2:
        return RationalPoint(_rational(v[0], what), _rational(v[1], what))
    return RationalPoint(_rational(v, what))


@dataclass
class Scenario:
    domain: dict
    task: str
    precision: int
    samples: int
    seed: int = 0
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text, parse_float=lambda s: float(s))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON: {e}")
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in ("domain", "task", "precision"):
        if key not in doc:
            raise ScenarioError(f"missing field {key!r}")
    dom = doc["domain"]
    if not isinstance(dom, dict) or "type" not in dom:
        raise ScenarioError("domain must be an object with a 'type'")
    task = doc["task"]
    if task not in TASKS:
        raise ScenarioError(f"unknown task {task!r}")
    k = _natural(doc["precision"], "precision")
    if k > MAX_PRECISION:
        raise ScenarioError(f"precision {k} above the cap {MAX_PRECISION}")
    samples = _natural(doc.get("samples", 8), "samples")
    seed = _natural(doc.get("seed", 0), "seed")
    known = {"domain", "task", "precision", "samples", "seed"}
    opts = {key: v for key, v in doc.items() if key not in known}
    sc = Scenario(dom, task, k, samples, seed, opts, doc)
    build_domain(sc.domain)  # validates parameters early
    return sc


# -- domains -----------------------------------------------------------------------

@dataclass
class Domain:
    curve: JordanCurve
    phi: MapName
    closer: Callable[[], None] = lambda: None


def build_domain(spec: dict) -> Domain:
    kind = spec["type"]
    if kind == "mobius":
        a = _complex(spec.get("a", "0"), "mobius a")
        if a.norm2() >= 1:
            raise ScenarioError("mobius parameter needs |a| < 1")
        return Domain(unit_circle(), mobius_map(a))
    if kind == "rotation":
        return Domain(unit_circle(), rotation_map(_rational(spec.get("beta", "0"), "rotation beta")))
    if kind == "polynomial":
        c = _complex(spec.get("c", "0"), "polynomial c")
        if c.norm2() > fmpq(1, 16):
            raise ScenarioError("polynomial coefficient must satisfy |c| <= 1/4")
        return Domain(polynomial_curve(c), newton_inverse_map(c))
    if kind == "external-oracle":
        return _external_domain(spec)
    raise ScenarioError(f"unknown domain type {kind!r}")


class ExternalOracle:
    """Line protocol over pipes.

    Request:  ``<kind> <re p/q> <im p/q> <radius p/q> <k>``
    Response: ``<re p/q> <im p/q> <radius p/q>``
    """

    def __init__(self, command: list[str], timeout: float):
        self.command = command
        self.timeout = timeout
        self.proc: Optional[subprocess.Popen] = None

    def _start(self) -> subprocess.Popen:
        if self.proc is None:
            try:
                self.proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                             text=True, bufsize=1)
            except OSError as e:
                raise OracleProtocolError(f"cannot start oracle: {e}")
        return self.proc

    def request(self, kind: str, b: Ball, k: int) -> Ball:
        p = self._start()
        c = b.center
        try:
            p.stdin.write(f"{kind} {qstr(c.re)} {qstr(c.im)} {qstr(b.radius)} {k}\n")
            p.stdin.flush()
        except BrokenPipeError:
            raise OracleProtocolError("oracle closed its input")
        ready, _, _ = select.select([p.stdout], [], [], self.timeout)
        if not ready:
            raise OracleProtocolError(f"oracle timed out after {self.timeout}s")
        parts = p.stdout.readline().split()
        if len(parts) != 3:
            raise OracleProtocolError(f"malformed oracle response {parts!r}")
        try:
            re, im, rad = (q(x) for x in parts)
        except (TypeError, ValueError, ZeroDivisionError):
            raise OracleProtocolError(f"malformed oracle response {parts!r}")
        if rad < 0:
            raise OracleProtocolError("oracle returned a negative radius")
        return Ball(RationalPoint(re, im), rad)

    def close(self) -> None:
        if self.proc is not None:
            self.proc.stdin.close()
            self.proc.wait(timeout=self.timeout)
            self.proc = None


def _external_domain(spec: dict) -> Domain:
    cmd = spec.get("command")
    if not isinstance(cmd, list) or not cmd or not all(isinstance(x, str) for x in cmd):
        raise ScenarioError("external-oracle needs a 'command' list of strings")
    timeout = float(_rational(spec.get("timeout", "10"), "timeout"))
    ora = ExternalOracle(cmd, timeout)
    shift = _natural(spec.get("modulus_shift", 1), "modulus_shift")
    inv = MapName(lambda b, k: ora.request("phi_inv", b, k), Modulus.shift(shift), "closed-disk",
                  key=("external-inverse", tuple(cmd)))
    phi = MapName(lambda b, k: ora.request("phi", b, k), Modulus.shift(shift), "plane-region",
                  inverse=inv, key=("external", tuple(cmd)))
    if spec.get("curve", "circle") == "circle":
        J = unit_circle()
    else:
        # curve parameter t (turns) through the same oracle
        cm = Modulus.shift(_natural(spec.get("curve_modulus_shift", 4), "curve_modulus_shift"))
        m1 = Modulus.shift(_natural(spec.get("curve_inverse_modulus_shift", 2), "curve_inverse_modulus_shift"))
        param = MapName(lambda b, k: ora.request("curve", b, k), cm, "unit-circle-params",
                        key=("external-curve", tuple(cmd)))
        J = JordanCurve(param, declared_inverse_modulus=m1, key=("external-curve", tuple(cmd)))
    return Domain(J, phi, ora.close)


# -- point layouts -----------------------------------------------------------------

def disk_point(r: fmpq, t: fmpq) -> PointName:
    """Name of r e^{2 pi i t}."""
    def approx(k: int) -> Ball:
        with precision(k + 40):
            return ball_from_acb(exp2pi_i(arb(t)) * arb(r))
    if r == 0:
        return PointName.exact(RationalPoint(fmpq(0)))
    return PointName(approx, key=("disk", r, t))


def _angles(sc: Scenario) -> list[fmpq]:
    n = sc.samples
    if sc.options.get("sampling", "uniform") == "random":
        rng = random.Random(sc.seed)
        return sorted(fmpq(rng.randrange(1 << 16), 1 << 16) for _ in range(n))
    return [fmpq(j, n) for j in range(n)] if n else []


def _radii(sc: Scenario, default) -> list[fmpq]:
    return [_rational(v, "radii") for v in sc.options.get("radii", default)]


def _disk_grid(sc: Scenario) -> list[tuple[fmpq, fmpq]]:
    """(r, t) pairs: the origin, interior rings at every angle, then the circle."""
    pts = [(fmpq(0), fmpq(0))]
    ts = _angles(sc)
    for r in _radii(sc, ["1/3", "2/3"]):
        pts += [(r, t) for t in ts]
    pts += [(fmpq(1), t) for t in ts]
    return pts


# -- reports -----------------------------------------------------------------------

@dataclass
class Row:
    input: Ball
    output: Ball
    tier: str
    ms: Optional[int]
    extra: dict = field(default_factory=dict)

    def as_dict(self, bits: int) -> dict:
        i = self.input.center
        o = self.output.rounded(bits)
        d = {"input": {"re": qstr(i.re), "im": qstr(i.im)},
             "center": {"re": qstr(o.center.re), "im": qstr(o.center.im)},
             "radius": qstr(o.radius), "tier": self.tier, "ms": self.ms}
        d.update(self.extra)
        return d


@dataclass
class Report:
    scenario: dict
    rows: list[Row]
    exit_code: int = EXIT_OK
    error: Optional[dict] = None

    def as_dict(self, bits: int) -> dict:
        d = {"scenario": self.scenario, "rows": [r.as_dict(bits) for r in self.rows],
             "version": __version__}
        if self.error is not None:
            d["error"] = self.error
        return d

    def to_json(self, bits: int) -> str:
        return json.dumps(self.as_dict(bits), indent=2, sort_keys=True) + "\n"

    def write_csv(self, path: str, bits: int) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["input_re", "input_im", "center_re", "center_im", "radius", "tier", "ms"])
            for r in self.rows:
                d = r.as_dict(bits)
                w.writerow([d["input"]["re"], d["input"]["im"], d["center"]["re"], d["center"]["im"],
                            d["radius"], d["tier"], "" if d["ms"] is None else d["ms"]])


def _report_bits(sc: Scenario) -> int:
    return sc.precision + 24


# -- tasks -------------------------------------------------------------------------

class _Clock:
    def __init__(self, max_seconds: Optional[float], timings: bool):
        self.start = time.monotonic()
        self.max_seconds = max_seconds
        self.timings = timings

    def check(self) -> None:
        if self.max_seconds is not None and time.monotonic() - self.start > self.max_seconds:
            raise CapExceeded(f"wall-clock budget of {self.max_seconds}s used up")

    def row(self, fn: Callable[[], tuple[Ball, str]], inp: Ball, extra: Optional[dict] = None) -> Row:
        self.check()
        t = time.monotonic()
        out, tier = fn()
        ms = int((time.monotonic() - t) * 1000) if self.timings else None
        return Row(inp, out, tier, ms, extra or {})


def _task_boundary_map(sc: Scenario, dom: Domain, clock: _Clock, rows: list[Row]) -> None:
    bm = boundary_map(dom.phi, dom.curve, lc_witness(dom.curve))
    k = sc.precision
    for t in _angles(sc):
        zeta = dom.curve.name_at(t)
        rows.append(clock.row(lambda: _res(bm.evaluate(zeta, k)), zeta.approx(k + 8), {"t": qstr(t)}))


def _res(r) -> tuple[Ball, str]:
    return r.ball, r.tier


def _task_extension_grid(sc: Scenario, dom: Domain, clock: _Clock, rows: list[Row]) -> None:
    k = sc.precision
    bm = boundary_map(dom.phi, dom.curve, lc_witness(dom.curve))
    ext = caratheodory_extension(dom.phi, dom.curve, bm, k_bm=k + 6)
    inv = dom.phi.inverse
    for r, t in _disk_grid(sc):
        if r == 1:
            z = dom.curve.name_at(t)
        else:
            # an interior point of D: the centre of a tight enclosure of phi^-1(w)
            w = disk_point(r, t).approx(k + 30)
            z = PointName.exact(inv.eval(w, k + 24).center)
        rows.append(clock.row(lambda: ext.evaluate(z, k), z.approx(k + 8), {"r": qstr(r), "t": qstr(t)}))


def _task_inverse_grid(sc: Scenario, dom: Domain, clock: _Clock, rows: list[Row]) -> None:
    k = sc.precision
    bm = boundary_map(dom.phi, dom.curve, lc_witness(dom.curve))
    inv_b = invert_boundary(bm, dom.curve, k_bm=k + 6)
    ext = extend_inverse(inv_b, curve_bound(dom.curve))
    for r, t in _disk_grid(sc):
        w = disk_point(r, t)
        rows.append(clock.row(lambda: (ext.eval_point(w, k), ext.tier), w.approx(k + 8),
                              {"r": qstr(r), "t": qstr(t)}))


def _task_dirichlet_demo(sc: Scenario, dom: Domain, clock: _Clock, rows: list[Row]) -> None:
    k = sc.precision
    kind = sc.options.get("data", "cos")
    systems = staggered_systems(trig_data(kind), fmpq(9, 8))
    ts = [_rational(v, "angles") for v in sc.options["angles"]] if "angles" in sc.options else _angles(sc)
    for r in _radii(sc, ["0", "1/2"]):
        for t in ts:
            z = disk_point(r, t)
            rows.append(clock.row(lambda: (extend_to_closure(systems, z, k), CERTIFIED), z.approx(k + 8),
                                  {"r": qstr(r), "t": qstr(t)}))


def _task_convergence_table(sc: Scenario, dom: Domain, clock: _Clock, rows: list[Row]) -> None:
    ks = [_natural(v, "precisions") for v in sc.options.get("precisions", [6, 8, 10])]
    if any(kk > MAX_PRECISION for kk in ks):
        raise ScenarioError(f"precisions above the cap {MAX_PRECISION}")
    t = _rational(sc.options.get("point", "0"), "point")
    bm = boundary_map(dom.phi, dom.curve, lc_witness(dom.curve))
    zeta = dom.curve.name_at(t)
    for kk in ks:
        rows.append(clock.row(lambda: _res(bm.evaluate(zeta, kk)), zeta.approx(kk + 8),
                              {"precision": kk, "t": qstr(t)}))


_TASKS = {
    "boundary-map": _task_boundary_map,
    "extension-grid": _task_extension_grid,
    "inverse-grid": _task_inverse_grid,
    "dirichlet-demo": _task_dirichlet_demo,
    "convergence-table": _task_convergence_table,
}


def _row_ok(sc: Scenario, row: Row, want: str) -> bool:
    k = row.extra.get("precision", sc.precision)
    if row.output.radius > pow2(-k):
        return False
    return want == SAMPLED or row.tier == CERTIFIED


def run_scenario(sc: Scenario, max_seconds: Optional[float] = None) -> Report:
    """Evaluate a scenario; errors end the run with a partial report and an exit code."""
    rows: list[Row] = []
    clock = _Clock(max_seconds, bool(sc.options.get("timings", False)))
    report = Report(sc.raw, rows)
    dom = None
    try:
        dom = build_domain(sc.domain)
        _TASKS[sc.task](sc, dom, clock, rows)
    except ScenarioError as e:
        report.exit_code, report.error = EXIT_PARSE, {"code": e.code, "message": str(e)}
    except OracleProtocolError as e:
        report.exit_code, report.error = EXIT_ORACLE, {"code": e.code, "message": str(e)}
    except CapExceeded as e:
        report.exit_code, report.error = EXIT_CAP, {"code": e.code, "message": str(e)}
    except CarextError as e:
        report.exit_code, report.error = EXIT_CERT, {"code": e.code, "message": str(e)}
    finally:
        if dom is not None:
            try:
                dom.closer()
            except (OSError, subprocess.TimeoutExpired):
                pass
    if report.exit_code == EXIT_OK:
        want = sc.options.get("tier", SAMPLED)
        if not all(_row_ok(sc, r, want) for r in rows):
            report.exit_code = EXIT_CERT
            report.error = {"code": "certification-failed",
                            "message": f"some rows miss radius 2^-{sc.precision} or tier {want}"}
    return report


# -- entry point -------------------------------------------------------------------

def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="carext")
    sub = ap.add_subparsers(dest="cmd", required=True)
    rp = sub.add_parser("run", help="evaluate a scenario file")
    rp.add_argument("scenario")
    rp.add_argument("--out", help="write the JSON report here (default: stdout)")
    rp.add_argument("--csv", help="also write the rows as CSV")
    rp.add_argument("--max-seconds", type=float, default=None)
    args = ap.parse_args(argv)

    try:
        with open(args.scenario) as fh:
            sc = parse_scenario(fh.read())
    except (OSError, ScenarioError, DomainError) as e:
        err = {"code": getattr(e, "code", "scenario-parse"), "message": str(e)}
        print(json.dumps({"error": err, "version": __version__}, sort_keys=True), file=sys.stderr)
        return EXIT_PARSE
    report = run_scenario(sc, args.max_seconds)
    bits = _report_bits(sc)
    text = report.to_json(bits)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        report.write_csv(args.csv, bits)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
