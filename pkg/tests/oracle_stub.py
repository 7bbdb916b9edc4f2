"""Identity map on the unit disk over the external-oracle line protocol.

Usage: oracle_stub.py [ok|silent|garbage]
"""
import sys

mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
for line in sys.stdin:
    kind, re, im, rad, _k = line.split()
    if mode == "silent":
        continue
    if mode == "garbage":
        print("not a ball", flush=True)
        continue
    if kind not in ("phi", "phi_inv"):
        print("0 0 -1", flush=True)
        continue
    print(re, im, rad, flush=True)
