"""Optimal guidance G_E along a location-inefficiency sweep.

Prints c_bar_L, G_E, W_E, the implicit-function slope and the
re-optimization slope for each grid point of the baseline scenario.
"""

import argparse
import csv
import sys

import numpy as np

from bertrand_lab.policy import dGE_dcbarL, optimize_guidance
from bertrand_lab.scenario import baseline, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="scenario file (default: built-in baseline)")
    ap.add_argument("--lo", type=float, default=0.0)
    ap.add_argument("--hi", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=41)
    args = ap.parse_args()
    sc = load_scenario(args.scenario) if args.scenario else baseline()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["c_bar_L", "G_E", "W_E", "boundary", "slope_implicit", "slope_reopt"])
    prev = None
    monotone = True
    for c in np.linspace(args.lo, args.hi, args.points):
        p = sc.prims.replace(c_bar_L=float(c))
        opt = optimize_guidance(p, sc.funcs)
        s = dGE_dcbarL(p, sc.funcs) if opt.interior else None
        w.writerow([f"{c:.6g}", f"{opt.G_E:.10g}", f"{opt.W_E:.10g}", opt.boundary or "",
                    "" if s is None else f"{s.value:.6g}", "" if s is None else f"{s.fd_value:.6g}"])
        if prev is not None and opt.G_E >= prev:
            monotone = False
        prev = opt.G_E
    print(f"# G_E strictly decreasing: {monotone}", file=sys.stderr)


if __name__ == "__main__":
    main()
