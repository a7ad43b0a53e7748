"""Endogenous-R model: the c_bar_L derivative triple across a_R.

The triple (dp^UE, dp^LE, dR^E) changes sign where 2 dalpha/dR = P(G).
Interior equilibria exist only on the side where 2 dalpha/dR > P(G).
"""

import argparse

import numpy as np

from bertrand_lab.errors import ModelError
from bertrand_lab.extended import sign_flip_sweep, solve_extended
from bertrand_lab.scenario import extended_baseline, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="scenario file (default: built-in extended scenario)")
    ap.add_argument("--points", type=int, default=21)
    args = ap.parse_args()
    sc = load_scenario(args.scenario) if args.scenario else extended_baseline()
    p, f = sc.prims, sc.funcs
    crit = sign_flip_sweep(p, f, [f.a_R])["critical_a_R"]
    grid = np.linspace(0.25 * crit, 2.5 * crit, args.points)
    sw = sign_flip_sweep(p, f, grid)

    print(f"critical a_R = {crit:.6g}")
    print(f"{'a_R':>10} {'dpU':>10} {'dpL':>10} {'dR':>10}  interior R^E")
    for a, t in zip(sw["a_R"], sw["triples"]):
        try:
            r = f"{solve_extended(p, f.replace(a_R=float(a))).R_E:.6g}"
        except ModelError as exc:
            r = f"none ({type(exc).__name__})"
        print(f"{a:>10.4g} {t[0]:>10.4g} {t[1]:>10.4g} {t[2]:>10.4g}  {r}")
    print("sign flips between:", ", ".join(f"({lo:.4g}, {hi:.4g})" for lo, hi in sw["flips"]))


if __name__ == "__main__":
    main()
