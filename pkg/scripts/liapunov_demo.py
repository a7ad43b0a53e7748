"""Price adjustment from random starts for every (kU, kL) pair.

For each speed pair, reports how many runs had a strictly decreasing
reaction-gap Z^2 and whether the distance to the fixed Nash point was
monotone as well (it need not be when kU != kL).
"""

import argparse

import numpy as np

from bertrand_lab.dynamics import AdjustmentConfig, check_descent, simulate
from bertrand_lab.equilibrium import solve_newton
from bertrand_lab.scenario import baseline, linear_baseline, load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", help="scenario file (default: built-in baseline)")
    ap.add_argument("--linear", action="store_true", help="use the built-in linear-demand scenario")
    ap.add_argument("--starts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sc = load_scenario(args.scenario) if args.scenario else (linear_baseline() if args.linear else baseline())
    sys_ = sc.system()
    eq = solve_newton(sys_)
    rng = np.random.default_rng(args.seed)

    print(f"Nash point ({eq.p_UE:.6f}, {eq.p_LE:.6f})")
    print(f"{'kU':>6} {'kL':>6} {'Z2 desc':>8} {'nash desc':>9} {'max steps':>9} {'worst Z2':>10}")
    for kU in (0.1, 1.0, 10.0):
        for kL in (0.1, 1.0, 10.0):
            ok = nash_ok = 0
            steps, worst = 0, 0.0
            for _ in range(args.starts):
                init = tuple(v * rng.uniform(0.5, 1.5) for v in eq.prices)
                cfg = AdjustmentConfig(kU, kL, dt=0.2 / max(kU, kL), horizon=5000.0, init=init)
                tr = simulate(sys_, cfg, eq, tol=1e-7)
                ok += check_descent(tr).ok and tr.Z2[-1] < 1e-12
                nash_ok += check_descent(tr.Z2_nash).ok
                steps = max(steps, len(tr))
                worst = max(worst, float(tr.Z2[-1]))
            print(f"{kU:>6g} {kL:>6g} {ok:>5}/{args.starts:<2} {nash_ok:>6}/{args.starts:<2} {steps:>9} {worst:>10.2e}")


if __name__ == "__main__":
    main()
