"""Price adjustment in time and its Liapunov function.

Each price relaxes toward the producer's current best response,

    dp^j/dt = k^j (BR^j(p^-j) - p^j),

integrated with forward Euler. The Liapunov function recorded along the path
is the speed-weighted squared gap to those moving reaction targets,

    Z^2 = k^U (BR^U - p^U)^2 + k^L (BR^L - p^L)^2,

which vanishes only at the Nash point. The squared distance to the fixed Nash
prices is recorded as well (``Z2_nash``); it is *not* monotone in general when
k^U and k^L differ a lot.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .demand import DemandSystem, SpecificDemand
from .equilibrium import Equilibrium, best_response, closed_form_equilibrium, solve_newton
from .errors import InvalidInput, ModelError


@dataclass(frozen=True)
class AdjustmentConfig:
    kU: float = 1.0
    kL: float = 1.0
    dt: float = 0.01
    horizon: float = 500.0
    init: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        for name in ("kU", "kL", "dt", "horizon"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise InvalidInput(f"{name} must be a positive finite number")


def liapunov_Z2(config: AdjustmentConfig, target, prices) -> float:
    """k^U (t^U - p^U)^2 + k^L (t^L - p^L)^2 for a target price pair.

    ``target`` is either a price pair or an :class:`Equilibrium`.
    """
    if isinstance(target, Equilibrium):
        target = target.prices
    tU, tL = target
    pU, pL = prices
    return config.kU * (tU - pU) ** 2 + config.kL * (tL - pL) ** 2


@dataclass
class Trajectory:
    t: np.ndarray
    pU: np.ndarray
    pL: np.ndarray
    Z2: np.ndarray
    Z2_nash: np.ndarray
    equilibrium: Tuple[float, float]
    converged: bool
    final_distance: float
    diagnostic: Optional[str] = None

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> Tuple[float, float]:
        return float(self.pU[-1]), float(self.pL[-1])

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "pU", "pL", "Z2"])
        for row in zip(self.t, self.pU, self.pL, self.Z2):
            w.writerow([f"{v:.12g}" for v in row])


def _nash(system):
    if isinstance(system, SpecificDemand):
        return closed_form_equilibrium(system.prims, system.funcs)
    return solve_newton(system)


def simulate(system: DemandSystem, config: AdjustmentConfig, equilibrium: Optional[Equilibrium] = None,
             tol: float = 1e-8) -> Trajectory:
    """Forward-Euler run from ``config.init`` until the distance to the Nash
    point drops below ``tol`` or the horizon is reached."""
    eq = equilibrium or _nash(system)
    eU, eL = eq.prices
    kU, kL, dt = config.kU, config.kL, config.dt
    if config.init is None:
        cU, cL = system.costs()
        pU, pL = cU + 0.1, cL + 0.1
    else:
        pU, pL = (float(v) for v in config.init)
    n_steps = int(math.ceil(config.horizon / dt - 1e-9))

    ts, us, ls, zs, zn = [], [], [], [], []
    converged = False
    diagnostic = None
    t = 0.0
    for i in range(n_steps + 1):
        try:
            bU = best_response(system, 0, pL)
            bL = best_response(system, 1, pU)
        except ModelError as exc:
            diagnostic = f"best response failed at t={t:.6g}: {exc}"
            break
        ts.append(t)
        us.append(pU)
        ls.append(pL)
        zs.append(kU * (bU - pU) ** 2 + kL * (bL - pL) ** 2)
        zn.append(kU * (eU - pU) ** 2 + kL * (eL - pL) ** 2)
        if math.hypot(pU - eU, pL - eL) < tol:
            converged = True
            break
        if i == n_steps:
            break
        pU, pL = pU + dt * kU * (bU - pU), pL + dt * kL * (bL - pL)
        if not (math.isfinite(pU) and math.isfinite(pL)):
            diagnostic = f"prices diverged at t={t:.6g}"
            break
        t = (i + 1) * dt

    if not ts:
        raise ModelError(diagnostic or "empty trajectory")
    final_distance = math.hypot(us[-1] - eU, ls[-1] - eL)
    return Trajectory(np.array(ts), np.array(us), np.array(ls), np.array(zs), np.array(zn),
                      (eU, eL), converged, final_distance, diagnostic)


class DescentVerdict(NamedTuple):
    ok: bool
    first_violation: Optional[int]


def check_descent(trajectory, tol: float = 1e-12) -> DescentVerdict:
    """Z^2 must never increase, and must strictly fall while above ``tol``.

    Accepts a :class:`Trajectory` or a bare sequence of Z^2 values. The index
    returned is the first sample that breaks the rule.
    """
    z: Sequence[float] = trajectory.Z2 if isinstance(trajectory, Trajectory) else np.asarray(trajectory, float)
    if len(z) == 0:
        raise InvalidInput("trajectory is empty")
    for i in range(1, len(z)):
        prev, cur = z[i - 1], z[i]
        if cur > prev or (prev > tol and cur >= prev):
            return DescentVerdict(False, i)
    return DescentVerdict(True, None)
