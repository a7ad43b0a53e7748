"""Bertrand-Nash equilibria, Condition-4 stability quantities, and plot data
for reaction and iso-profit curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .demand import DemandSystem, SpecificDemand, producer_index
from .errors import InvalidInput, NoBestResponse, NonConvergence, SingularJacobian
from .model import ConditionReport, MarketPrimitives, PolicyFunctions, eval_alpha, success_value, thresholds


@dataclass(frozen=True)
class Equilibrium:
    p_UE: float
    p_LE: float
    X_UE: float
    X_LE: float
    pi_UE: float
    pi_LE: float
    conditions: Optional[ConditionReport]
    method: str
    residual: float
    iterations: int = 0

    @property
    def prices(self) -> Tuple[float, float]:
        return self.p_UE, self.p_LE

    @property
    def valid(self) -> bool:
        """False when the equilibrium violates Conditions 1-3 (warning only)."""
        return self.conditions is None or self.conditions.all_hold


def finalize(system: DemandSystem, pU: float, pL: float, method: str, iterations: int = 0) -> Equilibrium:
    pU, pL = float(pU), float(pL)
    XU, XL = (float(x) for x in system.demand(pU, pL))
    piU, piL = (float(x) for x in system.profits(pU, pL))
    residual = float(np.max(np.abs(system.foc(pU, pL))))
    conditions = thresholds(system.prims, system.funcs, (pU, pL)) if isinstance(system, SpecificDemand) else None
    return Equilibrium(pU, pL, XU, XL, piU, piL, conditions, method, residual, iterations)


def closed_form_prices(prims: MarketPrimitives, funcs: PolicyFunctions) -> Tuple[float, float]:
    alpha = eval_alpha(funcs, prims.R, prims.G)[0]
    K = success_value(prims, funcs) + prims.c_bar_L + alpha
    return K / 3.0 + prims.c_bar, 2.0 * K / 3.0 + prims.c_bar


def closed_form_equilibrium(prims: MarketPrimitives, funcs: PolicyFunctions) -> Equilibrium:
    pU, pL = closed_form_prices(prims, funcs)
    return finalize(SpecificDemand(prims, funcs), pU, pL, "closed-form")


def _numeric_best_response(system: DemandSystem, j: int, rival: float, tol: float) -> float:
    """Safeguarded Newton on the own-price FOC, bracketed from the unit cost up."""
    c = system.costs()[j]

    def g(p):
        return system.own_foc(j, p, rival)[0]

    lo = c
    g_lo = g(lo)
    if g_lo <= 0:
        raise NoBestResponse(f"FOC of producer {'UL'[j]} is non-positive at unit cost", (lo, lo))
    width = max(1.0, abs(c))
    hi = lo + width
    while g(hi) > 0:
        width *= 2.0
        hi = lo + width
        if width > 1e8:
            raise NoBestResponse(f"no sign change of the FOC of producer {'UL'[j]}", (lo, hi))

    p = 0.5 * (lo + hi)
    for _ in range(100):
        gp, dg = system.own_foc(j, p, rival)
        if gp == 0:
            return p
        if gp > 0:
            lo = p
        else:
            hi = p
        step_ok = dg < 0
        if step_ok:
            p_new = p - gp / dg
            step_ok = lo <= p_new <= hi
        if not step_ok:
            p_new = 0.5 * (lo + hi)
        if abs(p_new - p) <= tol * max(1.0, abs(p)):
            return p_new
        p = p_new
    # Newton stalled: finish by bisection-style bracketing.
    return brentq(g, lo, hi, xtol=tol * 1e-2, rtol=4 * np.finfo(float).eps)


def best_response(system: DemandSystem, producer, rival_price: float, method: str = "auto", tol: float = 1e-10) -> float:
    """Profit-maximizing own price against ``rival_price``.

    ``method="auto"`` uses the system's closed form when it has one;
    ``"numeric"`` forces the bracketed Newton solve of the FOC.
    """
    j = producer_index(producer) if isinstance(producer, str) else producer
    if not math.isfinite(rival_price):
        raise InvalidInput("rival price must be finite")
    if method == "auto":
        p = system.closed_form_best_response(j, rival_price)
        if p is not None:
            return p
    elif method != "numeric":
        raise InvalidInput(f"unknown best-response method {method!r}")
    return _numeric_best_response(system, j, rival_price, tol)


def _default_init(system):
    cU, cL = system.costs()
    return cU + 0.1, cL + 0.1


def solve_iterative(system: DemandSystem, init=None, damping: float = 1.0, tol: float = 1e-10,
                    max_iter: int = 10_000, br_method: str = "auto") -> Equilibrium:
    """Damped simultaneous best-response iteration p <- (1-l) p + l BR(p)."""
    if not 0 < damping <= 1:
        raise InvalidInput("damping must lie in (0, 1]")
    if tol <= 0:
        raise InvalidInput("tol must be > 0")
    pU, pL = _default_init(system) if init is None else init
    if not (math.isfinite(pU) and math.isfinite(pL)):
        raise InvalidInput("initial prices must be finite")
    for it in range(1, max_iter + 1):
        bU = best_response(system, 0, pL, br_method)
        bL = best_response(system, 1, pU, br_method)
        nU = (1 - damping) * pU + damping * bU
        nL = (1 - damping) * pL + damping * bL
        change = max(abs(nU - pU), abs(nL - pL))
        pU, pL = nU, nL
        if change < tol:
            return finalize(system, pU, pL, "iterative", it)
    raise NonConvergence(f"best-response iteration did not converge in {max_iter} steps",
                         last=(pU, pL), iterations=max_iter)


def foc_jacobian(system: DemandSystem, pU: float, pL: float) -> np.ndarray:
    """Jacobian of the stacked FOCs: [[b + dXU/dpU, a], [c, d + dXL/dpL]]."""
    q = stability_quantities(system, (pU, pL))
    pt = system.evaluate(pU, pL)
    return np.array([[q.b + pt.dX_dp[0, 0], q.a], [q.c, q.d + pt.dX_dp[1, 1]]])


def solve_newton(system: DemandSystem, init=None, tol: float = 1e-12, max_iter: int = 100) -> Equilibrium:
    p = np.array(_default_init(system) if init is None else init, dtype=float)
    for it in range(max_iter + 1):
        F = system.foc(*p)
        if np.max(np.abs(F)) <= tol:
            return finalize(system, float(p[0]), float(p[1]), "newton", it)
        if it == max_iter:
            break
        J = foc_jacobian(system, *p)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if det == 0 or not math.isfinite(det):
            raise SingularJacobian(f"FOC Jacobian singular at prices {tuple(p)}")
        step = np.array([F[0] * J[1, 1] - F[1] * J[0, 1], J[0, 0] * F[1] - J[1, 0] * F[0]]) / det
        p = p - step
        if not np.all(np.isfinite(p)):
            raise NonConvergence("Newton iterates diverged", last=tuple(p), iterations=it + 1)
    raise NonConvergence(f"Newton did not reach tolerance {tol}", last=tuple(p), iterations=max_iter)


@dataclass(frozen=True)
class StabilityQuantities:
    a: float
    b: float
    c: float
    d: float
    detJ: float
    cond4_strict: bool
    cond4_weak: bool
    slope_U: Optional[float]
    slope_L: Optional[float]

    @property
    def undefined_slope(self) -> bool:
        return self.slope_U is None or self.slope_L is None


def _le(x, y, rel=1e-12):
    return x <= y or math.isclose(x, y, rel_tol=rel)


def stability_quantities(system: DemandSystem, prices) -> StabilityQuantities:
    pU, pL = prices
    pt = system.evaluate(pU, pL)
    mU, mL = pt.margins
    X1, X2 = pt.dX_dp, pt.d2X_dp2
    a = float(X1[0, 1] + X2[0, 0, 1] * mU)
    b = float(X1[0, 0] + X2[0, 0, 0] * mU)
    c = float(X1[1, 0] + X2[1, 1, 0] * mL)
    d = float(X1[1, 1] + X2[1, 1, 1] * mL)
    detJ = (b + X1[0, 0]) * (d + X1[1, 1]) - a * c
    detJ = float(detJ)
    weak = 0 < a and _le(a, -b) and 0 < c and _le(c, -d)
    strict = (0 < a < -b and 0 < c < -d
              and not math.isclose(a, -b, rel_tol=1e-12) and not math.isclose(c, -d, rel_tol=1e-12))
    den_U = b + X1[0, 0]
    slope_U = -a / den_U if den_U != 0 else None
    slope_L = -(d + X1[1, 1]) / c if c != 0 else None
    return StabilityQuantities(a, b, c, d, detJ, strict, weak, slope_U, slope_L)


def reaction_curve_points(system: DemandSystem, producer, rival_grid) -> List[Tuple[float, float]]:
    return [(float(r), best_response(system, producer, float(r))) for r in rival_grid]


@dataclass(frozen=True)
class IsoProfitPoint:
    x: float
    y: float
    slope: float
    curvature: float
    curvature_closed_form: Optional[float] = None


@dataclass
class IsoProfitCurve:
    """Iso-profit contour of one producer.

    For producer U, ``x`` is p^U and ``y`` is p^L; for producer L the roles
    swap, so ``y`` is always the rival price that keeps profit at ``level``.
    """

    producer: str
    level: float
    points: List[IsoProfitPoint] = field(default_factory=list)
    skipped: List[float] = field(default_factory=list)


def iso_profit_slope_curvature(system: DemandSystem, producer: int, own: float, rival: float) -> Tuple[float, float]:
    """Slope d(rival)/d(own) of the iso-profit curve and its curvature, using
    the general expressions that hold for any demand system."""
    j, k = producer, 1 - producer
    prices = (own, rival) if j == 0 else (rival, own)
    pt = system.evaluate(*prices)
    q = stability_quantities(system, prices)
    m = own - pt.costs[j]
    Xj = pt.X[j]
    own_d = pt.dX_dp[j, j]
    cross = pt.dX_dp[j, k]
    cross2 = pt.d2X_dp2[j, k, k]
    F = Xj + m * own_d
    slope = -F / (m * cross)
    comp_own, comp_cross = (q.b, q.a) if j == 0 else (q.d, q.c)
    num = -(own_d + comp_own) * m * cross ** 2 + 2.0 * comp_cross * cross * F - F ** 2 * cross2
    return float(slope), float(num / (m ** 2 * cross ** 3))


def _profit(system, j, own, rival):
    prices = (own, rival) if j == 0 else (rival, own)
    return system.profits(*prices)[j]


def iso_profit_points(system: DemandSystem, producer, level: float, price_grid) -> IsoProfitCurve:
    """Points of the contour {pi^j = level} parametrized by the own price.

    For each own price on the grid the rival price is found by root-finding
    (profit increases monotonically in the rival price when the margin is
    positive). Grid points where the level cannot be reached are skipped.
    """
    j = producer_index(producer) if isinstance(producer, str) else producer
    curve = IsoProfitCurve("UL"[j], level)
    cost = system.costs()[j]
    S = success_value(system.prims, system.funcs) if isinstance(system, SpecificDemand) else None
    for own in price_grid:
        own = float(own)
        if own <= cost:
            curve.skipped.append(own)
            continue

        def f(r):
            return _profit(system, j, own, r) - level

        lo, hi = own - 1.0, own + 1.0
        n = 0
        while f(lo) > 0 and n < 60:
            lo -= 2.0 ** n
            n += 1
        n = 0
        while f(hi) < 0 and n < 60:
            hi += 2.0 ** n
            n += 1
        if f(lo) > 0 or f(hi) < 0:
            curve.skipped.append(own)
            continue
        rival = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        slope, curv = iso_profit_slope_curvature(system, j, own, rival)
        closed = 2.0 * S * level / (own - cost) ** 3 if S is not None else None
        curve.points.append(IsoProfitPoint(own, rival, slope, curv, closed))
    return curve
