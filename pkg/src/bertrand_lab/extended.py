"""Extended second stage in which producer L also chooses its added value R.

The three conditions are U's reaction function, L's price reaction function,
and L's optimality in R, which with the price FOC reduces to
(p^L - p^U) / R = dalpha/dR. With alpha linear in R the system solves in
closed form:

    R^E  = cL_bar / (2 dalpha/dR - P(G))
    p^LE = c_bar + 2 (dalpha/dR) R^E
    p^UE = (p^LE + c_bar) / 2
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import NoInteriorSolution, SingularJacobian
from .model import (ConditionReport, MarketPrimitives, PolicyFunctions, alpha_cross_RG, eval_alpha, eval_prob,
                    thresholds)


@dataclass(frozen=True)
class ExtendedEquilibrium:
    p_UE: float
    p_LE: float
    R_E: float
    X_UE: float
    X_LE: float
    pi_UE: float
    pi_LE: float
    detJ3: float
    soc_value: float
    soc_ok: bool
    conditions: ConditionReport
    residuals: Tuple[float, float, float]


def _slopes(prims, funcs):
    P, dP = eval_prob(funcs, prims.G)
    # dalpha/dR does not depend on R for the linear-in-R family
    a = eval_alpha(funcs, 1.0, prims.G)[1]
    return P, dP, a


def extended_residuals(prims: MarketPrimitives, funcs: PolicyFunctions, pU: float, pL: float, R: float):
    """Residuals of U's reaction function, L's price reaction function and
    the reduced R condition, each written as ``lhs - rhs``."""
    P = eval_prob(funcs, prims.G)[0]
    alpha, a, _ = eval_alpha(funcs, R, prims.G)
    cL = prims.c_bar + prims.c_bar_L + alpha
    return (pU - 0.5 * (pL + prims.c_bar),
            pL - 0.5 * (P * R + pU + cL),
            (pL - pU) / R - a)


def profit_L_R_curvature(prims, funcs, pU, pL, R) -> float:
    """d^2 pi^L / dR^2 at fixed prices (alpha linear in R)."""
    P = eval_prob(funcs, prims.G)[0]
    alpha, a, _ = eval_alpha(funcs, R, prims.G)
    margin = pL - (prims.c_bar + prims.c_bar_L + alpha)
    gap = pL - pU
    return -2.0 * gap / (P * R * R) * (a + margin / R)


def solve_extended(prims: MarketPrimitives, funcs: PolicyFunctions) -> ExtendedEquilibrium:
    P, _, a = _slopes(prims, funcs)
    denom = 2.0 * a - P
    if math.isclose(denom, 0.0, abs_tol=1e-14):
        raise SingularJacobian("2 dalpha/dR = P(G): the extended system is singular")
    R = prims.c_bar_L / denom
    if not R > 0:
        if prims.c_bar_L == 0:
            why = "c_bar_L = 0 puts R^E on the boundary R = 0"
        else:
            why = f"2 dalpha/dR = {2 * a:.6g} < P(G) = {P:.6g} makes R^E negative"
        raise NoInteriorSolution(why)
    pL = prims.c_bar + 2.0 * a * R
    pU = 0.5 * (pL + prims.c_bar)
    at = prims.replace(R=R)
    S = P * R
    XU = (pL - pU) / S
    alpha = eval_alpha(funcs, R, prims.G)[0]
    cL = prims.c_bar + prims.c_bar_L + alpha
    soc = profit_L_R_curvature(prims, funcs, pU, pL, R)
    res = extended_residuals(prims, funcs, pU, pL, R)
    return ExtendedEquilibrium(
        p_UE=pU, p_LE=pL, R_E=R, X_UE=XU, X_LE=1.0 - XU,
        pi_UE=(pU - prims.c_bar) * XU, pi_LE=(pL - cL) * (1.0 - XU),
        detJ3=P - 2.0 * a, soc_value=soc, soc_ok=soc < 0,
        conditions=thresholds(at, funcs, (pU, pL)),
        residuals=tuple(abs(r) for r in res),
    )


def extended_matrix(prims: MarketPrimitives, funcs: PolicyFunctions) -> np.ndarray:
    """Coefficient matrix of the totally differentiated system in
    (dp^U, dp^L, dR). Depends only on P(G) and dalpha/dR."""
    P, _, a = _slopes(prims, funcs)
    return np.array([[-2.0, 1.0, 0.0],
                     [1.0, -2.0, P + a],
                     [-1.0, 1.0, -a]])


@dataclass(frozen=True)
class ExtendedJacobian:
    matrix: np.ndarray
    det_raw: float
    detJ3: float
    factor: Optional[float]


def extended_jacobian(prims: MarketPrimitives, funcs: PolicyFunctions, eq: Optional[ExtendedEquilibrium] = None) -> ExtendedJacobian:
    """Raw 3x3 determinant next to the reduced form P(G) - 2 dalpha/dR.

    ``factor`` is det_raw / detJ3 (None when the reduced form is zero).
    """
    M = extended_matrix(prims, funcs)
    P, _, a = _slopes(prims, funcs)
    det_raw = float(np.linalg.det(M))
    detJ3 = P - 2.0 * a
    factor = det_raw / detJ3 if detJ3 != 0 else None
    return ExtendedJacobian(M, det_raw, detJ3, factor)


def cramer3(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    det = np.linalg.det(M)
    if det == 0:
        raise SingularJacobian("singular 3x3 system")
    out = np.empty(3)
    for i in range(3):
        Mi = M.copy()
        Mi[:, i] = rhs
        out[i] = np.linalg.det(Mi) / det
    return out


def extended_derivative_triple(prims: MarketPrimitives, funcs: PolicyFunctions, parameter: str = "c_bar_L") -> np.ndarray:
    """(dp^UE, dp^LE, dR^E) per unit change of ``c_bar_L`` or ``G``.

    Only the coefficient matrix and right-hand side enter, so this is defined
    even where no interior equilibrium exists (used for sign-case sweeps).
    """
    M = extended_matrix(prims, funcs)
    if parameter in ("c_bar_L", "cL"):
        rhs = np.array([0.0, -1.0, 0.0])
    elif parameter == "G":
        P, dP, a = _slopes(prims, funcs)
        R = solve_extended(prims, funcs).R_E
        a_G = eval_alpha(funcs, R, prims.G)[2]
        rhs = np.array([0.0, -(dP * R + a_G), alpha_cross_RG(funcs, prims.G) * R])
    else:
        raise ValueError(f"unsupported parameter {parameter!r}")
    return cramer3(M, rhs)


def displayed_triple_cbarL(prims: MarketPrimitives, funcs: PolicyFunctions) -> np.ndarray:
    """Closed-form expressions (da/|J|, -2a/|J|, -1/|J|) as printed for the
    c_bar_L statics; kept for comparison only."""
    P, _, a = _slopes(prims, funcs)
    J = P - 2.0 * a
    return np.array([a / J, -2.0 * a / J, -1.0 / J])


def _fd_triple(prims, funcs, param, h):
    x = getattr(prims, param)
    up = solve_extended(prims.replace(**{param: x + h}), funcs)
    if x - h >= 0:
        dn = solve_extended(prims.replace(**{param: x - h}), funcs)
        d = lambda f: (f(up) - f(dn)) / (2 * h)  # noqa: E731
    else:
        base = solve_extended(prims, funcs)
        up2 = solve_extended(prims.replace(**{param: x + 2 * h}), funcs)
        d = lambda f: (-3 * f(base) + 4 * f(up) - f(up2)) / (2 * h)  # noqa: E731
    return {
        "p_UE": d(lambda e: e.p_UE), "p_LE": d(lambda e: e.p_LE), "R_E": d(lambda e: e.R_E),
        "X_UE": d(lambda e: e.X_UE), "X_LE": d(lambda e: e.X_LE),
    }


@dataclass(frozen=True)
class ExtendedStatics:
    parameter: str
    triple: Tuple[float, float, float]
    triple_fd: Tuple[float, float, float]
    dX_fd: Tuple[float, float]
    sign_case: str
    signs_as_claimed: bool
    displayed: Optional[Tuple[float, float, float]]
    displayed_agrees: Optional[Tuple[bool, bool, bool]]

    def max_rel_gap(self) -> float:
        return max(abs(a - b) / max(abs(a), 1e-300) for a, b in zip(self.triple, self.triple_fd))


def extended_statics_cbarL(prims: MarketPrimitives, funcs: PolicyFunctions, h: float = 1e-5) -> ExtendedStatics:
    """Derivative triple in c_bar_L by direct linear solve and by re-solve
    finite differences; checks the sign case and demand invariance."""
    triple = extended_derivative_triple(prims, funcs, "c_bar_L")
    fd = _fd_triple(prims, funcs, "c_bar_L", h)
    P, _, a = _slopes(prims, funcs)
    case = "P<2a" if P < 2 * a else "P>2a"
    want = 1 if case == "P<2a" else -1
    signs_ok = all(np.sign(v) == want for v in triple)
    disp = displayed_triple_cbarL(prims, funcs)
    agrees = tuple(bool(math.isclose(x, y, rel_tol=1e-9)) for x, y in zip(disp, triple))
    return ExtendedStatics(
        "c_bar_L", tuple(float(v) for v in triple),
        (fd["p_UE"], fd["p_LE"], fd["R_E"]), (fd["X_UE"], fd["X_LE"]),
        case, signs_ok, tuple(float(v) for v in disp), agrees,
    )


def extended_statics_G(prims: MarketPrimitives, funcs: PolicyFunctions, h: float = 1e-5) -> ExtendedStatics:
    """G statics, numeric only: linear solve and re-solve differences."""
    triple = extended_derivative_triple(prims, funcs, "G")
    fd = _fd_triple(prims, funcs, "G", h)
    P, _, a = _slopes(prims, funcs)
    return ExtendedStatics(
        "G", tuple(float(v) for v in triple), (fd["p_UE"], fd["p_LE"], fd["R_E"]),
        (fd["X_UE"], fd["X_LE"]), "P<2a" if P < 2 * a else "P>2a", True, None, None,
    )


def sign_flip_sweep(prims: MarketPrimitives, funcs: PolicyFunctions, a_values) -> Dict[str, object]:
    """Sweep a_R, record the c_bar_L derivative triple and where its signs flip.

    Returns the per-point triples, the bracketing a_R interval of each flip,
    and the a_R value where 2 dalpha/dR equals P(G).
    """
    P = eval_prob(funcs, prims.G)[0]
    decay = math.exp(-funcs.lambda_alpha * prims.G)
    triples = []
    for aR in a_values:
        f = funcs.replace(a_R=float(aR))
        try:
            triples.append(extended_derivative_triple(prims, f, "c_bar_L"))
        except SingularJacobian:
            triples.append(np.full(3, np.nan))
    triples = np.array(triples)
    flips = []
    last = None
    for i in range(len(a_values)):
        if not np.all(np.isfinite(triples[i])):
            continue
        if last is not None and np.any(np.sign(triples[last]) != np.sign(triples[i])):
            flips.append((float(a_values[last]), float(a_values[i])))
        last = i
    return {"a_R": np.asarray(a_values, float), "triples": triples, "flips": flips,
            "critical_a_R": P / (2.0 * decay)}
