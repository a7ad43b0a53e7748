"""Comparative statics of the price-setting stage.

Three routes to every derivative:

* closed-form differentiation of the specific model's equilibrium,
* the generic linearized FOC system solved by Cramer's rule (valid for any
  :class:`~bertrand_lab.demand.DemandSystem`), with and without the
  cross-partial terms d^2X^j/dp^j dt,
* central finite differences of re-solved equilibria (the oracle).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .demand import DemandSystem
from .equilibrium import Equilibrium, closed_form_equilibrium, foc_jacobian
from .errors import InvalidInput, UnstableEquilibrium
from .model import (MarketPrimitives, PolicyFunctions, aggregate_surplus, eval_alpha, eval_prob,
                    success_value, unit_costs)

PARAM_ALIASES = {"cL": "c_bar_L", "c_bar_L": "c_bar_L", "R": "R", "G": "G"}
LOWER_BOUNDS = {"c_bar_L": 0.0, "R": 0.0, "G": 0.0}
DEFAULT_THETAS = (0.5, 1.0)


def canonical_param(name: str) -> str:
    try:
        return PARAM_ALIASES[name]
    except KeyError:
        raise InvalidInput(f"unknown statics parameter {name!r}; use cL, R or G") from None


def equilibrium_outputs(prims: MarketPrimitives, funcs: PolicyFunctions,
                        solve: Callable = closed_form_equilibrium, thetas=DEFAULT_THETAS) -> Dict[str, float]:
    """Equilibrium prices, demands, profits and surpluses as a flat dict."""
    eq = solve(prims, funcs)
    sq = prims.sqrt_q
    S = success_value(prims, funcs)
    out = {
        "p_UE": eq.p_UE, "p_LE": eq.p_LE,
        "X_UE": eq.X_UE, "X_LE": eq.X_LE,
        "pi_UE": eq.pi_UE, "pi_LE": eq.pi_LE,
        "CS_U": sq - eq.p_UE,
    }
    for th in thetas:
        out[f"CS_L[{th:g}]"] = S * th + sq - eq.p_LE
    out["CS_agg"] = aggregate_surplus(prims, funcs, eq.prices).value
    return out


@dataclass
class FDStatics:
    parameter: str
    values: Dict[str, float]
    step: float
    one_sided: bool = False
    reason: Optional[str] = None


def fd_statics(solve: Callable, prims: MarketPrimitives, funcs: PolicyFunctions, parameter: str,
               step: float = 1e-5, thetas=DEFAULT_THETAS) -> FDStatics:
    """Central differences of every equilibrium output in one parameter.

    Falls back to a second-order one-sided difference (flagged) when the
    backward point leaves the parameter domain or breaks Conditions 1-3.
    """
    param = canonical_param(parameter)
    x0 = getattr(prims, param)

    def outputs(x):
        p = prims.replace(**{param: x})
        eq = solve(p, funcs)
        o = equilibrium_outputs(p, funcs, lambda *_: eq, thetas)
        return o, eq.valid

    h = step
    plus, ok_plus = outputs(x0 + h)
    reason = None
    if x0 - h >= LOWER_BOUNDS[param] and (x0 - h > 0 or param != "R"):
        minus, ok_minus = outputs(x0 - h)
    else:
        minus, ok_minus, reason = None, False, "lower bound of parameter domain"
    if minus is not None and (ok_minus or not ok_plus):
        vals = {k: (plus[k] - minus[k]) / (2 * h) for k in plus}
        return FDStatics(param, vals, h)
    if reason is None:
        reason = "conditions violated at backward point"
    base, _ = outputs(x0)
    plus2, _ = outputs(x0 + 2 * h)
    vals = {k: (-3 * base[k] + 4 * plus[k] - plus2[k]) / (2 * h) for k in plus}
    return FDStatics(param, vals, h, True, reason)


@dataclass(frozen=True)
class PropositionVerdict:
    claim: str
    expected: str
    found: str
    passed: bool
    values: Tuple[float, ...] = ()


def _sign(x: float, tol: float = 0.0) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


def _sign_word(s):
    return {1: "+", -1: "-", 0: "0"}[s]


@dataclass
class StaticsReport:
    parameter: str
    analytic: Dict[str, float]
    fd: Dict[str, float]
    verdicts: List[PropositionVerdict] = field(default_factory=list)
    indeterminate: Tuple[str, ...] = ()
    one_sided: bool = False

    @property
    def dP_analytic(self) -> Tuple[float, float]:
        return self.analytic["p_UE"], self.analytic["p_LE"]

    @property
    def dP_fd(self) -> Tuple[float, float]:
        return self.fd["p_UE"], self.fd["p_LE"]

    def max_rel_error(self, floor: float = 1e-8) -> float:
        """Largest analytic-vs-FD discrepancy, relative where the value is
        larger than ``floor`` and absolute otherwise."""
        worst = 0.0
        for k, a in self.analytic.items():
            if k not in self.fd:
                continue
            err = abs(a - self.fd[k])
            if abs(a) > floor:
                err /= abs(a)
            worst = max(worst, err)
        return worst

    def rows(self):
        for k in self.fd:
            yield k, self.analytic.get(k), self.fd[k]


def _chain(prims, funcs, param):
    """Derivatives of S = P R, K = S + cL + alpha and N = 2S - cL - alpha."""
    P, dP = eval_prob(funcs, prims.G)
    _, a_R, a_G = eval_alpha(funcs, prims.R, prims.G)
    if param == "c_bar_L":
        dS, da = 0.0, 0.0
        dK, dN = 1.0, -1.0
    elif param == "R":
        dS, da = P, a_R
        dK, dN = dS + da, 2 * dS - da
    else:
        dS, da = dP * prims.R, a_G
        dK, dN = dS + da, 2 * dS - da
    return dS, dK, dN


def closed_form_derivatives(prims: MarketPrimitives, funcs: PolicyFunctions, parameter: str,
                            thetas=DEFAULT_THETAS) -> Dict[str, float]:
    """Exact derivatives of the specific model's equilibrium outputs, from
    p^UE = K/3 + c, X^UE = K/(3S), pi^UE = K^2/(9S), pi^LE = N^2/(9S)."""
    param = canonical_param(parameter)
    S = success_value(prims, funcs)
    alpha = eval_alpha(funcs, prims.R, prims.G)[0]
    K = S + prims.c_bar_L + alpha
    N = 2 * S - prims.c_bar_L - alpha
    dS, dK, dN = _chain(prims, funcs, param)
    dXU = (dK * S - K * dS) / (3 * S * S)
    out = {
        "p_UE": dK / 3, "p_LE": 2 * dK / 3,
        "X_UE": dXU, "X_LE": -dXU,
        "pi_UE": (2 * K * dK * S - K * K * dS) / (9 * S * S),
        "pi_LE": (2 * N * dN * S - N * N * dS) / (9 * S * S),
        "CS_U": -dK / 3,
    }
    for th in thetas:
        out[f"CS_L[{th:g}]"] = dS * th - 2 * dK / 3
    return out


def profit_L_envelope_G(prims: MarketPrimitives, funcs: PolicyFunctions, eq: Optional[Equilibrium] = None) -> float:
    """d pi^LE / dG as the sum of a success-probability term and a cost term."""
    eq = eq or closed_form_equilibrium(prims, funcs)
    P, dP = eval_prob(funcs, prims.G)
    _, _, a_G = eval_alpha(funcs, prims.R, prims.G)
    S = P * prims.R
    _, cL = unit_costs(prims, funcs)
    mL = eq.p_LE - cL
    gap = eq.p_LE - eq.p_UE
    prob_term = dP * mL / P * (1.0 / 3.0 + gap / S)
    cost_term = a_G / S * (mL / 3.0 - S + gap)
    return prob_term + cost_term


def profit_envelope_cbarL(prims: MarketPrimitives, funcs: PolicyFunctions, eq: Optional[Equilibrium] = None):
    """(d pi^UE/dcL, d pi^LE/dcL) via the envelope-theorem expressions."""
    eq = eq or closed_form_equilibrium(prims, funcs)
    S = success_value(prims, funcs)
    _, cL = unit_costs(prims, funcs)
    return (eq.p_LE - prims.c_bar) / (3 * S), -2 * (eq.p_LE - cL) / (3 * S)


def _check(claim, expected, found, passed, *values):
    return PropositionVerdict(claim, expected, found, bool(passed), tuple(float(v) for v in values))


def specific_statics(prims: MarketPrimitives, funcs: PolicyFunctions, parameter: str,
                     step: float = 1e-5, thetas=DEFAULT_THETAS) -> StaticsReport:
    param = canonical_param(parameter)
    eq = closed_form_equilibrium(prims, funcs)
    analytic = closed_form_derivatives(prims, funcs, param, thetas)
    fd = fd_statics(closed_form_equilibrium, prims, funcs, param, step, thetas)
    cs_l = [k for k in analytic if k.startswith("CS_L")]
    verdicts: List[PropositionVerdict] = []
    indeterminate: Tuple[str, ...] = ()
    dU, dL = analytic["p_UE"], analytic["p_LE"]

    if param == "c_bar_L":
        analytic["pi_UE"], analytic["pi_LE"] = profit_envelope_cbarL(prims, funcs, eq)
        verdicts.append(_check("P1: dpLE/dcL > dpUE/dcL > 0", "+ ordered", f"{dL:.6g} > {dU:.6g}",
                               dL > dU > 0, dU, dL))
        verdicts.append(_check("dX_UE/dcL > 0 and dX_LE/dcL < 0", "+/-",
                               f"{_sign_word(_sign(analytic['X_UE']))}/{_sign_word(_sign(analytic['X_LE']))}",
                               analytic["X_UE"] > 0 > analytic["X_LE"], analytic["X_UE"], analytic["X_LE"]))
        cs_ok = analytic["CS_U"] < 0 and all(analytic[k] < 0 for k in cs_l)
        verdicts.append(_check("per-consumer surpluses fall in cL", "-", "-" if cs_ok else "not all -",
                               cs_ok, analytic["CS_U"], *(analytic[k] for k in cs_l)))
        verdicts.append(_check("dpi_UE/dcL > 0 and dpi_LE/dcL < 0", "+/-",
                               f"{_sign_word(_sign(analytic['pi_UE']))}/{_sign_word(_sign(analytic['pi_LE']))}",
                               analytic["pi_UE"] > 0 > analytic["pi_LE"], analytic["pi_UE"], analytic["pi_LE"]))
    elif param == "R":
        verdicts.append(_check("P2 (specific): dpLE/dR > dpUE/dR > 0", "+ ordered", f"{dL:.6g} > {dU:.6g}",
                               dL > dU > 0, dU, dL))
        verdicts.append(_check("dCS_U/dR < 0", "-", _sign_word(_sign(analytic["CS_U"])),
                               analytic["CS_U"] < 0, analytic["CS_U"]))
        indeterminate = ("X_UE", "X_LE", "pi_UE", "pi_LE") + tuple(cs_l)
    else:
        P, dP = eval_prob(funcs, prims.G)
        a_G = eval_alpha(funcs, prims.R, prims.G)[2]
        driver = dP * prims.R + a_G
        s = _sign(driver)
        found = (_sign(dU), _sign(dL))
        verdicts.append(_check("P3 (specific): sign dpUE/dG = sign dpLE/dG = sign(P'R + dalpha/dG)",
                               _sign_word(s), "/".join(_sign_word(v) for v in found),
                               found == (s, s), driver, dU, dL))
        verdicts.append(_check("dX_UE/dG < 0 and dX_LE/dG > 0", "-/+",
                               f"{_sign_word(_sign(analytic['X_UE']))}/{_sign_word(_sign(analytic['X_LE']))}",
                               analytic["X_UE"] < 0 < analytic["X_LE"], analytic["X_UE"], analytic["X_LE"]))
        analytic["pi_LE"] = profit_L_envelope_G(prims, funcs, eq)
        verdicts.append(_check("dpi_LE/dG > 0", "+", _sign_word(_sign(analytic["pi_LE"])),
                               analytic["pi_LE"] > 0, analytic["pi_LE"]))
        indeterminate = ("pi_UE", "CS_U") + tuple(cs_l)
    return StaticsReport(param, analytic, fd.values, verdicts, indeterminate, fd.one_sided)


def specific_statics_cbarL(prims, funcs, **kw) -> StaticsReport:
    return specific_statics(prims, funcs, "c_bar_L", **kw)


def specific_statics_R(prims, funcs, **kw) -> StaticsReport:
    return specific_statics(prims, funcs, "R", **kw)


def specific_statics_G(prims, funcs, **kw) -> StaticsReport:
    return specific_statics(prims, funcs, "G", **kw)


# --- generic linearized system -------------------------------------------------

def cramer2(J: np.ndarray, rhs: np.ndarray) -> Tuple[float, float]:
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    x0 = (rhs[0] * J[1, 1] - J[0, 1] * rhs[1]) / det
    x1 = (J[0, 0] * rhs[1] - rhs[0] * J[1, 0]) / det
    return float(x0), float(x1)


@dataclass(frozen=True)
class GenericStatics:
    parameter: str
    full: Tuple[float, float]
    approx: Tuple[float, float]
    detJ: float

    @property
    def gap(self) -> Tuple[float, float]:
        return self.full[0] - self.approx[0], self.full[1] - self.approx[1]

    @property
    def branch(self) -> str:
        s = (_sign(self.full[0]), _sign(self.full[1]))
        if s == (1, 1):
            return "both prices rise"
        if s == (-1, -1):
            return "both prices fall"
        return "prices move apart"


def nonspecific_statics(system: DemandSystem, eq: Equilibrium, parameter: str) -> GenericStatics:
    """Solve J dP = -(FOC shift) dt by Cramer's rule.

    ``full`` keeps the d^2X^j/dp^j dt terms; ``approx`` drops them.
    """
    param = canonical_param(parameter)
    pU, pL = eq.prices
    J = foc_jacobian(system, pU, pL)
    detJ = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    if not detJ > 0:
        raise UnstableEquilibrium(f"|J| = {detJ:.6g} <= 0 at the equilibrium")
    pt = system.evaluate(pU, pL)
    mU, mL = pt.margins
    X_t = pt.dX_dt(param)
    X_pt = pt.d2X_dp_dt(param)
    dcL = pt.dcL[param]
    base_U = X_t[0]
    base_L = -pt.dX_dp[1, 1] * dcL + X_t[1]
    shift_full = np.array([X_pt[0, 0] * mU + base_U, X_pt[1, 1] * mL + base_L])
    shift_approx = np.array([base_U, base_L])
    return GenericStatics(param, cramer2(J, -shift_full), cramer2(J, -shift_approx), detJ)


def proposition_suite(prims: MarketPrimitives, funcs: PolicyFunctions, step: float = 1e-5) -> List[PropositionVerdict]:
    """Machine-checkable P1-P3 for the specific model, values attached."""
    out = []
    for param, name in (("c_bar_L", "P1"), ("R", "P2"), ("G", "P3")):
        rep = specific_statics(prims, funcs, param, step=step)
        out.append(next(v for v in rep.verdicts if v.claim.startswith(name)))
    return out
