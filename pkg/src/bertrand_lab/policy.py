"""First stage: the local government picks the guidance level G to maximize
W(G) = pi^LE(G) - beta(G), anticipating the price equilibrium."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .equilibrium import closed_form_equilibrium
from .errors import InvalidInput
from .model import MarketPrimitives, PolicyFunctions, eval_alpha, eval_beta, eval_prob, unit_costs
from .statics import closed_form_derivatives, profit_L_envelope_G

RHO_STEP = 1e-4
SCAN_POINTS = 200


class WelfareValue(NamedTuple):
    W: float
    conditions_ok: bool


def local_welfare(prims: MarketPrimitives, funcs: PolicyFunctions, G: float) -> WelfareValue:
    p = prims.replace(G=G)
    eq = closed_form_equilibrium(p, funcs)
    return WelfareValue(eq.pi_LE - eval_beta(funcs, G)[0], eq.valid)


def _W(prims, funcs, G):
    return local_welfare(prims, funcs, G).W


@dataclass(frozen=True)
class MarginalProfit:
    """d pi^LE/dG split into the rival-price channel, the cost cut and the
    success-probability channel. ``envelope`` is the same derivative from the
    two-term expression; both must agree."""

    total: float
    price_channel: float
    cost_cut: float
    probability: float
    envelope: float


def marginal_profit_G(prims: MarketPrimitives, funcs: PolicyFunctions, G: Optional[float] = None) -> MarginalProfit:
    p = prims if G is None else prims.replace(G=G)
    eq = closed_form_equilibrium(p, funcs)
    P, dP = eval_prob(funcs, p.G)
    a_G = eval_alpha(funcs, p.R, p.G)[2]
    S = P * p.R
    _, cL = unit_costs(p, funcs)
    mL = eq.p_LE - cL
    dpU_dG = closed_form_derivatives(p, funcs, "G")["p_UE"]
    price = mL / S * dpU_dG
    cost = eq.X_LE * (-a_G)
    prob = mL / P * (eq.p_LE - eq.p_UE) / S * dP
    return MarginalProfit(price + cost + prob, price, cost, prob, profit_L_envelope_G(p, funcs, eq))


def foc_gap(prims: MarketPrimitives, funcs: PolicyFunctions, G: float) -> float:
    """dW/dG = d pi^LE/dG - beta'(G)."""
    return marginal_profit_G(prims, funcs, G).total - eval_beta(funcs, G)[1]


def second_difference_W(prims, funcs, G, h=RHO_STEP) -> float:
    if G - h < 0:
        # forward second difference at the boundary
        w0, w1, w2, w3 = (_W(prims, funcs, G + i * h) for i in range(4))
        return (2 * w0 - 5 * w1 + 4 * w2 - w3) / (h * h)
    return (_W(prims, funcs, G + h) - 2 * _W(prims, funcs, G) + _W(prims, funcs, G - h)) / (h * h)


@dataclass
class PolicyOptimum:
    G_E: float
    W_E: float
    foc_residual: float
    rho: float
    decomposition: MarginalProfit
    boundary: Optional[str] = None
    multimodal: bool = False
    conditions_ok: bool = True
    roots: List[float] = field(default_factory=list)

    @property
    def interior(self) -> bool:
        return self.boundary is None

    @property
    def soc_ok(self) -> bool:
        return self.rho < 0


def optimize_guidance(prims: MarketPrimitives, funcs: PolicyFunctions, G_max: float = 50.0,
                      tol: float = 1e-14) -> PolicyOptimum:
    """Locate G^E from the FOC dpi^LE/dG = beta'(G).

    A 200-point scan brackets every downward crossing of dW/dG (local maxima);
    each is refined with Brent's method. The global welfare maximizer among
    those roots and the two ends of [0, G_max] is returned. A boundary answer
    is flagged, as is a scan that finds more than one local maximum.
    """
    if not (math.isfinite(G_max) and G_max > 0):
        raise InvalidInput("G_max must be a positive finite number")
    grid = np.linspace(0.0, G_max, SCAN_POINTS + 1)
    gaps = np.array([foc_gap(prims, funcs, g) for g in grid])
    roots = []
    for i in range(SCAN_POINTS):
        lo, hi = gaps[i], gaps[i + 1]
        if lo == 0 and i > 0:
            continue
        if lo > 0 and hi < 0 or (lo > 0 and hi == 0):
            r = brentq(lambda g: foc_gap(prims, funcs, g), grid[i], grid[i + 1], xtol=tol,
                       rtol=4 * np.finfo(float).eps, maxiter=200)
            roots.append(float(r))
        elif lo == 0 and i == 0 and hi < 0:
            roots.append(0.0)

    candidates = [(g, None) for g in roots]
    if gaps[0] < 0:
        candidates.append((0.0, "lower"))
    if gaps[-1] > 0:
        candidates.append((float(G_max), "upper"))
    if not candidates:
        candidates.append((0.0, "lower"))
    best_G, boundary = max(candidates, key=lambda c: _W(prims, funcs, c[0]))
    if boundary is None and best_G == 0.0:
        boundary = "lower"

    wv = local_welfare(prims, funcs, best_G)
    return PolicyOptimum(
        G_E=best_G,
        W_E=wv.W,
        foc_residual=abs(foc_gap(prims, funcs, best_G)),
        rho=second_difference_W(prims, funcs, best_G),
        decomposition=marginal_profit_G(prims, funcs, best_G),
        boundary=boundary,
        multimodal=len(roots) > 1,
        conditions_ok=wv.conditions_ok,
        roots=roots,
    )


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 500) -> Tuple[float, float]:
    """Maximize a unimodal ``f`` on [lo, hi]; returns (argmax, max)."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    x = 0.5 * (lo + hi)
    return x, f(x)


def optimize_guidance_golden(prims: MarketPrimitives, funcs: PolicyFunctions, G_max: float = 50.0,
                             tol: float = 1e-10) -> float:
    """Direct maximization of W by golden section, no derivatives used.

    The bracket comes from the best point of a 200-point scan of W itself.
    """
    grid = np.linspace(0.0, G_max, SCAN_POINTS + 1)
    w = [_W(prims, funcs, g) for g in grid]
    i = int(np.argmax(w))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, SCAN_POINTS)]
    return golden_section_max(lambda g: _W(prims, funcs, g), float(lo), float(hi), tol)[0]


def cross_partial_G_cbarL(prims: MarketPrimitives, funcs: PolicyFunctions, G: Optional[float] = None) -> float:
    """d^2 pi^LE / dG dcL from its reduced form:

        (1 / (3 P R)) [ (2/3) dalpha/dG - (2/3)(cL + alpha) P'(G) / P ]
    """
    p = prims if G is None else prims.replace(G=G)
    P, dP = eval_prob(funcs, p.G)
    alpha, _, a_G = eval_alpha(funcs, p.R, p.G)
    S = P * p.R
    return (2.0 / 3.0 * a_G - 2.0 / 3.0 * (p.c_bar_L + alpha) / P * dP) / (3.0 * S)


@dataclass(frozen=True)
class ImplicitSlope:
    """dG^E/dt by the implicit-function route and by re-optimization."""

    parameter: str
    value: Optional[float]
    cross_partial: Optional[float]
    rho: Optional[float]
    fd_value: Optional[float]
    applicable: bool
    verdict: str

    @property
    def rel_gap(self) -> Optional[float]:
        if not self.applicable or self.fd_value is None:
            return None
        return abs(self.value - self.fd_value) / max(abs(self.fd_value), 1e-300)


def _reopt_slope(prims, funcs, param, h, G_max):
    x = getattr(prims, param)
    up = optimize_guidance(prims.replace(**{param: x + h}), funcs, G_max)
    dn = optimize_guidance(prims.replace(**{param: x - h}), funcs, G_max)
    if not (up.interior and dn.interior):
        return None
    return (up.G_E - dn.G_E) / (2 * h)


def dGE_dcbarL(prims: MarketPrimitives, funcs: PolicyFunctions, G_max: float = 50.0, h: float = 1e-4) -> ImplicitSlope:
    opt = optimize_guidance(prims, funcs, G_max)
    if not opt.interior or not opt.rho < 0:
        why = "boundary optimum" if not opt.interior else "second-order condition fails (rho >= 0)"
        return ImplicitSlope("c_bar_L", None, None, opt.rho, None, False, f"not applicable: {why}")
    cross = cross_partial_G_cbarL(prims, funcs, opt.G_E)
    value = -cross / opt.rho
    if prims.c_bar_L >= h:
        fd = _reopt_slope(prims, funcs, "c_bar_L", h, G_max)
    else:
        fd = _forward_slope(prims, funcs, "c_bar_L", h, G_max, opt.G_E)
    verdict = "P4 holds: dG^E/dcL < 0" if value < 0 else "P4 fails: dG^E/dcL >= 0"
    return ImplicitSlope("c_bar_L", value, cross, opt.rho, fd, True, verdict)


def _forward_slope(prims, funcs, param, h, G_max, G0):
    x = getattr(prims, param)
    g1 = optimize_guidance(prims.replace(**{param: x + h}), funcs, G_max)
    g2 = optimize_guidance(prims.replace(**{param: x + 2 * h}), funcs, G_max)
    if not (g1.interior and g2.interior):
        return None
    return (-3 * G0 + 4 * g1.G_E - g2.G_E) / (2 * h)


def cross_partial_G_R(prims: MarketPrimitives, funcs: PolicyFunctions, G: Optional[float] = None, h: float = 1e-5) -> float:
    """d^2 pi^LE / dG dR by central difference of the analytic marginal profit in R."""
    p = prims if G is None else prims.replace(G=G)
    up = marginal_profit_G(p.replace(R=p.R + h), funcs).total
    dn = marginal_profit_G(p.replace(R=p.R - h), funcs).total
    return (up - dn) / (2 * h)


def dGE_dR(prims: MarketPrimitives, funcs: PolicyFunctions, G_max: float = 50.0, h: float = 1e-4) -> ImplicitSlope:
    """dG^E/dR; its sign is not pinned down by the model, so none is asserted."""
    opt = optimize_guidance(prims, funcs, G_max)
    if not opt.interior or not opt.rho < 0:
        why = "boundary optimum" if not opt.interior else "second-order condition fails (rho >= 0)"
        return ImplicitSlope("R", None, None, opt.rho, None, False, f"not applicable: {why}")
    cross = cross_partial_G_R(prims, funcs, opt.G_E)
    value = -cross / opt.rho
    fd = _reopt_slope(prims, funcs, "R", h, G_max)
    return ImplicitSlope("R", value, cross, opt.rho, fd, True, "sign not asserted")
