"""Primitives of the two-producer export model.

Producer U (urban) sells a plain food at unit cost ``c_bar``. Producer L
(local) sells a differentiated food carrying added value ``R`` that succeeds
with probability ``P(G)``, and pays ``c_bar + c_bar_L + alpha(R, G)`` per
unit. Consumers have a taste for the added value ``theta`` uniform on
[0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple, Optional, Tuple

from .errors import DegenerateModel, InvalidInput, InvalidParameters


def _check_finite(name, value):
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidInput(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class MarketPrimitives:
    q: float
    c_bar: float
    c_bar_L: float
    R: float
    G: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        if self.q <= 0:
            raise InvalidInput("q must be > 0")
        if self.c_bar <= 0:
            raise InvalidInput("c_bar must be > 0")
        if self.c_bar_L < 0:
            raise InvalidInput("c_bar_L must be >= 0")
        if self.R <= 0:
            raise InvalidInput("R must be > 0")
        if self.G < 0:
            raise InvalidInput("G must be >= 0")

    def replace(self, **changes) -> "MarketPrimitives":
        return replace(self, **changes)

    @property
    def sqrt_q(self) -> float:
        return math.sqrt(self.q)


@dataclass(frozen=True)
class PolicyFunctions:
    """Parametric families for the success probability, added-value cost and
    administrative cost.

    P(G)      = 1 - (1 - P0) * exp(-lambda_P * G)
    alpha(R,G) = a_R * R * exp(-lambda_alpha * G)
    beta(G)   = 0.5 * b_beta * G**2
    """

    P0: float
    lambda_P: float
    a_R: float
    lambda_alpha: float
    b_beta: float

    def __post_init__(self):
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        if not 0 < self.P0 <= 1:
            raise InvalidParameters("P0 must lie in (0, 1]")
        if self.lambda_P <= 0:
            raise InvalidParameters("lambda_P must be > 0")
        if self.a_R < 0:
            raise InvalidParameters("a_R must be >= 0")
        if self.lambda_alpha < 0:
            raise InvalidParameters("lambda_alpha must be >= 0")
        if self.b_beta <= 0:
            raise InvalidParameters("b_beta must be > 0")

    def replace(self, **changes) -> "PolicyFunctions":
        return replace(self, **changes)


def _check_G(G):
    if not isinstance(G, (int, float)) or math.isnan(G) or math.isinf(G):
        raise InvalidInput(f"G must be finite, got {G!r}")
    if G < 0:
        raise InvalidInput("G must be >= 0")


def eval_prob(funcs: PolicyFunctions, G: float) -> Tuple[float, float]:
    """Return ``(P(G), P'(G))``."""
    _check_G(G)
    tail = (1.0 - funcs.P0) * math.exp(-funcs.lambda_P * G)
    return 1.0 - tail, funcs.lambda_P * tail


def eval_prob_second(funcs: PolicyFunctions, G: float) -> float:
    _check_G(G)
    return -funcs.lambda_P ** 2 * (1.0 - funcs.P0) * math.exp(-funcs.lambda_P * G)


def eval_alpha(funcs: PolicyFunctions, R: float, G: float) -> Tuple[float, float, float]:
    """Return ``(alpha, d alpha/dR, d alpha/dG)``."""
    _check_finite("R", R)
    if R <= 0:
        raise InvalidInput("R must be > 0")
    _check_G(G)
    decay = math.exp(-funcs.lambda_alpha * G)
    dR = funcs.a_R * decay
    alpha = dR * R
    return alpha, dR, -funcs.lambda_alpha * alpha


def alpha_cross_RG(funcs: PolicyFunctions, G: float) -> float:
    """d^2 alpha / dR dG (constant in R for the linear-in-R family)."""
    _check_G(G)
    return -funcs.lambda_alpha * funcs.a_R * math.exp(-funcs.lambda_alpha * G)


def eval_beta(funcs: PolicyFunctions, G: float) -> Tuple[float, float, float]:
    """Return ``(beta, beta', beta'')``."""
    _check_G(G)
    return 0.5 * funcs.b_beta * G * G, funcs.b_beta * G, funcs.b_beta


def unit_costs(prims: MarketPrimitives, funcs: PolicyFunctions) -> Tuple[float, float]:
    alpha = eval_alpha(funcs, prims.R, prims.G)[0]
    return prims.c_bar, prims.c_bar + prims.c_bar_L + alpha


def success_value(prims: MarketPrimitives, funcs: PolicyFunctions) -> float:
    """Expected utility premium ``P(G) * R`` of food L for a theta = 1 consumer."""
    return eval_prob(funcs, prims.G)[0] * prims.R


@dataclass(frozen=True)
class ConditionReport:
    cond1: bool
    cond1_margin: float
    cond2: bool
    cond2_margin: float
    cond3: bool
    cond3_margin: float
    theta_star: float
    theta_star_star: float

    @property
    def all_hold(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3

    def failed(self) -> list:
        names = []
        for i, ok in enumerate((self.cond1, self.cond2, self.cond3), start=1):
            if not ok:
                names.append(f"condition {i}")
        return names


def thresholds(prims: MarketPrimitives, funcs: PolicyFunctions, prices) -> ConditionReport:
    """Preference thresholds and the three validity conditions at ``prices``.

    ``theta_star`` is where food L stops giving a non-negative surplus and
    ``theta_star_star`` is the U/L indifference point. Each flag is true iff
    its margin is strictly positive.
    """
    pU, pL = prices
    S = success_value(prims, funcs)
    if S <= 0:
        raise DegenerateModel("P(G) * R must be positive")
    sq = prims.sqrt_q
    m1 = sq - pU
    m2 = pL - sq
    m3 = S - (pL - pU)
    return ConditionReport(
        cond1=m1 > 0, cond1_margin=m1,
        cond2=m2 > 0, cond2_margin=m2,
        cond3=m3 > 0, cond3_margin=m3,
        theta_star=(pL - sq) / S,
        theta_star_star=(pL - pU) / S,
    )


class SurplusPoint(NamedTuple):
    cs_U: float
    cs_L: float
    choice: Optional[str]


def consumer_surplus(prims: MarketPrimitives, funcs: PolicyFunctions, prices, theta: float) -> SurplusPoint:
    """Per-consumer surpluses and the food a type-``theta`` consumer buys.

    ``choice`` is ``"L"`` when theta exceeds the indifference threshold and
    ``"U"`` otherwise; ``None`` when the preferred food gives a negative
    surplus so nothing is bought.
    """
    if not 0.0 <= theta <= 1.0:
        raise InvalidInput("theta must lie in [0, 1]")
    pU, pL = prices
    S = success_value(prims, funcs)
    sq = prims.sqrt_q
    cs_U = sq - pU
    cs_L = S * theta + sq - pL
    pick, value = ("L", cs_L) if theta > (pL - pU) / S else ("U", cs_U)
    return SurplusPoint(cs_U, cs_L, pick if value >= 0 else None)


class AggregateSurplus(NamedTuple):
    value: float
    u_part: float
    l_part: float
    conditions_ok: bool


def aggregate_surplus(prims: MarketPrimitives, funcs: PolicyFunctions, prices) -> AggregateSurplus:
    """Total consumer surplus over the uniform preference distribution.

    U buyers occupy [0, t**] and L buyers (t**, 1]. Computed in closed form;
    outside Conditions 1-3 the value is still returned with
    ``conditions_ok=False``.
    """
    pU, pL = prices
    S = success_value(prims, funcs)
    sq = prims.sqrt_q
    report = thresholds(prims, funcs, prices)
    t2 = report.theta_star_star
    u_part = t2 * (sq - pU)
    l_part = 0.5 * S * (1.0 - t2 * t2) + (1.0 - t2) * (sq - pL)
    return AggregateSurplus(u_part + l_part, u_part, l_part, report.all_hold)
