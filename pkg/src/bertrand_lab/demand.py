"""Demand systems and their price/policy partial derivatives.

Index convention everywhere: 0 is producer U, 1 is producer L. For a
:class:`DemandPoint` ``dX_dp[j, k]`` is dX^j/dp^k, ``d2X_dp2[j, k, m]`` is
d^2X^j/dp^k dp^m and ``d2X_dp_dR[j, k]`` is d^2X^j/dp^k dR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import InvalidInput, InvalidParameters
from .model import MarketPrimitives, PolicyFunctions, eval_alpha, eval_prob, unit_costs

PRODUCERS = ("U", "L")


def producer_index(producer) -> int:
    try:
        return PRODUCERS.index(producer)
    except ValueError:
        raise InvalidInput(f"producer must be 'U' or 'L', got {producer!r}") from None


@dataclass(frozen=True)
class DemandPoint:
    prices: Tuple[float, float]
    X: np.ndarray
    dX_dp: np.ndarray
    d2X_dp2: np.ndarray
    dX_dR: np.ndarray
    dX_dG: np.ndarray
    d2X_dp_dR: np.ndarray
    d2X_dp_dG: np.ndarray
    costs: Tuple[float, float]
    dcL: Dict[str, float]

    def dX_dt(self, param: str) -> np.ndarray:
        if param == "c_bar_L":
            return np.zeros(2)
        return {"R": self.dX_dR, "G": self.dX_dG}[param]

    def d2X_dp_dt(self, param: str) -> np.ndarray:
        if param == "c_bar_L":
            return np.zeros((2, 2))
        return {"R": self.d2X_dp_dR, "G": self.d2X_dp_dG}[param]

    @property
    def margins(self) -> np.ndarray:
        return np.asarray(self.prices) - np.asarray(self.costs)


class DemandSystem:
    """Base class: demand X^U, X^L plus the cost side of both producers.

    Subclasses implement :meth:`demand` and :meth:`evaluate`. Everything else
    (profits, first-order conditions) is derived from those.
    """

    kind = "abstract"

    def __init__(self, prims: MarketPrimitives, funcs: PolicyFunctions):
        self.prims = prims
        self.funcs = funcs

    def with_params(self, **changes) -> "DemandSystem":
        raise NotImplementedError

    def demand(self, pU: float, pL: float) -> Tuple[float, float]:
        raise NotImplementedError

    def evaluate(self, pU: float, pL: float) -> DemandPoint:
        raise NotImplementedError

    def costs(self) -> Tuple[float, float]:
        return unit_costs(self.prims, self.funcs)

    def cost_partials(self) -> Dict[str, float]:
        _, dR, dG = eval_alpha(self.funcs, self.prims.R, self.prims.G)
        return {"c_bar_L": 1.0, "R": dR, "G": dG}

    def profits(self, pU: float, pL: float) -> Tuple[float, float]:
        XU, XL = self.demand(pU, pL)
        cU, cL = self.costs()
        return (pU - cU) * XU, (pL - cL) * XL

    def own_foc(self, producer: int, own: float, rival: float) -> Tuple[float, float]:
        """Own-price FOC value d pi^j/d p^j and its derivative in the own price."""
        prices = (own, rival) if producer == 0 else (rival, own)
        pt = self.evaluate(*prices)
        j = producer
        m = own - pt.costs[j]
        g = pt.dX_dp[j, j] * m + pt.X[j]
        dg = 2.0 * pt.dX_dp[j, j] + pt.d2X_dp2[j, j, j] * m
        return float(g), float(dg)

    def foc(self, pU: float, pL: float) -> np.ndarray:
        pt = self.evaluate(pU, pL)
        m = pt.margins
        return np.array([pt.dX_dp[0, 0] * m[0] + pt.X[0], pt.dX_dp[1, 1] * m[1] + pt.X[1]])

    def closed_form_best_response(self, producer: int, rival: float) -> Optional[float]:
        return None


class SpecificDemand(DemandSystem):
    """Uniform-taste demand: X^U = (p^L - p^U) / (P(G) R), X^L = 1 - X^U."""

    kind = "specific"

    def with_params(self, **changes) -> "SpecificDemand":
        return SpecificDemand(self.prims.replace(**changes), self.funcs)

    def _S(self):
        P, dP = eval_prob(self.funcs, self.prims.G)
        return P, dP, P * self.prims.R

    def demand(self, pU, pL):
        S = self._S()[2]
        XU = (pL - pU) / S
        return XU, 1.0 - XU

    def evaluate(self, pU, pL) -> DemandPoint:
        P, dP, S = self._S()
        R = self.prims.R
        D = pL - pU
        XU = D / S
        dXU_dp = np.array([-1.0 / S, 1.0 / S])
        dXU_dR = -D / (P * R * R)
        dXU_dG = -D * dP / (P * P * R)
        d2XU_dp_dR = np.array([1.0, -1.0]) / (P * R * R)
        d2XU_dp_dG = np.array([1.0, -1.0]) * dP / (P * P * R)
        return DemandPoint(
            prices=(pU, pL),
            X=np.array([XU, 1.0 - XU]),
            dX_dp=np.vstack([dXU_dp, -dXU_dp]),
            d2X_dp2=np.zeros((2, 2, 2)),
            dX_dR=np.array([dXU_dR, -dXU_dR]),
            dX_dG=np.array([dXU_dG, -dXU_dG]),
            d2X_dp_dR=np.vstack([d2XU_dp_dR, -d2XU_dp_dR]),
            d2X_dp_dG=np.vstack([d2XU_dp_dG, -d2XU_dp_dG]),
            costs=self.costs(),
            dcL=self.cost_partials(),
        )

    def closed_form_best_response(self, producer, rival):
        cU, cL = self.costs()
        if producer == 0:
            return 0.5 * (rival + cU)
        return 0.5 * (self._S()[2] + rival + cL)


def specific_demand(prims: MarketPrimitives, funcs: PolicyFunctions) -> SpecificDemand:
    return SpecificDemand(prims, funcs)


@dataclass(frozen=True)
class LinearDemandParams:
    A: float
    B: float
    C: float
    m: float = 0.0
    n: float = 0.0

    def __post_init__(self):
        for name in ("A", "B", "C", "m", "n"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParameters(f"{name} must be finite")
        if self.A <= 0:
            raise InvalidParameters("A must be > 0")
        if not 0 < self.C < self.B:
            raise InvalidParameters("linear demand needs B > C > 0")
        if self.m < 0 or self.n < 0:
            raise InvalidParameters("m and n must be >= 0")


class LinearDemand(DemandSystem):
    """X^U = A - B p^U + C p^L - m R - n G, X^L = A - B p^L + C p^U + m R + n G."""

    kind = "linear"

    def __init__(self, params: LinearDemandParams, prims: MarketPrimitives, funcs: PolicyFunctions):
        super().__init__(prims, funcs)
        self.params = params

    def with_params(self, **changes) -> "LinearDemand":
        return LinearDemand(self.params, self.prims.replace(**changes), self.funcs)

    def demand(self, pU, pL):
        k = self.params
        shift = k.m * self.prims.R + k.n * self.prims.G
        return k.A - k.B * pU + k.C * pL - shift, k.A - k.B * pL + k.C * pU + shift

    def evaluate(self, pU, pL) -> DemandPoint:
        k = self.params
        return DemandPoint(
            prices=(pU, pL),
            X=np.array(self.demand(pU, pL)),
            dX_dp=np.array([[-k.B, k.C], [k.C, -k.B]]),
            d2X_dp2=np.zeros((2, 2, 2)),
            dX_dR=np.array([-k.m, k.m]),
            dX_dG=np.array([-k.n, k.n]),
            d2X_dp_dR=np.zeros((2, 2)),
            d2X_dp_dG=np.zeros((2, 2)),
            costs=self.costs(),
            dcL=self.cost_partials(),
        )

    def closed_form_best_response(self, producer, rival):
        # FOC is linear in the own price.
        k = self.params
        c = self.costs()[producer]
        shift = k.m * self.prims.R + k.n * self.prims.G
        sign = -1.0 if producer == 0 else 1.0
        return (k.A + k.C * rival + sign * shift + k.B * c) / (2.0 * k.B)


def linear_demand(params: LinearDemandParams, prims: MarketPrimitives, funcs: PolicyFunctions) -> LinearDemand:
    return LinearDemand(params, prims, funcs)


# --- finite-difference oracle -------------------------------------------------

def _step(x):
    return max(1e-6, 1e-6 * abs(x))


@dataclass
class PartialEstimates:
    """Finite-difference estimates laid out like :class:`DemandPoint`."""

    dX_dp: Optional[np.ndarray] = None
    dX_dR: Optional[np.ndarray] = None
    dX_dG: Optional[np.ndarray] = None
    d2X_dp2: Optional[np.ndarray] = None
    d2X_dp_dR: Optional[np.ndarray] = None
    d2X_dp_dG: Optional[np.ndarray] = None
    one_sided: Tuple[str, ...] = field(default_factory=tuple)


def _diff(f, x, h, lower=None):
    """Central difference of vector-valued ``f`` at ``x``; second-order
    one-sided when ``x - h`` would cross ``lower``."""
    if lower is not None and x - h < lower:
        f0, f1, f2 = (np.asarray(f(x + i * h)) for i in range(3))
        return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h), True
    return (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2.0 * h), False


def fd_partials(system: DemandSystem, point, order: int = 1, step_scale: float = 1.0) -> PartialEstimates:
    """Finite-difference partials of demand at ``point = (p^U, p^L)``.

    ``order=1`` gives the first partials in prices, R and G with step
    ``max(1e-6, 1e-6 |x|)``. ``order=2`` differences the first-order
    estimates again; there the step is widened by ``step_scale`` (callers use
    ~100) because a nested 1e-6 step loses half the available digits.
    Parameters sitting on the edge of their domain (R near 0, G = 0) fall back
    to one-sided differences and are listed in ``one_sided``.
    """
    pU, pL = point
    R, G = system.prims.R, system.prims.G
    out = PartialEstimates()
    sided = []

    def first(sys_, u, l):
        cols = []
        for k in range(2):
            x = (u, l)[k]

            def f(v, k=k):
                return sys_.demand(v, l) if k == 0 else sys_.demand(u, v)

            d, _ = _diff(f, x, _step(x) * step_scale)
            cols.append(d)
        return np.column_stack(cols)

    if order == 1:
        out.dX_dp = first(system, pU, pL)
        out.dX_dR, s = _diff(lambda r: system.with_params(R=r).demand(pU, pL), R, _step(R), lower=0.0)
        if s:
            sided.append("R")
        out.dX_dG, s = _diff(lambda g: system.with_params(G=g).demand(pU, pL), G, _step(G), lower=0.0)
        if s:
            sided.append("G")
    elif order == 2:
        h = step_scale
        d2 = np.zeros((2, 2, 2))
        for m in range(2):
            x = (pU, pL)[m]

            def g(v, m=m):
                return first(system, v, pL) if m == 0 else first(system, pU, v)

            d2[:, :, m] = _diff(g, x, _step(x) * h)[0]
        out.d2X_dp2 = d2
        out.d2X_dp_dR, s = _diff(lambda r: first(system.with_params(R=r), pU, pL), R, _step(R) * h, lower=0.0)
        if s:
            sided.append("R")
        out.d2X_dp_dG, s = _diff(lambda g_: first(system.with_params(G=g_), pU, pL), G, _step(G) * h, lower=0.0)
        if s:
            sided.append("G")
    else:
        raise InvalidInput("order must be 1 or 2")
    out.one_sided = tuple(sided)
    return out
