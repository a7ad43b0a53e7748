"""Scenario files: flat INI-style sections holding every model input.

    [market]   q, c_bar, c_bar_L, R, G
    [prob]     P0, lambda_P
    [alpha]    a_R, lambda_alpha
    [beta]     b_beta
    [demand]   kind = specific | linear, A, B, C, m, n
    [dynamics] kU, kL, dt, horizon

``#`` starts a comment. Unknown sections or keys are rejected and every
problem is reported with its ``section.key`` path.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .demand import DemandSystem, LinearDemand, LinearDemandParams, SpecificDemand
from .dynamics import AdjustmentConfig
from .equilibrium import closed_form_prices
from .errors import InvalidInput
from .model import MarketPrimitives, PolicyFunctions, eval_alpha, success_value

SCHEMA: Dict[str, Dict[str, Optional[float]]] = {
    # key -> default (None = required)
    "market": {"q": None, "c_bar": None, "c_bar_L": None, "R": None, "G": 0.0},
    "prob": {"P0": None, "lambda_P": None},
    "alpha": {"a_R": None, "lambda_alpha": 0.0},
    "beta": {"b_beta": None},
    "demand": {"kind": "specific", "A": None, "B": None, "C": None, "m": 0.0, "n": 0.0},
    "dynamics": {"kU": 1.0, "kL": 1.0, "dt": 0.01, "horizon": 500.0},
}
DEMAND_KINDS = ("specific", "linear")
LINEAR_KEYS = ("A", "B", "C", "m", "n")


class ScenarioError(InvalidInput):
    """All field-level problems found in one scenario file."""

    def __init__(self, errors: List[str], source: str = "<scenario>"):
        self.errors = list(errors)
        self.source = source
        super().__init__(f"{source}: " + "; ".join(self.errors))


@dataclass(frozen=True)
class Scenario:
    id: str
    prims: MarketPrimitives
    funcs: PolicyFunctions
    kind: str = "specific"
    linear: Optional[LinearDemandParams] = None
    dynamics: AdjustmentConfig = field(default_factory=AdjustmentConfig)

    def system(self, **prim_changes) -> DemandSystem:
        prims = self.prims.replace(**prim_changes) if prim_changes else self.prims
        if self.kind == "linear":
            return LinearDemand(self.linear, prims, self.funcs)
        return SpecificDemand(prims, self.funcs)

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace
        return replace(self, **changes)


def _qualify(section, exc):
    # model validation messages start with the offending field name
    msg = str(exc)
    key = msg.split(" ", 1)[0]
    return f"{section}.{key}: {msg}"


def parse_scenario(text: str, name: str = "scenario", source: str = "<scenario>") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError([f"parse error: {exc}"], source) from None

    errors: List[str] = []
    values: Dict[str, Dict[str, object]] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"{sec}: unknown section")
            continue
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                errors.append(f"{sec}.{key}: unknown key")
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, default in keys.items():
            raw = cp.get(sec, key, fallback=None) if cp.has_section(sec) else None
            if sec == "demand" and key == "kind":
                kind = (raw or default).strip()
                if kind not in DEMAND_KINDS:
                    errors.append(f"demand.kind: must be one of {', '.join(DEMAND_KINDS)}, got {kind!r}")
                values[sec][key] = kind
                continue
            if raw is None:
                if default is None and not (sec == "demand" and key in LINEAR_KEYS):
                    errors.append(f"{sec}.{key}: missing")
                values[sec][key] = default
                continue
            try:
                v = float(raw)
            except ValueError:
                errors.append(f"{sec}.{key}: not a number: {raw!r}")
                continue
            if not math.isfinite(v):
                errors.append(f"{sec}.{key}: must be finite")
                continue
            values[sec][key] = v
    if errors:
        raise ScenarioError(errors, source)

    prims = funcs = linear = dyn = None
    try:
        prims = MarketPrimitives(**values["market"])
    except InvalidInput as exc:
        errors.append(_qualify("market", exc))
    fv = {**values["prob"], **values["alpha"], **values["beta"]}
    try:
        funcs = PolicyFunctions(**fv)
    except InvalidInput as exc:
        key = str(exc).split(" ", 1)[0]
        sec = next((s for s in ("prob", "alpha", "beta") if key in SCHEMA[s]), "prob")
        errors.append(_qualify(sec, exc))
    d = values["demand"]
    if d["kind"] == "linear":
        missing = [k for k in ("A", "B", "C") if d[k] is None]
        if missing:
            errors.extend(f"demand.{k}: required for linear demand" for k in missing)
        else:
            try:
                linear = LinearDemandParams(**{k: d[k] for k in LINEAR_KEYS})
            except InvalidInput as exc:
                errors.append(_qualify("demand", exc))
    try:
        dyn = AdjustmentConfig(**values["dynamics"])
    except InvalidInput as exc:
        errors.append(_qualify("dynamics", exc))
    if errors:
        raise ScenarioError(errors, source)
    return Scenario(name, prims, funcs, d["kind"], linear, dyn)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError([f"cannot read file: {exc.strerror}"], str(path)) from None
    return parse_scenario(text, path.stem, str(path))


def dump_scenario(sc: Scenario) -> str:
    """Inverse of :func:`parse_scenario` (round-trips exactly via repr)."""
    p, f, k = sc.prims, sc.funcs, sc.dynamics
    lines = [
        "[market]", f"q = {p.q!r}", f"c_bar = {p.c_bar!r}", f"c_bar_L = {p.c_bar_L!r}", f"R = {p.R!r}", f"G = {p.G!r}",
        "", "[prob]", f"P0 = {f.P0!r}", f"lambda_P = {f.lambda_P!r}",
        "", "[alpha]", f"a_R = {f.a_R!r}", f"lambda_alpha = {f.lambda_alpha!r}",
        "", "[beta]", f"b_beta = {f.b_beta!r}",
        "", "[demand]", f"kind = {sc.kind}",
    ]
    if sc.linear is not None:
        lines += [f"{key} = {getattr(sc.linear, key)!r}" for key in LINEAR_KEYS]
    lines += ["", "[dynamics]", f"kU = {k.kU!r}", f"kL = {k.kL!r}", f"dt = {k.dt!r}", f"horizon = {k.horizon!r}", ""]
    return "\n".join(lines)


# --- built-in scenarios ----------------------------------------------------------

def baseline() -> Scenario:
    """S0: closed-form equilibrium (4/3, 5/3)."""
    return Scenario("S0", MarketPrimitives(q=2.56, c_bar=1.0, c_bar_L=0.1, R=2.0, G=0.0),
                    PolicyFunctions(P0=0.4, lambda_P=1.0, a_R=0.05, lambda_alpha=0.5, b_beta=0.5))


def extended_baseline() -> Scenario:
    """SX: interior equilibrium of the endogenous-R model with R^E = 0.5."""
    return Scenario("SX", MarketPrimitives(q=1.5376, c_bar=1.0, c_bar_L=0.1, R=0.5, G=0.0),
                    PolicyFunctions(P0=0.4, lambda_P=1.0, a_R=0.3, lambda_alpha=0.0, b_beta=0.5))


def linear_baseline() -> Scenario:
    base = baseline()
    return Scenario("linear", base.prims, base.funcs, "linear", LinearDemandParams(A=2.0, B=1.0, C=0.5, m=0.1, n=0.2))


def random_scenario(rng: np.random.Generator, max_tries: int = 1000) -> Scenario:
    """Draw a specific-model scenario whose closed-form equilibrium satisfies
    Conditions 1-3 with some slack.

    Equilibrium prices do not depend on q, so q is drawn last with sqrt(q)
    placed strictly between p^UE and p^LE.
    """
    for _ in range(max_tries):
        prims = MarketPrimitives(q=1.0, c_bar=rng.uniform(0.5, 2.0), c_bar_L=rng.uniform(0.0, 0.5),
                                 R=rng.uniform(0.5, 3.0), G=rng.uniform(0.0, 2.0))
        funcs = PolicyFunctions(P0=rng.uniform(0.1, 0.9), lambda_P=rng.uniform(0.2, 2.0),
                                a_R=rng.uniform(0.0, 0.3), lambda_alpha=rng.uniform(0.0, 1.0),
                                b_beta=rng.uniform(0.1, 1.0))
        S = success_value(prims, funcs)
        alpha = eval_alpha(funcs, prims.R, prims.G)[0]
        # condition 3 at the closed form reads c_bar_L + alpha < 2 S; keep a margin
        if prims.c_bar_L + alpha > 1.8 * S:
            continue
        pU, pL = closed_form_prices(prims, funcs)
        root_q = pU + rng.uniform(0.1, 0.9) * (pL - pU)
        return Scenario("random", prims.replace(q=root_q * root_q), funcs)
    raise RuntimeError("could not draw a valid scenario")
