import sys
import numpy as np
import pytest
from hypothesis import settings, strategies as st

from bertrand_lab.demand import LinearDemandParams
from bertrand_lab.scenario import baseline, extended_baseline, linear_baseline, random_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def scenario_from_seed(seed):
    return random_scenario(np.random.default_rng(seed))


@pytest.fixture
def s0():
    sc = baseline()
    return sc.prims, sc.funcs


@pytest.fixture
def sx():
    sc = extended_baseline()
    return sc.prims, sc.funcs


@pytest.fixture
def linear_sc():
    return linear_baseline()


@pytest.fixture
def lin_example():
    # A=2, B=1, C=0.5, m=n=0.1 with R=1, G=0 and c^U = 1
    from bertrand_lab.model import MarketPrimitives
    sc = baseline()
    prims = MarketPrimitives(q=2.56, c_bar=1.0, c_bar_L=0.1, R=1.0, G=0.0)
    return LinearDemandParams(A=2.0, B=1.0, C=0.5, m=0.1, n=0.1), prims, sc.funcs


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.LINES):
        terminalreporter.write_line(mod.LINES[n])
