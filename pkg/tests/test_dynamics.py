import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bertrand_lab.demand import SpecificDemand
from bertrand_lab.dynamics import AdjustmentConfig, check_descent, liapunov_Z2, simulate
from bertrand_lab.equilibrium import closed_form_equilibrium, solve_newton
from bertrand_lab.errors import InvalidInput


def test_liapunov_values(s0):
    eq = closed_form_equilibrium(*s0)
    cfg = AdjustmentConfig()
    assert liapunov_Z2(cfg, eq, eq.prices) == 0.0
    assert liapunov_Z2(cfg, eq, (1.2, 1.5)) == pytest.approx(0.045556, abs=1e-6)
    z = liapunov_Z2(AdjustmentConfig(kU=2.0), eq, (1.2, 1.5))
    assert z == pytest.approx(2 * (4 / 3 - 1.2) ** 2 + (5 / 3 - 1.5) ** 2)


@pytest.mark.parametrize("kw", [dict(kU=0.0), dict(kL=-1.0), dict(dt=0.0), dict(horizon=float("inf"))])
def test_config_validation(kw):
    with pytest.raises(InvalidInput):
        AdjustmentConfig(**kw)


def test_baseline_converges_with_descent(s0):
    sys_ = SpecificDemand(*s0)
    tr = simulate(sys_, AdjustmentConfig(dt=0.01, init=(1.2, 1.5)))
    assert tr.converged
    assert tr.final == pytest.approx((4 / 3, 5 / 3), abs=1e-8)
    assert check_descent(tr).ok
    assert np.all(np.diff(tr.t) > 0) and np.all(tr.Z2 >= 0)


def test_start_at_equilibrium(s0):
    sys_ = SpecificDemand(*s0)
    tr = simulate(sys_, AdjustmentConfig(init=(4 / 3, 5 / 3)))
    assert len(tr) == 1 and tr.converged and tr.Z2[0] == pytest.approx(0.0, abs=1e-30)


def test_unequal_speeds_converge(s0):
    tr = simulate(SpecificDemand(*s0), AdjustmentConfig(kU=2.0, kL=0.5, init=(1.2, 1.5)))
    assert tr.converged and check_descent(tr).ok


def test_halving_dt_barely_moves_final(s0):
    sys_ = SpecificDemand(*s0)
    a = simulate(sys_, AdjustmentConfig(dt=0.01, init=(1.2, 1.5)))
    b = simulate(sys_, AdjustmentConfig(dt=0.005, init=(1.2, 1.5)))
    assert a.converged and b.converged
    assert max(abs(x - y) for x, y in zip(a.final, b.final)) < 1e-6


def test_check_descent_synthetic():
    assert check_descent([1.0, 0.5, 0.6, 0.1]) == (False, 2)
    assert check_descent([1.0, 0.5, 0.5]) == (False, 2)
    assert check_descent([1e-13, 1e-13, 0.0]).ok
    assert check_descent([3.0, 2.0, 1.0]).ok
    with pytest.raises(InvalidInput):
        check_descent([])


def test_linear_descent(linear_sc):
    sys_ = linear_sc.system()
    eq = solve_newton(sys_)
    tr = simulate(sys_, AdjustmentConfig(kU=1.0, kL=3.0, dt=0.01, init=(eq.p_UE * 1.4, eq.p_LE * 0.7)), eq)
    assert tr.converged and check_descent(tr).ok


def test_distance_to_nash_is_not_a_liapunov_function(s0):
    # with very unequal speeds the fixed-target distance can rise while the
    # reaction-gap measure keeps falling
    sys_ = SpecificDemand(*s0)
    eq = closed_form_equilibrium(*s0)
    rising = 0
    for init in [(0.7, 0.9), (2.0, 2.5), (2.0, 0.9), (0.7, 2.5), (1.0, 2.0)]:
        tr = simulate(sys_, AdjustmentConfig(kU=10.0, kL=1.0, dt=0.005, init=init), eq)
        assert check_descent(tr).ok
        rising += not check_descent(tr.Z2_nash).ok
    assert rising > 0


def test_csv_export(s0):
    tr = simulate(SpecificDemand(*s0), AdjustmentConfig(dt=0.1, horizon=0.2, init=(1.2, 1.5)))
    buf = io.StringIO()
    tr.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,pU,pL,Z2" and len(lines) == 4
    assert lines[1].split(",")[:3] == ["0", "1.2", "1.5"]


@given(st.floats(0.5, 1.5), st.floats(0.5, 1.5), st.sampled_from([0.1, 1.0, 10.0]), st.sampled_from([0.1, 1.0, 10.0]))
def test_specific_descent_property(u, v, kU, kL):
    from bertrand_lab.scenario import baseline
    sc = baseline()
    eq = closed_form_equilibrium(sc.prims, sc.funcs)
    cfg = AdjustmentConfig(kU, kL, dt=0.2 / max(kU, kL), horizon=5000.0, init=(eq.p_UE * u, eq.p_LE * v))
    tr = simulate(sc.system(), cfg, eq, tol=1e-7)
    assert tr.converged and check_descent(tr).ok and tr.Z2[-1] < 1e-12
