import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import root

from bertrand_lab.errors import NoInteriorSolution, SingularJacobian
from bertrand_lab.extended import (extended_derivative_triple, extended_jacobian, extended_residuals,
                                   extended_statics_cbarL, extended_statics_G, sign_flip_sweep, solve_extended)
from bertrand_lab.model import MarketPrimitives, PolicyFunctions, eval_alpha, eval_prob


def _raw_system(prims, funcs):
    """Oracle: the untransformed conditions, U's FOC, L's price FOC and L's
    R condition written from profit derivatives, solved by scipy."""
    P = eval_prob(funcs, prims.G)[0]

    def F(z):
        pU, pL, R = z
        alpha, a, _ = eval_alpha(funcs, R, prims.G)
        S = P * R
        cL = prims.c_bar + prims.c_bar_L + alpha
        XU = (pL - pU) / S
        dpiU = XU - (pU - prims.c_bar) / S
        dpiL = (1 - XU) - (pL - cL) / S
        # d pi^L / dR = -a X^L + (pL - cL) (pL - pU) / (P R^2)
        dpiR = -a * (1 - XU) + (pL - cL) * (pL - pU) / (P * R * R)
        return [dpiU, dpiL, dpiR]
    return F


def test_sx_values(sx):
    eq = solve_extended(*sx)
    assert (eq.R_E, eq.p_LE, eq.p_UE, eq.X_UE, eq.X_LE) == pytest.approx((0.5, 1.3, 1.15, 0.75, 0.25), abs=1e-10)
    assert max(eq.residuals) <= 1e-10
    assert eq.soc_ok and eq.soc_value < 0
    assert eq.conditions.all_hold
    sol = root(_raw_system(*sx), [1.12, 1.33, 0.55], tol=1e-14)
    assert sol.success
    assert sol.x == pytest.approx([eq.p_UE, eq.p_LE, eq.R_E], abs=1e-10)


def test_no_interior(s0, sx):
    with pytest.raises(NoInteriorSolution, match="P\\(G\\)"):
        solve_extended(*s0)
    p, f = sx
    with pytest.raises(NoInteriorSolution, match="boundary"):
        solve_extended(p.replace(c_bar_L=0.0), f)
    with pytest.raises(SingularJacobian):
        solve_extended(p, f.replace(a_R=0.2))


def test_jacobian(sx):
    jac = extended_jacobian(*sx)
    assert jac.detJ3 == pytest.approx(-0.2)
    assert jac.det_raw == pytest.approx(-0.2)
    assert jac.factor == pytest.approx(1.0)
    assert jac.matrix[1, 2] == pytest.approx(0.7) and jac.matrix[2, 2] == pytest.approx(-0.3)
    p, f = sx
    sing = extended_jacobian(p, f.replace(a_R=0.2))
    assert sing.detJ3 == 0.0 and sing.factor is None and sing.det_raw == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0.05, 1.0), st.floats(0.1, 3.0), st.floats(0.0, 2.0), st.floats(0.0, 1.0), st.floats(0.0, 3.0))
def test_raw_determinant_zero_set(P0, lam, aR, lam_a, G):
    p = MarketPrimitives(q=2.0, c_bar=1.0, c_bar_L=0.1, R=1.0, G=G)
    f = PolicyFunctions(P0=P0, lambda_P=lam, a_R=aR, lambda_alpha=lam_a, b_beta=1.0)
    jac = extended_jacobian(p, f)
    assert jac.det_raw == pytest.approx(jac.detJ3, abs=1e-12)


def test_statics_cbarL(sx):
    st_ = extended_statics_cbarL(*sx)
    assert st_.triple == pytest.approx((1.5, 3.0, 5.0), rel=1e-12)
    assert st_.triple_fd == pytest.approx(st_.triple, rel=1e-5)
    assert max(abs(v) for v in st_.dX_fd) < 1e-6
    assert st_.sign_case == "P<2a" and st_.signs_as_claimed
    # printed closed forms: the dp^U entry has the wrong sign, the rest agree
    assert st_.displayed_agrees == (False, True, True)


def test_demand_invariance_by_resolve(sx):
    p, f = sx
    assert solve_extended(p.replace(c_bar_L=0.11), f).X_UE == pytest.approx(0.75, abs=1e-12)


def test_statics_G(sx):
    p, f = sx
    f2 = f.replace(a_R=0.5, lambda_alpha=0.3)
    p2 = p.replace(G=0.4)
    st_ = extended_statics_G(p2, f2)
    assert st_.triple_fd == pytest.approx(st_.triple, rel=1e-5)


def test_sign_flip_sweep(sx):
    p, f = sx
    grid = np.linspace(0.05, 0.5, 46)
    sw = sign_flip_sweep(p, f, grid)
    assert sw["critical_a_R"] == pytest.approx(0.2)
    assert len(sw["flips"]) == 1
    lo, hi = sw["flips"][0]
    assert lo < 0.2 < hi and hi - lo <= 2 * (grid[1] - grid[0]) + 1e-12
    below = extended_derivative_triple(p, f.replace(a_R=0.1))
    assert np.all(below < 0)


def test_unknown_parameter(sx):
    with pytest.raises(ValueError):
        extended_derivative_triple(*sx, "R")


@given(st.floats(0.1, 0.9), st.floats(0.55, 3.0), st.floats(0.01, 0.5), st.floats(0.0, 1.0), st.floats(0.0, 1.5))
def test_interior_equilibria_properties(P0, ratio, cL, lam_a, G):
    f = PolicyFunctions(P0=P0, lambda_P=1.0, a_R=1.0, lambda_alpha=lam_a, b_beta=1.0)
    P = eval_prob(f, G)[0]
    # choose a_R so that 2 dalpha/dR = 2 ratio P (> P)
    f = f.replace(a_R=ratio * P * np.exp(lam_a * G))
    p = MarketPrimitives(q=4.0, c_bar=1.0, c_bar_L=cL, R=1.0, G=G)
    eq = solve_extended(p, f)
    assert max(eq.residuals) <= 1e-10
    assert eq.soc_ok
    F = _raw_system(p, f)
    assert np.allclose(F([eq.p_UE, eq.p_LE, eq.R_E]), 0.0, atol=1e-10)
    st_ = extended_statics_cbarL(p, f)
    assert st_.max_rel_gap() <= 1e-5
    assert max(abs(v) for v in st_.dX_fd) < 1e-6
    assert st_.signs_as_claimed
    assert all(abs(r) <= 1e-10 for r in extended_residuals(p, f, eq.p_UE, eq.p_LE, eq.R_E))
